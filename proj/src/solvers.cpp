#include "linrec/solvers.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace linrec {

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::FEMBary, Method::FEMNode,  Method::KansaBary,
                                           Method::KansaNode, Method::HOBary, Method::HONode,
                                           Method::OptBary,  Method::OptNode, Method::LocNode};
  return methods;
}

std::string method_name(Method m) {
  switch (m) {
    case Method::FEMBary: return "FEMBary";
    case Method::FEMNode: return "FEMNode";
    case Method::KansaBary: return "KansaBary";
    case Method::KansaNode: return "KansaNode";
    case Method::HOBary: return "HOBary";
    case Method::HONode: return "HONode";
    case Method::OptBary: return "OptBary";
    case Method::OptNode: return "OptNode";
    case Method::LocNode: return "LocNode";
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (Method m : all_methods())
    if (method_name(m) == name) return m;
  throw std::invalid_argument("unknown method '" + name + "'");
}

DataVariant method_variant(Method m) {
  switch (m) {
    case Method::FEMBary:
    case Method::KansaBary:
    case Method::HOBary:
    case Method::OptBary: return DataVariant::Bary;
    default: return DataVariant::Node;
  }
}

std::vector<Functional> data_functionals(const PointSets& sets) {
  std::vector<Functional> fs;
  fs.reserve(sets.pde.size() + sets.boundary.size());
  for (const Point& p : sets.pde) fs.push_back(Functional::minus_laplacian(p));
  for (const Point& p : sets.boundary) fs.push_back(Functional::evaluation(p));
  return fs;
}

namespace {

void slots(const PointSets& sets, std::size_t n, std::vector<long>& interior, std::vector<long>& boundary) {
  interior.assign(n, -1);
  boundary.assign(n, -1);
  for (std::size_t k = 0; k < sets.interior_vertices.size(); ++k) interior[sets.interior_vertices[k]] = long(k);
  for (std::size_t k = 0; k < sets.boundary_vertices.size(); ++k) boundary[sets.boundary_vertices[k]] = long(k);
}

/// Containing triangle, or the triangle with the nearest barycenter (its
/// barycentric weights then extend the linear interpolant).
Location locate_or_nearest(const DiskMesh& mesh, Point p) {
  try {
    return locate(mesh, p);
  } catch (const std::out_of_range&) {
  }
  std::size_t best = 0;
  double best_d = distance(mesh.barycenter(0), p);
  for (std::size_t t = 1; t < mesh.triangles.size(); ++t) {
    const double d = distance(mesh.barycenter(t), p);
    if (d < best_d) best_d = d, best = t;
  }
  const auto& tri = mesh.triangles[best];
  const Point a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
  const double total = orient2d(a, b, c);
  return {best, {orient2d(p, b, c) / total, orient2d(a, p, c) / total, orient2d(a, b, p) / total}};
}

/// Row at x as the barycentric combination of nodal rows; exact vertex hits
/// use that vertex's row alone.
template <class T, class RowFn>
std::vector<T> interpolate_rows(const DiskMesh& mesh, Point x, std::size_t width, RowFn&& vertex_row) {
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    if (mesh.vertices[v] == x) return vertex_row(v);
  const Location loc = locate_or_nearest(mesh, x);
  std::vector<T> out(width, T(0));
  for (int k = 0; k < 3; ++k) {
    if (loc.weights[k] == 0.0) continue;
    const auto r = vertex_row(mesh.triangles[loc.triangle][k]);
    const T w(loc.weights[k]);
    for (std::size_t i = 0; i < width; ++i) out[i] += w * r[i];
  }
  return out;
}

template <class T>
Matrix<T> eye_block(std::size_t rows, std::size_t cols, std::size_t offset) {
  Matrix<T> m(rows, cols);
  for (std::size_t i = 0; i < cols; ++i) m(offset + i, i) = T(1);
  return m;
}

template <class T>
void write_matrix(const std::filesystem::path& file, const Matrix<T>& m) {
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  out.precision(17);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) out << (j ? "," : "") << to_double(m(i, j));
    out << '\n';
  }
}

}  // namespace

// ---------------------------------------------------------------- FEM

template <class T>
FemRecoverer<T>::FemRecoverer(const DiskMesh& mesh, DataVariant variant, FemNodeRule rule)
    : mesh_(mesh), sets_(point_sets(mesh, variant)) {
  this->functionals_ = data_functionals(sets_);
  slots(sets_, mesh_.vertices.size(), interior_slot_, boundary_slot_);
  const std::size_t ni = sets_.interior_vertices.size();
  Triplets<T> a{ni, ni, {}}, b{ni, sets_.pde.size(), {}}, c{ni, sets_.boundary.size(), {}};

  for (std::size_t t = 0; t < mesh_.triangles.size(); ++t) {
    const auto& tri = mesh_.triangles[t];
    const T area(mesh_.area(t));
    // grad lambda_i = (y_j - y_k, x_k - x_j) / (2 area), (i, j, k) cyclic
    T gx[3], gy[3];
    for (int i = 0; i < 3; ++i) {
      const Point pj = mesh_.vertices[tri[(i + 1) % 3]], pk = mesh_.vertices[tri[(i + 2) % 3]];
      gx[i] = (T(pj.y) - T(pk.y)) / (2 * area);
      gy[i] = (T(pk.x) - T(pj.x)) / (2 * area);
    }
    for (int i = 0; i < 3; ++i) {
      const long row = interior_slot_[tri[i]];
      if (row < 0) continue;
      for (int j = 0; j < 3; ++j) {
        const T kij = area * (gx[i] * gx[j] + gy[i] * gy[j]);
        if (interior_slot_[tri[j]] >= 0)
          a.add(std::size_t(row), std::size_t(interior_slot_[tri[j]]), kij);
        else
          c.add(std::size_t(row), std::size_t(boundary_slot_[tri[j]]), -kij);
      }
      if (variant == DataVariant::Bary) {
        b.add(std::size_t(row), t, area / 3);
      } else {
        for (int j = 0; j < 3; ++j) {
          const T w = rule == FemNodeRule::CentroidAverage ? area / 9 : area * (i == j ? 2 : 1) / 12;
          b.add(std::size_t(row), tri[j], w);
        }
      }
    }
  }
  a_ = a.build();
  b_ = b.build();
  c_ = c.build();
  if (ni > 0) solver_ = std::make_unique<SparseSolver<T>>(a_);
}

template <class T>
std::vector<T> FemRecoverer<T>::vertex_row(std::size_t vertex) const {
  const std::size_t nx = sets_.pde.size(), ny = sets_.boundary.size();
  std::vector<T> row(nx + ny, T(0));
  if (boundary_slot_[vertex] >= 0) {
    row[nx + std::size_t(boundary_slot_[vertex])] = T(1);
    return row;
  }
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(vertex); it != cache_.end()) return it->second;
  }
  // u_v = e_v^T A^{-1} (B f + C g); A is symmetric.
  std::vector<T> e(a_.rows(), T(0));
  e[std::size_t(interior_slot_[vertex])] = T(1);
  const auto w = solver_->solve(e);
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> wv(w.data(), Eigen::Index(w.size()));
  const Eigen::Matrix<T, Eigen::Dynamic, 1> rb = b_.transpose() * wv;
  const Eigen::Matrix<T, Eigen::Dynamic, 1> rc = c_.transpose() * wv;
  for (std::size_t i = 0; i < nx; ++i) row[i] = rb(Eigen::Index(i));
  for (std::size_t i = 0; i < ny; ++i) row[nx + i] = rc(Eigen::Index(i));
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(vertex, row);
  return row;
}

template <class T>
RecoveryRow<T> FemRecoverer<T>::row_at(Point x) const {
  return {x, this->functionals_,
          interpolate_rows<T>(mesh_, x, this->functionals_.size(), [this](std::size_t v) { return vertex_row(v); })};
}

template <class T>
LinearRecoverySystem<T> FemRecoverer<T>::system() const {
  return {to_dense(a_), to_dense(b_), to_dense(c_), sets_.interior};
}

// ---------------------------------------------------------------- symmetric collocation

template <class T>
SymmetricCollocationRecoverer<T>::SymmetricCollocationRecoverer(std::vector<Functional> fs,
                                                                const KernelSpec& construction,
                                                                std::shared_ptr<const Matrix<T>> collocation)
    : construction_(construction),
      matrix_(collocation ? std::move(collocation)
                          : std::make_shared<const Matrix<T>>(gram_matrix<T>(construction, fs))),
      factor_(*matrix_) {
  this->functionals_ = std::move(fs);
}

template <class T>
RecoveryRow<T> SymmetricCollocationRecoverer<T>::row_at(Point x) const {
  // u~(x) = K(x, .)^T A^{-1} [f; g]; A symmetric.
  const auto e = cross_vector<T>(construction_, x, this->functionals_);
  return {x, this->functionals_, factor_.solve(e)};
}

template <class T>
LinearRecoverySystem<T> SymmetricCollocationRecoverer<T>::system() const {
  const std::size_t n = this->functionals_.size();
  const std::size_t nx = std::size_t(std::count_if(this->functionals_.begin(), this->functionals_.end(),
                                                   [](const Functional& f) { return f.laplacians() > 0; }));
  std::vector<Point> centers;
  for (const auto& f : this->functionals_) centers.push_back(f.point);
  return {*matrix_, eye_block<T>(n, nx, 0), eye_block<T>(n, n - nx, nx), centers};
}

// ---------------------------------------------------------------- Kansa

template <class T>
KansaRecoverer<T>::KansaRecoverer(std::vector<Functional> fs, std::vector<Point> centers,
                                  const KernelSpec& construction, double pinv_tolerance)
    : construction_(construction) {
  this->functionals_ = std::move(fs);
  for (const Point& z : centers) centers_.push_back(Functional::evaluation(z));
  collocation_ = cross_matrix<double>(construction_, this->functionals_, centers_);
  auto p = pseudoinverse<double>(collocation_, pinv_tolerance);
  pinv_ = std::move(p.x);
  report_ = p.report;
}

template <class T>
RecoveryRow<T> KansaRecoverer<T>::row_at(Point x) const {
  // u~(x) = K(x, Z) pinv(A) [f; g]
  const auto e = cross_vector<double>(construction_, x, centers_);
  const auto w = matvec_transposed<double>(pinv_, e);
  RecoveryRow<double> row{x, this->functionals_, w};
  return row.template cast<T>();
}

template <class T>
LinearRecoverySystem<T> KansaRecoverer<T>::system() const {
  const std::size_t n = this->functionals_.size();
  const std::size_t nx = std::size_t(std::count_if(this->functionals_.begin(), this->functionals_.end(),
                                                   [](const Functional& f) { return f.laplacians() > 0; }));
  std::vector<Point> centers;
  for (const auto& z : centers_) centers.push_back(z.point);
  return {collocation_.template cast<T>(), eye_block<T>(n, nx, 0), eye_block<T>(n, n - nx, nx), centers};
}

// ---------------------------------------------------------------- local GFD

template <class T>
GfdRecoverer<T>::GfdRecoverer(const DiskMesh& mesh, const KernelSpec& construction, int bandwidth)
    : mesh_(mesh), sets_(point_sets(mesh, DataVariant::Node)) {
  if (bandwidth < 3) throw std::invalid_argument("GfdRecoverer: bandwidth must be at least 3");
  this->functionals_ = data_functionals(sets_);
  slots(sets_, mesh_.vertices.size(), interior_slot_, boundary_slot_);
  const std::size_t nv = mesh_.vertices.size();
  const std::size_t width = std::min<std::size_t>(std::size_t(bandwidth), nv);
  const std::size_t ni = sets_.interior_vertices.size();

  std::vector<std::size_t> order(nv);
  for (std::size_t j : sets_.interior_vertices) {
    const Point xj = mesh_.vertices[j];
    std::iota(order.begin(), order.end(), std::size_t(0));
    std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) {
      return distance(mesh_.vertices[p], xj) < distance(mesh_.vertices[q], xj);
    });
    std::vector<std::size_t> nodes(order.begin(), order.begin() + long(width));
    std::vector<Functional> evals;
    for (std::size_t k : nodes) evals.push_back(Functional::evaluation(mesh_.vertices[k]));
    const SpdFactorization<T> local(gram_matrix<T>(construction, evals), false);
    std::vector<T> rhs(width);
    const Functional op = Functional::minus_laplacian(xj);
    for (std::size_t k = 0; k < width; ++k) rhs[k] = apply_pair<T>(construction, op, evals[k]);
    stencil_weights_.emplace(j, local.solve(rhs));
    stencil_nodes_.emplace(j, std::move(nodes));
  }

  // Row j: sum_k alpha_jk u_k = f(x_j); we assemble A^T directly.
  Triplets<T> at{ni, ni, {}}, c{ni, sets_.boundary.size(), {}};
  for (std::size_t j : sets_.interior_vertices) {
    const auto& nodes = stencil_nodes_.at(j);
    const auto& alpha = stencil_weights_.at(j);
    const std::size_t row = std::size_t(interior_slot_[j]);
    for (std::size_t k = 0; k < nodes.size(); ++k) {
      if (interior_slot_[nodes[k]] >= 0)
        at.add(std::size_t(interior_slot_[nodes[k]]), row, alpha[k]);
      else
        c.add(row, std::size_t(boundary_slot_[nodes[k]]), -alpha[k]);
    }
  }
  a_ = SparseMatrix<T>(at.build().transpose());
  c_ = c.build();
  if (ni > 0) solver_ = std::make_unique<SparseSolver<T>>(SparseMatrix<T>(a_.transpose()));
}

template <class T>
std::vector<T> GfdRecoverer<T>::vertex_row(std::size_t vertex) const {
  const std::size_t nx = sets_.pde.size(), ny = sets_.boundary.size();
  std::vector<T> row(nx + ny, T(0));
  if (boundary_slot_[vertex] >= 0) {
    row[nx + std::size_t(boundary_slot_[vertex])] = T(1);
    return row;
  }
  {
    std::lock_guard lock(cache_mutex_);
    if (auto it = cache_.find(vertex); it != cache_.end()) return it->second;
  }
  // u_v = w^T (f_I + C g) with A^T w = e_v; f_I sits at the interior
  // vertices' positions in X (= all vertices).
  std::vector<T> e(a_.rows(), T(0));
  e[std::size_t(interior_slot_[vertex])] = T(1);
  const auto w = solver_->solve(e);
  for (std::size_t k = 0; k < sets_.interior_vertices.size(); ++k) row[sets_.interior_vertices[k]] = w[k];
  Eigen::Map<const Eigen::Matrix<T, Eigen::Dynamic, 1>> wv(w.data(), Eigen::Index(w.size()));
  const Eigen::Matrix<T, Eigen::Dynamic, 1> rc = c_.transpose() * wv;
  for (std::size_t i = 0; i < ny; ++i) row[nx + i] = rc(Eigen::Index(i));
  std::lock_guard lock(cache_mutex_);
  cache_.emplace(vertex, row);
  return row;
}

template <class T>
RecoveryRow<T> GfdRecoverer<T>::row_at(Point x) const {
  return {x, this->functionals_,
          interpolate_rows<T>(mesh_, x, this->functionals_.size(), [this](std::size_t v) { return vertex_row(v); })};
}

template <class T>
LinearRecoverySystem<T> GfdRecoverer<T>::system() const {
  const std::size_t ni = sets_.interior_vertices.size();
  Matrix<T> b(ni, sets_.pde.size());
  for (std::size_t k = 0; k < ni; ++k) b(k, sets_.interior_vertices[k]) = T(1);
  return {to_dense(a_), b, to_dense(c_), sets_.interior};
}

// ---------------------------------------------------------------- optimal

template <class T>
OptimalMethodRecoverer<T>::OptimalMethodRecoverer(std::vector<Functional> fs, const KernelSpec& eval_spec,
                                                  std::shared_ptr<const Matrix<T>> gram)
    : gram_(gram ? std::move(gram) : std::make_shared<const Matrix<T>>(gram_matrix<T>(eval_spec, fs))),
      impl_(eval_spec, fs, *gram_) {
  this->functionals_ = std::move(fs);
}

template <class T>
LinearRecoverySystem<T> OptimalMethodRecoverer<T>::system() const {
  const std::size_t n = this->functionals_.size();
  const std::size_t nx = std::size_t(std::count_if(this->functionals_.begin(), this->functionals_.end(),
                                                   [](const Functional& f) { return f.laplacians() > 0; }));
  std::vector<Point> centers;
  for (const auto& f : this->functionals_) centers.push_back(f.point);
  return {*gram_, eye_block<T>(n, nx, 0), eye_block<T>(n, n - nx, nx), centers};
}

// ---------------------------------------------------------------- factory

template <class T>
std::unique_ptr<Recoverer<T>> make_recoverer(const MethodConfig& config, const DiskMesh& mesh,
                                             const KernelSpec& eval_spec, GramCache<T>* cache) {
  const DataVariant variant = method_variant(config.method);
  auto fs = data_functionals(point_sets(mesh, variant));
  auto gram_for = [&](const KernelSpec& spec) -> std::shared_ptr<const Matrix<T>> {
    return cache ? cache->get(spec, fs) : nullptr;
  };
  switch (config.method) {
    case Method::FEMBary:
    case Method::FEMNode: return std::make_unique<FemRecoverer<T>>(mesh, variant, config.node_rule);
    case Method::KansaBary:
    case Method::KansaNode:
      return std::make_unique<KansaRecoverer<T>>(std::move(fs), mesh.vertices, config.construction,
                                                 config.pinv_tolerance);
    case Method::HOBary:
    case Method::HONode: {
      auto g = gram_for(config.construction);
      return std::make_unique<SymmetricCollocationRecoverer<T>>(std::move(fs), config.construction, std::move(g));
    }
    case Method::OptBary:
    case Method::OptNode: {
      auto g = gram_for(eval_spec);
      return std::make_unique<OptimalMethodRecoverer<T>>(std::move(fs), eval_spec, std::move(g));
    }
    case Method::LocNode: return std::make_unique<GfdRecoverer<T>>(mesh, config.construction, config.bandwidth);
  }
  throw std::invalid_argument("make_recoverer: unknown method");
}

template <class T>
void dump_system(const std::filesystem::path& dir, const LinearRecoverySystem<T>& system, const RecoveryRow<T>& row) {
  std::filesystem::create_directories(dir);
  write_matrix(dir / "A.csv", system.a);
  write_matrix(dir / "B.csv", system.b);
  write_matrix(dir / "C.csv", system.c);
  std::ofstream pts(dir / "unknowns.csv");
  pts.precision(17);
  pts << "x,y\n";
  for (const Point& p : system.unknown_points) pts << p.x << ',' << p.y << '\n';
  std::ofstream out(dir / "row.csv");
  out.precision(17);
  out << "functional,x,y,weight\n";
  for (std::size_t i = 0; i < row.weights.size(); ++i)
    out << (row.functionals[i].laplacians() ? "minus_laplacian" : "evaluation") << ',' << row.functionals[i].point.x
        << ',' << row.functionals[i].point.y << ',' << to_double(row.weights[i]) << '\n';
}

#define LINREC_SOLVERS_INSTANTIATE(T)                                                                     \
  template class FemRecoverer<T>;                                                                         \
  template class SymmetricCollocationRecoverer<T>;                                                        \
  template class KansaRecoverer<T>;                                                                       \
  template class GfdRecoverer<T>;                                                                         \
  template class OptimalMethodRecoverer<T>;                                                               \
  template std::unique_ptr<Recoverer<T>> make_recoverer<T>(const MethodConfig&, const DiskMesh&,          \
                                                           const KernelSpec&, GramCache<T>*);             \
  template void dump_system<T>(const std::filesystem::path&, const LinearRecoverySystem<T>&, const RecoveryRow<T>&);

LINREC_SOLVERS_INSTANTIATE(double)
LINREC_SOLVERS_INSTANTIATE(Quad)

}  // namespace linrec
