#pragma once
// Benchmark PDE solvers for -Laplace u = f on the disk, u = g on the circle,
// each rewritten as a direct linear recovery row over the fixed data
// (f at X, g at Y).

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "linrec/kernel.hpp"
#include "linrec/linalg.hpp"
#include "linrec/mesh.hpp"
#include "linrec/recovery.hpp"

namespace linrec {

enum class Method { FEMBary, FEMNode, KansaBary, KansaNode, HOBary, HONode, OptBary, OptNode, LocNode };

/// Table order used throughout the benchmark.
const std::vector<Method>& all_methods();
std::string method_name(Method m);
Method parse_method(const std::string& name);
DataVariant method_variant(Method m);

/// f-data quadrature for FEMNode: the three nodal values averaged to the
/// centroid then a one-point rule (area/9 per vertex pair), or exact
/// integration of the linear interpolant (area/12 * (2,1,1)).
enum class FemNodeRule { CentroidAverage, ConsistentMass };

struct MethodConfig {
  Method method = Method::OptBary;
  KernelSpec construction{7, 2, 1.0, 0.0};
  int bandwidth = 15;
  double pinv_tolerance = 1e-10;
  FemNodeRule node_rule = FemNodeRule::CentroidAverage;
};

/// A u = B f + C g with u the values at unknown_points.
template <class T>
struct LinearRecoverySystem {
  Matrix<T> a;
  Matrix<T> b;
  Matrix<T> c;
  std::vector<Point> unknown_points;
};

/// -Laplace at each X point, then point evaluation at each Y point.
std::vector<Functional> data_functionals(const PointSets& sets);

template <class T>
class Recoverer {
 public:
  virtual ~Recoverer() = default;
  virtual RecoveryRow<T> row_at(Point x) const = 0;
  virtual FactorizationReport report() const = 0;
  virtual LinearRecoverySystem<T> system() const = 0;
  const std::vector<Functional>& functionals() const { return functionals_; }

 protected:
  std::vector<Functional> functionals_;
};

/// P1 finite elements on all vertices, Dirichlet values eliminated into C.
/// Off-vertex points combine the three vertex rows of the containing
/// triangle (nearest triangle's linear extension outside the polygon).
template <class T>
class FemRecoverer final : public Recoverer<T> {
 public:
  FemRecoverer(const DiskMesh& mesh, DataVariant variant, FemNodeRule rule = FemNodeRule::CentroidAverage);
  RecoveryRow<T> row_at(Point x) const override;
  FactorizationReport report() const override { return solver_ ? solver_->report() : FactorizationReport{}; }
  LinearRecoverySystem<T> system() const override;

 private:
  std::vector<T> vertex_row(std::size_t vertex) const;

  DiskMesh mesh_;
  PointSets sets_;
  std::vector<long> interior_slot_;   // vertex -> unknown index or -1
  std::vector<long> boundary_slot_;   // vertex -> boundary data index or -1
  SparseMatrix<T> a_;                 // interior x interior stiffness
  SparseMatrix<T> b_;                 // interior x |X|
  SparseMatrix<T> c_;                 // interior x |Y|
  std::unique_ptr<SparseSolver<T>> solver_;
  mutable std::mutex cache_mutex_;
  mutable std::map<std::size_t, std::vector<T>> cache_;
};

/// Symmetric (Hermite-Birkhoff) collocation with the functionals applied to
/// one kernel argument; coincides with optimal recovery in the construction
/// kernel's space.
template <class T>
class SymmetricCollocationRecoverer final : public Recoverer<T> {
 public:
  SymmetricCollocationRecoverer(std::vector<Functional> fs, const KernelSpec& construction,
                                std::shared_ptr<const Matrix<T>> collocation = nullptr);
  RecoveryRow<T> row_at(Point x) const override;
  FactorizationReport report() const override { return factor_.report(); }
  LinearRecoverySystem<T> system() const override;

 private:
  KernelSpec construction_;
  std::shared_ptr<const Matrix<T>> matrix_;
  SpdFactorization<T> factor_;
};

/// Unsymmetric (Kansa) collocation with translates K(., z), z in centers;
/// the collocation matrix is inverted by a truncated pseudoinverse, computed
/// in double (the truncation makes extended precision moot).
template <class T>
class KansaRecoverer final : public Recoverer<T> {
 public:
  KansaRecoverer(std::vector<Functional> fs, std::vector<Point> centers, const KernelSpec& construction,
                 double pinv_tolerance);
  RecoveryRow<T> row_at(Point x) const override;
  FactorizationReport report() const override { return report_; }
  LinearRecoverySystem<T> system() const override;

 private:
  KernelSpec construction_;
  std::vector<Functional> centers_;
  Matrix<double> collocation_;
  Matrix<double> pinv_;  // |centers| x N
  FactorizationReport report_;
};

/// Localized kernel finite differences: -Laplace u(x_j) ~ sum_k alpha_jk u(z_k)
/// over the bandwidth nearest vertices, alpha from optimal recovery of the
/// -Laplace functional in the construction space. Node data only.
template <class T>
class GfdRecoverer final : public Recoverer<T> {
 public:
  GfdRecoverer(const DiskMesh& mesh, const KernelSpec& construction, int bandwidth);
  RecoveryRow<T> row_at(Point x) const override;
  FactorizationReport report() const override { return solver_ ? solver_->report() : FactorizationReport{}; }
  LinearRecoverySystem<T> system() const override;

  /// Stencil vertex indices and weights of interior vertex `vertex`.
  const std::vector<std::size_t>& stencil(std::size_t vertex) const { return stencil_nodes_.at(vertex); }
  const std::vector<T>& stencil_weights(std::size_t vertex) const { return stencil_weights_.at(vertex); }

 private:
  std::vector<T> vertex_row(std::size_t vertex) const;

  DiskMesh mesh_;
  PointSets sets_;
  std::vector<long> interior_slot_;
  std::vector<long> boundary_slot_;
  std::map<std::size_t, std::vector<std::size_t>> stencil_nodes_;
  std::map<std::size_t, std::vector<T>> stencil_weights_;
  SparseMatrix<T> a_;
  SparseMatrix<T> c_;
  std::unique_ptr<SparseSolver<T>> solver_;  // factors A^T
  mutable std::mutex cache_mutex_;
  mutable std::map<std::size_t, std::vector<T>> cache_;
};

/// Optimal recovery in the evaluation space.
template <class T>
class OptimalMethodRecoverer final : public Recoverer<T> {
 public:
  OptimalMethodRecoverer(std::vector<Functional> fs, const KernelSpec& eval_spec,
                         std::shared_ptr<const Matrix<T>> gram = nullptr);
  RecoveryRow<T> row_at(Point x) const override { return impl_.row_at(x); }
  FactorizationReport report() const override { return impl_.report(); }
  LinearRecoverySystem<T> system() const override;

 private:
  std::shared_ptr<const Matrix<T>> gram_;
  OptimalRecoverer<T> impl_;
};

/// Builds the recoverer for a benchmark method. eval_spec is only used by
/// the Opt* methods; cache (optional) shares Gram matrices.
template <class T>
std::unique_ptr<Recoverer<T>> make_recoverer(const MethodConfig& config, const DiskMesh& mesh,
                                             const KernelSpec& eval_spec, GramCache<T>* cache = nullptr);

template <class T>
RecoveryRow<T> fem_recovery(const DiskMesh& mesh, DataVariant variant, Point x,
                            FemNodeRule rule = FemNodeRule::CentroidAverage) {
  return FemRecoverer<T>(mesh, variant, rule).row_at(x);
}

template <class T>
RecoveryRow<T> symmetric_collocation_recovery(const DiskMesh& mesh, DataVariant variant,
                                              const KernelSpec& construction, Point x) {
  return SymmetricCollocationRecoverer<T>(data_functionals(point_sets(mesh, variant)), construction).row_at(x);
}

template <class T>
RecoveryRow<T> kansa_recovery(const DiskMesh& mesh, DataVariant variant, const KernelSpec& construction,
                              std::vector<Point> centers, Point x, double pinv_tolerance = 1e-10) {
  return KansaRecoverer<T>(data_functionals(point_sets(mesh, variant)), std::move(centers), construction,
                           pinv_tolerance)
      .row_at(x);
}

template <class T>
RecoveryRow<T> gfd_local_recovery(const DiskMesh& mesh, const KernelSpec& construction, int bandwidth, Point x) {
  return GfdRecoverer<T>(mesh, construction, bandwidth).row_at(x);
}

/// Writes A.csv, B.csv, C.csv, unknowns.csv and row.csv into dir.
template <class T>
void dump_system(const std::filesystem::path& dir, const LinearRecoverySystem<T>& system, const RecoveryRow<T>& row);

#define LINREC_SOLVERS_EXTERN(T)                                                                        \
  extern template class FemRecoverer<T>;                                                                \
  extern template class SymmetricCollocationRecoverer<T>;                                               \
  extern template class KansaRecoverer<T>;                                                              \
  extern template class GfdRecoverer<T>;                                                                \
  extern template class OptimalMethodRecoverer<T>;                                                      \
  extern template std::unique_ptr<Recoverer<T>> make_recoverer<T>(const MethodConfig&, const DiskMesh&, \
                                                                  const KernelSpec&, GramCache<T>*);    \
  extern template void dump_system<T>(const std::filesystem::path&, const LinearRecoverySystem<T>&,     \
                                      const RecoveryRow<T>&);

LINREC_SOLVERS_EXTERN(double)
LINREC_SOLVERS_EXTERN(Quad)
#undef LINREC_SOLVERS_EXTERN

}  // namespace linrec
