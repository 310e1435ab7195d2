#include <doctest.h>

#include <cmath>

#include "linrec/kernel.hpp"
#include "linrec/linalg.hpp"
#include "linrec/mesh.hpp"
#include "linrec/solvers.hpp"
#include "test_util.hpp"

using namespace linrec;
using testutil::rel_err;

namespace {

Matrix<double> random_matrix(std::mt19937_64& gen, std::size_t r, std::size_t c) {
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix<double> m(r, c);
  for (auto& v : m.storage()) v = n(gen);
  return m;
}

Matrix<double> random_spd(std::mt19937_64& gen, std::size_t n) {
  const auto a = random_matrix(gen, n, n);
  auto s = matmul(a.transpose(), a);
  for (std::size_t i = 0; i < n; ++i) s(i, i) += 0.1;
  return s;
}

double max_abs_diff(const Matrix<double>& a, const Matrix<double>& b) {
  double d = 0;
  for (std::size_t k = 0; k < a.storage().size(); ++k) d = std::max(d, std::abs(a.storage()[k] - b.storage()[k]));
  return d;
}

double max_abs(const Matrix<double>& a) {
  double d = 0;
  for (double v : a.storage()) d = std::max(d, std::abs(v));
  return d;
}

std::vector<double> residual(const Matrix<double>& a, std::span<const double> x, std::span<const double> b) {
  auto r = matvec(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

}  // namespace

TEST_CASE("solve_spd on the identity returns the right-hand side") {
  const std::vector<double> b{1.5, -2.0, 3.25};
  const auto s = solve_spd(Matrix<double>::identity(3), std::span<const double>(b));
  CHECK(s.x == b);
  CHECK(s.report.method == FactorizationReport::Method::Spd);
  CHECK(s.report.jitter_used == 0.0);
  CHECK(s.report.condition_estimate == doctest::Approx(1.0));
}

TEST_CASE("duplicated functionals need jitter") {
  Matrix<double> g(2, 2, 0.25);
  try {
    const SpdFactorization<double> f(g);
    CHECK(f.report().method == FactorizationReport::Method::SpdJitter);
    CHECK(f.report().jitter_used > 0.0);
    CHECK(f.report().jitter_used <= 1e-6 * 0.25 * 1.0000001);
  } catch (const NotPositiveDefinite&) {
    CHECK(true);
  }
  Matrix<double> indefinite(2, 2);
  indefinite(0, 0) = 1;
  indefinite(1, 1) = -1;
  CHECK_THROWS_AS(SpdFactorization<double>{indefinite}, NotPositiveDefinite);
}

TEST_CASE("solve_spd residual is bounded by the condition estimate") {
  auto gen = testutil::rng(3);
  for (std::size_t n : {1u, 5u, 20u, 60u}) {
    const auto a = random_spd(gen, n);
    const auto b = random_matrix(gen, n, 1).storage();
    const auto s = solve_spd(a, std::span<const double>(b));
    CHECK(s.report.condition_estimate >= 1.0);
    CHECK(norm2<double>(residual(a, s.x, b)) <= 1e-8 * norm2<double>(b) * s.report.condition_estimate);
  }
}

TEST_CASE("condition estimate of a diagonal matrix") {
  Matrix<double> d(50, 50);
  for (std::size_t i = 0; i < 50; ++i) d(i, i) = double(i + 1) * 2;
  const SpdFactorization<double> f(d);
  CHECK(f.report().condition_estimate == doctest::Approx(50.0).epsilon(0.05));
}

TEST_CASE("C0 order-7 solve agrees with the SVD route") {
  const auto fs = data_functionals(point_sets(base_disk(), DataVariant::Bary));
  const KernelSpec spec{7, 2, 1.0};
  const auto g = gram_matrix<double>(spec, fs);
  const auto b = cross_vector<double>(spec, {0.0, 0.0}, fs);
  const auto chol = solve_spd(g, std::span<const double>(b));
  // the SVD oracle runs in binary128: in double its own error is ~cond * eps
  const auto bq = cross_vector<Quad>(spec, {0.0, 0.0}, fs);
  const auto svd = pinv_apply(gram_matrix<Quad>(spec, fs), 1e-30, std::span<const Quad>(bq));
  for (std::size_t i = 0; i < b.size(); ++i) CHECK(rel_err(chol.x[i], to_double(svd.x[i])) < 1e-9);
}

TEST_CASE("pinv_apply of an orthogonal matrix is the transpose") {
  auto gen = testutil::rng(5);
  // Q from the SVD of a random matrix
  const auto q = svd_jacobi(random_matrix(gen, 8, 8), false).u;
  const auto b = random_matrix(gen, 8, 1).storage();
  const auto x = pinv_apply(q, 1e-12, std::span<const double>(b)).x;
  const auto expect = matvec_transposed(q, std::span<const double>(b));
  for (std::size_t i = 0; i < 8; ++i) CHECK(x[i] == doctest::Approx(expect[i]).epsilon(1e-13));
}

TEST_CASE("pinv_apply of a rank-one matrix") {
  const std::vector<double> u{1.0, 2.0, -1.0}, v{0.5, -1.0, 3.0, 2.0};
  Matrix<double> a(3, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) a(i, j) = u[i] * v[j];
  const std::vector<double> b{2.0, 4.0, -2.0};  // = 2 u
  const auto s = pinv_apply(a, 1e-10, std::span<const double>(b));
  CHECK(s.report.truncated_rank == 1);
  const double uu = 6.0, vv = 14.25, ub = 12.0;
  for (std::size_t j = 0; j < 4; ++j) CHECK(s.x[j] == doctest::Approx(v[j] / vv * ub / uu).epsilon(1e-13));
}

TEST_CASE("Moore-Penrose identities on random matrices") {
  auto gen = testutil::rng(17);
  std::uniform_int_distribution<std::size_t> dim(1, 12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t r = dim(gen), c = dim(gen);
    auto a = random_matrix(gen, r, c);
    if (trial % 5 == 0 && c > 1)  // rank-deficient: duplicate a column
      for (std::size_t i = 0; i < r; ++i) a(i, c - 1) = a(i, 0);
    const auto p = pseudoinverse(a, 1e-12).x;
    CHECK(max_abs_diff(matmul(matmul(a, p), a), a) <= 1e-9 * std::max(1.0, max_abs(a)));
    CHECK(max_abs_diff(matmul(matmul(p, a), p), p) <= 1e-9 * std::max(1.0, max_abs(p)));
    const auto ap = matmul(a, p), pa = matmul(p, a);
    CHECK(max_abs_diff(ap, ap.transpose()) <= 1e-9);
    CHECK(max_abs_diff(pa, pa.transpose()) <= 1e-9);
  }
}

TEST_CASE("Kansa C1 node system: truncated pseudoinverse is a least-squares solution") {
  const DiskMesh mesh = disk_case(1);
  const auto fs = data_functionals(point_sets(mesh, DataVariant::Node));
  std::vector<Functional> centers;
  for (const Point& v : mesh.vertices) centers.push_back(Functional::evaluation(v));
  const KernelSpec spec{7, 2, 1.0};
  const auto a = cross_matrix<double>(spec, fs, centers);
  // data of u = 1 - x^2 - y^2: f = 4, g = 0
  std::vector<double> b(fs.size());
  for (std::size_t i = 0; i < fs.size(); ++i) b[i] = fs[i].laplacians() ? 4.0 : 0.0;
  const auto x = pinv_apply(a, 1e-10, std::span<const double>(b)).x;
  const double res = norm2<double>(residual(a, x, b));

  // normal-equations oracle in binary128
  const auto aq = a.cast<Quad>();
  const auto ata = matmul(aq.transpose(), aq);
  std::vector<Quad> bq(b.begin(), b.end());
  const auto atb = matvec_transposed(aq, std::span<const Quad>(bq));
  const auto xq = SpdFactorization<Quad>(ata, false).solve(atb);
  auto rq = matvec(aq, std::span<const Quad>(xq));
  for (std::size_t i = 0; i < rq.size(); ++i) rq[i] -= bq[i];
  const double optimum = to_double(norm2<Quad>(rq));
  CHECK(res <= optimum + 1e-10 * norm2<double>(b));
}

TEST_CASE("parallel kernels reproduce the serial references exactly") {
  auto gen = testutil::rng(23);
  const auto spd = random_spd(gen, 70);
  auto l1 = spd, l2 = spd;
  REQUIRE(cholesky_serial(l1));
  REQUIRE(cholesky(l2));
  CHECK(l1.storage() == l2.storage());
  auto q1 = spd.cast<Quad>(), q2 = spd.cast<Quad>();
  REQUIRE(cholesky_serial(q1));
  REQUIRE(cholesky(q2));
  CHECK(q1.storage() == q2.storage());

  const auto a = random_matrix(gen, 30, 17);
  const auto s1 = svd_jacobi(a, false), s2 = svd_jacobi(a, true);
  CHECK(s1.singular == s2.singular);
  CHECK(s1.u.storage() == s2.u.storage());
  CHECK(s1.v.storage() == s2.v.storage());
}

TEST_CASE("svd reconstructs the matrix with descending singular values") {
  auto gen = testutil::rng(29);
  const auto a = random_matrix(gen, 9, 6);
  const auto s = svd_jacobi(a);
  for (std::size_t k = 1; k < s.singular.size(); ++k) CHECK(s.singular[k - 1] >= s.singular[k]);
  Matrix<double> us = s.u;
  for (std::size_t i = 0; i < us.rows(); ++i)
    for (std::size_t k = 0; k < us.cols(); ++k) us(i, k) *= s.singular[k];
  CHECK(max_abs_diff(matmul(us, s.v.transpose()), a) < 1e-12);
}

TEST_CASE("sparse solver matches a dense solve") {
  Triplets<double> t{4, 4, {}};
  const double vals[4][4] = {{4, -1, 0, 0}, {-1, 4, -1, 0}, {0, -1, 4, -1}, {0, 0, -1, 3}};
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (vals[i][j] != 0) t.add(i, j, vals[i][j]);
  const auto sparse = t.build();
  const auto dense = to_dense(sparse);
  const std::vector<double> b{1, 2, 3, 4};
  const SparseSolver<double> solver(sparse);
  const auto x1 = solver.solve(b);
  const auto x2 = solve_spd(dense, std::span<const double>(b)).x;
  for (std::size_t i = 0; i < 4; ++i) CHECK(x1[i] == doctest::Approx(x2[i]).epsilon(1e-14));
  CHECK(solver.report().method == FactorizationReport::Method::SparseLu);
  CHECK(solver.report().condition_estimate >= 1.0);

  Triplets<double> sing{2, 2, {}};
  sing.add(0, 0, 1.0);
  sing.add(1, 0, 1.0);
  CHECK_THROWS_AS(SparseSolver<double>{sing.build()}, SingularSystem);
}

TEST_CASE("factorization report names") {
  CHECK(method_name(FactorizationReport::Method::Spd) == "spd");
  CHECK(method_name(FactorizationReport::Method::SpdJitter) == "spd+jitter");
  CHECK(method_name(FactorizationReport::Method::Svd) == "svd");
}
