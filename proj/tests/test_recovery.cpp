#include <doctest.h>

#include <cmath>
#include <sstream>

#include "linrec/recovery.hpp"
#include "linrec/solvers.hpp"
#include "test_util.hpp"

using namespace linrec;
using testutil::rel_err;

namespace {

// tabulated values carry four significant digits
constexpr double kTableTol = 1e-3;

std::vector<Functional> case_functionals(int level, DataVariant v) {
  return data_functionals(point_sets(disk_case(level), v));
}

std::vector<Functional> boundary_evaluations(int level) {
  std::vector<Functional> fs;
  for (const Point& p : point_sets(disk_case(level), DataVariant::Node).boundary) fs.push_back(Functional::evaluation(p));
  return fs;
}

}  // namespace

TEST_CASE("zero weights give the norm of the point evaluation") {
  const KernelSpec spec{3, 2, 1.0, 1e-16};
  RecoveryRow<double> row{{0.0, 0.0}, case_functionals(0, DataVariant::Bary), {}};
  row.weights.assign(row.functionals.size(), 0.0);
  CHECK(error_norm(spec, row) == 0.5);
  for (int m = 4; m <= 7; ++m) {
    const KernelSpec s{m, 2, 1.0};
    CHECK(error_norm(s, row) == std::sqrt(kernel_diagonal<double>(s)));
  }
}

TEST_CASE("unit weight on the functional at x reproduces exactly") {
  const auto fs = boundary_evaluations(1);
  RecoveryRow<double> row{fs[0].point, fs, std::vector<double>(fs.size(), 0.0)};
  row.weights[0] = 1.0;
  CHECK(error_norm(KernelSpec{5, 2, 1.0}, row) == 0.0);
}

TEST_CASE("optimal recovery from the point evaluation itself") {
  const Point x{0.2, -0.4};
  const std::vector<Functional> fs{Functional::evaluation(x)};
  const KernelSpec spec{5, 2, 1.0};
  const auto row = optimal_recovery<double>(spec, x, fs);
  CHECK(row.weights[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(error_norm(spec, row) < 1e-7);
  CHECK(optimal_norm_direct<double>(spec, x, fs, row.weights) < 1e-7);
}

TEST_CASE("optimal recovery reproduces tabulated values") {
  {
    const auto fs = case_functionals(1, DataVariant::Node);
    const KernelSpec spec{7, 2, 1.0};
    const auto row = optimal_recovery<Quad>(spec, {0.0, 0.0}, fs);
    CHECK(rel_err(to_double(error_norm(spec, row)), 6.116e-6) < kTableTol);
  }
  {
    const auto fs = case_functionals(2, DataVariant::Bary);
    const KernelSpec spec{5, 2, 1.0};
    const auto row = optimal_recovery<double>(spec, {0.0, 0.0}, fs);
    CHECK(rel_err(error_norm(spec, row), 3.106e-5) < kTableTol);
  }
  {
    const auto fs = case_functionals(0, DataVariant::Bary);
    const KernelSpec spec{4, 2, 1.0};
    const auto row = optimal_recovery<double>(spec, {0.0, 0.0}, fs);
    CHECK(rel_err(optimal_norm_direct<double>(spec, {0.0, 0.0}, fs, row.weights), 2.163e-2) < kTableTol);
  }
}

TEST_CASE("direct and quadratic-form values agree at the optimum") {
  for (int level = 0; level <= 2; ++level)
    for (auto v : {DataVariant::Bary, DataVariant::Node})
      for (int m = 3; m <= 7; ++m) {
        const KernelSpec spec{m, 2, 1.0, 1e-16};
        const auto fs = case_functionals(level, v);
        FactorizationReport rep;
        const auto row = optimal_recovery<Quad>(spec, {0.0, 0.0}, fs, &rep);
        const double direct = to_double(optimal_norm_direct<Quad>(spec, {0.0, 0.0}, fs, row.weights));
        const double form = to_double(error_norm(spec, row));
        CAPTURE(level);
        CAPTURE(m);
        CHECK(std::abs(direct * direct - form * form) <= 1e-8 * to_double(kernel_diagonal<Quad>(spec)));
        CHECK(rep.condition_estimate >= 1.0);
      }
}

TEST_CASE("Lagrange property") {
  const KernelSpec spec5{5, 2, 1.0};
  const std::vector<Functional> single{Functional::evaluation({0.1, 0.1})};
  CHECK(lagrange_check<double>(spec5, single, lagrange_rows<double>(spec5, single)) < 1e-14);

  const auto boundary = boundary_evaluations(0);
  CHECK(lagrange_check<double>(spec5, boundary, lagrange_rows<double>(spec5, boundary)) <= 1e-8);

  auto gen = testutil::rng(41);
  std::uniform_real_distribution<double> u(-0.7, 0.7);
  std::vector<Functional> random;
  for (int i = 0; i < 10; ++i) random.push_back(Functional::evaluation({u(gen), u(gen)}));
  const KernelSpec spec4{4, 2, 1.0};
  CHECK(lagrange_check<double>(spec4, random, lagrange_rows<double>(spec4, random)) <= 1e-7);

  const auto mixed = case_functionals(0, DataVariant::Bary);
  CHECK_THROWS_AS(lagrange_check<double>(spec5, mixed, lagrange_rows<double>(spec5, mixed)), std::invalid_argument);
}

TEST_CASE("quadratic form is nonnegative for random weights") {
  const KernelSpec spec{5, 2, 1.0};
  const auto fs = case_functionals(1, DataVariant::Bary);
  const auto gram = gram_matrix<double>(spec, fs);
  const double diag = kernel_diagonal<double>(spec);
  auto gen = testutil::rng(43);
  std::normal_distribution<double> n(0.0, 0.05);
  for (int trial = 0; trial < 500; ++trial) {
    RecoveryRow<double> row{{0.0, 0.0}, fs, std::vector<double>(fs.size())};
    for (auto& w : row.weights) w = n(gen);
    CHECK(error_quadratic_form(spec, row, gram).raw() >= -1e-10 * diag);
  }
}

TEST_CASE("perturbing optimal weights never lowers the norm") {
  auto gen = testutil::rng(47);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int level = 0; level <= 2; ++level) {
    const KernelSpec spec{5, 2, 1.0};
    const auto fs = case_functionals(level, DataVariant::Bary);
    const auto gram = gram_matrix<Quad>(spec, fs);
    const auto best = optimal_recovery<Quad>(spec, {0.0, 0.0}, fs);
    const Quad best_norm = error_norm(spec, best, gram);
    for (int trial = 0; trial < 100; ++trial) {
      auto row = best;
      std::vector<double> d(fs.size());
      for (auto& v : d) v = n(gen);
      const double len = norm2<double>(d);
      for (std::size_t i = 0; i < d.size(); ++i) row.weights[i] += Quad(1e-3 * d[i] / len);
      CHECK(error_norm(spec, row, gram) >= best_norm);
    }
  }
}

TEST_CASE("duplicated functionals are rejected or regularised") {
  const Point p{0.3, 0.3};
  const std::vector<Functional> twice{Functional::evaluation(p), Functional::evaluation(p)};
  const KernelSpec spec{5, 2, 1.0};
  try {
    FactorizationReport rep;
    const auto row = optimal_recovery<double>(spec, {0.0, 0.0}, twice, &rep);
    CHECK(rep.method == FactorizationReport::Method::SpdJitter);
    CHECK(rep.jitter_used > 0);
  } catch (const NotPositiveDefinite&) {
    CHECK(true);
  }
}

TEST_CASE("recovery row validation") {
  RecoveryRow<double> row{{0.0, 0.0}, {Functional::evaluation({1.0, 0.0})}, {}};
  CHECK_THROWS_AS(row.validate(), std::invalid_argument);
  row.weights = {std::nan("")};
  CHECK_THROWS_AS(row.validate(), std::invalid_argument);
  row.weights = {0.5};
  CHECK_NOTHROW(row.validate());
  CHECK(row.cast<Quad>().weights[0] == Quad(0.5));
}

TEST_CASE("error report CSV round trip") {
  std::vector<ErrorReport> reports{{"OptBary", "C2", 5, 3.10589e-5, 1.2e9, 0.0, 9.6e-10, ""},
                                   {"LocNode", "C4", 3, std::nan(""), std::nan(""), 1e-8, std::nan(""),
                                    "not positive definite, even with jitter"}};
  std::ostringstream out;
  write_reports_csv(out, reports);
  CHECK(out.str().rfind("method,case,eval_order,norm,condition,jitter,raw_square,reason\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_reports_csv(in);
  REQUIRE(back.size() == 2);
  CHECK(back[0].method == "OptBary");
  CHECK(back[0].case_name == "C2");
  CHECK(back[0].eval_order == 5);
  CHECK(back[0].norm == doctest::Approx(3.10589e-5).epsilon(1e-6));
  CHECK(std::isnan(back[1].norm));
  CHECK(back[1].reason == reports[1].reason);
  CHECK(format_sci(3.106e-5) == "3.10600e-05");
  CHECK(format_sci(std::nan("")) == "nan");
}

TEST_CASE("gram cache shares matrices per kernel and functional set") {
  GramCache<double> cache;
  const auto fs = case_functionals(0, DataVariant::Bary);
  const auto a = cache.get({5, 2, 1.0}, fs);
  const auto b = cache.get({5, 2, 1.0}, fs);
  CHECK(a.get() == b.get());
  const auto c = cache.get({6, 2, 1.0}, fs);
  CHECK(c.get() != a.get());
  CHECK(cache.size() == 2);
  CHECK(a->storage() == gram_matrix<double>({5, 2, 1.0}, fs).storage());
  cache.clear();
  CHECK(cache.size() == 0);
}
