#pragma once
// The disk benchmark sweep: cases x methods x evaluation orders, with table,
// convergence and error-map outputs.

#include <filesystem>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "linrec/precision.hpp"
#include "linrec/recovery.hpp"
#include "linrec/solvers.hpp"

namespace linrec {

struct BenchmarkConfig {
  std::vector<int> cases{0, 1, 2, 3};
  std::vector<Method> methods = all_methods();
  std::vector<int> eval_orders{3, 4, 5, 6, 7};
  int construction_order = 7;
  double scale = 1.0;
  Point eval_point{0.0, 0.0};
  std::filesystem::path output_dir = "results";
  int bandwidth = 15;
  double pinv_tolerance = 1e-10;
  FemNodeRule fem_node_rule = FemNodeRule::CentroidAverage;
  Precision precision = Precision::Quad;
  /// Radius for divergent order-3 diagonals; 0 makes those cells NaN.
  double singular_floor = 1e-16;
  int map_rings = 40;
  int map_angles = 64;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
  KernelSpec eval_spec(int order) const { return {order, 2, scale, singular_floor}; }
  KernelSpec construction_spec() const { return {construction_order, 2, scale, singular_floor}; }
  MethodConfig method_config(Method m) const;
};

/// INI file, section [benchmark]; missing keys keep their defaults:
///   cases = C0,C1,C2,C3          methods = FEMBary,...,LocNode
///   eval_orders = 3,4,5,6,7      construction_order = 7
///   scale = 1.0                  eval_point = 0,0
///   output_dir = results         bandwidth = 15
///   pinv_tolerance = 1e-10       fem_node_rule = centroid | consistent
///   precision = quad | double    singular_floor = 1e-16
///   map_rings = 40               map_angles = 64
BenchmarkConfig load_config(const std::filesystem::path& file);
void write_config(std::ostream& out, const BenchmarkConfig& config);

/// Reports ordered by (eval order, method, case) as listed in the config;
/// failed cells carry NaN and a reason. Deterministic.
std::vector<ErrorReport> run_benchmark(const BenchmarkConfig& config);
template <class T>
std::vector<ErrorReport> run_benchmark_as(const BenchmarkConfig& config);

/// Half the probe-grid fill distance of each case (the tables' h row).
std::map<int, double> table_h(std::span<const int> cases);

/// One table per evaluation order: rows = methods, columns = cases, then h.
void write_order_table(std::ostream& out, const BenchmarkConfig& config, std::span<const ErrorReport> reports,
                       int eval_order);
/// order_<m>.csv for each evaluation order plus reports.csv.
void write_tables(const BenchmarkConfig& config, std::span<const ErrorReport> reports);

struct ConvergenceStep {
  std::string method;
  int eval_order = 0;
  std::string from_case;
  std::string to_case;
  double ratio = 0.0;   // norm(from) / norm(to)
  double order = 0.0;   // log2(ratio)
};

/// Steps between consecutive cases present for each (method, order); cells
/// with NaN norms are skipped.
std::vector<ConvergenceStep> convergence_orders(std::span<const ErrorReport> reports);
void write_convergence_csv(std::ostream& out, std::span<const ConvergenceStep> steps);

/// Least-squares slope of log(norm) against log(h) over the finite cells of
/// one (method, order); NaN with fewer than two cells.
double fitted_order(std::span<const ErrorReport> reports, const std::string& method, int eval_order,
                    const std::map<int, double>& h);

struct MapSample {
  double x = 0.0;
  double y = 0.0;
  double norm = 0.0;
};

/// Pointwise worst-case error on a polar grid (origin, then map_rings rings
/// of map_angles points each, outermost on the circle).
std::vector<MapSample> error_map(const BenchmarkConfig& config, Method method, int case_level, int eval_order);
template <class T>
std::vector<MapSample> error_map_as(const BenchmarkConfig& config, Method method, int case_level, int eval_order);
void write_map_csv(std::ostream& out, std::span<const MapSample> samples);

#define LINREC_BENCHMARK_EXTERN(T)                                                          \
  extern template std::vector<ErrorReport> run_benchmark_as<T>(const BenchmarkConfig&);     \
  extern template std::vector<MapSample> error_map_as<T>(const BenchmarkConfig&, Method, int, int);

LINREC_BENCHMARK_EXTERN(double)
LINREC_BENCHMARK_EXTERN(Quad)
#undef LINREC_BENCHMARK_EXTERN

}  // namespace linrec
