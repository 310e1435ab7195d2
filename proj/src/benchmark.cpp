#include "linrec/benchmark.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace linrec {

namespace {

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> parts;
  boost::split(parts, s, boost::is_any_of(","));
  for (auto& p : parts) boost::trim(p);
  parts.erase(std::remove(parts.begin(), parts.end(), std::string()), parts.end());
  return parts;
}

template <class Seq, class Fn>
std::string join(const Seq& seq, Fn&& fn) {
  std::string out;
  for (const auto& v : seq) out += (out.empty() ? "" : ",") + fn(v);
  return out;
}

std::string rule_name(FemNodeRule r) { return r == FemNodeRule::CentroidAverage ? "centroid" : "consistent"; }

FemNodeRule parse_rule(const std::string& s) {
  if (s == "centroid") return FemNodeRule::CentroidAverage;
  if (s == "consistent") return FemNodeRule::ConsistentMass;
  throw std::invalid_argument("fem_node_rule must be centroid or consistent, got '" + s + "'");
}

}  // namespace

void BenchmarkConfig::validate() const {
  for (int c : cases)
    if (c < 0 || c > 4) throw std::invalid_argument("cases: only C0..C4 are defined");
  for (int m : eval_orders)
    if (m < 3) throw std::invalid_argument("eval_orders: orders must be at least 3");
  if (construction_order < 3) throw std::invalid_argument("construction_order must be at least 3");
  if (!KernelSpec{construction_order, 2, scale, 0.0}.admits(2))
    throw std::invalid_argument("construction_order must admit -Laplace applied on both kernel arguments (>= 4)");
  if (!(scale > 0)) throw std::invalid_argument("scale must be positive");
  if (bandwidth < 3) throw std::invalid_argument("bandwidth must be at least 3");
  if (!(pinv_tolerance > 0)) throw std::invalid_argument("pinv_tolerance must be positive");
  if (!(singular_floor >= 0)) throw std::invalid_argument("singular_floor must be non-negative");
  if (map_rings < 1 || map_angles < 1) throw std::invalid_argument("map_rings and map_angles must be positive");
}

MethodConfig BenchmarkConfig::method_config(Method m) const {
  MethodConfig mc;
  mc.method = m;
  mc.construction = construction_spec();
  mc.bandwidth = bandwidth;
  mc.pinv_tolerance = pinv_tolerance;
  mc.node_rule = fem_node_rule;
  return mc;
}

BenchmarkConfig load_config(const std::filesystem::path& file) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  pt::read_ini(file.string(), tree);
  BenchmarkConfig c;
  const auto& b = tree.get_child("benchmark", pt::ptree());
  for (const auto& [key, _] : b) {
    static const std::vector<std::string> known{
        "cases", "methods", "eval_orders", "construction_order", "scale", "eval_point", "output_dir", "bandwidth",
        "pinv_tolerance", "fem_node_rule", "precision", "singular_floor", "map_rings", "map_angles"};
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::invalid_argument("unknown config key '" + key + "'");
  }
  if (auto v = b.get_optional<std::string>("cases")) {
    c.cases.clear();
    for (const auto& s : split_list(*v)) c.cases.push_back(parse_case(s));
  }
  if (auto v = b.get_optional<std::string>("methods")) {
    c.methods.clear();
    for (const auto& s : split_list(*v)) c.methods.push_back(parse_method(s));
  }
  if (auto v = b.get_optional<std::string>("eval_orders")) {
    c.eval_orders.clear();
    for (const auto& s : split_list(*v)) c.eval_orders.push_back(std::stoi(s));
  }
  if (auto v = b.get_optional<std::string>("eval_point")) {
    const auto xy = split_list(*v);
    if (xy.size() != 2) throw std::invalid_argument("eval_point needs two coordinates");
    c.eval_point = {std::stod(xy[0]), std::stod(xy[1])};
  }
  c.construction_order = b.get("construction_order", c.construction_order);
  c.scale = b.get("scale", c.scale);
  c.output_dir = b.get("output_dir", c.output_dir.string());
  c.bandwidth = b.get("bandwidth", c.bandwidth);
  c.pinv_tolerance = b.get("pinv_tolerance", c.pinv_tolerance);
  if (auto v = b.get_optional<std::string>("fem_node_rule")) c.fem_node_rule = parse_rule(*v);
  if (auto v = b.get_optional<std::string>("precision")) c.precision = parse_precision(*v);
  c.singular_floor = b.get("singular_floor", c.singular_floor);
  c.map_rings = b.get("map_rings", c.map_rings);
  c.map_angles = b.get("map_angles", c.map_angles);
  c.validate();
  return c;
}

void write_config(std::ostream& out, const BenchmarkConfig& c) {
  out << "[benchmark]\n"
      << "cases = " << join(c.cases, case_name) << '\n'
      << "methods = " << join(c.methods, [](Method m) { return method_name(m); }) << '\n'
      << "eval_orders = " << join(c.eval_orders, [](int m) { return std::to_string(m); }) << '\n'
      << "construction_order = " << c.construction_order << '\n'
      << "scale = " << c.scale << '\n'
      << "eval_point = " << c.eval_point.x << ',' << c.eval_point.y << '\n'
      << "output_dir = " << c.output_dir.string() << '\n'
      << "bandwidth = " << c.bandwidth << '\n'
      << "pinv_tolerance = " << c.pinv_tolerance << '\n'
      << "fem_node_rule = " << rule_name(c.fem_node_rule) << '\n'
      << "precision = " << precision_name(c.precision) << '\n'
      << "singular_floor = " << c.singular_floor << '\n'
      << "map_rings = " << c.map_rings << '\n'
      << "map_angles = " << c.map_angles << '\n';
}

// ---------------------------------------------------------------- sweep

namespace {

bool is_optimal(Method m) { return m == Method::OptBary || m == Method::OptNode; }

template <class T>
struct Cell {
  Method method;
  int level;
  std::vector<Functional> functionals;
  std::optional<RecoveryRow<T>> row;  // fixed rows of the non-optimal methods
  FactorizationReport report;
  std::string failure;
};

template <class T>
void fill_report(ErrorReport& r, const QuadraticForm<T>& q, const FactorizationReport& f) {
  r.raw_square = to_double(q.raw());
  r.norm = to_double(clamp_sqrt(q.raw()));
  r.condition = f.condition_estimate;
  r.jitter = f.jitter_used;
}

}  // namespace

template <class T>
std::vector<ErrorReport> run_benchmark_as(const BenchmarkConfig& config) {
  config.validate();
  std::map<int, DiskMesh> meshes;
  for (int level : config.cases) meshes.emplace(level, disk_case(level));

  std::vector<Cell<T>> cells;
  for (Method m : config.methods)
    for (int level : config.cases)
      cells.push_back({m, level, data_functionals(point_sets(meshes.at(level), method_variant(m))), {}, {}, {}});

  GramCache<T> cache;
  const long n = long(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (long i = 0; i < n; ++i) {
    auto& cell = cells[std::size_t(i)];
    if (is_optimal(cell.method)) continue;
    try {
      const auto rec = make_recoverer<T>(config.method_config(cell.method), meshes.at(cell.level),
                                         config.construction_spec(), &cache);
      cell.row = rec->row_at(config.eval_point);
      cell.report = rec->report();
      cell.row->validate();
    } catch (const std::exception& e) {
      cell.failure = e.what();
      cell.row.reset();
    }
  }
  cache.clear();

  std::vector<ErrorReport> reports;
  for (int order : config.eval_orders) {
    const KernelSpec spec = config.eval_spec(order);
    std::vector<ErrorReport> block(cells.size());
#pragma omp parallel for schedule(dynamic, 1)
    for (long i = 0; i < n; ++i) {
      const auto& cell = cells[std::size_t(i)];
      ErrorReport& r = block[std::size_t(i)];
      r.method = method_name(cell.method);
      r.case_name = case_name(cell.level);
      r.eval_order = order;
      if (!cell.failure.empty()) {
        r.reason = cell.failure;
        continue;
      }
      try {
        const auto gram = cache.get(spec, cell.functionals);
        if (is_optimal(cell.method)) {
          const OptimalMethodRecoverer<T> opt(cell.functionals, spec, gram);
          const auto row = opt.row_at(config.eval_point);
          row.validate();
          fill_report(r, error_quadratic_form(spec, row, *gram), opt.report());
        } else {
          fill_report(r, error_quadratic_form(spec, *cell.row, *gram), cell.report);
        }
      } catch (const std::exception& e) {
        r.norm = std::nan("");
        r.reason = e.what();
      }
    }
    cache.clear();
    reports.insert(reports.end(), block.begin(), block.end());
  }
  return reports;
}

std::vector<ErrorReport> run_benchmark(const BenchmarkConfig& config) {
  return config.precision == Precision::Quad ? run_benchmark_as<Quad>(config) : run_benchmark_as<double>(config);
}

std::map<int, double> table_h(std::span<const int> cases) {
  std::map<int, double> h;
  for (int level : cases) h.emplace(level, fill_distance(disk_case(level)) / 2);
  return h;
}

void write_order_table(std::ostream& out, const BenchmarkConfig& config, std::span<const ErrorReport> reports,
                       int eval_order) {
  out << "method";
  for (int level : config.cases) out << ',' << case_name(level);
  out << '\n';
  for (Method m : config.methods) {
    out << method_name(m);
    for (int level : config.cases) {
      double v = std::nan("");
      for (const auto& r : reports)
        if (r.eval_order == eval_order && r.method == method_name(m) && r.case_name == case_name(level)) v = r.norm;
      out << ',' << format_sci(v);
    }
    out << '\n';
  }
  if (config.methods.empty()) return;
  const auto h = table_h(config.cases);
  out << 'h';
  for (int level : config.cases) out << ',' << format_sci(h.at(level));
  out << '\n';
}

void write_tables(const BenchmarkConfig& config, std::span<const ErrorReport> reports) {
  std::filesystem::create_directories(config.output_dir);
  for (int order : config.eval_orders) {
    std::ofstream out(config.output_dir / ("order_" + std::to_string(order) + ".csv"));
    if (!out) throw std::runtime_error("cannot write into " + config.output_dir.string());
    write_order_table(out, config, reports, order);
  }
  std::ofstream out(config.output_dir / "reports.csv");
  write_reports_csv(out, reports);
}

// ---------------------------------------------------------------- convergence

std::vector<ConvergenceStep> convergence_orders(std::span<const ErrorReport> reports) {
  // (method, order) in first-appearance order; cases sorted by level.
  std::vector<std::pair<std::string, int>> keys;
  for (const auto& r : reports) {
    std::pair<std::string, int> k{r.method, r.eval_order};
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) keys.push_back(k);
  }
  std::vector<ConvergenceStep> steps;
  for (const auto& [method, order] : keys) {
    std::vector<std::pair<int, double>> series;
    for (const auto& r : reports)
      if (r.method == method && r.eval_order == order && std::isfinite(r.norm))
        series.emplace_back(parse_case(r.case_name), r.norm);
    std::sort(series.begin(), series.end());
    for (std::size_t i = 0; i + 1 < series.size(); ++i) {
      const double ratio = series[i].second / series[i + 1].second;
      steps.push_back({method, order, case_name(series[i].first), case_name(series[i + 1].first), ratio,
                       std::log2(ratio)});
    }
  }
  return steps;
}

void write_convergence_csv(std::ostream& out, std::span<const ConvergenceStep> steps) {
  out << "method,eval_order,from,to,ratio,order\n";
  for (const auto& s : steps)
    out << s.method << ',' << s.eval_order << ',' << s.from_case << ',' << s.to_case << ',' << format_sci(s.ratio)
        << ',' << format_sci(s.order) << '\n';
}

double fitted_order(std::span<const ErrorReport> reports, const std::string& method, int eval_order,
                    const std::map<int, double>& h) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& r : reports) {
    if (r.method != method || r.eval_order != eval_order || !std::isfinite(r.norm) || r.norm <= 0) continue;
    const auto it = h.find(parse_case(r.case_name));
    if (it != h.end()) pts.emplace_back(std::log(it->second), std::log(r.norm));
  }
  if (pts.size() < 2) return std::nan("");
  double mx = 0, my = 0;
  for (const auto& [x, y] : pts) mx += x, my += y;
  mx /= double(pts.size());
  my /= double(pts.size());
  double sxy = 0, sxx = 0;
  for (const auto& [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
  return sxy / sxx;
}

// ---------------------------------------------------------------- maps

template <class T>
std::vector<MapSample> error_map_as(const BenchmarkConfig& config, Method method, int case_level, int eval_order) {
  config.validate();
  const DiskMesh mesh = disk_case(case_level);
  const KernelSpec spec = config.eval_spec(eval_order);
  const auto rec = make_recoverer<T>(config.method_config(method), mesh, spec);
  const Matrix<T> gram = gram_matrix<T>(spec, rec->functionals());

  std::vector<Point> points{{0.0, 0.0}};
  for (int i = 1; i <= config.map_rings; ++i)
    for (int j = 0; j < config.map_angles; ++j) {
      const double r = double(i) / config.map_rings;
      const double t = 2 * std::numbers::pi * j / config.map_angles;
      points.push_back({r * std::cos(t), r * std::sin(t)});
    }
  std::vector<MapSample> samples(points.size());
  const long n = long(points.size());
#pragma omp parallel for schedule(dynamic, 4)
  for (long i = 0; i < n; ++i) {
    const Point p = points[std::size_t(i)];
    double norm = std::nan("");
    try {
      norm = to_double(error_norm(spec, rec->row_at(p), gram));
    } catch (const std::exception&) {
    }
    samples[std::size_t(i)] = {p.x, p.y, norm};
  }
  return samples;
}

std::vector<MapSample> error_map(const BenchmarkConfig& config, Method method, int case_level, int eval_order) {
  return config.precision == Precision::Quad ? error_map_as<Quad>(config, method, case_level, eval_order)
                                             : error_map_as<double>(config, method, case_level, eval_order);
}

void write_map_csv(std::ostream& out, std::span<const MapSample> samples) {
  out << "x,y,norm\n";
  for (const auto& s : samples) out << format_sci(s.x) << ',' << format_sci(s.y) << ',' << format_sci(s.norm) << '\n';
}

template std::vector<ErrorReport> run_benchmark_as<double>(const BenchmarkConfig&);
template std::vector<ErrorReport> run_benchmark_as<Quad>(const BenchmarkConfig&);
template std::vector<MapSample> error_map_as<double>(const BenchmarkConfig&, Method, int, int);
template std::vector<MapSample> error_map_as<Quad>(const BenchmarkConfig&, Method, int, int);

}  // namespace linrec
