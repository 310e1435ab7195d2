// linrec: mesh | run | orders | map
#include <chrono>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "linrec/benchmark.hpp"

using namespace linrec;

namespace {

struct Options {
  std::string config_file;
  std::vector<std::string> cases;
  std::vector<std::string> methods;
  std::vector<int> orders;
  std::vector<double> eval_point;
  std::string output_dir;
  std::string fem_node_rule;
  std::string precision;
  int construction_order = 0;
  double scale = 0;
  int bandwidth = 0;
  double pinv_tolerance = 0;
  double singular_floor = -1;
  int map_rings = 0;
  int map_angles = 0;
  bool with_c4 = false;
};

void add_config_flags(CLI::App* app, Options& o) {
  app->add_option("--config", o.config_file, "INI file with a [benchmark] section")->check(CLI::ExistingFile);
  app->add_option("--cases", o.cases, "cases, e.g. C0 C1 C2 C3")->delimiter(',');
  app->add_option("--methods", o.methods, "methods, e.g. FEMBary OptNode")->delimiter(',');
  app->add_option("--orders", o.orders, "Sobolev orders of the evaluation space (>= 3)")->delimiter(',');
  app->add_option("--construction-order", o.construction_order, "kernel order for HO, Kansa and LocNode");
  app->add_option("--scale", o.scale, "kernel scale");
  app->add_option("--eval-point", o.eval_point, "x y")->expected(2);
  app->add_option("--output-dir", o.output_dir, "directory for CSV output");
  app->add_option("--bandwidth", o.bandwidth, "LocNode stencil size");
  app->add_option("--pinv-tolerance", o.pinv_tolerance, "relative singular-value cut for Kansa");
  app->add_option("--fem-node-rule", o.fem_node_rule, "centroid | consistent");
  app->add_option("--precision", o.precision, "quad | double");
  app->add_option("--singular-floor", o.singular_floor, "radius for divergent order-3 diagonals (0 = NaN cells)");
  app->add_option("--map-rings", o.map_rings, "error map radial resolution");
  app->add_option("--map-angles", o.map_angles, "error map angular resolution");
  app->add_flag("--with-c4", o.with_c4, "append case C4");
}

BenchmarkConfig resolve(const Options& o) {
  BenchmarkConfig c = o.config_file.empty() ? BenchmarkConfig{} : load_config(o.config_file);
  if (!o.cases.empty()) {
    c.cases.clear();
    for (const auto& s : o.cases) c.cases.push_back(parse_case(s));
  }
  if (o.with_c4 && std::find(c.cases.begin(), c.cases.end(), 4) == c.cases.end()) c.cases.push_back(4);
  if (!o.methods.empty()) {
    c.methods.clear();
    for (const auto& s : o.methods) c.methods.push_back(parse_method(s));
  }
  if (!o.orders.empty()) c.eval_orders = o.orders;
  if (o.eval_point.size() == 2) c.eval_point = {o.eval_point[0], o.eval_point[1]};
  if (!o.output_dir.empty()) c.output_dir = o.output_dir;
  if (!o.fem_node_rule.empty()) {
    if (o.fem_node_rule == "centroid") c.fem_node_rule = FemNodeRule::CentroidAverage;
    else if (o.fem_node_rule == "consistent") c.fem_node_rule = FemNodeRule::ConsistentMass;
    else throw std::invalid_argument("--fem-node-rule must be centroid or consistent");
  }
  if (!o.precision.empty()) c.precision = parse_precision(o.precision);
  if (o.construction_order) c.construction_order = o.construction_order;
  if (o.scale) c.scale = o.scale;
  if (o.bandwidth) c.bandwidth = o.bandwidth;
  if (o.pinv_tolerance) c.pinv_tolerance = o.pinv_tolerance;
  if (o.singular_floor >= 0) c.singular_floor = o.singular_floor;
  if (o.map_rings) c.map_rings = o.map_rings;
  if (o.map_angles) c.map_angles = o.map_angles;
  c.validate();
  return c;
}

std::ofstream open_out(const std::filesystem::path& file) {
  std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file);
  if (!out) throw std::runtime_error("cannot write " + file.string());
  return out;
}

int cmd_mesh(const BenchmarkConfig& c) {
  std::cout << "case,n,m_bary,m_node,dof,fill_distance,h\n";
  for (int level : c.cases) {
    const DiskMesh mesh = disk_case(level);
    validate(mesh);
    auto nodes = open_out(c.output_dir / (case_name(level) + "_nodes.txt"));
    write_nodes(nodes, mesh);
    auto elems = open_out(c.output_dir / (case_name(level) + "_elements.txt"));
    write_elements(elems, mesh);
    const double fill = fill_distance(mesh);
    std::cout << case_name(level) << ',' << mesh.boundary_count() << ',' << mesh.triangles.size() << ','
              << mesh.vertices.size() << ',' << mesh.interior_count() << ',' << format_sci(fill) << ','
              << format_sci(fill / 2) << '\n';
  }
  return 0;
}

int cmd_run(const BenchmarkConfig& c) {
  const auto start = std::chrono::steady_clock::now();
  const auto reports = run_benchmark(c);
  write_tables(c, reports);
  for (int order : c.eval_orders) {
    std::cout << "# Sobolev order " << order << '\n';
    write_order_table(std::cout, c, reports, order);
  }
  const auto steps = convergence_orders(reports);
  auto conv = open_out(c.output_dir / "convergence.csv");
  write_convergence_csv(conv, steps);
  std::size_t failed = 0;
  for (const auto& r : reports)
    if (!r.reason.empty()) ++failed;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << reports.size() << " cells, " << failed << " failed, " << secs << " s; tables in "
            << c.output_dir.string() << '\n';
  return 0;
}

int cmd_orders(const BenchmarkConfig& c, const std::string& input) {
  const std::filesystem::path file = input.empty() ? c.output_dir / "reports.csv" : std::filesystem::path(input);
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read " + file.string());
  const auto reports = read_reports_csv(in);
  const auto steps = convergence_orders(reports);
  write_convergence_csv(std::cout, steps);
  std::vector<int> cases;
  for (const auto& r : reports) {
    const int level = parse_case(r.case_name);
    if (std::find(cases.begin(), cases.end(), level) == cases.end()) cases.push_back(level);
  }
  const auto h = table_h(cases);
  std::cout << "\nmethod,eval_order,fitted_order\n";
  std::vector<std::pair<std::string, int>> seen;
  for (const auto& r : reports) {
    std::pair<std::string, int> key{r.method, r.eval_order};
    if (std::find(seen.begin(), seen.end(), key) != seen.end()) continue;
    seen.push_back(key);
    std::cout << r.method << ',' << r.eval_order << ',' << format_sci(fitted_order(reports, r.method, r.eval_order, h))
              << '\n';
  }
  return 0;
}

int cmd_map(const BenchmarkConfig& c, const std::string& method, const std::string& level, int order) {
  const auto samples = error_map(c, parse_method(method), parse_case(level), order);
  const auto file = c.output_dir / ("map_" + method + "_" + level + "_" + std::to_string(order) + ".csv");
  auto out = open_out(file);
  write_map_csv(out, samples);
  std::cerr << samples.size() << " samples written to " << file.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Worst-case error benchmark of linear recovery methods for the Poisson problem on the unit disk"};
  app.require_subcommand(1);
  Options opt;
  std::string input, map_method = "OptBary", map_case = "C1";
  int map_order = 5;

  auto* mesh = app.add_subcommand("mesh", "write node/element files and print the discretization summary");
  auto* run = app.add_subcommand("run", "run the benchmark sweep and write the order tables");
  auto* orders = app.add_subcommand("orders", "convergence orders from a reports.csv");
  auto* map = app.add_subcommand("map", "pointwise error map on a polar grid");
  for (auto* sub : {mesh, run, orders, map}) add_config_flags(sub, opt);
  orders->add_option("--input", input, "reports.csv (default: <output-dir>/reports.csv)");
  map->add_option("--method", map_method, "method name");
  map->add_option("--case", map_case, "case name");
  map->add_option("--order", map_order, "Sobolev order of the evaluation space");

  CLI11_PARSE(app, argc, argv);
  try {
    const BenchmarkConfig config = resolve(opt);
    if (mesh->parsed()) return cmd_mesh(config);
    if (run->parsed()) return cmd_run(config);
    if (orders->parsed()) return cmd_orders(config, input);
    if (map->parsed()) return cmd_map(config, map_method, map_case, map_order);
  } catch (const std::exception& e) {
    std::cerr << "linrec: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
