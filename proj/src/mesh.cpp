#include "linrec/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace linrec {

std::size_t DiskMesh::boundary_count() const {
  return static_cast<std::size_t>(std::count(boundary_mask.begin(), boundary_mask.end(), true));
}

Point DiskMesh::barycenter(std::size_t t) const {
  const auto& tri = triangles[t];
  const Point a = vertices[tri[0]], b = vertices[tri[1]], c = vertices[tri[2]];
  return {(a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0};
}

double DiskMesh::area(std::size_t t) const {
  const auto& tri = triangles[t];
  return 0.5 * orient2d(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
}

DiskMesh base_disk() {
  DiskMesh m;
  m.vertices.push_back({0.0, 0.0});
  m.boundary_mask.push_back(false);
  for (int k = 0; k < 8; ++k) {
    const double angle = k * std::numbers::pi / 4.0;
    m.vertices.push_back({std::cos(angle), std::sin(angle)});
    m.boundary_mask.push_back(true);
  }
  for (std::size_t k = 0; k < 8; ++k) m.triangles.push_back({0, 1 + k, 1 + (k + 1) % 8});
  return m;
}

namespace {

using Edge = std::pair<std::size_t, std::size_t>;

Edge make_edge(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

}  // namespace

DiskMesh refine(const DiskMesh& mesh) {
  // edges in order of first appearance, with incidence counts
  std::map<Edge, std::size_t> edge_index;
  std::vector<Edge> edges;
  std::vector<int> incidence;
  for (const auto& tri : mesh.triangles)
    for (int e = 0; e < 3; ++e) {
      const Edge edge = make_edge(tri[e], tri[(e + 1) % 3]);
      auto [it, inserted] = edge_index.try_emplace(edge, edges.size());
      if (inserted) {
        edges.push_back(edge);
        incidence.push_back(0);
      }
      ++incidence[it->second];
    }

  DiskMesh out;
  out.level = mesh.level + 1;
  out.vertices = mesh.vertices;
  out.boundary_mask = mesh.boundary_mask;
  std::vector<std::size_t> midpoint(edges.size());
  for (std::size_t e = 0; e < edges.size(); ++e) {
    const auto [a, b] = edges[e];
    Point mid = 0.5 * (mesh.vertices[a] + mesh.vertices[b]);
    const bool on_boundary = incidence[e] == 1;
    if (on_boundary) {
      const double r = norm(mid);
      mid = {mid.x / r, mid.y / r};
    }
    midpoint[e] = out.vertices.size();
    out.vertices.push_back(mid);
    out.boundary_mask.push_back(on_boundary);
  }

  out.triangles.reserve(4 * mesh.triangles.size());
  for (const auto& tri : mesh.triangles) {
    const std::size_t a = tri[0], b = tri[1], c = tri[2];
    const std::size_t ab = midpoint[edge_index.at(make_edge(a, b))];
    const std::size_t bc = midpoint[edge_index.at(make_edge(b, c))];
    const std::size_t ca = midpoint[edge_index.at(make_edge(c, a))];
    out.triangles.push_back({a, ab, ca});
    out.triangles.push_back({ab, b, bc});
    out.triangles.push_back({ca, bc, c});
    out.triangles.push_back({ab, bc, ca});
  }
  return out;
}

DiskMesh disk_case(int level) {
  if (level < 0) throw std::invalid_argument("disk_case: level must be non-negative");
  DiskMesh m = base_disk();
  for (int l = 0; l < level; ++l) m = refine(m);
  return m;
}

std::string case_name(int level) { return "C" + std::to_string(level); }

int parse_case(const std::string& name) {
  if (name.size() >= 2 && (name[0] == 'C' || name[0] == 'c')) {
    std::size_t pos = 0;
    int level = -1;
    try {
      level = std::stoi(name.substr(1), &pos);
    } catch (const std::exception&) {
      level = -1;
    }
    if (level >= 0 && pos == name.size() - 1) return level;
  }
  throw std::invalid_argument("unknown case '" + name + "' (expected C0, C1, ...)");
}

void validate(const DiskMesh& mesh) {
  if (mesh.boundary_mask.size() != mesh.vertices.size())
    throw std::logic_error("mesh: boundary mask size differs from vertex count");
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    if (mesh.boundary_mask[i] && std::abs(norm(mesh.vertices[i]) - 1.0) > 1e-12)
      throw std::logic_error("mesh: boundary vertex " + std::to_string(i) + " is off the unit circle");
  std::map<Edge, int> incidence;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    for (auto v : mesh.triangles[t])
      if (v >= mesh.vertices.size()) throw std::logic_error("mesh: triangle index out of range");
    if (!(mesh.area(t) > 0)) throw std::logic_error("mesh: triangle " + std::to_string(t) + " has non-positive area");
    for (int e = 0; e < 3; ++e) ++incidence[make_edge(mesh.triangles[t][e], mesh.triangles[t][(e + 1) % 3])];
  }
  for (const auto& [edge, count] : incidence) {
    if (count > 2) throw std::logic_error("mesh: edge shared by more than two triangles");
    const bool both_boundary = mesh.boundary_mask[edge.first] && mesh.boundary_mask[edge.second];
    if (count == 1 && !both_boundary) throw std::logic_error("mesh: hanging interior edge");
  }
}

double fill_distance(std::span<const Point> vertices, int probe_density) {
  if (probe_density < 1) throw std::invalid_argument("fill_distance: probe density must be positive");
  if (vertices.empty()) return std::numeric_limits<double>::infinity();
  const int rings = probe_density;
  const int angles = probe_density;
  double worst = 0.0;
#pragma omp parallel for schedule(dynamic) reduction(max : worst)
  for (int i = 0; i <= rings; ++i) {
    const double r = static_cast<double>(i) / rings;
    const int count = (i == 0) ? 1 : angles;
    for (int j = 0; j < count; ++j) {
      const double theta = 2.0 * std::numbers::pi * j / angles;
      const Point p{r * std::cos(theta), r * std::sin(theta)};
      double best = std::numeric_limits<double>::infinity();
      for (const auto& v : vertices) best = std::min(best, distance(p, v));
      worst = std::max(worst, best);
    }
  }
  return worst;
}

double fill_distance(const DiskMesh& mesh, int probe_density) { return fill_distance(mesh.vertices, probe_density); }

std::string variant_name(DataVariant v) { return v == DataVariant::Bary ? "Bary" : "Node"; }

PointSets point_sets(const DiskMesh& mesh, DataVariant variant) {
  PointSets s;
  if (variant == DataVariant::Bary) {
    s.pde.reserve(mesh.triangles.size());
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) s.pde.push_back(mesh.barycenter(t));
  } else {
    s.pde = mesh.vertices;
  }
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i) {
    if (mesh.boundary_mask[i]) {
      s.boundary.push_back(mesh.vertices[i]);
      s.boundary_vertices.push_back(i);
    } else {
      s.interior.push_back(mesh.vertices[i]);
      s.interior_vertices.push_back(i);
    }
  }
  return s;
}

void write_nodes(std::ostream& out, const DiskMesh& mesh) {
  out << std::setprecision(17);
  for (std::size_t i = 0; i < mesh.vertices.size(); ++i)
    out << mesh.vertices[i].x << ' ' << mesh.vertices[i].y << ' ' << (mesh.boundary_mask[i] ? 1 : 0) << '\n';
}

void write_elements(std::ostream& out, const DiskMesh& mesh) {
  for (const auto& t : mesh.triangles) out << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
}

Location locate(const DiskMesh& mesh, Point p) {
  constexpr double tol = 1e-12;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const auto& tri = mesh.triangles[t];
    const Point a = mesh.vertices[tri[0]], b = mesh.vertices[tri[1]], c = mesh.vertices[tri[2]];
    const double total = orient2d(a, b, c);
    const double wa = orient2d(p, b, c) / total;
    const double wb = orient2d(a, p, c) / total;
    const double wc = orient2d(a, b, p) / total;
    if (wa >= -tol && wb >= -tol && wc >= -tol) return {t, {wa, wb, wc}};
  }
  throw std::out_of_range("locate: point outside the triangulation");
}

}  // namespace linrec
