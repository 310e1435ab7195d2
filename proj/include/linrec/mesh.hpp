#pragma once
// Unit-disk triangulations: 8 sector triangles around the origin, refined by
// edge halving with boundary midpoints projected back onto the circle.

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "linrec/geometry.hpp"

namespace linrec {

using Triangle = std::array<std::size_t, 3>;

struct DiskMesh {
  std::vector<Point> vertices;
  std::vector<Triangle> triangles;  // counterclockwise
  std::vector<bool> boundary_mask;
  int level = 0;

  std::size_t boundary_count() const;
  std::size_t interior_count() const { return vertices.size() - boundary_count(); }
  Point barycenter(std::size_t t) const;
  double area(std::size_t t) const;
};

/// 9 vertices (origin + 8 on the circle at angles k*pi/4), 8 triangles.
DiskMesh base_disk();

/// Regular 1-to-4 refinement. New vertices follow the parents in order of
/// their parent edge's first appearance (triangle order, edges ab, bc, ca).
DiskMesh refine(const DiskMesh& mesh);

/// Case C<level>: base_disk refined `level` times.
DiskMesh disk_case(int level);

std::string case_name(int level);
/// "C3" -> 3; throws std::invalid_argument on anything else.
int parse_case(const std::string& name);

/// Throws std::logic_error describing the first violated structural invariant
/// (boundary on the circle, positive areas, conforming edges).
void validate(const DiskMesh& mesh);

/// sup over a polar probe grid of the unit disk (probe_density rings x
/// probe_density angles) of the distance to the nearest vertex.
double fill_distance(std::span<const Point> vertices, int probe_density = 512);
double fill_distance(const DiskMesh& mesh, int probe_density = 512);

enum class DataVariant { Bary, Node };
std::string variant_name(DataVariant v);

struct PointSets {
  std::vector<Point> pde;        // X: f-data points
  std::vector<Point> boundary;   // Y: Dirichlet points
  std::vector<Point> interior;   // Z: interior vertices (unknowns)
  std::vector<std::size_t> boundary_vertices;
  std::vector<std::size_t> interior_vertices;
};

/// Bary: X = barycenters. Node: X = all vertices including boundary ones.
PointSets point_sets(const DiskMesh& mesh, DataVariant variant);

/// One line per vertex "x y boundary_flag" and per triangle "i j k".
void write_nodes(std::ostream& out, const DiskMesh& mesh);
void write_elements(std::ostream& out, const DiskMesh& mesh);

/// Locates a triangle containing p; returns barycentric weights. Throws
/// std::out_of_range if p lies outside the triangulated region.
struct Location {
  std::size_t triangle = 0;
  std::array<double, 3> weights{};
};
Location locate(const DiskMesh& mesh, Point p);

}  // namespace linrec
