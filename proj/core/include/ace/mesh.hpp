#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace ace {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

enum class BoundaryLabel { HotWall, ColdWall, Adiabatic, FullDirichlet };

/// How boundary segments of the unit square are labeled.
///  - Cavity: x=0 hot, x=1 cold, y=0 and y=1 adiabatic. Corners belong to the
///    vertical walls.
///  - Mms: the whole boundary is Dirichlet.
enum class LabelScheme { Cavity, Mms };

struct BoundaryEdge {
  std::array<int, 2> vertices{};
  BoundaryLabel label = BoundaryLabel::Adiabatic;
};

/// Immutable triangulation of the unit square.
class Mesh {
 public:
  Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
       std::vector<BoundaryEdge> boundary_edges,
       std::vector<std::optional<BoundaryLabel>> vertex_labels, LabelScheme scheme);

  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  /// Boundary label of a vertex, or nullopt for interior vertices.
  std::optional<BoundaryLabel> vertex_label(int v) const { return vertex_labels_[v]; }
  LabelScheme scheme() const { return scheme_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }

  double h_max() const { return h_max_; }
  /// Signed area of triangle t (positive for counterclockwise orientation).
  double signed_area(std::size_t t) const;

 private:
  std::vector<Point> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<std::optional<BoundaryLabel>> vertex_labels_;
  LabelScheme scheme_;
  double h_max_ = 0.0;
};

/// n x n squares, each split by its bottom-left to top-right diagonal.
/// Throws std::invalid_argument for n == 0.
Mesh build_structured_mesh(int n, LabelScheme scheme);

/// Longest triangle edge over the mesh.
double mesh_size(const Mesh& mesh);

/// A named nodal field for VTK export, one value per mesh vertex.
struct VtkPointField {
  std::string name;
  std::span<const double> values;
  int components = 1;
};

/// Legacy ASCII VTK unstructured grid.
void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const VtkPointField> fields,
               const std::string& title = "ace");

}  // namespace ace
