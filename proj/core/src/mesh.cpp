#include "ace/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <stdexcept>

namespace ace {

namespace {

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

}  // namespace

Mesh::Mesh(std::vector<Point> vertices, std::vector<std::array<int, 3>> triangles,
           std::vector<BoundaryEdge> boundary_edges,
           std::vector<std::optional<BoundaryLabel>> vertex_labels, LabelScheme scheme)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      vertex_labels_(std::move(vertex_labels)),
      scheme_(scheme) {
  if (vertex_labels_.size() != vertices_.size()) {
    throw std::invalid_argument("Mesh: vertex label count does not match vertex count");
  }
  for (const auto& tri : triangles_) {
    const auto& a = vertices_.at(tri[0]);
    const auto& b = vertices_.at(tri[1]);
    const auto& c = vertices_.at(tri[2]);
    h_max_ = std::max({h_max_, distance(a, b), distance(b, c), distance(c, a)});
  }
}

double Mesh::signed_area(std::size_t t) const {
  const auto& tri = triangles_[t];
  const auto& a = vertices_[tri[0]];
  const auto& b = vertices_[tri[1]];
  const auto& c = vertices_[tri[2]];
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

Mesh build_structured_mesh(int n, LabelScheme scheme) {
  if (n < 1) {
    throw std::invalid_argument("build_structured_mesh: n must be >= 1");
  }
  const int side = n + 1;
  auto index = [side](int i, int j) { return j * side + i; };

  std::vector<Point> vertices;
  vertices.reserve(static_cast<std::size_t>(side) * side);
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      vertices.push_back({static_cast<double>(i) / n, static_cast<double>(j) / n});
    }
  }

  std::vector<std::array<int, 3>> triangles;
  triangles.reserve(2 * static_cast<std::size_t>(n) * n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = index(i, j);
      const int v10 = index(i + 1, j);
      const int v01 = index(i, j + 1);
      const int v11 = index(i + 1, j + 1);
      triangles.push_back({v00, v10, v11});
      triangles.push_back({v00, v11, v01});
    }
  }

  const bool cavity = scheme == LabelScheme::Cavity;
  const BoundaryLabel left = cavity ? BoundaryLabel::HotWall : BoundaryLabel::FullDirichlet;
  const BoundaryLabel right = cavity ? BoundaryLabel::ColdWall : BoundaryLabel::FullDirichlet;
  const BoundaryLabel horizontal = cavity ? BoundaryLabel::Adiabatic : BoundaryLabel::FullDirichlet;

  std::vector<BoundaryEdge> edges;
  edges.reserve(4 * static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    edges.push_back({{index(i, 0), index(i + 1, 0)}, horizontal});  // bottom
    edges.push_back({{index(n, i), index(n, i + 1)}, right});       // right
    edges.push_back({{index(i + 1, n), index(i, n)}, horizontal});  // top
    edges.push_back({{index(0, i + 1), index(0, i)}, left});        // left
  }

  std::vector<std::optional<BoundaryLabel>> vertex_labels(vertices.size());
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      auto& label = vertex_labels[index(i, j)];
      if (i == 0) {
        label = left;
      } else if (i == n) {
        label = right;
      } else if (j == 0 || j == n) {
        label = horizontal;
      }
    }
  }

  return Mesh(std::move(vertices), std::move(triangles), std::move(edges),
              std::move(vertex_labels), scheme);
}

double mesh_size(const Mesh& mesh) { return mesh.h_max(); }

void write_vtk(std::ostream& out, const Mesh& mesh, std::span<const VtkPointField> fields,
               const std::string& title) {
  const auto nv = mesh.num_vertices();
  const auto nt = mesh.num_triangles();
  out << "# vtk DataFile Version 3.0\n" << title << "\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << std::setprecision(17);
  out << "POINTS " << nv << " double\n";
  for (const auto& p : mesh.vertices()) {
    out << p.x << ' ' << p.y << " 0\n";
  }
  out << "CELLS " << nt << ' ' << 4 * nt << '\n';
  for (const auto& t : mesh.triangles()) {
    out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  }
  out << "CELL_TYPES " << nt << '\n';
  for (std::size_t t = 0; t < nt; ++t) {
    out << "5\n";
  }
  if (fields.empty()) {
    return;
  }
  out << "POINT_DATA " << nv << '\n';
  for (const auto& field : fields) {
    if (field.values.size() != nv * static_cast<std::size_t>(field.components)) {
      throw std::invalid_argument("write_vtk: field '" + field.name + "' has wrong length");
    }
    if (field.components == 1) {
      out << "SCALARS " << field.name << " double 1\nLOOKUP_TABLE default\n";
      for (double v : field.values) {
        out << v << '\n';
      }
    } else {
      out << "VECTORS " << field.name << " double\n";
      for (std::size_t i = 0; i < nv; ++i) {
        for (int c = 0; c < 3; ++c) {
          out << (c < field.components ? field.values[i * field.components + c] : 0.0)
              << (c == 2 ? '\n' : ' ');
        }
      }
    }
  }
}

}  // namespace ace
