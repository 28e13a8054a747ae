#pragma once

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "ace/mesh.hpp"
#include "ace/quadrature.hpp"
#include "ace/sparse.hpp"

namespace ace {

enum class ProblemKind { Cavity, Mms };

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Affine element data: area and the constant gradients of the three
/// barycentric coordinates.
struct ElementGeometry {
  std::array<Point, 3> vertices;
  double area = 0.0;
  std::array<Vec2, 3> grad_lambda;

  Point map(double xi, double eta) const;
  /// Barycentric coordinates of a physical point.
  std::array<double, 3> barycentric(const Point& p) const;
};

/// P2 basis in barycentric form. Local nodes 0..2 are vertices, 3 is the
/// midpoint of edge (0,1), 4 of (1,2), 5 of (2,0).
std::array<double, 6> p2_values(const std::array<double, 3>& lambda);
std::array<Vec2, 6> p2_gradients(const ElementGeometry& geom, const std::array<double, 3>& lambda);
std::array<Vec2, 3> p1_gradients(const ElementGeometry& geom);

/// Constrained degrees of freedom with their prescribed values.
struct DirichletSet {
  std::vector<int> dofs;
  std::vector<double> values;
};

enum class ConvectionSpace { Velocity, Temperature };

/// Taylor-Hood P2-P1 velocity/pressure with P2 temperature on a mesh.
///
/// Velocity vectors are component-blocked: [u1 at all P2 nodes, u2 at all P2
/// nodes]. Pressure lives on mesh vertices.
class FeSystem {
 public:
  FeSystem(std::shared_ptr<const Mesh> mesh, ProblemKind kind);

  const Mesh& mesh() const { return *mesh_; }
  ProblemKind kind() const { return kind_; }

  int num_p2() const { return num_p2_; }
  int num_p1() const { return static_cast<int>(mesh_->num_vertices()); }
  int num_edges() const { return num_p2_ - num_p1(); }
  int num_velocity() const { return 2 * num_p2_; }
  int num_pressure() const { return num_p1(); }
  int num_temperature() const { return num_p2_; }
  int num_elements() const { return static_cast<int>(mesh_->num_triangles()); }

  const std::array<int, 6>& element_dofs(int e) const { return element_dofs_[e]; }
  const ElementGeometry& geometry(int e) const { return geometry_[e]; }
  const std::vector<Point>& p2_nodes() const { return p2_nodes_; }
  std::optional<BoundaryLabel> p2_label(int node) const { return p2_labels_[node]; }

  const DirichletSet& velocity_dirichlet() const { return velocity_dirichlet_; }
  /// Cavity: hot wall 1, cold wall 0. Mms: whole boundary, values zero
  /// (time-dependent data is supplied by the problem).
  const DirichletSet& temperature_dirichlet() const { return temperature_dirichlet_; }

  const std::shared_ptr<const SparsityPattern>& scalar_pattern() const { return scalar_pattern_; }
  const std::shared_ptr<const SparsityPattern>& vector_pattern() const { return vector_pattern_; }

  /// Position of local pair (a, b) of element e in the scalar P2 pattern.
  int scalar_position(int e, int a, int b) const { return scalar_positions_[36 * e + 6 * a + b]; }
  /// Position of scalar entry `pos` (row `row`) in vector block (c, d).
  int vector_position(int row, int pos, int c, int d) const;

  /// Boundary edges with their owning element and local edge index
  /// (0: nodes 0-1, 1: nodes 1-2, 2: nodes 2-0).
  struct BoundaryFace {
    int element;
    int local_edge;
    BoundaryLabel label;
  };
  const std::vector<BoundaryFace>& boundary_faces() const { return boundary_faces_; }

  /// Element containing p (with tolerance), or -1.
  int locate(const Point& p) const;
  /// Value of a P2 scalar field at a physical point.
  double evaluate_p2(std::span<const double> field, const Point& p) const;
  double evaluate_p2(std::span<const double> field, int element, const std::array<double, 3>& lambda) const;
  Vec2 gradient_p2(std::span<const double> field, int element, const std::array<double, 3>& lambda) const;
  /// Value of a P1 field at a physical point.
  double evaluate_p1(std::span<const double> field, const Point& p) const;

 private:
  std::shared_ptr<const Mesh> mesh_;
  ProblemKind kind_;
  int num_p2_ = 0;
  std::vector<std::array<int, 6>> element_dofs_;
  std::vector<ElementGeometry> geometry_;
  std::vector<Point> p2_nodes_;
  std::vector<std::optional<BoundaryLabel>> p2_labels_;
  DirichletSet velocity_dirichlet_;
  DirichletSet temperature_dirichlet_;
  std::shared_ptr<const SparsityPattern> scalar_pattern_;
  std::shared_ptr<const SparsityPattern> vector_pattern_;
  std::vector<int> scalar_positions_;
  std::vector<BoundaryFace> boundary_faces_;
};

FeSystem build_fe_system(std::shared_ptr<const Mesh> mesh, ProblemKind kind);

/// Assembled, immutable operators. Velocity operators share the vector
/// pattern and temperature operators the scalar pattern.
struct SparseOperatorSet {
  SparseMatrix M_u;   ///< velocity mass
  SparseMatrix K_u;   ///< velocity stiffness
  SparseMatrix GD;    ///< grad-div (div phi_i, div phi_j)
  SparseMatrix B;     ///< (q_i, div phi_j), pressure rows
  SparseMatrix Bt;    ///< transpose of B
  SparseMatrix M_p;   ///< pressure mass
  SparseMatrix M_T;   ///< P2 scalar mass
  SparseMatrix K_T;   ///< P2 scalar stiffness
  std::vector<double> pressure_weights;  ///< M_p times the constant one
};

SparseOperatorSet assemble_static_operators(const FeSystem& fe);

/// Skew-symmetric convection matrix N(w)_ij = b(w, phi_j, phi_i) for a P2
/// velocity field w. Velocity space: block diagonal on the vector pattern.
SparseMatrix assemble_convection(const FeSystem& fe, std::span<const double> w, ConvectionSpace space);

/// Scalar P2 convection matrix added into `values` (scalar pattern) scaled by alpha.
void add_scalar_convection(const FeSystem& fe, std::span<const double> w, double alpha,
                           std::span<double> values);

/// y = N(w) v for a scalar P2 field v, computed element by element.
std::vector<double> apply_scalar_convection(const FeSystem& fe, std::span<const double> w,
                                            std::span<const double> v);
/// y = N(w) v for a velocity field v (both components).
std::vector<double> apply_velocity_convection(const FeSystem& fe, std::span<const double> w,
                                              std::span<const double> v);

using VectorFunction = std::function<Vec2(double x, double y)>;
using ScalarFunction = std::function<double(double x, double y)>;

/// (f, phi_i) for a vector function, velocity layout.
std::vector<double> assemble_load(const FeSystem& fe, const VectorFunction& f,
                                  const TriangleRule& rule = triangle_rule_degree8());
/// (g, S_i) for a scalar function on the P2 temperature space.
std::vector<double> assemble_load(const FeSystem& fe, const ScalarFunction& g,
                                  const TriangleRule& rule = triangle_rule_degree8());

/// (xi T_h, phi_i) with xi = (0, 1): only the vertical component is nonzero.
std::vector<double> assemble_buoyancy(const FeSystem& fe, const SparseOperatorSet& ops,
                                      std::span<const double> temperature);

/// Row replacement with column elimination. Constrained rows become identity
/// rows; known values are moved to the right-hand side of free rows.
std::pair<SparseMatrix, std::vector<double>> apply_dirichlet(const SparseMatrix& matrix,
                                                             std::span<const double> rhs,
                                                             const DirichletSet& constraints);

/// Dirichlet elimination for one matrix and many right-hand sides with
/// possibly different prescribed values.
class DirichletEliminator {
 public:
  DirichletEliminator(const SparseMatrix& matrix, std::span<const int> constrained_dofs);

  const SparseMatrix& matrix() const { return matrix_; }
  /// Modifies rhs in place for the given prescribed values (one per dof).
  void apply(std::span<double> rhs, std::span<const double> values) const;

 private:
  SparseMatrix matrix_;
  std::vector<int> dofs_;
  std::vector<int> slot_of_dof_;
  struct Coupling {
    int row;
    int slot;
    double value;
  };
  std::vector<Coupling> couplings_;
};

/// Subtracts the M_p-weighted mean.
void center_pressure(const SparseOperatorSet& ops, std::span<double> p);
double pressure_mean(const SparseOperatorSet& ops, std::span<const double> p);

/// L2 norms via the consistent mass matrices.
double velocity_l2(const SparseOperatorSet& ops, std::span<const double> u);
double scalar_l2(const SparseOperatorSet& ops, std::span<const double> s);
double pressure_l2(const SparseOperatorSet& ops, std::span<const double> p);

/// Nodal interpolation.
std::vector<double> interpolate_velocity(const FeSystem& fe, const VectorFunction& f);
std::vector<double> interpolate_scalar(const FeSystem& fe, const ScalarFunction& f);
std::vector<double> interpolate_pressure(const FeSystem& fe, const ScalarFunction& f);

}  // namespace ace
