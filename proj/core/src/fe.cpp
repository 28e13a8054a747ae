#include "ace/fe.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace ace {

namespace {

constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{0, 1}, {1, 2}, {2, 0}}};

ElementGeometry make_geometry(const Point& a, const Point& b, const Point& c) {
  ElementGeometry g;
  g.vertices = {a, b, c};
  const double j00 = b.x - a.x;
  const double j01 = c.x - a.x;
  const double j10 = b.y - a.y;
  const double j11 = c.y - a.y;
  const double det = j00 * j11 - j01 * j10;
  g.area = 0.5 * det;
  g.grad_lambda[1] = {j11 / det, -j01 / det};
  g.grad_lambda[2] = {-j10 / det, j00 / det};
  g.grad_lambda[0] = {-g.grad_lambda[1].x - g.grad_lambda[2].x, -g.grad_lambda[1].y - g.grad_lambda[2].y};
  return g;
}

std::array<double, 3> lambda_at(double xi, double eta) { return {1.0 - xi - eta, xi, eta}; }

/// Basis values and gradients at each node of a rule, for one element.
struct QuadratureBasis {
  std::vector<std::array<double, 6>> values;
  std::vector<std::array<double, 3>> lambdas;
  std::vector<double> weights;

  explicit QuadratureBasis(const TriangleRule& rule) {
    for (const auto& n : rule.nodes) {
      lambdas.push_back(lambda_at(n.xi, n.eta));
      values.push_back(p2_values(lambdas.back()));
      weights.push_back(n.weight);
    }
  }
  std::size_t size() const { return weights.size(); }
};

}  // namespace

Point ElementGeometry::map(double xi, double eta) const {
  const auto& a = vertices[0];
  const auto& b = vertices[1];
  const auto& c = vertices[2];
  return {a.x + xi * (b.x - a.x) + eta * (c.x - a.x), a.y + xi * (b.y - a.y) + eta * (c.y - a.y)};
}

std::array<double, 3> ElementGeometry::barycentric(const Point& p) const {
  const double dx = p.x - vertices[0].x;
  const double dy = p.y - vertices[0].y;
  const double l1 = grad_lambda[1].x * dx + grad_lambda[1].y * dy;
  const double l2 = grad_lambda[2].x * dx + grad_lambda[2].y * dy;
  return {1.0 - l1 - l2, l1, l2};
}

std::array<double, 6> p2_values(const std::array<double, 3>& l) {
  return {l[0] * (2.0 * l[0] - 1.0), l[1] * (2.0 * l[1] - 1.0), l[2] * (2.0 * l[2] - 1.0),
          4.0 * l[0] * l[1],         4.0 * l[1] * l[2],         4.0 * l[2] * l[0]};
}

std::array<Vec2, 6> p2_gradients(const ElementGeometry& g, const std::array<double, 3>& l) {
  const auto& gl = g.grad_lambda;
  std::array<Vec2, 6> out;
  for (int a = 0; a < 3; ++a) {
    const double s = 4.0 * l[a] - 1.0;
    out[a] = {s * gl[a].x, s * gl[a].y};
  }
  for (int k = 0; k < 3; ++k) {
    const int a = kLocalEdges[k][0];
    const int b = kLocalEdges[k][1];
    out[3 + k] = {4.0 * (l[b] * gl[a].x + l[a] * gl[b].x), 4.0 * (l[b] * gl[a].y + l[a] * gl[b].y)};
  }
  return out;
}

std::array<Vec2, 3> p1_gradients(const ElementGeometry& g) { return g.grad_lambda; }

FeSystem::FeSystem(std::shared_ptr<const Mesh> mesh, ProblemKind kind)
    : mesh_(std::move(mesh)), kind_(kind) {
  const auto& m = *mesh_;
  const int nv = static_cast<int>(m.num_vertices());
  const int nt = static_cast<int>(m.num_triangles());

  // Edge numbering in order of first appearance.
  std::unordered_map<long long, int> edge_ids;
  std::vector<std::array<int, 2>> edges;
  std::vector<std::pair<int, int>> edge_owner;
  auto key = [nv](int a, int b) {
    return static_cast<long long>(std::min(a, b)) * nv + std::max(a, b);
  };
  element_dofs_.resize(nt);
  geometry_.resize(nt);
  for (int e = 0; e < nt; ++e) {
    const auto& tri = m.triangles()[e];
    geometry_[e] = make_geometry(m.vertices()[tri[0]], m.vertices()[tri[1]], m.vertices()[tri[2]]);
    if (!(geometry_[e].area > 0.0)) {
      throw std::invalid_argument("FeSystem: triangle with non-positive area");
    }
    auto& dofs = element_dofs_[e];
    for (int a = 0; a < 3; ++a) {
      dofs[a] = tri[a];
    }
    for (int k = 0; k < 3; ++k) {
      const int va = tri[kLocalEdges[k][0]];
      const int vb = tri[kLocalEdges[k][1]];
      auto [it, inserted] = edge_ids.try_emplace(key(va, vb), static_cast<int>(edges.size()));
      if (inserted) {
        edges.push_back({va, vb});
        edge_owner.emplace_back(e, k);
      }
      dofs[3 + k] = nv + it->second;
    }
  }
  num_p2_ = nv + static_cast<int>(edges.size());

  p2_nodes_.resize(num_p2_);
  p2_labels_.assign(num_p2_, std::nullopt);
  for (int v = 0; v < nv; ++v) {
    p2_nodes_[v] = m.vertices()[v];
    p2_labels_[v] = m.vertex_label(v);
  }
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto& a = m.vertices()[edges[k][0]];
    const auto& b = m.vertices()[edges[k][1]];
    p2_nodes_[nv + k] = {0.5 * (a.x + b.x), 0.5 * (a.y + b.y)};
  }
  for (const auto& be : m.boundary_edges()) {
    const auto it = edge_ids.find(key(be.vertices[0], be.vertices[1]));
    if (it == edge_ids.end()) {
      throw std::invalid_argument("FeSystem: boundary edge not found in triangulation");
    }
    p2_labels_[nv + it->second] = be.label;
    const auto [elem, local] = edge_owner[it->second];
    boundary_faces_.push_back({elem, local, be.label});
  }

  for (int i = 0; i < num_p2_; ++i) {
    if (p2_labels_[i]) {
      velocity_dirichlet_.dofs.push_back(i);
    }
  }
  for (int i = 0; i < num_p2_; ++i) {
    if (p2_labels_[i]) {
      velocity_dirichlet_.dofs.push_back(num_p2_ + i);
    }
  }
  velocity_dirichlet_.values.assign(velocity_dirichlet_.dofs.size(), 0.0);
  for (int i = 0; i < num_p2_; ++i) {
    const auto label = p2_labels_[i];
    if (!label || *label == BoundaryLabel::Adiabatic) {
      continue;
    }
    temperature_dirichlet_.dofs.push_back(i);
    temperature_dirichlet_.values.push_back(*label == BoundaryLabel::HotWall ? 1.0 : 0.0);
  }

  // Scalar P2 pattern.
  std::vector<std::vector<int>> rows(num_p2_);
  for (const auto& dofs : element_dofs_) {
    for (int a : dofs) {
      rows[a].insert(rows[a].end(), dofs.begin(), dofs.end());
    }
  }
  auto scalar = std::make_shared<SparsityPattern>();
  scalar->n_rows = scalar->n_cols = num_p2_;
  scalar->row_offsets.assign(num_p2_ + 1, 0);
  for (int i = 0; i < num_p2_; ++i) {
    auto& r = rows[i];
    std::sort(r.begin(), r.end());
    r.erase(std::unique(r.begin(), r.end()), r.end());
    scalar->row_offsets[i + 1] = scalar->row_offsets[i] + static_cast<int>(r.size());
    scalar->column_indices.insert(scalar->column_indices.end(), r.begin(), r.end());
  }

  // Vector pattern: 2x2 blocks of the scalar pattern.
  auto vec = std::make_shared<SparsityPattern>();
  vec->n_rows = vec->n_cols = 2 * num_p2_;
  vec->row_offsets.assign(2 * num_p2_ + 1, 0);
  vec->column_indices.reserve(4 * scalar->nnz());
  for (int c = 0; c < 2; ++c) {
    for (int i = 0; i < num_p2_; ++i) {
      const int row = c * num_p2_ + i;
      for (int d = 0; d < 2; ++d) {
        for (int k = scalar->row_offsets[i]; k < scalar->row_offsets[i + 1]; ++k) {
          vec->column_indices.push_back(d * num_p2_ + scalar->column_indices[k]);
        }
      }
      vec->row_offsets[row + 1] = static_cast<int>(vec->column_indices.size());
    }
  }

  scalar_positions_.resize(36 * static_cast<std::size_t>(nt));
  for (int e = 0; e < nt; ++e) {
    const auto& dofs = element_dofs_[e];
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        scalar_positions_[36 * e + 6 * a + b] = scalar->find(dofs[a], dofs[b]);
      }
    }
  }
  scalar_pattern_ = std::move(scalar);
  vector_pattern_ = std::move(vec);
}

int FeSystem::vector_position(int row, int pos, int c, int d) const {
  const auto& s = *scalar_pattern_;
  const int len = s.row_offsets[row + 1] - s.row_offsets[row];
  return vector_pattern_->row_offsets[c * num_p2_ + row] + d * len + (pos - s.row_offsets[row]);
}

int FeSystem::locate(const Point& p) const {
  constexpr double tol = 1e-12;
  for (int e = 0; e < num_elements(); ++e) {
    const auto l = geometry_[e].barycentric(p);
    if (l[0] >= -tol && l[1] >= -tol && l[2] >= -tol) {
      return e;
    }
  }
  return -1;
}

double FeSystem::evaluate_p2(std::span<const double> field, int element,
                             const std::array<double, 3>& lambda) const {
  const auto phi = p2_values(lambda);
  const auto& dofs = element_dofs_[element];
  double v = 0.0;
  for (int a = 0; a < 6; ++a) {
    v += phi[a] * field[dofs[a]];
  }
  return v;
}

double FeSystem::evaluate_p2(std::span<const double> field, const Point& p) const {
  const int e = locate(p);
  if (e < 0) {
    throw std::out_of_range("FeSystem::evaluate_p2: point outside the mesh");
  }
  return evaluate_p2(field, e, geometry_[e].barycentric(p));
}

Vec2 FeSystem::gradient_p2(std::span<const double> field, int element,
                           const std::array<double, 3>& lambda) const {
  const auto grads = p2_gradients(geometry_[element], lambda);
  const auto& dofs = element_dofs_[element];
  Vec2 g;
  for (int a = 0; a < 6; ++a) {
    g.x += grads[a].x * field[dofs[a]];
    g.y += grads[a].y * field[dofs[a]];
  }
  return g;
}

double FeSystem::evaluate_p1(std::span<const double> field, const Point& p) const {
  const int e = locate(p);
  if (e < 0) {
    throw std::out_of_range("FeSystem::evaluate_p1: point outside the mesh");
  }
  const auto l = geometry_[e].barycentric(p);
  const auto& dofs = element_dofs_[e];
  return l[0] * field[dofs[0]] + l[1] * field[dofs[1]] + l[2] * field[dofs[2]];
}

FeSystem build_fe_system(std::shared_ptr<const Mesh> mesh, ProblemKind kind) {
  return FeSystem(std::move(mesh), kind);
}

SparseOperatorSet assemble_static_operators(const FeSystem& fe) {
  const int n = fe.num_p2();
  const QuadratureBasis qb(triangle_rule_degree5());

  SparseMatrix ms(fe.scalar_pattern());
  SparseMatrix ks(fe.scalar_pattern());
  SparseMatrix mu(fe.vector_pattern());
  SparseMatrix ku(fe.vector_pattern());
  SparseMatrix gd(fe.vector_pattern());
  std::vector<Triplet> b_triplets;
  std::vector<Triplet> mp_triplets;
  b_triplets.reserve(36 * static_cast<std::size_t>(fe.num_elements()));
  mp_triplets.reserve(9 * static_cast<std::size_t>(fe.num_elements()));

  for (int e = 0; e < fe.num_elements(); ++e) {
    const auto& geom = fe.geometry(e);
    const auto& dofs = fe.element_dofs(e);
    double mass[6][6] = {};
    double stiff[6][6] = {};
    double graddiv[2][2][6][6] = {};
    double div[3][2][6] = {};
    for (std::size_t q = 0; q < qb.size(); ++q) {
      const double w = qb.weights[q] * geom.area;
      const auto& phi = qb.values[q];
      const auto& lam = qb.lambdas[q];
      const auto grad = p2_gradients(geom, lam);
      for (int a = 0; a < 6; ++a) {
        for (int b = 0; b < 6; ++b) {
          mass[a][b] += w * phi[a] * phi[b];
          stiff[a][b] += w * (grad[a].x * grad[b].x + grad[a].y * grad[b].y);
          const double ga[2] = {grad[a].x, grad[a].y};
          const double gb[2] = {grad[b].x, grad[b].y};
          for (int c = 0; c < 2; ++c) {
            for (int d = 0; d < 2; ++d) {
              graddiv[c][d][a][b] += w * ga[c] * gb[d];
            }
          }
        }
      }
      for (int i = 0; i < 3; ++i) {
        for (int b = 0; b < 6; ++b) {
          div[i][0][b] += w * lam[i] * grad[b].x;
          div[i][1][b] += w * lam[i] * grad[b].y;
        }
      }
    }
    auto msv = ms.values();
    auto ksv = ks.values();
    auto muv = mu.values();
    auto kuv = ku.values();
    auto gdv = gd.values();
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        const int pos = fe.scalar_position(e, a, b);
        msv[pos] += mass[a][b];
        ksv[pos] += stiff[a][b];
        for (int c = 0; c < 2; ++c) {
          const int diag = fe.vector_position(dofs[a], pos, c, c);
          muv[diag] += mass[a][b];
          kuv[diag] += stiff[a][b];
          for (int d = 0; d < 2; ++d) {
            gdv[fe.vector_position(dofs[a], pos, c, d)] += graddiv[c][d][a][b];
          }
        }
      }
    }
    for (int i = 0; i < 3; ++i) {
      for (int c = 0; c < 2; ++c) {
        for (int b = 0; b < 6; ++b) {
          b_triplets.push_back({dofs[i], c * n + dofs[b], div[i][c][b]});
        }
      }
      for (int j = 0; j < 3; ++j) {
        mp_triplets.push_back({dofs[i], dofs[j], geom.area / 12.0 * (i == j ? 2.0 : 1.0)});
      }
    }
  }

  SparseOperatorSet ops;
  ops.M_u = std::move(mu);
  ops.K_u = std::move(ku);
  ops.GD = std::move(gd);
  ops.B = SparseMatrix::from_triplets(fe.num_pressure(), fe.num_velocity(), b_triplets);
  ops.Bt = ops.B.transpose();
  ops.M_p = SparseMatrix::from_triplets(fe.num_pressure(), fe.num_pressure(), mp_triplets);
  ops.M_T = std::move(ms);
  ops.K_T = std::move(ks);
  ops.pressure_weights = ops.M_p.multiply(std::vector<double>(fe.num_pressure(), 1.0));
  return ops;
}

namespace {

void check_velocity_length(const FeSystem& fe, std::span<const double> w, const char* who) {
  if (w.size() != static_cast<std::size_t>(fe.num_velocity())) {
    throw std::invalid_argument(std::string(who) + ": convecting field has wrong length");
  }
}

/// Element skew convection matrix 0.5 * (C - C^T), C_ab = (w . grad phi_b, phi_a).
void element_convection(const FeSystem& fe, const QuadratureBasis& qb, std::span<const double> w, int e,
                        double out[6][6]) {
  const auto& geom = fe.geometry(e);
  const auto& dofs = fe.element_dofs(e);
  const int n = fe.num_p2();
  double c[6][6] = {};
  for (std::size_t q = 0; q < qb.size(); ++q) {
    const auto& phi = qb.values[q];
    const auto grad = p2_gradients(geom, qb.lambdas[q]);
    double wx = 0.0;
    double wy = 0.0;
    for (int a = 0; a < 6; ++a) {
      wx += phi[a] * w[dofs[a]];
      wy += phi[a] * w[n + dofs[a]];
    }
    const double weight = qb.weights[q] * geom.area;
    for (int b = 0; b < 6; ++b) {
      const double adv = weight * (wx * grad[b].x + wy * grad[b].y);
      for (int a = 0; a < 6; ++a) {
        c[a][b] += adv * phi[a];
      }
    }
  }
  for (int a = 0; a < 6; ++a) {
    for (int b = 0; b < 6; ++b) {
      out[a][b] = 0.5 * (c[a][b] - c[b][a]);
    }
  }
}

const QuadratureBasis& convection_basis() {
  static const QuadratureBasis qb(triangle_rule_degree5());
  return qb;
}

}  // namespace

void add_scalar_convection(const FeSystem& fe, std::span<const double> w, double alpha,
                           std::span<double> values) {
  check_velocity_length(fe, w, "add_scalar_convection");
  const auto& qb = convection_basis();
  double local[6][6];
  for (int e = 0; e < fe.num_elements(); ++e) {
    element_convection(fe, qb, w, e, local);
    for (int a = 0; a < 6; ++a) {
      for (int b = 0; b < 6; ++b) {
        values[fe.scalar_position(e, a, b)] += alpha * local[a][b];
      }
    }
  }
}

SparseMatrix assemble_convection(const FeSystem& fe, std::span<const double> w, ConvectionSpace space) {
  check_velocity_length(fe, w, "assemble_convection");
  SparseMatrix scalar(fe.scalar_pattern());
  add_scalar_convection(fe, w, 1.0, scalar.values());
  if (space == ConvectionSpace::Temperature) {
    return scalar;
  }
  SparseMatrix vec(fe.vector_pattern());
  auto vv = vec.values();
  const auto sv = scalar.values();
  const auto& sp = *fe.scalar_pattern();
  for (int i = 0; i < fe.num_p2(); ++i) {
    for (int k = sp.row_offsets[i]; k < sp.row_offsets[i + 1]; ++k) {
      vv[fe.vector_position(i, k, 0, 0)] = sv[k];
      vv[fe.vector_position(i, k, 1, 1)] = sv[k];
    }
  }
  return vec;
}

std::vector<double> apply_scalar_convection(const FeSystem& fe, std::span<const double> w,
                                            std::span<const double> v) {
  check_velocity_length(fe, w, "apply_scalar_convection");
  if (v.size() != static_cast<std::size_t>(fe.num_p2())) {
    throw std::invalid_argument("apply_scalar_convection: field has wrong length");
  }
  const auto& qb = convection_basis();
  std::vector<double> y(fe.num_p2(), 0.0);
  double local[6][6];
  for (int e = 0; e < fe.num_elements(); ++e) {
    element_convection(fe, qb, w, e, local);
    const auto& dofs = fe.element_dofs(e);
    for (int a = 0; a < 6; ++a) {
      double sum = 0.0;
      for (int b = 0; b < 6; ++b) {
        sum += local[a][b] * v[dofs[b]];
      }
      y[dofs[a]] += sum;
    }
  }
  return y;
}

std::vector<double> apply_velocity_convection(const FeSystem& fe, std::span<const double> w,
                                              std::span<const double> v) {
  check_velocity_length(fe, w, "apply_velocity_convection");
  check_velocity_length(fe, v, "apply_velocity_convection");
  const auto& qb = convection_basis();
  const int n = fe.num_p2();
  std::vector<double> y(fe.num_velocity(), 0.0);
  double local[6][6];
  for (int e = 0; e < fe.num_elements(); ++e) {
    element_convection(fe, qb, w, e, local);
    const auto& dofs = fe.element_dofs(e);
    for (int a = 0; a < 6; ++a) {
      double s0 = 0.0;
      double s1 = 0.0;
      for (int b = 0; b < 6; ++b) {
        s0 += local[a][b] * v[dofs[b]];
        s1 += local[a][b] * v[n + dofs[b]];
      }
      y[dofs[a]] += s0;
      y[n + dofs[a]] += s1;
    }
  }
  return y;
}

std::vector<double> assemble_load(const FeSystem& fe, const VectorFunction& f, const TriangleRule& rule) {
  const QuadratureBasis qb(rule);
  const int n = fe.num_p2();
  std::vector<double> load(fe.num_velocity(), 0.0);
  for (int e = 0; e < fe.num_elements(); ++e) {
    const auto& geom = fe.geometry(e);
    const auto& dofs = fe.element_dofs(e);
    for (std::size_t q = 0; q < qb.size(); ++q) {
      const auto& node = rule.nodes[q];
      const Point x = geom.map(node.xi, node.eta);
      const Vec2 fx = f(x.x, x.y);
      const double w = qb.weights[q] * geom.area;
      for (int a = 0; a < 6; ++a) {
        load[dofs[a]] += w * fx.x * qb.values[q][a];
        load[n + dofs[a]] += w * fx.y * qb.values[q][a];
      }
    }
  }
  return load;
}

std::vector<double> assemble_load(const FeSystem& fe, const ScalarFunction& g, const TriangleRule& rule) {
  const QuadratureBasis qb(rule);
  std::vector<double> load(fe.num_p2(), 0.0);
  for (int e = 0; e < fe.num_elements(); ++e) {
    const auto& geom = fe.geometry(e);
    const auto& dofs = fe.element_dofs(e);
    for (std::size_t q = 0; q < qb.size(); ++q) {
      const auto& node = rule.nodes[q];
      const Point x = geom.map(node.xi, node.eta);
      const double gx = g(x.x, x.y);
      const double w = qb.weights[q] * geom.area;
      for (int a = 0; a < 6; ++a) {
        load[dofs[a]] += w * gx * qb.values[q][a];
      }
    }
  }
  return load;
}

std::vector<double> assemble_buoyancy(const FeSystem& fe, const SparseOperatorSet& ops,
                                      std::span<const double> temperature) {
  if (temperature.size() != static_cast<std::size_t>(fe.num_temperature())) {
    throw std::invalid_argument("assemble_buoyancy: temperature has wrong length");
  }
  const int n = fe.num_p2();
  std::vector<double> out(fe.num_velocity(), 0.0);
  ops.M_T.multiply(temperature, std::span<double>(out).subspan(n, n));
  return out;
}

DirichletEliminator::DirichletEliminator(const SparseMatrix& matrix, std::span<const int> constrained_dofs)
    : matrix_(matrix), dofs_(constrained_dofs.begin(), constrained_dofs.end()), slot_of_dof_(matrix.rows(), -1) {
  if (matrix.rows() != matrix.cols()) {
    throw std::invalid_argument("DirichletEliminator: matrix must be square");
  }
  for (std::size_t s = 0; s < dofs_.size(); ++s) {
    if (dofs_[s] < 0 || dofs_[s] >= matrix.rows()) {
      throw std::invalid_argument("DirichletEliminator: constrained dof out of range");
    }
    slot_of_dof_[dofs_[s]] = static_cast<int>(s);
  }
  const auto offsets = matrix_.row_offsets();
  const auto cols = matrix_.column_indices();
  auto vals = matrix_.values();
  for (int i = 0; i < matrix_.rows(); ++i) {
    const bool constrained = slot_of_dof_[i] >= 0;
    bool has_diagonal = false;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      const int j = cols[k];
      if (constrained) {
        vals[k] = (j == i) ? 1.0 : 0.0;
        has_diagonal = has_diagonal || j == i;
      } else if (slot_of_dof_[j] >= 0) {
        if (vals[k] != 0.0) {
          couplings_.push_back({i, slot_of_dof_[j], vals[k]});
        }
        vals[k] = 0.0;
      }
    }
    if (constrained && !has_diagonal) {
      throw std::invalid_argument("DirichletEliminator: constrained row lacks a diagonal entry");
    }
  }
}

void DirichletEliminator::apply(std::span<double> rhs, std::span<const double> values) const {
  if (values.size() != dofs_.size() || rhs.size() != static_cast<std::size_t>(matrix_.rows())) {
    throw std::invalid_argument("DirichletEliminator::apply: dimension mismatch");
  }
  for (const auto& c : couplings_) {
    rhs[c.row] -= c.value * values[c.slot];
  }
  for (std::size_t s = 0; s < dofs_.size(); ++s) {
    rhs[dofs_[s]] = values[s];
  }
}

std::pair<SparseMatrix, std::vector<double>> apply_dirichlet(const SparseMatrix& matrix,
                                                             std::span<const double> rhs,
                                                             const DirichletSet& constraints) {
  if (constraints.dofs.size() != constraints.values.size()) {
    throw std::invalid_argument("apply_dirichlet: dofs and values differ in length");
  }
  DirichletEliminator elim(matrix, constraints.dofs);
  std::vector<double> b(rhs.begin(), rhs.end());
  elim.apply(b, constraints.values);
  return {elim.matrix(), std::move(b)};
}

double pressure_mean(const SparseOperatorSet& ops, std::span<const double> p) {
  double total = 0.0;
  for (double w : ops.pressure_weights) {
    total += w;
  }
  return dot(ops.pressure_weights, p) / total;
}

void center_pressure(const SparseOperatorSet& ops, std::span<double> p) {
  const double mean = pressure_mean(ops, p);
  for (double& v : p) {
    v -= mean;
  }
}

namespace {

double mass_norm(const SparseMatrix& m, std::span<const double> v) {
  const auto mv = m.multiply(v);
  return std::sqrt(std::max(0.0, dot(v, mv)));
}

}  // namespace

double velocity_l2(const SparseOperatorSet& ops, std::span<const double> u) { return mass_norm(ops.M_u, u); }
double scalar_l2(const SparseOperatorSet& ops, std::span<const double> s) { return mass_norm(ops.M_T, s); }
double pressure_l2(const SparseOperatorSet& ops, std::span<const double> p) { return mass_norm(ops.M_p, p); }

std::vector<double> interpolate_velocity(const FeSystem& fe, const VectorFunction& f) {
  const int n = fe.num_p2();
  std::vector<double> out(2 * n);
  for (int i = 0; i < n; ++i) {
    const auto& p = fe.p2_nodes()[i];
    const Vec2 v = f(p.x, p.y);
    out[i] = v.x;
    out[n + i] = v.y;
  }
  return out;
}

std::vector<double> interpolate_scalar(const FeSystem& fe, const ScalarFunction& f) {
  std::vector<double> out(fe.num_p2());
  for (int i = 0; i < fe.num_p2(); ++i) {
    out[i] = f(fe.p2_nodes()[i].x, fe.p2_nodes()[i].y);
  }
  return out;
}

std::vector<double> interpolate_pressure(const FeSystem& fe, const ScalarFunction& f) {
  std::vector<double> out(fe.num_p1());
  for (int i = 0; i < fe.num_p1(); ++i) {
    const auto& p = fe.mesh().vertices()[i];
    out[i] = f(p.x, p.y);
  }
  return out;
}

}  // namespace ace
