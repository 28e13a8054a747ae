#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ace/mms.hpp"

using namespace ace;

namespace {

std::shared_ptr<const Mesh> reference_triangle() {
  std::vector<Point> v{{0.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
  std::vector<std::array<int, 3>> t{{0, 1, 2}};
  std::vector<BoundaryEdge> e{{{0, 1}, BoundaryLabel::FullDirichlet},
                              {{1, 2}, BoundaryLabel::FullDirichlet},
                              {{2, 0}, BoundaryLabel::FullDirichlet}};
  std::vector<std::optional<BoundaryLabel>> labels(3, BoundaryLabel::FullDirichlet);
  return std::make_shared<const Mesh>(std::move(v), std::move(t), std::move(e), std::move(labels), LabelScheme::Mms);
}

// Independent P2 basis on a physical triangle. Barycentrics from an Eigen
// solve, gradients from the inverse Jacobian.
struct HandElement {
  Eigen::Matrix3d to_bary;  // [1 x y] -> lambda
  explicit HandElement(const std::array<Point, 3>& v) {
    Eigen::Matrix3d a;
    for (int i = 0; i < 3; ++i) a.col(i) << 1.0, v[i].x, v[i].y;
    to_bary = a.inverse();
  }
  Eigen::Vector3d lambda(double x, double y) const { return to_bary * Eigen::Vector3d(1.0, x, y); }
  Eigen::Vector2d grad_lambda(int i) const { return {to_bary(i, 1), to_bary(i, 2)}; }
  double value(int k, double x, double y) const {
    const auto l = lambda(x, y);
    static const int edge[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    if (k < 3) return l[k] * (2.0 * l[k] - 1.0);
    return 4.0 * l[edge[k - 3][0]] * l[edge[k - 3][1]];
  }
  Eigen::Vector2d grad(int k, double x, double y) const {
    const auto l = lambda(x, y);
    static const int edge[3][2] = {{0, 1}, {1, 2}, {2, 0}};
    if (k < 3) return (4.0 * l[k] - 1.0) * grad_lambda(k);
    const int a = edge[k - 3][0], b = edge[k - 3][1];
    return 4.0 * (l[a] * grad_lambda(b) + l[b] * grad_lambda(a));
  }
};

std::array<Point, 3> element_vertices(const FeSystem& fe, int e) {
  const auto& tri = fe.mesh().triangles()[e];
  return {fe.mesh().vertices()[tri[0]], fe.mesh().vertices()[tri[1]], fe.mesh().vertices()[tri[2]]};
}

Point map_point(const std::array<Point, 3>& v, double xi, double eta) {
  return {v[0].x + xi * (v[1].x - v[0].x) + eta * (v[2].x - v[0].x),
          v[0].y + xi * (v[1].y - v[0].y) + eta * (v[2].y - v[0].y)};
}

double triangle_area(const std::array<Point, 3>& v) {
  return 0.5 * std::abs((v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y));
}

std::vector<double> zero_boundary(const FeSystem& fe, std::vector<double> s) {
  for (int i = 0; i < fe.num_p2(); ++i)
    if (fe.p2_label(i)) s[i] = 0.0;
  return s;
}

}  // namespace

TEST_SUITE("fe") {
  TEST_CASE("dof counts") {
    const FeSystem one(testing::square_mesh(1), ProblemKind::Cavity);
    CHECK(one.num_p2() == 9);
    CHECK(one.num_p1() == 4);
    const FeSystem big(testing::square_mesh(64), ProblemKind::Cavity);
    CHECK(big.num_p1() == 4225);
    // edges: 64*65 horizontal + 64*65 vertical + 64*64 diagonals
    std::set<std::pair<int, int>> edges;
    for (const auto& tri : big.mesh().triangles())
      for (int k = 0; k < 3; ++k) edges.insert(std::minmax(tri[k], tri[(k + 1) % 3]));
    CHECK(edges.size() == 12416);
    CHECK(big.num_edges() == 3 * 64 * 64 + 2 * 64);
    CHECK(big.num_p2() == 4225 + 12416);
    CHECK(big.num_velocity() == 2 * 16641);
  }

  TEST_CASE("edge midpoints are indexed once") {
    const FeSystem fe(testing::square_mesh(3), ProblemKind::Cavity);
    std::vector<int> uses(fe.num_p2(), 0);
    for (int e = 0; e < fe.num_elements(); ++e) {
      const auto v = element_vertices(fe, e);
      const auto& d = fe.element_dofs(e);
      for (int k = 0; k < 3; ++k) {
        CHECK(d[k] < fe.num_p1());
        const Point mid{0.5 * (v[k].x + v[(k + 1) % 3].x), 0.5 * (v[k].y + v[(k + 1) % 3].y)};
        CHECK(fe.p2_nodes()[d[3 + k]].x == doctest::Approx(mid.x));
        CHECK(fe.p2_nodes()[d[3 + k]].y == doctest::Approx(mid.y));
      }
      for (int k = 0; k < 6; ++k) uses[d[k]]++;
    }
    for (int i = fe.num_p1(); i < fe.num_p2(); ++i) CHECK((uses[i] == 1 || uses[i] == 2));
  }

  TEST_CASE("Dirichlet sets") {
    const int n = 4;
    const FeSystem fe(testing::square_mesh(n), ProblemKind::Cavity);
    int boundary_nodes = 0;
    for (const auto& p : fe.p2_nodes())
      if (p.x == 0.0 || p.x == 1.0 || p.y == 0.0 || p.y == 1.0) ++boundary_nodes;
    CHECK(boundary_nodes == 8 * n);
    CHECK(fe.velocity_dirichlet().dofs.size() == static_cast<std::size_t>(2 * boundary_nodes));
    for (double v : fe.velocity_dirichlet().values) CHECK(v == 0.0);
    const auto& td = fe.temperature_dirichlet();
    int wall_nodes = 0;
    for (const auto& p : fe.p2_nodes())
      if (p.x == 0.0 || p.x == 1.0) ++wall_nodes;
    CHECK(td.dofs.size() == static_cast<std::size_t>(wall_nodes));
    for (std::size_t k = 0; k < td.dofs.size(); ++k) {
      const auto& p = fe.p2_nodes()[td.dofs[k]];
      CHECK((p.x == 0.0 || p.x == 1.0));
      CHECK(td.values[k] == (p.x == 0.0 ? 1.0 : 0.0));
    }
    const FeSystem mms(testing::square_mesh(n, LabelScheme::Mms), ProblemKind::Mms);
    CHECK(mms.temperature_dirichlet().dofs.size() == static_cast<std::size_t>(8 * n));
  }

  TEST_CASE("reference triangle P1 mass and stiffness") {
    const FeSystem fe(reference_triangle(), ProblemKind::Mms);
    const auto ops = assemble_static_operators(fe);
    Eigen::Matrix3d mass;
    mass << 2, 1, 1, 1, 2, 1, 1, 1, 2;
    mass /= 24.0;
    CHECK((testing::dense(ops.M_p) - mass).cwiseAbs().maxCoeff() < 1e-14);
    Eigen::Matrix3d stiff;
    stiff << 2, -1, -1, -1, 1, 0, -1, 0, 1;
    stiff /= 2.0;
    const auto& geom = fe.geometry(0);
    const auto g = p1_gradients(geom);
    Eigen::Matrix3d k;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) k(i, j) = geom.area * (g[i].x * g[j].x + g[i].y * g[j].y);
    CHECK((k - stiff).cwiseAbs().maxCoeff() < 1e-14);
    // P2 stiffness restricted to the P1 hat functions reproduces the same matrix
    std::vector<double> hat(fe.num_p2());
    Eigen::Matrix3d k2;
    for (int i = 0; i < 3; ++i) {
      std::vector<double> hi = interpolate_scalar(fe, [&](double x, double y) {
        const double l[3] = {1.0 - x - y, x, y};
        return l[i];
      });
      for (int j = 0; j < 3; ++j) {
        std::vector<double> hj = interpolate_scalar(fe, [&](double x, double y) {
          const double l[3] = {1.0 - x - y, x, y};
          return l[j];
        });
        k2(i, j) = dot(hi, ops.K_T.multiply(hj));
      }
    }
    CHECK((k2 - stiff).cwiseAbs().maxCoeff() < 1e-14);
  }

  TEST_CASE("stiffness kernel and symmetric positivity") {
    const FeSystem fe(testing::square_mesh(4), ProblemKind::Cavity);
    const auto ops = assemble_static_operators(fe);
    const std::vector<double> ones(fe.num_p2(), 1.0);
    CHECK(norm2(ops.K_T.multiply(ones)) < 1e-13);
    std::mt19937_64 rng(9);
    for (const auto* m : {&ops.M_u, &ops.M_p, &ops.M_T}) {
      const auto d = testing::dense(*m);
      CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-15);
      for (int k = 0; k < 100; ++k) {
        const auto x = testing::random_vector(m->rows(), rng);
        CHECK(dot(x, m->multiply(x)) > 0.0);
      }
    }
    for (const auto* m : {&ops.K_u, &ops.K_T, &ops.GD}) {
      const auto d = testing::dense(*m);
      CHECK((d - d.transpose()).cwiseAbs().maxCoeff() < 1e-13);
      CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(d).eigenvalues().minCoeff() > -1e-10);
    }
    CHECK((testing::dense(ops.Bt) - testing::dense(ops.B).transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(ops.B.rows() == fe.num_pressure());
    CHECK(ops.B.cols() == fe.num_velocity());
  }

  TEST_CASE("convection is skew-symmetric") {
    const FeSystem fe(testing::square_mesh(4), ProblemKind::Cavity);
    std::mt19937_64 rng(10);
    const std::vector<double> zero(fe.num_velocity(), 0.0);
    CHECK(assemble_convection(fe, zero, ConvectionSpace::Velocity).max_abs() == 0.0);
    CHECK(assemble_convection(fe, zero, ConvectionSpace::Temperature).max_abs() == 0.0);
    for (int k = 0; k < 20; ++k) {
      const auto w = testing::random_vector(fe.num_velocity(), rng);
      for (auto space : {ConvectionSpace::Velocity, ConvectionSpace::Temperature}) {
        const auto n = assemble_convection(fe, w, space);
        const auto d = testing::dense(n);
        CHECK((d + d.transpose()).cwiseAbs().maxCoeff() <= 1e-12);
        const auto x = testing::random_vector(n.rows(), rng);
        const double xnx = dot(x, n.multiply(x));
        CHECK(std::abs(xnx) <= 1e-12 * n.max_abs() * dot(x, x));
        // matrix-free products agree with the assembled matrix
        const auto y = space == ConvectionSpace::Velocity ? apply_velocity_convection(fe, w, x)
                                                          : apply_scalar_convection(fe, w, x);
        CHECK(testing::max_diff(y, n.multiply(x)) < 1e-12);
      }
    }
    const std::vector<double> short_w(5, 0.0);
    CHECK_THROWS_AS(assemble_convection(fe, short_w, ConvectionSpace::Velocity), std::invalid_argument);
  }

  TEST_CASE("convection by w = (1, 0) against hand quadrature") {
    const FeSystem fe(testing::square_mesh(2), ProblemKind::Cavity);
    std::vector<double> w(fe.num_velocity(), 0.0);
    std::fill(w.begin(), w.begin() + fe.num_p2(), 1.0);
    const auto n = testing::dense(assemble_convection(fe, w, ConvectionSpace::Temperature));
    Eigen::MatrixXd oracle = Eigen::MatrixXd::Zero(fe.num_p2(), fe.num_p2());
    const auto rule = triangle_rule_collapsed(5);
    for (int e = 0; e < fe.num_elements(); ++e) {
      const auto v = element_vertices(fe, e);
      const HandElement h(v);
      const double area = triangle_area(v);
      const auto& d = fe.element_dofs(e);
      for (const auto& q : rule.nodes) {
        const auto p = map_point(v, q.xi, q.eta);
        for (int i = 0; i < 6; ++i)
          for (int j = 0; j < 6; ++j)
            oracle(d[i], d[j]) += area * q.weight *
                                  (0.5 * h.grad(j, p.x, p.y).x() * h.value(i, p.x, p.y) -
                                   0.5 * h.grad(i, p.x, p.y).x() * h.value(j, p.x, p.y));
      }
    }
    CHECK((n - oracle).cwiseAbs().maxCoeff() < 1e-14);
    // the velocity version is the same block on both components
    const auto nv = testing::dense(assemble_convection(fe, w, ConvectionSpace::Velocity));
    const int m = fe.num_p2();
    CHECK((nv.topLeftCorner(m, m) - oracle).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((nv.bottomRightCorner(m, m) - oracle).cwiseAbs().maxCoeff() < 1e-14);
    CHECK(nv.topRightCorner(m, m).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("skew form equals the advective form plus half divergence") {
    const FeSystem fe(testing::square_mesh(3, LabelScheme::Mms), ProblemKind::Mms);
    std::mt19937_64 rng(12);
    const auto u = testing::random_vector(fe.num_velocity(), rng);
    const auto v = zero_boundary(fe, testing::random_vector(fe.num_p2(), rng));
    const auto w = zero_boundary(fe, testing::random_vector(fe.num_p2(), rng));
    const double skew = dot(w, assemble_convection(fe, u, ConvectionSpace::Temperature).multiply(v));
    const std::span<const double> u1(u.data(), fe.num_p2());
    const std::span<const double> u2(u.data() + fe.num_p2(), fe.num_p2());
    double advective = 0.0;
    const auto rule = triangle_rule_collapsed(6);
    for (int e = 0; e < fe.num_elements(); ++e) {
      const auto vert = element_vertices(fe, e);
      const HandElement h(vert);
      const double area = triangle_area(vert);
      const auto& d = fe.element_dofs(e);
      for (const auto& q : rule.nodes) {
        const auto p = map_point(vert, q.xi, q.eta);
        double a1 = 0, a2 = 0, div = 0, vv = 0, ww = 0;
        Eigen::Vector2d gv(0, 0);
        for (int k = 0; k < 6; ++k) {
          const double phi = h.value(k, p.x, p.y);
          const auto g = h.grad(k, p.x, p.y);
          a1 += u1[d[k]] * phi;
          a2 += u2[d[k]] * phi;
          div += u1[d[k]] * g.x() + u2[d[k]] * g.y();
          vv += v[d[k]] * phi;
          ww += w[d[k]] * phi;
          gv += v[d[k]] * g;
        }
        advective += area * q.weight * ((a1 * gv.x() + a2 * gv.y()) * ww + 0.5 * div * vv * ww);
      }
    }
    CHECK(std::abs(skew - advective) < 1e-12);
  }

  TEST_CASE("divergence compatibility") {
    const FeSystem fe(testing::square_mesh(5), ProblemKind::Cavity);
    const auto ops = assemble_static_operators(fe);
    std::mt19937_64 rng(13);
    auto u = testing::random_vector(fe.num_velocity(), rng);
    for (int dof : fe.velocity_dirichlet().dofs) u[dof] = 0.0;
    const auto bu = ops.B.multiply(u);
    double sum = 0.0;
    for (double x : bu) sum += x;
    CHECK(std::abs(sum) < 1e-12);
  }

  TEST_CASE("load vectors") {
    const FeSystem fe(testing::square_mesh(8, LabelScheme::Mms), ProblemKind::Mms);
    const auto zero = assemble_load(fe, VectorFunction([](double, double) { return Vec2{0.0, 0.0}; }));
    for (double x : zero) CHECK(x == 0.0);
    const auto unit = assemble_load(fe, VectorFunction([](double, double) { return Vec2{1.0, 0.0}; }));
    double s1 = 0.0, s2 = 0.0;
    for (int i = 0; i < fe.num_p2(); ++i) {
      s1 += unit[i];
      s2 += unit[fe.num_p2() + i];
    }
    CHECK(s1 == doctest::Approx(1.0).epsilon(1e-13));
    CHECK(s2 == 0.0);

    const ExactSolution sol(AmplitudeLaw::Cosine);
    const auto forcing = forcings(sol, 1.0, 100.0);
    const VectorFunction f = [&](double x, double y) { return forcing.f(x, y, 0.0); };
    const ScalarFunction g = [&](double x, double y) { return forcing.g(x, y, 0.0); };
    const auto fine = triangle_rule_collapsed(6);
    CHECK(testing::max_diff(assemble_load(fe, f), assemble_load(fe, f, fine)) <= 1e-10);
    CHECK(testing::max_diff(assemble_load(fe, g), assemble_load(fe, g, fine)) <= 1e-10);
  }

  TEST_CASE("buoyancy") {
    const FeSystem fe(testing::square_mesh(3), ProblemKind::Cavity);
    const auto ops = assemble_static_operators(fe);
    const std::vector<double> zero(fe.num_p2(), 0.0);
    for (double x : assemble_buoyancy(fe, ops, zero)) CHECK(x == 0.0);
    const std::vector<double> one(fe.num_p2(), 1.0);
    const auto b = assemble_buoyancy(fe, ops, one);
    double vertical = 0.0;
    for (int i = 0; i < fe.num_p2(); ++i) {
      CHECK(b[i] == 0.0);
      vertical += b[fe.num_p2() + i];
    }
    CHECK(vertical == doctest::Approx(1.0).epsilon(1e-13));
    const auto load = assemble_load(fe, ScalarFunction([](double, double) { return 1.0; }));
    for (int i = 0; i < fe.num_p2(); ++i) CHECK(b[fe.num_p2() + i] == doctest::Approx(load[i]).epsilon(1e-12));
  }

  TEST_CASE("apply_dirichlet") {
    const auto eye = SparseMatrix::identity(2);
    const std::vector<double> rhs{1.0, 2.0};
    const DirichletSet one{{0}, {5.0}};
    const auto [a, b] = apply_dirichlet(eye, rhs, one);
    const Eigen::Vector2d x2 = testing::dense(a).lu().solve(testing::to_eigen(b));
    CHECK(x2[0] == 5.0);
    CHECK(x2[1] == 2.0);

    const std::vector<Triplet> t{{0, 0, 4.0}, {0, 1, 1.0}, {0, 2, 0.5}, {1, 0, 1.0}, {1, 1, 3.0},
                                 {1, 2, 1.0}, {2, 0, 0.5}, {2, 1, 1.0}, {2, 2, 5.0}};
    const auto spd = SparseMatrix::from_triplets(3, 3, t);
    const std::vector<double> f{1.0, -2.0, 3.0};
    const auto [same, same_rhs] = apply_dirichlet(spd, f, DirichletSet{});
    CHECK((testing::dense(same) - testing::dense(spd)).norm() == 0.0);
    CHECK(same_rhs == f);

    const DirichletSet c{{1}, {0.75}};
    const auto [ac, bc] = apply_dirichlet(spd, f, c);
    // oracle: eliminate dof 1 by hand from the dense system
    const auto d = testing::dense(spd);
    Eigen::Matrix2d red;
    red << d(0, 0), d(0, 2), d(2, 0), d(2, 2);
    const Eigen::Vector2d rr(f[0] - d(0, 1) * 0.75, f[2] - d(2, 1) * 0.75);
    const Eigen::Vector2d sol = red.lu().solve(rr);
    const Eigen::Vector3d x = testing::dense(ac).lu().solve(testing::to_eigen(bc));
    CHECK(x[1] == 0.75);
    CHECK(std::abs(x[0] - sol[0]) < 1e-14);
    CHECK(std::abs(x[2] - sol[1]) < 1e-14);
    const auto dc = testing::dense(ac);
    CHECK((dc - dc.transpose()).norm() == 0.0);

    // the eliminator gives the same system
    DirichletEliminator elim(spd, c.dofs);
    auto rhs2 = f;
    elim.apply(rhs2, c.values);
    CHECK(rhs2 == bc);
    CHECK((testing::dense(elim.matrix()) - dc).norm() == 0.0);
  }

  TEST_CASE("pressure centering and interpolation") {
    const FeSystem fe(testing::square_mesh(4), ProblemKind::Cavity);
    const auto ops = assemble_static_operators(fe);
    auto p = interpolate_pressure(fe, [](double x, double y) { return 3.0 + x + 2.0 * y; });
    CHECK(pressure_mean(ops, p) == doctest::Approx(4.5).epsilon(1e-12));
    center_pressure(ops, p);
    CHECK(std::abs(pressure_mean(ops, p)) < 1e-14);
    const auto s = interpolate_scalar(fe, [](double x, double y) { return x * x + y; });
    CHECK(fe.evaluate_p2(s, Point{0.3, 0.7}) == doctest::Approx(0.79).epsilon(1e-12));
    CHECK(scalar_l2(ops, s) == doctest::Approx(std::sqrt(1.0 / 5 + 1.0 / 3 + 1.0 / 3)).epsilon(1e-12));
    CHECK_THROWS_AS(fe.evaluate_p2(s, Point{1.5, 0.5}), std::out_of_range);
  }
}
