#include "ace/diag.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace ace {

void TimeSeries::push(double t, double value) {
  if (!times.empty() && !(t > times.back())) {
    throw std::invalid_argument("TimeSeries::push: times must be strictly increasing");
  }
  times.push_back(t);
  values.push_back(value);
}

namespace {

constexpr std::array<std::array<int, 2>, 3> kLocalEdges{{{0, 1}, {1, 2}, {2, 0}}};

BoundaryLabel wall_label(Wall wall) { return wall == Wall::Hot ? BoundaryLabel::HotWall : BoundaryLabel::ColdWall; }

template <typename Visitor>
void visit_wall_points(const FeSystem& fe, std::span<const double> T, Wall wall, const LineRule& rule,
                       Visitor&& visit) {
  const BoundaryLabel label = wall_label(wall);
  bool found = false;
  for (const auto& face : fe.boundary_faces()) {
    if (face.label != label) {
      continue;
    }
    found = true;
    const auto& geom = fe.geometry(face.element);
    const auto& a = geom.vertices[kLocalEdges[face.local_edge][0]];
    const auto& b = geom.vertices[kLocalEdges[face.local_edge][1]];
    const double length = std::hypot(b.x - a.x, b.y - a.y);
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double s = rule.nodes[q];
      const Point x{a.x + s * (b.x - a.x), a.y + s * (b.y - a.y)};
      const Vec2 g = fe.gradient_p2(T, face.element, geom.barycentric(x));
      // Conduction profile 1 - x has dT/dx = -1 on both walls.
      visit(x.y, -g.x, rule.weights[q] * length);
    }
  }
  if (!found) {
    throw std::invalid_argument("nusselt: wall not present in the mesh labeling");
  }
}

}  // namespace

NusseltProfile nusselt_local(const FeSystem& fe, std::span<const double> temperature, Wall wall) {
  std::vector<std::pair<double, double>> samples;
  visit_wall_points(fe, temperature, wall, gauss_legendre_unit(3),
                    [&](double y, double nu, double) { samples.emplace_back(y, nu); });
  std::sort(samples.begin(), samples.end());
  NusseltProfile out;
  for (const auto& [y, nu] : samples) {
    out.y.push_back(y);
    out.nu.push_back(nu);
  }
  return out;
}

double nusselt_avg(const FeSystem& fe, std::span<const double> temperature, Wall wall) {
  double total = 0.0;
  visit_wall_points(fe, temperature, wall, gauss_legendre_unit(3),
                    [&](double, double nu, double w) { total += w * nu; });
  return total;
}

double slice_max(const FeSystem& fe, std::span<const double> velocity, Slice which) {
  const int n = fe.num_p2();
  const bool horizontal = which == Slice::HorizontalAtXHalf;
  const auto component = horizontal ? velocity.subspan(0, n) : velocity.subspan(n, n);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const auto& p = fe.p2_nodes()[i];
    const double coord = horizontal ? p.x : p.y;
    if (std::abs(coord - 0.5) <= 1e-12) {
      best = std::max(best, component[i]);
    }
  }
  constexpr int samples = 100;
  for (int k = 1; k <= samples; ++k) {
    const double s = static_cast<double>(k) / (samples + 1);
    const Point p = horizontal ? Point{0.5, s} : Point{s, 0.5};
    best = std::max(best, fe.evaluate_p2(component, p));
  }
  return best;
}

double energy(const SparseOperatorSet& ops, std::span<const double> u, std::span<const double> T) {
  const double un = velocity_l2(ops, u);
  return scalar_l2(ops, T) + 0.5 * un * un;
}

VarianceParts variance_parts(std::span<const Vector> members, const SparseMatrix& mass) {
  if (members.empty()) {
    throw std::invalid_argument("variance: empty ensemble");
  }
  const double inv = 1.0 / static_cast<double>(members.size());
  Vector mean(members.front().size(), 0.0);
  for (const auto& m : members) {
    axpy(1.0, m, mean);
  }
  for (double& v : mean) {
    v *= inv;
  }
  auto sq = [&](std::span<const double> v) { return dot(v, mass.multiply(v)); };
  VarianceParts out;
  double mean_sq = 0.0;
  double fluct_sq = 0.0;
  for (const auto& m : members) {
    mean_sq += sq(m);
    Vector f(m.size());
    for (std::size_t i = 0; i < f.size(); ++i) {
      f[i] = m[i] - mean[i];
    }
    fluct_sq += sq(f);
  }
  out.mean_of_squares_minus_square_of_mean = mean_sq * inv - sq(mean);
  out.mean_fluctuation_square = fluct_sq * inv;
  return out;
}

double variance(std::span<const Vector> members, const SparseMatrix& mass) {
  return variance_parts(members, mass).mean_fluctuation_square;
}

double relative_fluctuation(std::span<const double> plus, std::span<const double> minus, const SparseMatrix& mass) {
  Vector diff(plus.size());
  for (std::size_t i = 0; i < diff.size(); ++i) {
    diff[i] = plus[i] - minus[i];
  }
  const double np = std::sqrt(std::max(0.0, dot(plus, mass.multiply(plus))));
  const double nm = std::sqrt(std::max(0.0, dot(minus, mass.multiply(minus))));
  if (np == 0.0 || nm == 0.0) {
    throw std::domain_error("relative_fluctuation: zero-norm member");
  }
  return dot(diff, mass.multiply(diff)) / (np * nm);
}

TimeSeries effective_lyapunov(const TimeSeries& r, double tau) {
  if (!(tau > 0.0)) {
    throw std::invalid_argument("effective_lyapunov: tau must be positive");
  }
  for (double v : r.values) {
    if (!(v > 0.0)) {
      throw std::domain_error("effective_lyapunov: r must be positive");
    }
  }
  TimeSeries out;
  const double tol = 1e-9 * std::max(1.0, tau);
  std::size_t j = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double target = r.times[i] + tau;
    while (j < r.size() && r.times[j] < target - tol) {
      ++j;
    }
    if (j >= r.size()) {
      break;
    }
    if (std::abs(r.times[j] - target) <= tol) {
      out.push(r.times[i], std::log(r.values[j] / r.values[i]) / (2.0 * tau));
    }
  }
  return out;
}

std::optional<double> predictability_horizon(double gamma0, double initial_separation, double delta) {
  if (!(initial_separation > 0.0) || !(delta > 0.0)) {
    throw std::invalid_argument("predictability_horizon: separations must be positive");
  }
  if (!(gamma0 > 0.0)) {
    return std::nullopt;
  }
  return std::log(delta / initial_separation) / gamma0;
}

namespace {

template <typename Integrand>
double integrate_error(const FeSystem& fe, Integrand&& integrand) {
  const auto& rule = triangle_rule_degree8();
  double total = 0.0;
  for (int e = 0; e < fe.num_elements(); ++e) {
    const auto& geom = fe.geometry(e);
    for (const auto& node : rule.nodes) {
      const Point x = geom.map(node.xi, node.eta);
      const std::array<double, 3> lambda{1.0 - node.xi - node.eta, node.xi, node.eta};
      total += node.weight * geom.area * integrand(e, lambda, x);
    }
  }
  return std::sqrt(std::max(0.0, total));
}

}  // namespace

double l2_error_velocity(const FeSystem& fe, std::span<const double> u,
                         const std::function<Vec2(double, double)>& exact) {
  const int n = fe.num_p2();
  const auto u1 = u.subspan(0, n);
  const auto u2 = u.subspan(n, n);
  return integrate_error(fe, [&](int e, const std::array<double, 3>& l, const Point& x) {
    const Vec2 ex = exact(x.x, x.y);
    const double d1 = fe.evaluate_p2(u1, e, l) - ex.x;
    const double d2 = fe.evaluate_p2(u2, e, l) - ex.y;
    return d1 * d1 + d2 * d2;
  });
}

double l2_error_p2(const FeSystem& fe, std::span<const double> s, const std::function<double(double, double)>& exact) {
  return integrate_error(fe, [&](int e, const std::array<double, 3>& l, const Point& x) {
    const double d = fe.evaluate_p2(s, e, l) - exact(x.x, x.y);
    return d * d;
  });
}

double l2_error_p1(const FeSystem& fe, std::span<const double> p, const std::function<double(double, double)>& exact) {
  return integrate_error(fe, [&](int e, const std::array<double, 3>& l, const Point& x) {
    const auto& dofs = fe.element_dofs(e);
    const double ph = l[0] * p[dofs[0]] + l[1] * p[dofs[1]] + l[2] * p[dofs[2]];
    const double d = ph - exact(x.x, x.y);
    return d * d;
  });
}

std::optional<double> convergence_rate(double e1, double e2, double dt1, double dt2) {
  if (!(e1 > 0.0) || !(e2 > 0.0) || dt1 == dt2) {
    return std::nullopt;
  }
  return std::log2(e1 / e2) / std::log2(dt1 / dt2);
}

void fill_rates(std::vector<ErrorRow>& rows) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& a = rows[i - 1];
    auto& b = rows[i];
    b.rate_u = convergence_rate(a.error_u, b.error_u, a.dt, b.dt);
    b.rate_T = convergence_rate(a.error_T, b.error_T, a.dt, b.dt);
    b.rate_p = convergence_rate(a.error_p, b.error_p, a.dt, b.dt);
  }
}

void ErrorTracker::record(const EnsembleState& state) {
  const double t = state.t;
  const Vector u = ensemble_mean(state, Field::Velocity);
  const Vector T = ensemble_mean(state, Field::Temperature);
  const Vector p = ensemble_mean(state, Field::Pressure);
  error_u_ = std::max(error_u_, l2_error_velocity(fe_, u, [&](double x, double y) { return exact_.eval(x, y, t).u; }));
  error_T_ = std::max(error_T_, l2_error_p2(fe_, T, [&](double x, double y) { return exact_.eval(x, y, t).T; }));
  error_p_ = std::max(error_p_, l2_error_p1(fe_, p, [&](double x, double y) { return exact_.eval(x, y, t).p; }));
}

}  // namespace ace
