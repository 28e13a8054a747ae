#include "ace/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace ace {

namespace {

void add_orbit3(TriangleRule& rule, double a, double w) {
  const double b = 1.0 - 2.0 * a;
  rule.nodes.push_back({a, a, w});
  rule.nodes.push_back({b, a, w});
  rule.nodes.push_back({a, b, w});
}

void add_orbit6(TriangleRule& rule, double a, double b, double w) {
  const double c = 1.0 - a - b;
  rule.nodes.push_back({a, b, w});
  rule.nodes.push_back({b, a, w});
  rule.nodes.push_back({a, c, w});
  rule.nodes.push_back({c, a, w});
  rule.nodes.push_back({b, c, w});
  rule.nodes.push_back({c, b, w});
}

TriangleRule make_degree5() {
  TriangleRule rule;
  rule.degree = 5;
  const double s15 = std::sqrt(15.0);
  rule.nodes.push_back({1.0 / 3.0, 1.0 / 3.0, 9.0 / 40.0});
  add_orbit3(rule, (6.0 - s15) / 21.0, (155.0 - s15) / 1200.0);
  add_orbit3(rule, (6.0 + s15) / 21.0, (155.0 + s15) / 1200.0);
  return rule;
}

// Dunavant (1985) degree-8 rule.
TriangleRule make_degree8() {
  TriangleRule rule;
  rule.degree = 8;
  rule.nodes.push_back({1.0 / 3.0, 1.0 / 3.0, 0.144315607677787});
  add_orbit3(rule, 0.459292588292723, 0.095091634267285);
  add_orbit3(rule, 0.170569307751760, 0.103217370534718);
  add_orbit3(rule, 0.050547228317031, 0.032458497623198);
  add_orbit6(rule, 0.263112829634638, 0.008394777409958, 0.027230314174435);
  return rule;
}

}  // namespace

const TriangleRule& triangle_rule_degree5() {
  static const TriangleRule rule = make_degree5();
  return rule;
}

const TriangleRule& triangle_rule_degree8() {
  static const TriangleRule rule = make_degree8();
  return rule;
}

LineRule gauss_legendre_unit(int points) {
  if (points < 1) {
    throw std::invalid_argument("gauss_legendre_unit: points must be >= 1");
  }
  LineRule rule;
  rule.nodes.resize(points);
  rule.weights.resize(points);
  for (int i = 0; i < points; ++i) {
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= points; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = points * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) {
        break;
      }
    }
    rule.nodes[i] = 0.5 * (1.0 - x);
    rule.weights[i] = 1.0 / ((1.0 - x * x) * dp * dp);
  }
  return rule;
}

TriangleRule triangle_rule_collapsed(int points_per_direction) {
  const LineRule line = gauss_legendre_unit(points_per_direction);
  TriangleRule rule;
  rule.degree = 2 * points_per_direction - 2;
  for (int i = 0; i < points_per_direction; ++i) {
    for (int j = 0; j < points_per_direction; ++j) {
      const double s = line.nodes[i];
      const double t = line.nodes[j];
      // (s, t) in the unit square -> (s, t(1-s)); Jacobian (1-s); area 1/2.
      rule.nodes.push_back({s, t * (1.0 - s), 2.0 * line.weights[i] * line.weights[j] * (1.0 - s)});
    }
  }
  return rule;
}

}  // namespace ace
