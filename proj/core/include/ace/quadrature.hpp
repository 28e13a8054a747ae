#pragma once

#include <vector>

namespace ace {

/// Quadrature rule on the reference triangle (0,0),(1,0),(0,1).
/// Weights sum to 1, so integrals are `area * sum(w_q f(x_q))`.
struct TriangleRule {
  struct Node {
    double xi;
    double eta;
    double weight;
  };
  std::vector<Node> nodes;
  int degree = 0;
};

/// Seven-point rule exact for polynomials of degree 5.
const TriangleRule& triangle_rule_degree5();
/// Sixteen-point rule exact for polynomials of degree 8.
const TriangleRule& triangle_rule_degree8();
/// Collapsed (Duffy) tensor Gauss rule with `points_per_direction`^2 nodes,
/// exact for degree 2*points_per_direction - 2.
TriangleRule triangle_rule_collapsed(int points_per_direction);

/// Gauss-Legendre nodes and weights on [0, 1] (weights sum to 1).
struct LineRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
LineRule gauss_legendre_unit(int points);

}  // namespace ace
