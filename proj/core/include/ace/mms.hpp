#pragma once

#include <utility>

#include "ace/fe.hpp"

namespace ace {

/// Time amplitude of the manufactured solution.
enum class AmplitudeLaw {
  Cosine,        ///< A(t) = 10 cos t
  GrowingCosine  ///< A(t) = 10 (1 + 0.1 t) cos t
};

struct ExactValues {
  Vec2 u;
  double T = 0.0;
  double p = 0.0;
};

/// First and second spatial derivatives plus time derivatives of the
/// manufactured fields at one point.
struct ExactDerivatives {
  Vec2 u_t, u_x, u_y, u_xx, u_yy;
  double T_t = 0.0, T_x = 0.0, T_y = 0.0, T_xx = 0.0, T_yy = 0.0;
  double p_x = 0.0, p_y = 0.0;
};

/// Stream-function manufactured solution
///   u = (psi_y, -psi_x),  psi = (A/2) x^2 (x-1)^2 y^2 (y-1)^2,
///   T = u1 + u2,  p = A (2x-1)(2y-1),
/// optionally scaled by a constant factor (the perturbed members).
class ExactSolution {
 public:
  explicit ExactSolution(AmplitudeLaw law, double scale = 1.0) : law_(law), scale_(scale) {}

  AmplitudeLaw law() const { return law_; }
  double scale() const { return scale_; }

  double amplitude(double t) const;
  double amplitude_rate(double t) const;

  ExactValues eval(double x, double y, double t) const;
  ExactDerivatives derivatives(double x, double y, double t) const;

  /// f = u_t + u.grad u - Pr lap u + grad p - Pr Ra xi T,  xi = (0, 1)
  Vec2 momentum_forcing(double x, double y, double t, double pr, double ra) const;
  /// g = T_t + u.grad T - lap T
  double heat_forcing(double x, double y, double t) const;

 private:
  AmplitudeLaw law_;
  double scale_;
};

ExactValues eval_exact(const ExactSolution& sol, double x, double y, double t);

struct Forcings {
  std::function<Vec2(double x, double y, double t)> f;
  std::function<double(double x, double y, double t)> g;
};
Forcings forcings(const ExactSolution& sol, double pr, double ra);

/// The pair (1 + delta) and (1 - delta) times the solution. Their average is
/// the unperturbed solution.
std::pair<ExactSolution, ExactSolution> perturbed_family(const ExactSolution& sol, double delta);

}  // namespace ace
