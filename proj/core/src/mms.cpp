#include "ace/mms.hpp"

#include <cmath>
#include <stdexcept>

namespace ace {

namespace {

// X(s) = s^2 (s-1)^2 and its derivatives; the same profile serves y.
struct Profile {
  double v, d1, d2, d3;
};

Profile profile(double s) {
  return {s * s * (s - 1.0) * (s - 1.0), 4.0 * s * s * s - 6.0 * s * s + 2.0 * s,
          12.0 * s * s - 12.0 * s + 2.0, 24.0 * s - 12.0};
}

}  // namespace

double ExactSolution::amplitude(double t) const {
  switch (law_) {
    case AmplitudeLaw::Cosine:
      return scale_ * 10.0 * std::cos(t);
    case AmplitudeLaw::GrowingCosine:
      return scale_ * 10.0 * (1.0 + 0.1 * t) * std::cos(t);
  }
  return 0.0;
}

double ExactSolution::amplitude_rate(double t) const {
  switch (law_) {
    case AmplitudeLaw::Cosine:
      return -scale_ * 10.0 * std::sin(t);
    case AmplitudeLaw::GrowingCosine:
      return scale_ * (std::cos(t) - 10.0 * (1.0 + 0.1 * t) * std::sin(t));
  }
  return 0.0;
}

ExactValues ExactSolution::eval(double x, double y, double t) const {
  const double h = 0.5 * amplitude(t);
  const Profile px = profile(x);
  const Profile py = profile(y);
  ExactValues out;
  out.u = {h * px.v * py.d1, -h * px.d1 * py.v};
  out.T = out.u.x + out.u.y;
  out.p = amplitude(t) * (2.0 * x - 1.0) * (2.0 * y - 1.0);
  return out;
}

ExactDerivatives ExactSolution::derivatives(double x, double y, double t) const {
  const double a = amplitude(t);
  const double h = 0.5 * a;
  const double ht = 0.5 * amplitude_rate(t);
  const Profile px = profile(x);
  const Profile py = profile(y);
  ExactDerivatives d;
  d.u_t = {ht * px.v * py.d1, -ht * px.d1 * py.v};
  d.u_x = {h * px.d1 * py.d1, -h * px.d2 * py.v};
  d.u_y = {h * px.v * py.d2, -h * px.d1 * py.d1};
  d.u_xx = {h * px.d2 * py.d1, -h * px.d3 * py.v};
  d.u_yy = {h * px.v * py.d3, -h * px.d1 * py.d2};
  d.T_t = d.u_t.x + d.u_t.y;
  d.T_x = d.u_x.x + d.u_x.y;
  d.T_y = d.u_y.x + d.u_y.y;
  d.T_xx = d.u_xx.x + d.u_xx.y;
  d.T_yy = d.u_yy.x + d.u_yy.y;
  d.p_x = 2.0 * a * (2.0 * y - 1.0);
  d.p_y = 2.0 * a * (2.0 * x - 1.0);
  return d;
}

Vec2 ExactSolution::momentum_forcing(double x, double y, double t, double pr, double ra) const {
  const ExactValues v = eval(x, y, t);
  const ExactDerivatives d = derivatives(x, y, t);
  const Vec2 conv{v.u.x * d.u_x.x + v.u.y * d.u_y.x, v.u.x * d.u_x.y + v.u.y * d.u_y.y};
  const Vec2 lap{d.u_xx.x + d.u_yy.x, d.u_xx.y + d.u_yy.y};
  return {d.u_t.x + conv.x - pr * lap.x + d.p_x,
          d.u_t.y + conv.y - pr * lap.y + d.p_y - pr * ra * v.T};
}

double ExactSolution::heat_forcing(double x, double y, double t) const {
  const ExactValues v = eval(x, y, t);
  const ExactDerivatives d = derivatives(x, y, t);
  return d.T_t + v.u.x * d.T_x + v.u.y * d.T_y - (d.T_xx + d.T_yy);
}

ExactValues eval_exact(const ExactSolution& sol, double x, double y, double t) { return sol.eval(x, y, t); }

Forcings forcings(const ExactSolution& sol, double pr, double ra) {
  Forcings out;
  out.f = [sol, pr, ra](double x, double y, double t) { return sol.momentum_forcing(x, y, t, pr, ra); };
  out.g = [sol](double x, double y, double t) { return sol.heat_forcing(x, y, t); };
  return out;
}

std::pair<ExactSolution, ExactSolution> perturbed_family(const ExactSolution& sol, double delta) {
  if (!(std::abs(delta) < 1.0)) {
    throw std::invalid_argument("perturbed_family: |delta| must be < 1");
  }
  return {ExactSolution(sol.law(), sol.scale() * (1.0 + delta)),
          ExactSolution(sol.law(), sol.scale() * (1.0 - delta))};
}

}  // namespace ace
