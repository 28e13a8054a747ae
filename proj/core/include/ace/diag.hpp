#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "ace/ace.hpp"
#include "ace/mms.hpp"

namespace ace {

/// Samples of a scalar quantity at strictly increasing times.
struct TimeSeries {
  std::vector<double> times;
  std::vector<double> values;

  /// Throws std::invalid_argument unless t exceeds the last time.
  void push(double t, double value);
  std::size_t size() const { return times.size(); }
};

enum class Wall { Hot, Cold };

struct NusseltProfile {
  std::vector<double> y;
  std::vector<double> nu;
};

/// Local Nusselt number -dT/dx on the hot wall (x = 0) and +... sign chosen so
/// that the conduction profile T = 1 - x gives +1 on both walls. Sampled at
/// three Gauss points per boundary edge, ordered by y.
NusseltProfile nusselt_local(const FeSystem& fe, std::span<const double> temperature, Wall wall);
/// Wall integral of the local Nusselt number.
double nusselt_avg(const FeSystem& fe, std::span<const double> temperature, Wall wall);

enum class Slice { HorizontalAtXHalf, VerticalAtYHalf };

/// HorizontalAtXHalf: max over y of u1(0.5, y); VerticalAtYHalf: max over x of
/// u2(x, 0.5). Sampled at P2 nodes on the line plus 100 uniform interior points.
double slice_max(const FeSystem& fe, std::span<const double> velocity, Slice which);

/// ||T|| + 0.5 ||u||^2
double energy(const SparseOperatorSet& ops, std::span<const double> u, std::span<const double> T);

struct VarianceParts {
  double mean_of_squares_minus_square_of_mean = 0.0;  ///< <||x||^2> - ||<x>||^2
  double mean_fluctuation_square = 0.0;               ///< <||x'||^2>
};
VarianceParts variance_parts(std::span<const Vector> members, const SparseMatrix& mass);
/// Ensemble variance <||x'||^2> in the norm induced by `mass`.
double variance(std::span<const Vector> members, const SparseMatrix& mass);

/// ||plus - minus||^2 / (||plus|| ||minus||). Throws std::domain_error on a
/// zero denominator.
double relative_fluctuation(std::span<const double> plus, std::span<const double> minus, const SparseMatrix& mass);

/// gamma_tau(t) = log(r(t + tau) / r(t)) / (2 tau) at every sample t with
/// t + tau in the series. Throws std::domain_error on non-positive r.
TimeSeries effective_lyapunov(const TimeSeries& r, double tau);

/// log(delta / initial_separation) / gamma0, or nullopt (unbounded horizon)
/// when gamma0 <= 0.
std::optional<double> predictability_horizon(double gamma0, double initial_separation, double delta);

/// Quadrature (degree 8) L2 errors against closed-form fields.
double l2_error_velocity(const FeSystem& fe, std::span<const double> u, const std::function<Vec2(double, double)>& exact);
double l2_error_p2(const FeSystem& fe, std::span<const double> s, const std::function<double(double, double)>& exact);
double l2_error_p1(const FeSystem& fe, std::span<const double> p, const std::function<double(double, double)>& exact);

struct ErrorRow {
  int m = 0;
  double dt = 0.0;
  double error_u = 0.0;
  double error_T = 0.0;
  double error_p = 0.0;
  std::optional<double> rate_u, rate_T, rate_p;
};

/// log2(e1/e2) / log2(dt1/dt2), or nullopt when either error is zero.
std::optional<double> convergence_rate(double e1, double e2, double dt1, double dt2);

/// Fills the rate columns from successive rows.
void fill_rates(std::vector<ErrorRow>& rows);

/// Running L^inf-in-time L2 errors of the ensemble mean against a solution.
class ErrorTracker {
 public:
  ErrorTracker(const FeSystem& fe, const ExactSolution& exact) : fe_(fe), exact_(exact) {}
  void record(const EnsembleState& state);
  double error_u() const { return error_u_; }
  double error_T() const { return error_T_; }
  double error_p() const { return error_p_; }

 private:
  const FeSystem& fe_;
  ExactSolution exact_;
  double error_u_ = 0.0;
  double error_T_ = 0.0;
  double error_p_ = 0.0;
};

}  // namespace ace
