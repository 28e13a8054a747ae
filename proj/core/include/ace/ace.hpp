#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "ace/fe.hpp"
#include "ace/linsolve.hpp"

namespace ace {

using Vector = std::vector<double>;

/// Physical and numerical parameters of one run.
struct SimConfig {
  double pr = 0.71;
  double ra = 1e4;
  double dt0 = 1e-3;
  /// epsilon = eps_ratio * dt, so the grad-div weight dt/epsilon is 1/eps_ratio.
  double eps_ratio = 0.01;
  double c_dagger = 0.35;
  double t_star = 1.0;
  int ensemble_size = 2;
  int mesh_n = 64;
  GmresSettings gmres{};
  /// Preconditioner for velocity (ACE) and coupled velocity-pressure (BDF1) systems.
  PreconditionerKind momentum_preconditioner = PreconditionerKind::SparseLu;
  PreconditionerKind temperature_preconditioner = PreconditionerKind::Ilu0;
  /// Preconditioners are reused across steps until a solve needs more
  /// iterations than this; 0 rebuilds every step.
  int precond_refresh_iterations = 10;
  double cg_tol = 1e-10;
  int cg_max_iter = 2000;
  double steady_tol = 1e-5;
  double dt_floor = 1e-10;
  std::uint64_t seed = 20170905;
  int jobs = 1;

  double grad_div_weight() const { return 1.0 / eps_ratio; }
  double epsilon(double dt) const { return eps_ratio * dt; }
  /// Throws std::invalid_argument if any parameter is out of range.
  void validate() const;
};

/// Per-member coefficient vectors at one time level.
struct EnsembleState {
  std::vector<Vector> u;
  std::vector<Vector> p;
  std::vector<Vector> T;
  double t = 0.0;
  double dt = 0.0;

  int size() const { return static_cast<int>(u.size()); }
};

enum class Field { Velocity, Temperature, Pressure };

Vector ensemble_mean(const EnsembleState& state, Field field);
/// Member j (0-based) minus the ensemble mean. Throws std::out_of_range.
Vector fluctuation(const EnsembleState& state, Field field, int j);

/// Forcing and boundary data, possibly member-dependent. Empty functions mean
/// zero forcing / the FeSystem's static temperature boundary values.
struct Problem {
  std::function<Vec2(int member, double x, double y, double t)> f;
  std::function<double(int member, double x, double y, double t)> g;
  std::function<double(int member, double x, double y, double t)> temperature_boundary;
};

Problem cavity_problem();

/// Overwrites Dirichlet dofs with boundary data at time t and re-centers pressures.
void impose_constraints(EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                        const Problem& problem);

struct CflResult {
  bool passes = true;
  double max_fluctuation_gradient = 0.0;  ///< max_j ||grad u'_j||^2
  double value = 0.0;                     ///< C_dagger dt / h * max_j ||grad u'_j||^2
};

CflResult cfl_check(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                    const SimConfig& cfg);

/// Shared ensemble velocity matrix
///   (1/dt) M_u + N(mean) + Pr K_u + (dt/eps) GD   (no boundary conditions).
SparseMatrix build_velocity_matrix(const FeSystem& fe, const SparseOperatorSet& ops, const SimConfig& cfg,
                                   double dt, std::span<const double> mean_velocity);
/// Shared ensemble temperature matrix (1/dt) M_T + N*(mean) + K_T.
SparseMatrix build_temperature_matrix(const FeSystem& fe, const SparseOperatorSet& ops, double dt,
                                      std::span<const double> mean_velocity);

struct StepReport {
  std::vector<SolverReport> velocity;
  std::vector<SolverReport> temperature;
  std::vector<SolverReport> pressure;
  int halvings = 0;
  double cfl_value = 0.0;

  int velocity_iterations() const;
  int temperature_iterations() const;
  int pressure_iterations() const;
};

/// One ACE step for the whole ensemble at the state's dt. Throws SolverError
/// if a linear solve does not converge.
EnsembleState ace_step(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                       const SimConfig& cfg, const Problem& problem, StepReport* report = nullptr);

/// Halves dt until the fluctuation CFL condition holds, then takes one ACE
/// step. dt never grows. Throws std::runtime_error below cfg.dt_floor.
EnsembleState advance_adaptive(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                               const SimConfig& cfg, const Problem& problem, StepReport* report = nullptr);

/// Coupled linearly implicit BDF1 (backward Euler): every member solves the
/// saddle-point Oseen system linearized at its own velocity, then an implicit
/// temperature step convected by the new velocity.
EnsembleState bdf1_coupled_step(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                                const SimConfig& cfg, const Problem& problem, StepReport* report = nullptr);

/// ACE stepper that caches the dt-dependent static part of the shared
/// velocity matrix between steps.
class AceStepper {
 public:
  AceStepper(const FeSystem& fe, const SparseOperatorSet& ops, SimConfig cfg, Problem problem);

  EnsembleState step(const EnsembleState& state, StepReport* report = nullptr);
  EnsembleState advance(const EnsembleState& state, StepReport* report = nullptr);

  const SimConfig& config() const { return cfg_; }
  const Problem& problem() const { return problem_; }
  /// Shared matrices of the last step, before boundary conditions.
  const SparseMatrix& last_velocity_matrix() const { return last_velocity_; }
  const SparseMatrix& last_temperature_matrix() const { return last_temperature_; }

 private:
  const SparseMatrix& velocity_static(double dt);
  const SparseMatrix& temperature_static(double dt);

  const FeSystem& fe_;
  const SparseOperatorSet& ops_;
  SimConfig cfg_;
  Problem problem_;
  double velocity_dt_ = -1.0;
  double temperature_dt_ = -1.0;
  SparseMatrix velocity_static_;
  SparseMatrix temperature_static_;
  ReusedPreconditioner velocity_precond_;
  ReusedPreconditioner temperature_precond_;
  SparseMatrix last_velocity_;
  SparseMatrix last_temperature_;
};

/// Coupled BDF1 stepper; owns the saddle-point block layout.
class Bdf1Stepper {
 public:
  Bdf1Stepper(const FeSystem& fe, const SparseOperatorSet& ops, SimConfig cfg, Problem problem);
  ~Bdf1Stepper();
  Bdf1Stepper(const Bdf1Stepper&) = delete;
  Bdf1Stepper& operator=(const Bdf1Stepper&) = delete;

  EnsembleState step(const EnsembleState& state, StepReport* report = nullptr);

 private:
  struct Layout;
  const FeSystem& fe_;
  const SparseOperatorSet& ops_;
  SimConfig cfg_;
  Problem problem_;
  std::unique_ptr<Layout> layout_;
  double precond_dt_ = -1.0;
  /// One pair per member: member matrices differ.
  std::vector<ReusedPreconditioner> coupled_precond_;
  std::vector<ReusedPreconditioner> temperature_precond_;
};

/// Max over members of the relative L2 increments of u and T.
/// Returns nullopt (and warns on stderr) if a denominator vanishes.
std::optional<double> relative_increment(const EnsembleState& prev, const EnsembleState& next,
                                         const SparseOperatorSet& ops);
bool steady_state_check(const EnsembleState& prev, const EnsembleState& next, const SparseOperatorSet& ops,
                        double tol = 1e-5);

/// Per-step log record, written as CSV.
struct StepLogRecord {
  int step = 0;
  double t = 0.0;
  double dt = 0.0;
  double cfl = 0.0;
  int velocity_iterations = 0;
  int temperature_iterations = 0;
  int pressure_iterations = 0;
  int halvings = 0;
  double increment = 0.0;
};

void write_step_log_header(std::ostream& out);
void write_step_log_row(std::ostream& out, const StepLogRecord& rec);

}  // namespace ace
