#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "ace/config.hpp"
#include "ace/diag.hpp"
#include "ace/mms.hpp"
#include "ace/perturb.hpp"

namespace ace {

/// Forcing and boundary data making each member's scaled manufactured
/// solution exact.
Problem mms_problem(std::vector<ExactSolution> members, double pr, double ra);
/// Nodal interpolants of each member's exact fields at time t.
EnsembleState mms_initial_state(const FeSystem& fe, const SparseOperatorSet& ops,
                                const std::vector<ExactSolution>& members, double t, double dt);

struct CavityRow {
  double ra = 0.0;
  int steps = 0;
  double t = 0.0;
  double dt = 0.0;
  int halvings = 0;
  bool converged = false;
  bool dt_never_increased = true;
  double u1_max = 0.0;
  double u2_max = 0.0;
  double nu_hot = 0.0;
  double nu_cold = 0.0;
};

struct CavityRun {
  CavityRow row;
  EnsembleState final_state;
  /// Norms of the ensemble mean after every step.
  std::vector<double> norm_u, norm_T, norm_p;
};

/// Integrates one Rayleigh number from `prev` plus/minus a bred vector to the
/// steady-state condition or `settings.max_steps`. `step_log` may be null.
CavityRun run_cavity_ra(const FeSystem& fe, const SparseOperatorSet& ops, const SimConfig& sim,
                        const CavitySettings& settings, const FieldSet& prev, std::uint64_t seed,
                        std::ostream* step_log);

/// Ra continuation starting from the constant-one bootstrap. Writes
/// cavity_summary.csv, per-Ra step logs, Nusselt profiles and VTK snapshots.
std::vector<CavityRow> run_cavity(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

struct TimingRow {
  double ra = 0.0;
  double dt = 0.0;
  int steps = 0;
  double ace_seconds = 0.0;
  double bdf1_seconds = 0.0;
  long ace_velocity_iterations = 0;
  long ace_temperature_iterations = 0;
  long bdf1_coupled_iterations = 0;
  long bdf1_temperature_iterations = 0;
  double ace_final_norm_u = 0.0;
  double bdf1_final_norm_u = 0.0;

  double speedup() const { return bdf1_seconds / ace_seconds; }
};

/// One Rayleigh number: J = 1, identical solver settings, same initial state.
TimingRow time_steppers(const FeSystem& fe, const SparseOperatorSet& ops, SimConfig sim, double ra, double dt,
                        int steps);

/// Writes timing.csv (reproducible columns) and timing_wall.csv (wall clock).
std::vector<TimingRow> run_timing(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

/// Manufactured-solution run on an m x m mesh with dt = 1/(10 m).
ErrorRow convergence_point(const RunConfig& cfg, int m, std::ostream* step_log = nullptr);
/// Writes convergence.csv.
std::vector<ErrorRow> run_convergence(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log);

struct PredictabilityRow {
  double ra = 0.0;
  /// Per field u, T, p.
  std::array<double, 3> initial_separation{};
  std::array<double, 3> gamma{};
  std::array<std::optional<double>, 3> horizon{};
};

struct PredictabilitySeries {
  std::vector<double> times;
  std::vector<double> energy_plus, energy_minus, energy_mean;
  std::array<std::vector<double>, 3> variance;
  std::array<TimeSeries, 3> r;
};

PredictabilityRow predictability_point(const RunConfig& cfg, double ra, std::uint64_t seed,
                                       PredictabilitySeries* series = nullptr);
/// Writes predictability_series_ra*.csv, lyapunov_ra*.csv and predictability.csv.
std::vector<PredictabilityRow> run_predictability(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                                  std::ostream& log);

}  // namespace ace
