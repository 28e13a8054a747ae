#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ace/ace.hpp"

namespace ace {

/// Cavity Rayleigh-number continuation.
struct CavitySettings {
  std::vector<double> ra_list{1e3, 1e4, 1e5, 1e6};
  int max_steps = 20000;
  int k_star = 5;
  double reinit_interval = 1e-3;
  bool write_vtk = true;
};

/// ACE versus coupled BDF1 wall-clock comparison (J = 1).
struct TimingSettings {
  std::vector<double> ra_list{1e4, 1e5, 5e5, 1e6};
  int steps = 100;
  /// Ra above this uses dt_large_ra.
  double large_ra_threshold = 1e5;
  double dt_large_ra = 1e-4;
};

/// Manufactured-solution convergence study.
struct ConvergenceSettings {
  std::vector<int> m_list{8, 16, 24, 32, 40};
  double pr = 1.0;
  double ra = 100.0;
  double t_star = 1.0;
  double delta = 1e-3;
  /// epsilon = eps_ratio * dt
  double eps_ratio = 1.0;
};

/// Manufactured-solution predictability experiment.
struct PredictabilitySettings {
  std::vector<double> ra_list{1e2, 1e3, 1e4};
  double pr = 1.0;
  double t_star = 0.1;
  /// epsilon = eps_ratio * dt
  double eps_ratio = 1.0;
  int mesh_n = 32;
  int k_star = 5;
  double reinit_interval = 1e-3;
  /// Shift of the short-horizon gamma series.
  double tau_series = 0.01;
};

struct RunConfig {
  SimConfig sim;
  CavitySettings cavity;
  TimingSettings timing;
  ConvergenceSettings convergence;
  PredictabilitySettings predictability;
};

/// Reads `[section]` headers and `key = value` lines; `#` starts a comment.
/// Throws std::invalid_argument with the line number on malformed input and
/// on unknown sections or keys.
void apply_config(RunConfig& cfg, std::istream& in);
void apply_config_file(RunConfig& cfg, const std::string& path);
/// Single assignment such as "cavity.max_steps=100".
void apply_override(RunConfig& cfg, const std::string& dotted_key, const std::string& value);

/// Caps the experiments for quick desk runs: cavity Ra <= 1e5 on 32x32,
/// convergence m <= 24, timing at Ra = 1e4 only.
void apply_desk_scale(RunConfig& cfg);

/// Every resolved key in `section.key=value` form, sorted.
std::map<std::string, std::string> flatten(const RunConfig& cfg);
/// Stable 64-bit FNV-1a hash of the flattened config, as 16 hex digits.
std::string run_id(const RunConfig& cfg);
/// Writes the flattened config as `# key=value` lines.
void write_config_header(std::ostream& out, const RunConfig& cfg);

std::string to_string(PreconditionerKind kind);
PreconditionerKind parse_preconditioner(const std::string& name);

}  // namespace ace
