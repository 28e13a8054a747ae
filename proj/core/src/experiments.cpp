#include "ace/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>

namespace ace {

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string opt_num(const std::optional<double>& v) { return v ? num(*v) : std::string("-"); }

std::string ra_tag(double ra) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", ra);
  return buf;
}

std::ofstream open_output(const std::filesystem::path& path, const RunConfig& cfg) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  write_config_header(out, cfg);
  return out;
}

struct Discretization {
  std::shared_ptr<const Mesh> mesh;
  std::unique_ptr<FeSystem> fe;
  SparseOperatorSet ops;
};

Discretization discretize(int n, ProblemKind kind) {
  Discretization d;
  d.mesh = std::make_shared<const Mesh>(
      build_structured_mesh(n, kind == ProblemKind::Cavity ? LabelScheme::Cavity : LabelScheme::Mms));
  d.fe = std::make_unique<FeSystem>(d.mesh, kind);
  d.ops = assemble_static_operators(*d.fe);
  return d;
}

std::vector<double> vertex_values(const FeSystem& fe, std::span<const double> p2) {
  return {p2.begin(), p2.begin() + fe.num_p1()};
}

void write_fields_vtk(const std::filesystem::path& path, const FeSystem& fe, const Vector& u, const Vector& T,
                      const Vector& p, const std::string& title) {
  const int nv = fe.num_p1();
  const int n = fe.num_p2();
  std::vector<double> velocity(2 * nv);
  for (int i = 0; i < nv; ++i) {
    velocity[2 * i] = u[i];
    velocity[2 * i + 1] = u[n + i];
  }
  const auto temperature = vertex_values(fe, T);
  const std::vector<VtkPointField> fields{{"velocity", velocity, 2}, {"temperature", temperature, 1},
                                          {"pressure", p, 1}};
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot write " + path.string());
  }
  write_vtk(out, fe.mesh(), fields, title);
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

Problem mms_problem(std::vector<ExactSolution> members, double pr, double ra) {
  Problem p;
  p.f = [members, pr, ra](int j, double x, double y, double t) {
    return members.at(j).momentum_forcing(x, y, t, pr, ra);
  };
  p.g = [members](int j, double x, double y, double t) { return members.at(j).heat_forcing(x, y, t); };
  p.temperature_boundary = [members](int j, double x, double y, double t) {
    return members.at(j).eval(x, y, t).T;
  };
  return p;
}

EnsembleState mms_initial_state(const FeSystem& fe, const SparseOperatorSet& ops,
                                const std::vector<ExactSolution>& members, double t, double dt) {
  EnsembleState s;
  s.t = t;
  s.dt = dt;
  for (const auto& m : members) {
    s.u.push_back(interpolate_velocity(fe, [&](double x, double y) { return m.eval(x, y, t).u; }));
    s.T.push_back(interpolate_scalar(fe, [&](double x, double y) { return m.eval(x, y, t).T; }));
    Vector p = interpolate_pressure(fe, [&](double x, double y) { return m.eval(x, y, t).p; });
    center_pressure(ops, p);
    s.p.push_back(std::move(p));
  }
  return s;
}

CavityRun run_cavity_ra(const FeSystem& fe, const SparseOperatorSet& ops, const SimConfig& sim,
                        const CavitySettings& settings, const FieldSet& prev, std::uint64_t seed,
                        std::ostream* step_log) {
  const Problem problem = cavity_problem();
  SimConfig single = sim;
  single.ensemble_size = 1;
  const auto pair = random_pair(seed);
  const auto bv = breed(prev, pair, settings.k_star, settings.reinit_interval, sim.dt0,
                        ace_breed_stepper(fe, ops, single, problem), fe_breeding_space(fe, ops));

  CavityRun run;
  EnsembleState state = build_cavity_initial_conditions(fe, ops, problem, prev, bv, 0.0, sim.dt0);
  AceStepper stepper(fe, ops, sim, problem);
  if (step_log) {
    write_step_log_header(*step_log);
  }
  for (int k = 1; k <= settings.max_steps; ++k) {
    StepReport report;
    EnsembleState next = stepper.advance(state, &report);
    if (next.dt > state.dt) {
      run.row.dt_never_increased = false;
    }
    const auto inc = relative_increment(state, next, ops);
    state = std::move(next);
    run.row.steps = k;
    run.row.halvings += report.halvings;
    run.norm_u.push_back(velocity_l2(ops, ensemble_mean(state, Field::Velocity)));
    run.norm_T.push_back(scalar_l2(ops, ensemble_mean(state, Field::Temperature)));
    run.norm_p.push_back(pressure_l2(ops, ensemble_mean(state, Field::Pressure)));
    if (step_log) {
      write_step_log_row(*step_log, {k, state.t, state.dt, report.cfl_value, report.velocity_iterations(),
                                     report.temperature_iterations(), report.pressure_iterations(),
                                     report.halvings, inc.value_or(-1.0)});
    }
    if (inc && *inc <= sim.steady_tol) {
      run.row.converged = true;
      break;
    }
  }
  const Vector u = ensemble_mean(state, Field::Velocity);
  const Vector T = ensemble_mean(state, Field::Temperature);
  run.row.ra = sim.ra;
  run.row.t = state.t;
  run.row.dt = state.dt;
  run.row.u1_max = slice_max(fe, u, Slice::HorizontalAtXHalf);
  run.row.u2_max = slice_max(fe, u, Slice::VerticalAtYHalf);
  run.row.nu_hot = nusselt_avg(fe, T, Wall::Hot);
  run.row.nu_cold = nusselt_avg(fe, T, Wall::Cold);
  run.final_state = std::move(state);
  return run;
}

std::vector<CavityRow> run_cavity(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  const auto d = discretize(cfg.sim.mesh_n, ProblemKind::Cavity);
  const FeSystem& fe = *d.fe;
  FieldSet prev = constant_fields(fe, 1.0);
  std::vector<CavityRow> rows;
  for (std::size_t i = 0; i < cfg.cavity.ra_list.size(); ++i) {
    SimConfig sim = cfg.sim;
    sim.ra = cfg.cavity.ra_list[i];
    sim.ensemble_size = 2;
    const std::string tag = ra_tag(sim.ra);
    log << "cavity: Ra=" << tag << " on " << sim.mesh_n << "x" << sim.mesh_n << '\n';
    auto step_log = open_output(out_dir / ("cavity_steps_ra" + tag + ".csv"), cfg);
    const auto run = run_cavity_ra(fe, d.ops, sim, cfg.cavity, prev, cfg.sim.seed + i, &step_log);
    rows.push_back(run.row);
    log << "  steps=" << run.row.steps << " converged=" << run.row.converged << " u1max=" << num(run.row.u1_max)
        << " u2max=" << num(run.row.u2_max) << " Nu=" << num(run.row.nu_hot) << '\n';

    const Vector u = ensemble_mean(run.final_state, Field::Velocity);
    const Vector T = ensemble_mean(run.final_state, Field::Temperature);
    const Vector p = ensemble_mean(run.final_state, Field::Pressure);
    {
      auto out = open_output(out_dir / ("nusselt_ra" + tag + ".csv"), cfg);
      const auto hot = nusselt_local(fe, T, Wall::Hot);
      const auto cold = nusselt_local(fe, T, Wall::Cold);
      out << "y,nu_hot,nu_cold\n";
      for (std::size_t k = 0; k < hot.y.size(); ++k) {
        out << num(hot.y[k]) << ',' << num(hot.nu[k]) << ',' << num(cold.nu[k]) << '\n';
      }
    }
    if (cfg.cavity.write_vtk) {
      write_fields_vtk(out_dir / ("cavity_ra" + tag + ".vtk"), fe, u, T, p, "cavity Ra=" + tag);
    }
    prev = to_fields(fe, u, T, p);
    if (!run.row.converged) {
      log << "  warning: steady state not reached within " << cfg.cavity.max_steps << " steps\n";
    }
  }
  auto out = open_output(out_dir / "cavity_summary.csv", cfg);
  out << "ra,steps,time,dt,halvings,converged,u1_max,u2_max,nu_avg_hot,nu_avg_cold\n";
  for (const auto& r : rows) {
    out << num(r.ra) << ',' << r.steps << ',' << num(r.t) << ',' << num(r.dt) << ',' << r.halvings << ','
        << (r.converged ? 1 : 0) << ',' << num(r.u1_max) << ',' << num(r.u2_max) << ',' << num(r.nu_hot) << ','
        << num(r.nu_cold) << '\n';
  }
  return rows;
}

TimingRow time_steppers(const FeSystem& fe, const SparseOperatorSet& ops, SimConfig sim, double ra, double dt,
                        int steps) {
  sim.ra = ra;
  sim.ensemble_size = 1;
  const Problem problem = cavity_problem();
  EnsembleState initial;
  initial.dt = dt;
  const FieldSet ones = constant_fields(fe, 1.0);
  initial.u.resize(1);
  initial.T.resize(1);
  initial.p.resize(1);
  from_fields(fe, ones, initial.u[0], initial.T[0], initial.p[0]);
  impose_constraints(initial, fe, ops, problem);

  TimingRow row;
  row.ra = ra;
  row.dt = dt;
  row.steps = steps;
  {
    const auto start = std::chrono::steady_clock::now();
    AceStepper stepper(fe, ops, sim, problem);
    EnsembleState s = initial;
    for (int k = 0; k < steps; ++k) {
      StepReport r;
      s = stepper.step(s, &r);
      row.ace_velocity_iterations += r.velocity_iterations();
      row.ace_temperature_iterations += r.temperature_iterations();
    }
    row.ace_seconds = seconds_since(start);
    row.ace_final_norm_u = velocity_l2(ops, s.u[0]);
  }
  {
    const auto start = std::chrono::steady_clock::now();
    Bdf1Stepper stepper(fe, ops, sim, problem);
    EnsembleState s = initial;
    for (int k = 0; k < steps; ++k) {
      StepReport r;
      s = stepper.step(s, &r);
      row.bdf1_coupled_iterations += r.velocity_iterations();
      row.bdf1_temperature_iterations += r.temperature_iterations();
    }
    row.bdf1_seconds = seconds_since(start);
    row.bdf1_final_norm_u = velocity_l2(ops, s.u[0]);
  }
  return row;
}

std::vector<TimingRow> run_timing(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  const auto d = discretize(cfg.sim.mesh_n, ProblemKind::Cavity);
  std::vector<TimingRow> rows;
  for (double ra : cfg.timing.ra_list) {
    const double dt = ra > cfg.timing.large_ra_threshold ? cfg.timing.dt_large_ra : cfg.sim.dt0;
    log << "timing: Ra=" << ra_tag(ra) << " dt=" << num(dt) << " steps=" << cfg.timing.steps << '\n';
    rows.push_back(time_steppers(*d.fe, d.ops, cfg.sim, ra, dt, cfg.timing.steps));
    const auto& r = rows.back();
    log << "  ace " << num(r.ace_seconds) << " s, bdf1 " << num(r.bdf1_seconds) << " s, speedup "
        << num(r.speedup()) << '\n';
  }
  auto out = open_output(out_dir / "timing.csv", cfg);
  out << "ra,dt,steps,ace_velocity_iterations,ace_temperature_iterations,bdf1_coupled_iterations,"
         "bdf1_temperature_iterations,ace_final_norm_u,bdf1_final_norm_u\n";
  for (const auto& r : rows) {
    out << num(r.ra) << ',' << num(r.dt) << ',' << r.steps << ',' << r.ace_velocity_iterations << ','
        << r.ace_temperature_iterations << ',' << r.bdf1_coupled_iterations << ',' << r.bdf1_temperature_iterations
        << ',' << num(r.ace_final_norm_u) << ',' << num(r.bdf1_final_norm_u) << '\n';
  }
  // Wall-clock numbers cannot be reproduced bit for bit; they live apart.
  auto wall = open_output(out_dir / "timing_wall.csv", cfg);
  wall << "ra,ace_seconds,bdf1_seconds,ace_seconds_per_step,bdf1_seconds_per_step,speedup\n";
  for (const auto& r : rows) {
    wall << num(r.ra) << ',' << num(r.ace_seconds) << ',' << num(r.bdf1_seconds) << ','
         << num(r.ace_seconds / r.steps) << ',' << num(r.bdf1_seconds / r.steps) << ',' << num(r.speedup()) << '\n';
  }
  return rows;
}

ErrorRow convergence_point(const RunConfig& cfg, int m, std::ostream* step_log) {
  const auto& cs = cfg.convergence;
  const auto d = discretize(m, ProblemKind::Mms);
  const FeSystem& fe = *d.fe;
  SimConfig sim = cfg.sim;
  sim.pr = cs.pr;
  sim.ra = cs.ra;
  sim.eps_ratio = cs.eps_ratio;
  sim.ensemble_size = 2;
  sim.mesh_n = m;
  const double dt = 1.0 / (10.0 * m);
  sim.dt0 = dt;
  const ExactSolution exact(AmplitudeLaw::Cosine);
  const auto [plus, minus] = perturbed_family(exact, cs.delta);
  const std::vector<ExactSolution> members{plus, minus};
  AceStepper stepper(fe, d.ops, sim, mms_problem(members, cs.pr, cs.ra));
  EnsembleState state = mms_initial_state(fe, d.ops, members, 0.0, dt);
  ErrorTracker tracker(fe, exact);
  const int steps = static_cast<int>(std::lround(cs.t_star / dt));
  if (step_log) {
    write_step_log_header(*step_log);
  }
  for (int k = 1; k <= steps; ++k) {
    StepReport report;
    EnsembleState next = stepper.advance(state, &report);
    const auto inc = relative_increment(state, next, d.ops);
    state = std::move(next);
    tracker.record(state);
    if (step_log) {
      write_step_log_row(*step_log, {k, state.t, state.dt, report.cfl_value, report.velocity_iterations(),
                                     report.temperature_iterations(), report.pressure_iterations(),
                                     report.halvings, inc.value_or(-1.0)});
    }
  }
  ErrorRow row;
  row.m = m;
  row.dt = dt;
  row.error_u = tracker.error_u();
  row.error_T = tracker.error_T();
  row.error_p = tracker.error_p();
  return row;
}

std::vector<ErrorRow> run_convergence(const RunConfig& cfg, const std::filesystem::path& out_dir, std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  std::vector<ErrorRow> rows;
  for (int m : cfg.convergence.m_list) {
    log << "convergence: m=" << m << '\n';
    auto step_log = open_output(out_dir / ("convergence_steps_m" + std::to_string(m) + ".csv"), cfg);
    rows.push_back(convergence_point(cfg, m, &step_log));
    log << "  e_u=" << num(rows.back().error_u) << " e_T=" << num(rows.back().error_T)
        << " e_p=" << num(rows.back().error_p) << '\n';
  }
  fill_rates(rows);
  auto out = open_output(out_dir / "convergence.csv", cfg);
  out << "m,dt,error_u,rate_u,error_T,rate_T,error_p,rate_p\n";
  for (const auto& r : rows) {
    out << r.m << ',' << num(r.dt) << ',' << num(r.error_u) << ',' << opt_num(r.rate_u) << ',' << num(r.error_T)
        << ',' << opt_num(r.rate_T) << ',' << num(r.error_p) << ',' << opt_num(r.rate_p) << '\n';
  }
  return rows;
}

PredictabilityRow predictability_point(const RunConfig& cfg, double ra, std::uint64_t seed,
                                       PredictabilitySeries* series) {
  const auto& ps = cfg.predictability;
  const auto d = discretize(ps.mesh_n, ProblemKind::Mms);
  const FeSystem& fe = *d.fe;
  const auto& ops = d.ops;
  SimConfig sim = cfg.sim;
  sim.pr = ps.pr;
  sim.ra = ra;
  sim.eps_ratio = ps.eps_ratio;
  sim.mesh_n = ps.mesh_n;
  sim.ensemble_size = 1;

  const ExactSolution exact(AmplitudeLaw::GrowingCosine);
  const Problem problem = mms_problem({exact, exact}, ps.pr, ra);
  const EnsembleState control = mms_initial_state(fe, ops, {exact}, 0.0, sim.dt0);
  const FieldSet control_fields = to_fields(fe, control.u[0], control.T[0], control.p[0]);
  const auto bv = breed(control_fields, random_pair(seed), ps.k_star, ps.reinit_interval, sim.dt0,
                        ace_breed_stepper(fe, ops, sim, problem), fe_breeding_space(fe, ops));
  sim.ensemble_size = 2;
  const EnsembleState initial =
      build_cavity_initial_conditions(fe, ops, problem, control_fields, bv, 0.0, sim.dt0);
  EnsembleState state = initial;
  AceStepper stepper(fe, ops, sim, problem);

  PredictabilitySeries local;
  PredictabilitySeries& s = series ? *series : local;
  s = PredictabilitySeries{};
  const std::array<const SparseMatrix*, 3> mass{&ops.M_u, &ops.M_T, &ops.M_p};
  auto record = [&](const EnsembleState& st) {
    s.times.push_back(st.t);
    s.energy_plus.push_back(energy(ops, st.u[0], st.T[0]));
    s.energy_minus.push_back(energy(ops, st.u[1], st.T[1]));
    s.energy_mean.push_back(energy(ops, ensemble_mean(st, Field::Velocity), ensemble_mean(st, Field::Temperature)));
    const std::array<const std::vector<Vector>*, 3> fields{&st.u, &st.T, &st.p};
    for (int f = 0; f < 3; ++f) {
      s.variance[f].push_back(variance(*fields[f], *mass[f]));
      s.r[f].push(st.t, relative_fluctuation((*fields[f])[0], (*fields[f])[1], *mass[f]));
    }
  };
  record(state);
  const int steps = static_cast<int>(std::lround(ps.t_star / sim.dt0));
  for (int k = 0; k < steps && state.t < ps.t_star - 1e-12; ++k) {
    state = stepper.advance(state);
    record(state);
  }

  PredictabilityRow row;
  row.ra = ra;
  const double horizon = state.t;
  for (int f = 0; f < 3; ++f) {
    const auto& r = s.r[f];
    row.gamma[f] = std::log(r.values.back() / r.values.front()) / (2.0 * horizon);
  }
  const std::array<const std::vector<Vector>*, 3> init_fields{&initial.u, &initial.T, &initial.p};
  for (int f = 0; f < 3; ++f) {
    Vector diff = (*init_fields[f])[0];
    axpy(-1.0, (*init_fields[f])[1], diff);
    row.initial_separation[f] = std::sqrt(std::max(0.0, dot(diff, mass[f]->multiply(diff))));
    row.horizon[f] = row.initial_separation[f] > 0.0
                         ? predictability_horizon(row.gamma[f], row.initial_separation[f],
                                                  std::exp(1.0) * row.initial_separation[f])
                         : std::nullopt;
  }
  return row;
}

std::vector<PredictabilityRow> run_predictability(const RunConfig& cfg, const std::filesystem::path& out_dir,
                                                  std::ostream& log) {
  std::filesystem::create_directories(out_dir);
  std::vector<PredictabilityRow> rows;
  static const char* names[3] = {"u", "T", "p"};
  for (std::size_t i = 0; i < cfg.predictability.ra_list.size(); ++i) {
    const double ra = cfg.predictability.ra_list[i];
    const std::string tag = ra_tag(ra);
    log << "predictability: Ra=" << tag << '\n';
    PredictabilitySeries series;
    rows.push_back(predictability_point(cfg, ra, cfg.sim.seed + i, &series));
    {
      auto out = open_output(out_dir / ("predictability_series_ra" + tag + ".csv"), cfg);
      out << "time,quantity,tag,value\n";
      for (std::size_t k = 0; k < series.times.size(); ++k) {
        const std::string t = num(series.times[k]);
        out << t << ",energy,plus," << num(series.energy_plus[k]) << '\n';
        out << t << ",energy,minus," << num(series.energy_minus[k]) << '\n';
        out << t << ",energy,mean," << num(series.energy_mean[k]) << '\n';
        for (int f = 0; f < 3; ++f) {
          out << t << ",variance_" << names[f] << ",ensemble," << num(series.variance[f][k]) << '\n';
          out << t << ",r_" << names[f] << ",pair," << num(series.r[f].values[k]) << '\n';
        }
      }
    }
    {
      auto out = open_output(out_dir / ("lyapunov_ra" + tag + ".csv"), cfg);
      out << "time,quantity,tag,value\n";
      for (int f = 0; f < 3; ++f) {
        const auto gamma = effective_lyapunov(series.r[f], cfg.predictability.tau_series);
        for (std::size_t k = 0; k < gamma.size(); ++k) {
          out << num(gamma.times[k]) << ",gamma_" << names[f] << ",pair," << num(gamma.values[k]) << '\n';
        }
      }
    }
    const auto& r = rows.back();
    log << "  gamma u/T/p = " << num(r.gamma[0]) << ' ' << num(r.gamma[1]) << ' ' << num(r.gamma[2])
        << "  horizon u/T/p = " << opt_num(r.horizon[0]) << ' ' << opt_num(r.horizon[1]) << ' '
        << opt_num(r.horizon[2]) << '\n';
  }
  auto out = open_output(out_dir / "predictability.csv", cfg);
  out << "ra,gamma_u,gamma_T,gamma_p,separation_u,separation_T,separation_p,horizon_u,horizon_T,horizon_p\n";
  for (const auto& r : rows) {
    out << num(r.ra);
    for (double g : r.gamma) out << ',' << num(g);
    for (double s : r.initial_separation) out << ',' << num(s);
    for (const auto& h : r.horizon) out << ',' << opt_num(h);
    out << '\n';
  }
  return rows;
}

}  // namespace ace
