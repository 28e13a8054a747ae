#include "ace/ace.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <stdexcept>
#include <string>

namespace ace {

void SimConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("SimConfig: ") + name + " must be positive");
    }
  };
  positive(pr, "pr");
  if (!(ra >= 0.0)) {
    throw std::invalid_argument("SimConfig: ra must be non-negative");
  }
  positive(dt0, "dt0");
  positive(eps_ratio, "eps_ratio");
  if (!(c_dagger >= 0.0)) {
    throw std::invalid_argument("SimConfig: c_dagger must be non-negative");
  }
  positive(t_star, "t_star");
  positive(gmres.tol, "gmres.tol");
  positive(cg_tol, "cg_tol");
  positive(steady_tol, "steady_tol");
  positive(dt_floor, "dt_floor");
  if (ensemble_size < 1 || mesh_n < 1 || gmres.restart < 1 || gmres.max_iter < 1 || cg_max_iter < 1 ||
      jobs < 1 || precond_refresh_iterations < 0) {
    throw std::invalid_argument("SimConfig: integer parameters must be >= 1");
  }
}

namespace {

const std::vector<Vector>& members(const EnsembleState& s, Field field) {
  switch (field) {
    case Field::Velocity:
      return s.u;
    case Field::Temperature:
      return s.T;
    case Field::Pressure:
      return s.p;
  }
  throw std::invalid_argument("unknown field");
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = a[i] - b[i];
  }
  return out;
}

Vector temperature_boundary_values(const FeSystem& fe, const Problem& problem, int member, double t) {
  const auto& set = fe.temperature_dirichlet();
  if (!problem.temperature_boundary) {
    return set.values;
  }
  Vector values(set.dofs.size());
  for (std::size_t s = 0; s < set.dofs.size(); ++s) {
    const auto& x = fe.p2_nodes()[set.dofs[s]];
    values[s] = problem.temperature_boundary(member, x.x, x.y, t);
  }
  return values;
}

Vector velocity_load(const FeSystem& fe, const Problem& problem, int member, double t) {
  if (!problem.f) {
    return Vector(fe.num_velocity(), 0.0);
  }
  return assemble_load(fe, VectorFunction([&](double x, double y) { return problem.f(member, x, y, t); }));
}

Vector temperature_load(const FeSystem& fe, const Problem& problem, int member, double t) {
  if (!problem.g) {
    return Vector(fe.num_temperature(), 0.0);
  }
  return assemble_load(fe, ScalarFunction([&](double x, double y) { return problem.g(member, x, y, t); }));
}

void check_state(const EnsembleState& s, const FeSystem& fe) {
  if (s.size() < 1 || s.p.size() != s.u.size() || s.T.size() != s.u.size()) {
    throw std::invalid_argument("EnsembleState: inconsistent member counts");
  }
  for (int j = 0; j < s.size(); ++j) {
    if (s.u[j].size() != static_cast<std::size_t>(fe.num_velocity()) ||
        s.p[j].size() != static_cast<std::size_t>(fe.num_pressure()) ||
        s.T[j].size() != static_cast<std::size_t>(fe.num_temperature())) {
      throw std::invalid_argument("EnsembleState: member dimensions do not match the FE system");
    }
  }
  if (!(s.dt > 0.0)) {
    throw std::invalid_argument("EnsembleState: dt must be positive");
  }
}

void add_velocity_convection_values(const FeSystem& fe, std::span<const double> w, SparseMatrix& a) {
  SparseMatrix scalar(fe.scalar_pattern());
  add_scalar_convection(fe, w, 1.0, scalar.values());
  auto av = a.values();
  const auto sv = scalar.values();
  const auto& sp = *fe.scalar_pattern();
  for (int i = 0; i < fe.num_p2(); ++i) {
    for (int k = sp.row_offsets[i]; k < sp.row_offsets[i + 1]; ++k) {
      av[fe.vector_position(i, k, 0, 0)] += sv[k];
      av[fe.vector_position(i, k, 1, 1)] += sv[k];
    }
  }
}

SparseMatrix velocity_static_matrix(const SparseOperatorSet& ops, const SimConfig& cfg, double dt) {
  SparseMatrix a = ops.M_u;
  a.scale(1.0 / dt);
  a.add_scaled(cfg.pr, ops.K_u);
  a.add_scaled(cfg.grad_div_weight(), ops.GD);
  return a;
}

SparseMatrix temperature_static_matrix(const SparseOperatorSet& ops, double dt) {
  SparseMatrix a = ops.M_T;
  a.scale(1.0 / dt);
  a.add_scaled(1.0, ops.K_T);
  return a;
}

void require_converged(const MultiSolveResult& res, const char* what) {
  for (const auto& r : res.reports) {
    if (!r.converged) {
      throw SolverError(std::string(what) + " solve did not converge (relative residual " +
                            std::to_string(r.relative_residual) + ")",
                        r);
    }
  }
}

/// Pressure update M_p (p_new - p_old) = -(dt/eps) B u_new, then re-centering.
void update_pressure(const SparseOperatorSet& ops, const SimConfig& cfg, std::span<const double> u_new,
                     Vector& p, StepReport* report) {
  Vector rhs = ops.B.multiply(u_new);
  for (double& v : rhs) {
    v *= -cfg.grad_div_weight();
  }
  auto solved = cg_solve(ops.M_p, rhs, cfg.cg_tol, cfg.cg_max_iter);
  if (!solved.report.converged) {
    throw SolverError("pressure projection did not converge", solved.report);
  }
  axpy(1.0, solved.x, p);
  center_pressure(ops, p);
  if (report) {
    report->pressure.push_back(solved.report);
  }
}

}  // namespace

Vector ensemble_mean(const EnsembleState& state, Field field) {
  const auto& m = members(state, field);
  if (m.empty()) {
    throw std::invalid_argument("ensemble_mean: empty ensemble");
  }
  Vector mean(m.front().size(), 0.0);
  for (const auto& v : m) {
    axpy(1.0, v, mean);
  }
  const double inv = 1.0 / static_cast<double>(m.size());
  for (double& v : mean) {
    v *= inv;
  }
  return mean;
}

Vector fluctuation(const EnsembleState& state, Field field, int j) {
  const auto& m = members(state, field);
  if (j < 0 || j >= static_cast<int>(m.size())) {
    throw std::out_of_range("fluctuation: member index out of range");
  }
  return subtract(m[j], ensemble_mean(state, field));
}

Problem cavity_problem() { return Problem{}; }

void impose_constraints(EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                        const Problem& problem) {
  for (int j = 0; j < state.size(); ++j) {
    for (int dof : fe.velocity_dirichlet().dofs) {
      state.u[j][dof] = 0.0;
    }
    const auto values = temperature_boundary_values(fe, problem, j, state.t);
    const auto& dofs = fe.temperature_dirichlet().dofs;
    for (std::size_t s = 0; s < dofs.size(); ++s) {
      state.T[j][dofs[s]] = values[s];
    }
    center_pressure(ops, state.p[j]);
  }
}

CflResult cfl_check(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                    const SimConfig& cfg) {
  CflResult out;
  if (state.size() > 1) {
    const Vector mean = ensemble_mean(state, Field::Velocity);
    for (int j = 0; j < state.size(); ++j) {
      const Vector f = subtract(state.u[j], mean);
      const Vector kf = ops.K_u.multiply(f);
      out.max_fluctuation_gradient = std::max(out.max_fluctuation_gradient, dot(f, kf));
    }
  }
  out.value = cfg.c_dagger * state.dt / fe.mesh().h_max() * out.max_fluctuation_gradient;
  out.passes = out.value <= 1.0;
  return out;
}

SparseMatrix build_velocity_matrix(const FeSystem& fe, const SparseOperatorSet& ops, const SimConfig& cfg,
                                   double dt, std::span<const double> mean_velocity) {
  SparseMatrix a = velocity_static_matrix(ops, cfg, dt);
  add_velocity_convection_values(fe, mean_velocity, a);
  return a;
}

SparseMatrix build_temperature_matrix(const FeSystem& fe, const SparseOperatorSet& ops, double dt,
                                      std::span<const double> mean_velocity) {
  SparseMatrix a = temperature_static_matrix(ops, dt);
  add_scalar_convection(fe, mean_velocity, 1.0, a.values());
  return a;
}

int StepReport::velocity_iterations() const {
  int n = 0;
  for (const auto& r : velocity) n += r.iterations;
  return n;
}
int StepReport::temperature_iterations() const {
  int n = 0;
  for (const auto& r : temperature) n += r.iterations;
  return n;
}
int StepReport::pressure_iterations() const {
  int n = 0;
  for (const auto& r : pressure) n += r.iterations;
  return n;
}

AceStepper::AceStepper(const FeSystem& fe, const SparseOperatorSet& ops, SimConfig cfg, Problem problem)
    : fe_(fe),
      ops_(ops),
      cfg_(std::move(cfg)),
      problem_(std::move(problem)),
      velocity_precond_(cfg_.momentum_preconditioner, cfg_.precond_refresh_iterations),
      temperature_precond_(cfg_.temperature_preconditioner, cfg_.precond_refresh_iterations) {
  cfg_.validate();
}

const SparseMatrix& AceStepper::velocity_static(double dt) {
  if (dt != velocity_dt_) {
    velocity_static_ = velocity_static_matrix(ops_, cfg_, dt);
    velocity_dt_ = dt;
    velocity_precond_.invalidate();
  }
  return velocity_static_;
}

const SparseMatrix& AceStepper::temperature_static(double dt) {
  if (dt != temperature_dt_) {
    temperature_static_ = temperature_static_matrix(ops_, dt);
    temperature_dt_ = dt;
    temperature_precond_.invalidate();
  }
  return temperature_static_;
}

EnsembleState AceStepper::step(const EnsembleState& state, StepReport* report) {
  check_state(state, fe_);
  const int J = state.size();
  const double dt = state.dt;
  const double t_new = state.t + dt;
  const Vector mean = ensemble_mean(state, Field::Velocity);
  std::vector<Vector> fluct(J);
  for (int j = 0; j < J; ++j) {
    fluct[j] = subtract(state.u[j], mean);
  }

  EnsembleState next;
  next.t = t_new;
  next.dt = dt;
  next.p = state.p;

  // Velocity: shared matrix, one right-hand side per member.
  {
    SparseMatrix a = velocity_static(dt);
    add_velocity_convection_values(fe_, mean, a);
    const DirichletEliminator elim(a, fe_.velocity_dirichlet().dofs);
    std::vector<Vector> rhs(J);
    parallel_for(J, cfg_.jobs, [&](int j) {
      Vector b = ops_.M_u.multiply(state.u[j]);
      for (double& v : b) v /= dt;
      const Vector conv = apply_velocity_convection(fe_, fluct[j], state.u[j]);
      axpy(-1.0, conv, b);
      axpy(1.0, ops_.Bt.multiply(state.p[j]), b);
      axpy(cfg_.pr * cfg_.ra, assemble_buoyancy(fe_, ops_, state.T[j]), b);
      if (problem_.f) {
        axpy(1.0, velocity_load(fe_, problem_, j, t_new), b);
      }
      elim.apply(b, fe_.velocity_dirichlet().values);
      rhs[j] = std::move(b);
    });
    auto solved = velocity_precond_.solve(elim.matrix(), rhs, state.u, cfg_.gmres, cfg_.jobs);
    last_velocity_ = std::move(a);
    require_converged(solved, "velocity");
    if (report) {
      report->velocity = solved.reports;
    }
    next.u = std::move(solved.solutions);
  }

  // Temperature: convected by the old mean and fluctuations.
  {
    SparseMatrix a = temperature_static(dt);
    add_scalar_convection(fe_, mean, 1.0, a.values());
    const DirichletEliminator elim(a, fe_.temperature_dirichlet().dofs);
    std::vector<Vector> rhs(J);
    parallel_for(J, cfg_.jobs, [&](int j) {
      Vector b = ops_.M_T.multiply(state.T[j]);
      for (double& v : b) v /= dt;
      axpy(-1.0, apply_scalar_convection(fe_, fluct[j], state.T[j]), b);
      if (problem_.g) {
        axpy(1.0, temperature_load(fe_, problem_, j, t_new), b);
      }
      elim.apply(b, temperature_boundary_values(fe_, problem_, j, t_new));
      rhs[j] = std::move(b);
    });
    auto solved = temperature_precond_.solve(elim.matrix(), rhs, state.T, cfg_.gmres, cfg_.jobs);
    last_temperature_ = std::move(a);
    require_converged(solved, "temperature");
    if (report) {
      report->temperature = solved.reports;
    }
    next.T = std::move(solved.solutions);
  }

  for (int j = 0; j < J; ++j) {
    update_pressure(ops_, cfg_, next.u[j], next.p[j], report);
  }
  return next;
}

EnsembleState AceStepper::advance(const EnsembleState& state, StepReport* report) {
  EnsembleState trial = state;
  int halvings = 0;
  CflResult cfl = cfl_check(trial, fe_, ops_, cfg_);
  while (!cfl.passes) {
    trial.dt *= 0.5;
    ++halvings;
    if (trial.dt < cfg_.dt_floor) {
      throw std::runtime_error("advance_adaptive: timestep fell below the floor " + std::to_string(cfg_.dt_floor));
    }
    cfl = cfl_check(trial, fe_, ops_, cfg_);
  }
  if (halvings > 0) {
    std::clog << "[ace] t=" << state.t << ": CFL violated, dt halved " << halvings << " time(s) to " << trial.dt
              << '\n';
  }
  EnsembleState next = step(trial, report);
  if (report) {
    report->halvings = halvings;
    report->cfl_value = cfl.value;
  }
  return next;
}

EnsembleState ace_step(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                       const SimConfig& cfg, const Problem& problem, StepReport* report) {
  AceStepper stepper(fe, ops, cfg, problem);
  return stepper.step(state, report);
}

EnsembleState advance_adaptive(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                               const SimConfig& cfg, const Problem& problem, StepReport* report) {
  AceStepper stepper(fe, ops, cfg, problem);
  return stepper.advance(state, report);
}

// Coupled system layout: [velocity (2 n_p2) | pressure (n_p1)],
//   [ A    -B^T ] [u]   [rhs]
//   [ -B    0   ] [p] = [ 0 ]
// with the P1 mass pattern stored (as zeros) in the pressure block so that
// ILU(0) has room for a Schur-complement-like pivot.
struct Bdf1Stepper::Layout {
  std::shared_ptr<const SparsityPattern> pattern;
  std::vector<int> velocity_pos;  // vector-pattern position -> coupled position
  std::vector<int> b_pos;         // B position -> coupled position (pressure row)
  std::vector<int> bt_pos;        // B position -> coupled position (velocity row)
  std::vector<int> constrained;   // velocity Dirichlet dofs + one pinned pressure dof
};

Bdf1Stepper::Bdf1Stepper(const FeSystem& fe, const SparseOperatorSet& ops, SimConfig cfg, Problem problem)
    : fe_(fe), ops_(ops), cfg_(std::move(cfg)), problem_(std::move(problem)), layout_(std::make_unique<Layout>()) {
  cfg_.validate();
  const int nu = fe.num_velocity();
  const int np = fe.num_pressure();
  std::vector<Triplet> t;
  const auto& vp = *fe.vector_pattern();
  for (int i = 0; i < nu; ++i) {
    for (int k = vp.row_offsets[i]; k < vp.row_offsets[i + 1]; ++k) {
      t.push_back({i, vp.column_indices[k], 0.0});
    }
  }
  const auto& bp = ops.B.pattern();
  for (int i = 0; i < np; ++i) {
    for (int k = bp.row_offsets[i]; k < bp.row_offsets[i + 1]; ++k) {
      t.push_back({nu + i, bp.column_indices[k], 0.0});
      t.push_back({bp.column_indices[k], nu + i, 0.0});
    }
  }
  const auto& mp = ops.M_p.pattern();
  for (int i = 0; i < np; ++i) {
    for (int k = mp.row_offsets[i]; k < mp.row_offsets[i + 1]; ++k) {
      t.push_back({nu + i, nu + mp.column_indices[k], 0.0});
    }
  }
  const SparseMatrix coupled = SparseMatrix::from_triplets(nu + np, nu + np, t);
  layout_->pattern = coupled.pattern_ptr();
  const auto& cp = *layout_->pattern;
  layout_->velocity_pos.resize(vp.nnz());
  for (int i = 0; i < nu; ++i) {
    for (int k = vp.row_offsets[i]; k < vp.row_offsets[i + 1]; ++k) {
      layout_->velocity_pos[k] = cp.find(i, vp.column_indices[k]);
    }
  }
  layout_->b_pos.resize(bp.nnz());
  layout_->bt_pos.resize(bp.nnz());
  for (int i = 0; i < np; ++i) {
    for (int k = bp.row_offsets[i]; k < bp.row_offsets[i + 1]; ++k) {
      layout_->b_pos[k] = cp.find(nu + i, bp.column_indices[k]);
      layout_->bt_pos[k] = cp.find(bp.column_indices[k], nu + i);
    }
  }
  layout_->constrained = fe.velocity_dirichlet().dofs;
  layout_->constrained.push_back(nu);  // pressure at vertex 0 pinned during the solve
}

Bdf1Stepper::~Bdf1Stepper() = default;

EnsembleState Bdf1Stepper::step(const EnsembleState& state, StepReport* report) {
  check_state(state, fe_);
  const int J = state.size();
  const double dt = state.dt;
  const double t_new = state.t + dt;
  const int nu = fe_.num_velocity();
  const int np = fe_.num_pressure();
  const SparseMatrix velocity_base = [&] {
    SparseMatrix a = ops_.M_u;
    a.scale(1.0 / dt);
    a.add_scaled(cfg_.pr, ops_.K_u);
    return a;
  }();

  EnsembleState next;
  next.t = t_new;
  next.dt = dt;
  next.u.resize(J);
  next.p.resize(J);
  next.T.resize(J);
  if (report) {
    report->velocity.clear();
    report->temperature.clear();
  }
  if (dt != precond_dt_ || static_cast<int>(coupled_precond_.size()) != J) {
    coupled_precond_.clear();
    temperature_precond_.clear();
    for (int j = 0; j < J; ++j) {
      coupled_precond_.emplace_back(cfg_.momentum_preconditioner, cfg_.precond_refresh_iterations);
      temperature_precond_.emplace_back(cfg_.temperature_preconditioner, cfg_.precond_refresh_iterations);
    }
    precond_dt_ = dt;
  }

  for (int j = 0; j < J; ++j) {
    SparseMatrix a = velocity_base;
    add_velocity_convection_values(fe_, state.u[j], a);
    SparseMatrix coupled(layout_->pattern);
    auto cv = coupled.values();
    const auto av = a.values();
    for (std::size_t k = 0; k < av.size(); ++k) {
      cv[layout_->velocity_pos[k]] = av[k];
    }
    const auto bv = ops_.B.values();
    for (std::size_t k = 0; k < bv.size(); ++k) {
      cv[layout_->b_pos[k]] = -bv[k];
      cv[layout_->bt_pos[k]] = -bv[k];
    }
    const DirichletEliminator elim(coupled, layout_->constrained);

    Vector rhs(nu + np, 0.0);
    {
      Vector b = ops_.M_u.multiply(state.u[j]);
      for (double& v : b) v /= dt;
      axpy(cfg_.pr * cfg_.ra, assemble_buoyancy(fe_, ops_, state.T[j]), b);
      if (problem_.f) {
        axpy(1.0, velocity_load(fe_, problem_, j, t_new), b);
      }
      std::copy(b.begin(), b.end(), rhs.begin());
    }
    elim.apply(rhs, Vector(layout_->constrained.size(), 0.0));
    Vector x0(nu + np);
    std::copy(state.u[j].begin(), state.u[j].end(), x0.begin());
    std::copy(state.p[j].begin(), state.p[j].end(), x0.begin() + nu);
    const std::vector<Vector> rhs_list{std::move(rhs)};
    const std::vector<Vector> x0_list{std::move(x0)};
    auto solved = coupled_precond_[j].solve(elim.matrix(), rhs_list, x0_list, cfg_.gmres);
    require_converged(solved, "coupled BDF1 velocity-pressure");
    if (report) {
      report->velocity.push_back(solved.reports.front());
    }
    const Vector& x = solved.solutions.front();
    next.u[j].assign(x.begin(), x.begin() + nu);
    next.p[j].assign(x.begin() + nu, x.end());
    center_pressure(ops_, next.p[j]);

    SparseMatrix at = temperature_static_matrix(ops_, dt);
    add_scalar_convection(fe_, next.u[j], 1.0, at.values());
    const DirichletEliminator telim(at, fe_.temperature_dirichlet().dofs);
    Vector tb = ops_.M_T.multiply(state.T[j]);
    for (double& v : tb) v /= dt;
    if (problem_.g) {
      axpy(1.0, temperature_load(fe_, problem_, j, t_new), tb);
    }
    telim.apply(tb, temperature_boundary_values(fe_, problem_, j, t_new));
    const std::vector<Vector> tb_list{std::move(tb)};
    const std::vector<Vector> t0_list{state.T[j]};
    auto tsolved = temperature_precond_[j].solve(telim.matrix(), tb_list, t0_list, cfg_.gmres);
    require_converged(tsolved, "coupled BDF1 temperature");
    if (report) {
      report->temperature.push_back(tsolved.reports.front());
    }
    next.T[j] = std::move(tsolved.solutions.front());
  }
  return next;
}

EnsembleState bdf1_coupled_step(const EnsembleState& state, const FeSystem& fe, const SparseOperatorSet& ops,
                                const SimConfig& cfg, const Problem& problem, StepReport* report) {
  Bdf1Stepper stepper(fe, ops, cfg, problem);
  return stepper.step(state, report);
}

std::optional<double> relative_increment(const EnsembleState& prev, const EnsembleState& next,
                                         const SparseOperatorSet& ops) {
  if (prev.size() != next.size()) {
    throw std::invalid_argument("relative_increment: ensemble sizes differ");
  }
  double worst = 0.0;
  for (int j = 0; j < next.size(); ++j) {
    const double un = velocity_l2(ops, next.u[j]);
    const double tn = scalar_l2(ops, next.T[j]);
    if (un == 0.0 || tn == 0.0) {
      std::cerr << "[ace] warning: steady-state check with zero-norm member " << j << '\n';
      return std::nullopt;
    }
    const double du = velocity_l2(ops, subtract(next.u[j], prev.u[j])) / un;
    const double dT = scalar_l2(ops, subtract(next.T[j], prev.T[j])) / tn;
    worst = std::max({worst, du, dT});
  }
  return worst;
}

bool steady_state_check(const EnsembleState& prev, const EnsembleState& next, const SparseOperatorSet& ops,
                        double tol) {
  const auto inc = relative_increment(prev, next, ops);
  return inc && *inc <= tol;
}

void write_step_log_header(std::ostream& out) {
  out << "step,time,dt,cfl,velocity_iterations,temperature_iterations,pressure_iterations,halvings,increment\n";
}

void write_step_log_row(std::ostream& out, const StepLogRecord& r) {
  out << std::setprecision(10) << r.step << ',' << r.t << ',' << r.dt << ',' << r.cfl << ','
      << r.velocity_iterations << ',' << r.temperature_iterations << ',' << r.pressure_iterations << ','
      << r.halvings << ',' << r.increment << '\n';
}

}  // namespace ace
