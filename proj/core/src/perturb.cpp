#include "ace/perturb.hpp"

#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace ace {

PerturbationPair random_pair(std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  PerturbationPair pair;
  for (auto& d : pair.delta) {
    do {
      const double unit = static_cast<double>(engine() >> 11) * 0x1.0p-53;
      d = 0.01 * unit;
    } while (d <= 0.0);
  }
  return pair;
}

BredVector breed(const FieldSet& control_ic, const PerturbationPair& pair, int k_star, double reinit_interval,
                 double dt, const BreedStepper& stepper, const BreedingSpace& space) {
  if (k_star < 1) {
    throw std::invalid_argument("breed: k_star must be >= 1");
  }
  if (!(dt > 0.0) || reinit_interval < dt * (1.0 - 1e-12)) {
    throw std::invalid_argument("breed: reinitialization interval must be >= dt > 0");
  }
  const int steps_per_cycle = std::max(1, static_cast<int>(std::llround(reinit_interval / dt)));

  FieldSet control = control_ic;
  FieldSet perturbed = control_ic;
  for (int f = 0; f < 4; ++f) {
    const double d = pair.signed_delta(f);
    for (std::size_t i = 0; i < perturbed[f].size(); ++i) {
      if (space.free[f].empty() || space.free[f][i]) {
        perturbed[f][i] += d;
      }
    }
  }

  BredVector bv;
  double t = 0.0;
  for (int k = 1; k <= k_star; ++k) {
    for (int s = 0; s < steps_per_cycle; ++s) {
      control = stepper(control, t);
      perturbed = stepper(perturbed, t);
      t += dt;
    }
    for (int f = 0; f < 4; ++f) {
      Vector diff(control[f].size());
      for (std::size_t i = 0; i < diff.size(); ++i) {
        diff[i] = perturbed[f][i] - control[f][i];
      }
      const double norm = space.norm(f, diff);
      if (!(norm > 0.0) || !std::isfinite(norm)) {
        throw std::runtime_error("breed: perturbation of field " + std::to_string(f) +
                                 " vanished at reinitialization " + std::to_string(k));
      }
      const double scale = pair.delta[f] / norm;
      for (double& v : diff) {
        v *= scale;
      }
      bv.fields[f] = std::move(diff);
      for (std::size_t i = 0; i < control[f].size(); ++i) {
        perturbed[f][i] = control[f][i] + bv.fields[f][i];
      }
    }
  }
  return bv;
}

FieldSet to_fields(const FeSystem& fe, const Vector& u, const Vector& T, const Vector& p) {
  const int n = fe.num_p2();
  FieldSet out;
  out[0].assign(u.begin(), u.begin() + n);
  out[1].assign(u.begin() + n, u.end());
  out[2] = T;
  out[3] = p;
  return out;
}

void from_fields(const FeSystem& fe, const FieldSet& fields, Vector& u, Vector& T, Vector& p) {
  u.resize(fe.num_velocity());
  std::copy(fields[0].begin(), fields[0].end(), u.begin());
  std::copy(fields[1].begin(), fields[1].end(), u.begin() + fe.num_p2());
  T = fields[2];
  p = fields[3];
}

BreedingSpace fe_breeding_space(const FeSystem& fe, const SparseOperatorSet& ops) {
  BreedingSpace space;
  const SparseMatrix* mass_t = &ops.M_T;
  const SparseMatrix* mass_p = &ops.M_p;
  space.norm = [mass_t, mass_p](int field, std::span<const double> v) {
    const SparseMatrix& m = field == 3 ? *mass_p : *mass_t;
    const Vector mv = m.multiply(v);
    return std::sqrt(std::max(0.0, dot(v, mv)));
  };
  const int n = fe.num_p2();
  space.free[0].assign(n, 1);
  space.free[1].assign(n, 1);
  for (int dof : fe.velocity_dirichlet().dofs) {
    space.free[dof < n ? 0 : 1][dof % n] = 0;
  }
  space.free[2].assign(n, 1);
  for (int dof : fe.temperature_dirichlet().dofs) {
    space.free[2][dof] = 0;
  }
  space.free[3].assign(fe.num_pressure(), 1);
  return space;
}

BreedStepper ace_breed_stepper(const FeSystem& fe, const SparseOperatorSet& ops, const SimConfig& cfg,
                               const Problem& problem, double t0) {
  auto stepper = std::make_shared<AceStepper>(fe, ops, cfg, problem);
  const FeSystem* fe_ptr = &fe;
  const SparseOperatorSet* ops_ptr = &ops;
  const double dt = cfg.dt0;
  return [stepper, fe_ptr, ops_ptr, dt, t0, problem](const FieldSet& in, double t) {
    EnsembleState s;
    s.u.resize(1);
    s.T.resize(1);
    s.p.resize(1);
    from_fields(*fe_ptr, in, s.u[0], s.T[0], s.p[0]);
    s.t = t0 + t;
    s.dt = dt;
    impose_constraints(s, *fe_ptr, *ops_ptr, problem);
    const EnsembleState next = stepper->step(s);
    return to_fields(*fe_ptr, next.u[0], next.T[0], next.p[0]);
  };
}

FieldSet constant_fields(const FeSystem& fe, double value) {
  FieldSet out;
  out[0].assign(fe.num_p2(), value);
  out[1].assign(fe.num_p2(), value);
  out[2].assign(fe.num_p2(), value);
  out[3].assign(fe.num_pressure(), value);
  return out;
}

EnsembleState build_cavity_initial_conditions(const FeSystem& fe, const SparseOperatorSet& ops,
                                              const Problem& problem, const FieldSet& prev, const BredVector& bv,
                                              double t0, double dt) {
  EnsembleState state;
  state.t = t0;
  state.dt = dt;
  state.u.resize(2);
  state.T.resize(2);
  state.p.resize(2);
  for (int j = 0; j < 2; ++j) {
    const double sign = j == 0 ? 1.0 : -1.0;
    FieldSet member = prev;
    for (int f = 0; f < 4; ++f) {
      if (bv.fields[f].empty()) {
        continue;
      }
      axpy(sign, bv.fields[f], member[f]);
    }
    from_fields(fe, member, state.u[j], state.T[j], state.p[j]);
  }
  impose_constraints(state, fe, ops, problem);
  return state;
}

}  // namespace ace
