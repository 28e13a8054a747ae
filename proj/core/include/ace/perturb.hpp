#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ace/ace.hpp"

namespace ace {

/// Perturbation magnitudes for (u1, u2, T, p), each in (0, 0.01).
struct PerturbationPair {
  std::array<double, 4> delta{};
  int sign = +1;

  PerturbationPair negated() const { return {delta, -sign}; }
  double signed_delta(int field) const { return sign * delta[field]; }
};

/// Deterministic for a given seed (mt19937_64 with an explicit 53-bit
/// mantissa conversion, independent of the standard library's distributions).
PerturbationPair random_pair(std::uint64_t seed);

/// Per-field coefficient vectors in the order u1, u2, T, p.
using FieldSet = std::array<Vector, 4>;

struct BredVector {
  FieldSet fields;
};

/// Norm and perturbable-dof masks for each field.
struct BreedingSpace {
  std::function<double(int field, std::span<const double>)> norm;
  std::array<std::vector<char>, 4> free;
};

/// Advances a single trajectory from time t by one timestep.
using BreedStepper = std::function<FieldSet(const FieldSet&, double t)>;

/// Breeding: perturb the control by the signed delta on free dofs, then every
/// `reinit_interval` rescale the perturbed-minus-control difference to norm
/// |delta_i| per field and restart the perturbed run from control + bv.
/// Returns the bred vector after `k_star` cycles. Throws std::runtime_error if a
/// difference vanishes at a rescale point.
BredVector breed(const FieldSet& control_ic, const PerturbationPair& pair, int k_star, double reinit_interval,
                 double dt, const BreedStepper& stepper, const BreedingSpace& space);

FieldSet to_fields(const FeSystem& fe, const Vector& u, const Vector& T, const Vector& p);
void from_fields(const FeSystem& fe, const FieldSet& fields, Vector& u, Vector& T, Vector& p);

/// L2 norms per field; Dirichlet dofs of u and T are not perturbed.
BreedingSpace fe_breeding_space(const FeSystem& fe, const SparseOperatorSet& ops);

/// Breeding stepper running ACE with J = 1 from time t0 + t.
BreedStepper ace_breed_stepper(const FeSystem& fe, const SparseOperatorSet& ops, const SimConfig& cfg,
                               const Problem& problem, double t0 = 0.0);

/// Every field equal to one (the bootstrap base state).
FieldSet constant_fields(const FeSystem& fe, double value = 1.0);

/// J = 2 members prev + bv and prev - bv, with boundary data imposed and
/// pressures re-centered.
EnsembleState build_cavity_initial_conditions(const FeSystem& fe, const SparseOperatorSet& ops,
                                              const Problem& problem, const FieldSet& prev, const BredVector& bv,
                                              double t0, double dt);

}  // namespace ace
