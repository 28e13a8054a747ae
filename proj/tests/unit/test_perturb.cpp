#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ace/perturb.hpp"

using namespace ace;

namespace {

BreedingSpace euclidean_space(std::size_t n) {
  BreedingSpace s;
  s.norm = [](int, std::span<const double> v) { return norm2(v); };
  for (auto& f : s.free) f.assign(n, 1);
  return s;
}

FieldSet filled(std::size_t n, double v) {
  FieldSet f;
  for (auto& x : f) x.assign(n, v);
  return f;
}

}  // namespace

TEST_SUITE("perturb") {
  TEST_CASE("random pairs") {
    const auto a = random_pair(7), b = random_pair(7), c = random_pair(8);
    CHECK(a.delta == b.delta);
    CHECK(a.delta != c.delta);
    CHECK(a.sign == 1);
    for (std::uint64_t s = 0; s < 2500; ++s)
      for (double d : random_pair(s).delta) {
        CHECK(d > 0.0);
        CHECK(d < 0.01);
      }
    const auto n = a.negated();
    for (int i = 0; i < 4; ++i) CHECK(n.signed_delta(i) == -a.signed_delta(i));
  }

  TEST_CASE("linear doubling dynamics keep the initial direction") {
    const std::size_t n = 3;
    const auto control = filled(n, 0.5);
    const auto pair = random_pair(3);
    const BreedStepper doubling = [](const FieldSet& x, double) {
      FieldSet y = x;
      for (auto& f : y)
        for (double& v : f) v *= 2.0;
      return y;
    };
    for (int k_star : {1, 3}) {
      const auto bv = breed(control, pair, k_star, 1e-3, 1e-3, doubling, euclidean_space(n));
      for (int f = 0; f < 4; ++f) {
        CHECK(norm2(bv.fields[f]) == doctest::Approx(pair.delta[f]).epsilon(1e-12));
        for (double v : bv.fields[f]) CHECK(v == doctest::Approx(pair.delta[f] / std::sqrt(3.0)).epsilon(1e-12));
      }
      const auto neg = breed(control, pair.negated(), k_star, 1e-3, 1e-3, doubling, euclidean_space(n));
      for (int f = 0; f < 4; ++f) CHECK(testing::max_diff(neg.fields[f], [&] {
                                          auto m = bv.fields[f];
                                          for (double& v : m) v = -v;
                                          return m;
                                        }()) < 1e-15);
    }
  }

  TEST_CASE("only free dofs are perturbed") {
    auto space = euclidean_space(4);
    space.free[2] = {0, 1, 1, 0};
    const BreedStepper identity = [](const FieldSet& x, double) { return x; };
    const auto bv = breed(filled(4, 1.0), random_pair(5), 1, 2e-3, 1e-3, identity, space);
    CHECK(bv.fields[2][0] == 0.0);
    CHECK(bv.fields[2][3] == 0.0);
    CHECK(norm2(bv.fields[2]) == doctest::Approx(random_pair(5).delta[2]));
  }

  TEST_CASE("breeding errors") {
    const BreedStepper constant = [](const FieldSet&, double) { return filled(2, 1.0); };
    CHECK_THROWS_AS(breed(filled(2, 0.0), random_pair(1), 1, 1e-3, 1e-3, constant, euclidean_space(2)),
                    std::runtime_error);
    const BreedStepper identity = [](const FieldSet& x, double) { return x; };
    CHECK_THROWS_AS(breed(filled(2, 0.0), random_pair(1), 0, 1e-3, 1e-3, identity, euclidean_space(2)),
                    std::invalid_argument);
    CHECK_THROWS_AS(breed(filled(2, 0.0), random_pair(1), 1, 1e-4, 1e-3, identity, euclidean_space(2)),
                    std::invalid_argument);
  }

  TEST_CASE("breeding on the cavity is normalized and deterministic") {
    const auto mesh = testing::square_mesh(4);
    const FeSystem fe(mesh, ProblemKind::Cavity);
    const auto ops = assemble_static_operators(fe);
    SimConfig cfg;
    cfg.ra = 1e3;
    cfg.ensemble_size = 1;
    const auto space = fe_breeding_space(fe, ops);
    const auto stepper = ace_breed_stepper(fe, ops, cfg, cavity_problem());
    const auto pair = random_pair(11);
    const auto a = breed(constant_fields(fe), pair, 2, 1e-3, 1e-3, stepper, space);
    const auto b = breed(constant_fields(fe), pair, 2, 1e-3, 1e-3, stepper, space);
    for (int f = 0; f < 4; ++f) {
      CHECK(a.fields[f] == b.fields[f]);
      CHECK(space.norm(f, a.fields[f]) == doctest::Approx(pair.delta[f]).epsilon(1e-12));
    }
    for (int dof : fe.temperature_dirichlet().dofs) CHECK(a.fields[2][dof] == 0.0);
  }

  TEST_CASE("cavity initial conditions") {
    const auto mesh = testing::square_mesh(3);
    const FeSystem fe(mesh, ProblemKind::Cavity);
    const auto ops = assemble_static_operators(fe);
    const auto prev = constant_fields(fe);
    BredVector zero;
    for (int f = 0; f < 4; ++f) zero.fields[f].assign(prev[f].size(), 0.0);
    const auto same = build_cavity_initial_conditions(fe, ops, cavity_problem(), prev, zero, 0.0, 1e-3);
    REQUIRE(same.size() == 2);
    CHECK(same.u[0] == same.u[1]);
    CHECK(same.T[0] == same.T[1]);
    CHECK(same.p[0] == same.p[1]);
    // bootstrap: interior values are 1, boundary data imposed, pressure centered
    for (int i = 0; i < fe.num_p2(); ++i) {
      const auto label = fe.p2_label(i);
      CHECK(same.u[0][i] == (label ? 0.0 : 1.0));
      const auto& p = fe.p2_nodes()[i];
      if (p.x == 0.0) CHECK(same.T[0][i] == 1.0);
      else if (p.x == 1.0) CHECK(same.T[0][i] == 0.0);
      else CHECK(same.T[0][i] == 1.0);
    }
    CHECK(std::abs(pressure_mean(ops, same.p[0])) < 1e-14);

    std::mt19937_64 rng(41);
    BredVector bv;
    for (int f = 0; f < 4; ++f) bv.fields[f] = testing::random_vector(prev[f].size(), rng, -1e-3, 1e-3);
    const auto st = build_cavity_initial_conditions(fe, ops, cavity_problem(), prev, bv, 0.0, 1e-3);
    const auto mean_u = ensemble_mean(st, Field::Velocity);
    CHECK(testing::max_diff(mean_u, same.u[0]) < 1e-15);
    const auto mean_t = ensemble_mean(st, Field::Temperature);
    CHECK(testing::max_diff(mean_t, same.T[0]) < 1e-15);
  }
}
