#include <sstream>

#include "doctest.h"
#include "ace/config.hpp"

using namespace ace;

TEST_SUITE("config") {
  TEST_CASE("defaults") {
    const RunConfig cfg;
    CHECK(cfg.sim.pr == 0.71);
    CHECK(cfg.sim.dt0 == 1e-3);
    CHECK(cfg.sim.eps_ratio == 0.01);
    CHECK(cfg.sim.c_dagger == 0.35);
    CHECK(cfg.sim.mesh_n == 64);
    CHECK(cfg.sim.ensemble_size == 2);
    CHECK(cfg.sim.gmres.tol == 1e-10);
    CHECK(cfg.sim.gmres.restart == 50);
    CHECK(cfg.sim.gmres.max_iter == 2000);
    CHECK(cfg.cavity.ra_list == std::vector<double>{1e3, 1e4, 1e5, 1e6});
    CHECK(cfg.cavity.k_star == 5);
    CHECK(cfg.convergence.m_list == std::vector<int>{8, 16, 24, 32, 40});
    CHECK(cfg.convergence.pr == 1.0);
    CHECK(cfg.convergence.ra == 100.0);
    CHECK(cfg.convergence.delta == 1e-3);
    CHECK(cfg.predictability.t_star == 0.1);
    CHECK(cfg.predictability.eps_ratio == 1.0);
    CHECK(cfg.timing.dt_large_ra == 1e-4);
  }

  TEST_CASE("parsing sections and keys") {
    RunConfig cfg;
    std::istringstream in(
        "# comment\n"
        "[physics]\n"
        "pr = 1.5   # trailing\n"
        "\n"
        "[cavity]\n"
        "ra_list = 1e3, 2e3\n"
        "write_vtk = false\n"
        "[solver]\n"
        "momentum_preconditioner = ilu0\n");
    apply_config(cfg, in);
    CHECK(cfg.sim.pr == 1.5);
    CHECK(cfg.cavity.ra_list == std::vector<double>{1e3, 2e3});
    CHECK_FALSE(cfg.cavity.write_vtk);
    CHECK(cfg.sim.momentum_preconditioner == PreconditionerKind::Ilu0);
    apply_override(cfg, "run.seed", "42");
    CHECK(cfg.sim.seed == 42u);
  }

  TEST_CASE("typos are rejected with a line number") {
    const char* bad[] = {"[physics]\nprr = 1\n", "[physic]\npr = 1\n", "pr = 1\n", "[physics]\npr 1\n",
                         "[physics\n", "[physics]\npr = abc\n", "[solver]\nmomentum_preconditioner = amg\n"};
    for (const char* text : bad) {
      RunConfig cfg;
      std::istringstream in(text);
      CHECK_THROWS_AS(apply_config(cfg, in), std::invalid_argument);
    }
    RunConfig cfg;
    std::istringstream in("[physics]\n\nprr = 1\n");
    try {
      apply_config(cfg, in);
      FAIL("accepted an unknown key");
    } catch (const std::invalid_argument& e) {
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK_THROWS_AS(apply_override(cfg, "cavity.max_step", "3"), std::invalid_argument);
    CHECK_THROWS_AS(apply_config_file(cfg, "/nonexistent/file.cfg"), std::invalid_argument);
  }

  TEST_CASE("desk preset") {
    RunConfig cfg;
    apply_desk_scale(cfg);
    CHECK(cfg.sim.mesh_n == 32);
    CHECK(cfg.cavity.ra_list == std::vector<double>{1e3, 1e4, 1e5});
    CHECK(cfg.convergence.m_list == std::vector<int>{8, 16, 24});
    CHECK(cfg.timing.ra_list == std::vector<double>{1e4});
  }

  TEST_CASE("run id and header") {
    RunConfig a, b;
    CHECK(run_id(a) == run_id(b));
    CHECK(run_id(a).size() == 16);
    b.sim.seed += 1;
    CHECK(run_id(a) != run_id(b));
    const auto flat = flatten(a);
    CHECK(flat.at("physics.pr") == "0.70999999999999996");
    CHECK(flat.count("solver.momentum_preconditioner") == 1);
    std::ostringstream out;
    write_config_header(out, a);
    const auto text = out.str();
    CHECK(text.rfind("# run_id=" + run_id(a) + "\n", 0) == 0);
    CHECK(text.find("# physics.ra=10000\n") != std::string::npos);
    // every flattened key round-trips through the parser
    RunConfig c;
    for (const auto& [key, value] : flat) apply_override(c, key, value);
    CHECK(flatten(c) == flat);
  }

  TEST_CASE("preconditioner names") {
    for (auto k : {PreconditionerKind::Identity, PreconditionerKind::Jacobi, PreconditionerKind::Ilu0,
                   PreconditionerKind::SparseLu})
      CHECK(parse_preconditioner(to_string(k)) == k);
    CHECK_THROWS(parse_preconditioner("amg"));
  }
}
