#include <chrono>
#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "ace/linsolve.hpp"

using namespace ace;

namespace {

SparseMatrix two_by_two() {
  const std::vector<Triplet> t{{0, 0, 4.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 3.0}};
  return SparseMatrix::from_triplets(2, 2, t);
}

// Nonsymmetric, diagonally dominant banded matrix.
SparseMatrix banded(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  std::vector<Triplet> t;
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int k : {-7, -3, -1, 1, 2, 9}) {
      const int j = i + k;
      if (j < 0 || j >= n) continue;
      const double v = d(rng);
      off += std::abs(v);
      t.push_back({i, j, v});
    }
    t.push_back({i, i, off + 1.0 + std::abs(d(rng))});
  }
  return SparseMatrix::from_triplets(n, n, t);
}

}  // namespace

TEST_SUITE("linsolve") {
  TEST_CASE("GMRES on the identity") {
    std::mt19937_64 rng(1);
    const auto b = testing::random_vector(10, rng);
    const auto r = gmres_solve(SparseMatrix::identity(10), b, {}, GmresSettings{}, IdentityPreconditioner{});
    CHECK(r.report.converged);
    CHECK(r.report.iterations <= 1);
    CHECK(testing::max_diff(r.x, b) < 1e-15);
  }

  TEST_CASE("GMRES on a 2x2 system") {
    const auto a = two_by_two();
    const std::vector<double> b{1.0, 2.0};
    const Eigen::Vector2d oracle = testing::dense(a).lu().solve(testing::to_eigen(b));
    const auto r = gmres_solve(a, b, {}, GmresSettings{}, IdentityPreconditioner{});
    CHECK(r.report.converged);
    CHECK(r.x[0] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
    CHECK(r.x[1] == doctest::Approx(7.0 / 11.0).epsilon(1e-12));
    CHECK(std::abs(r.x[0] - oracle[0]) < 1e-12);
  }

  TEST_CASE("GMRES on a random diagonally dominant 50x50 system") {
    std::mt19937_64 rng(2);
    const auto a = banded(50, rng);
    const auto b = testing::random_vector(50, rng);
    const Eigen::VectorXd oracle = testing::dense(a).partialPivLu().solve(testing::to_eigen(b));
    for (auto kind : {PreconditionerKind::Identity, PreconditionerKind::Jacobi, PreconditionerKind::Ilu0,
                      PreconditionerKind::SparseLu}) {
      const auto p = make_preconditioner(kind, a);
      const auto r = gmres_solve(a, b, {}, GmresSettings{}, *p);
      CHECK(r.report.converged);
      CHECK(r.report.relative_residual <= 1e-10);
      CHECK((testing::to_eigen(r.x) - oracle).lpNorm<Eigen::Infinity>() < 1e-8);
    }
  }

  TEST_CASE("GMRES argument checks and restart cycles") {
    std::mt19937_64 rng(3);
    const auto a = banded(200, rng);
    const auto b = testing::random_vector(200, rng);
    GmresSettings s;
    s.restart = 5;
    s.max_iter = 400;
    const auto r1 = gmres_solve(a, b, {}, s, IdentityPreconditioner{});
    CHECK(r1.report.cycle_residuals.size() >= 2);
    for (std::size_t k = 1; k < r1.report.cycle_residuals.size(); ++k)
      CHECK(r1.report.cycle_residuals[k] <= r1.report.cycle_residuals[k - 1] * (1.0 + 1e-12));
    // identical inputs, identical bits
    const auto r2 = gmres_solve(a, b, {}, s, IdentityPreconditioner{});
    CHECK(r1.x == r2.x);
    CHECK(r1.report.iterations == r2.report.iterations);

    GmresSettings bad;
    bad.tol = 0.0;
    CHECK_THROWS(gmres_solve(a, b, {}, bad, IdentityPreconditioner{}));
    const std::vector<double> short_b(3, 1.0);
    CHECK_THROWS(gmres_solve(a, short_b, {}, s, IdentityPreconditioner{}));
  }

  TEST_CASE("non-convergence is reported, not thrown") {
    std::mt19937_64 rng(4);
    const auto a = banded(100, rng);
    const auto b = testing::random_vector(100, rng);
    GmresSettings s;
    s.max_iter = 2;
    s.restart = 2;
    const auto r = gmres_solve(a, b, {}, s, IdentityPreconditioner{});
    CHECK_FALSE(r.report.converged);
    CHECK(r.report.relative_residual > s.tol);
  }

  TEST_CASE("ILU(0) is exact on a triangular matrix") {
    std::mt19937_64 rng(5);
    std::vector<Triplet> t;
    std::uniform_real_distribution<double> d(0.5, 1.5);
    for (int i = 0; i < 30; ++i) {
      t.push_back({i, i, 2.0 + d(rng)});
      for (int j = std::max(0, i - 4); j < i; ++j) t.push_back({i, j, d(rng) - 1.0});
    }
    const auto a = SparseMatrix::from_triplets(30, 30, t);
    const auto b = testing::random_vector(30, rng);
    const auto r = gmres_solve(a, b, {}, GmresSettings{}, Ilu0Preconditioner(a));
    CHECK(r.report.converged);
    CHECK(r.report.iterations == 1);
  }

  TEST_CASE("preconditioner construction errors") {
    const std::vector<Triplet> t{{0, 1, 1.0}, {1, 0, 1.0}};
    const auto a = SparseMatrix::from_triplets(2, 2, t);
    CHECK_THROWS_AS(JacobiPreconditioner{a}, std::invalid_argument);
    CHECK_THROWS_AS(Ilu0Preconditioner{a}, std::invalid_argument);
    const std::vector<Triplet> z{{0, 0, 1.0}, {1, 1, 0.0}};
    CHECK_THROWS_AS(SparseLuPreconditioner{SparseMatrix::from_triplets(2, 2, z)}, std::invalid_argument);
    SparseLuPreconditioner lu(two_by_two());
    CHECK(lu.factor_nonzeros() > 0);
  }

  TEST_CASE("CG examples") {
    auto two_i = SparseMatrix::identity(5);
    two_i.scale(2.0);
    const std::vector<double> ones(5, 1.0);
    const auto r = cg_solve(two_i, ones, 1e-12, 100);
    CHECK(r.report.converged);
    for (double x : r.x) CHECK(x == doctest::Approx(0.5));

    const std::vector<double> zeros(5, 0.0);
    const auto z = cg_solve(two_i, zeros, 1e-12, 100);
    CHECK(z.report.iterations == 0);
    CHECK(z.x == zeros);

    const auto mesh = testing::square_mesh(2);
    const FeSystem fe(mesh, ProblemKind::Cavity);
    const auto ops = assemble_static_operators(fe);
    std::mt19937_64 rng(6);
    const auto b = testing::random_vector(ops.M_p.rows(), rng);
    const Eigen::VectorXd oracle = testing::dense(ops.M_p).llt().solve(testing::to_eigen(b));
    const auto m = cg_solve(ops.M_p, b, 1e-14, 200);
    CHECK((testing::to_eigen(m.x) - oracle).lpNorm<Eigen::Infinity>() < 1e-10);

    const std::vector<Triplet> t{{0, 0, 1.0}, {1, 1, -1.0}};
    const std::vector<double> b2{1.0, 1.0};
    CHECK_THROWS_AS(cg_solve(SparseMatrix::from_triplets(2, 2, t), b2, 1e-12, 10), std::domain_error);
  }

  TEST_CASE("multiple right-hand sides") {
    const auto a = two_by_two();
    const std::vector<double> b{1.0, 2.0};
    const std::vector<std::vector<double>> same(4, b);
    const auto r = multi_rhs_solve(a, same, {}, PreconditionerKind::Ilu0, GmresSettings{});
    CHECK(r.all_converged());
    CHECK(r.preconditioner_builds == 1);
    for (const auto& x : r.solutions) CHECK(x == r.solutions[0]);

    const std::vector<std::vector<double>> lin{b, {2.0, 4.0}};
    const auto l = multi_rhs_solve(a, lin, {}, PreconditionerKind::Identity, GmresSettings{});
    CHECK(std::abs(l.solutions[1][0] - 2.0 * l.solutions[0][0]) < 1e-14);
    CHECK(std::abs(l.solutions[1][1] - 2.0 * l.solutions[0][1]) < 1e-14);
  }

  TEST_CASE("shared preconditioner matches fresh independent solves") {
    std::mt19937_64 rng(7);
    const auto a = banded(4000, rng);
    std::vector<std::vector<double>> rhs;
    for (int j = 0; j < 4; ++j) rhs.push_back(testing::random_vector(4000, rng));
    GmresSettings s;
    const auto shared = multi_rhs_solve(a, rhs, {}, PreconditionerKind::Ilu0, s);
    REQUIRE(shared.all_converged());
    double independent_setup = 0.0;
    for (int j = 0; j < 4; ++j) {
      const auto t0 = std::chrono::steady_clock::now();
      const auto p = make_preconditioner(PreconditionerKind::Ilu0, a);
      independent_setup += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      const auto r = gmres_solve(a, rhs[j], {}, s, *p);
      CHECK(testing::max_diff(r.x, shared.solutions[j]) < 1e-8);
    }
    CHECK(shared.setup_seconds < independent_setup);
    // thread count does not change results
    const auto threaded = multi_rhs_solve(a, rhs, {}, PreconditionerKind::Ilu0, s, 3);
    CHECK(threaded.solutions == shared.solutions);
  }

  TEST_CASE("reused preconditioner refreshes when the matrix drifts") {
    std::mt19937_64 rng(8);
    auto a = banded(300, rng);
    std::vector<std::vector<double>> rhs{testing::random_vector(300, rng)};
    ReusedPreconditioner reused(PreconditionerKind::SparseLu, 5);
    const auto first = reused.solve(a, rhs, {}, GmresSettings{});
    CHECK(first.all_converged());
    CHECK(first.preconditioner_builds == 1);
    CHECK(first.reports[0].iterations <= 2);
    // small drift: reuse
    auto drifted = a;
    drifted.scale(1.0 + 1e-6);
    const auto second = reused.solve(drifted, rhs, {}, GmresSettings{});
    CHECK(second.all_converged());
    CHECK(second.preconditioner_builds == 0);
    CHECK(reused.builds() == 1);
    reused.invalidate();
    const auto third = reused.solve(drifted, rhs, {}, GmresSettings{});
    CHECK(third.preconditioner_builds == 1);
    // a large change still gives a converged answer
    auto other = banded(300, rng);
    const auto fourth = reused.solve(other, rhs, {}, GmresSettings{});
    CHECK(fourth.all_converged());
    const Eigen::VectorXd oracle = testing::dense(other).partialPivLu().solve(testing::to_eigen(rhs[0]));
    CHECK((testing::to_eigen(fourth.solutions[0]) - oracle).lpNorm<Eigen::Infinity>() < 1e-8);
  }

  TEST_CASE("parallel_for visits every index once") {
    std::vector<int> hits(37, 0);
    parallel_for(37, 4, [&](int i) { hits[i]++; });
    for (int h : hits) CHECK(h == 1);
  }
}
