#pragma once

#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <vector>

#include "ace/sparse.hpp"

namespace ace {

struct SolverReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  double wall_seconds = 0.0;
  /// True relative residual after each GMRES restart cycle (CG: unused).
  std::vector<double> cycle_residuals;
};

/// Thrown by time steppers when a linear solve fails to converge.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, SolverReport report)
      : std::runtime_error(what), report_(std::move(report)) {}
  const SolverReport& report() const { return report_; }

 private:
  SolverReport report_;
};

class Preconditioner {
 public:
  virtual ~Preconditioner() = default;
  /// z = M^{-1} r
  virtual void apply(std::span<const double> r, std::span<double> z) const = 0;
};

class IdentityPreconditioner final : public Preconditioner {
 public:
  void apply(std::span<const double> r, std::span<double> z) const override;
};

/// Diagonal scaling. Throws std::invalid_argument on a zero diagonal.
class JacobiPreconditioner final : public Preconditioner {
 public:
  explicit JacobiPreconditioner(const SparseMatrix& a);
  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  std::vector<double> inverse_diagonal_;
};

/// Incomplete LU with zero fill on the matrix pattern. Throws
/// std::invalid_argument if a pivot vanishes.
class Ilu0Preconditioner final : public Preconditioner {
 public:
  explicit Ilu0Preconditioner(const SparseMatrix& a);
  void apply(std::span<const double> r, std::span<double> z) const override;

 private:
  SparseMatrix factors_;
  std::vector<int> diagonal_;
};

/// Complete sparse LU (COLAMD ordering, partial pivoting). Meant to be built
/// once and reused while the matrix drifts slowly, so GMRES still decides
/// convergence. Throws std::invalid_argument if factorization fails.
class SparseLuPreconditioner final : public Preconditioner {
 public:
  explicit SparseLuPreconditioner(const SparseMatrix& a);
  ~SparseLuPreconditioner() override;
  SparseLuPreconditioner(const SparseLuPreconditioner&) = delete;
  SparseLuPreconditioner& operator=(const SparseLuPreconditioner&) = delete;
  void apply(std::span<const double> r, std::span<double> z) const override;
  long factor_nonzeros() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

enum class PreconditionerKind { Identity, Jacobi, Ilu0, SparseLu };
std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const SparseMatrix& a);

struct GmresSettings {
  double tol = 1e-10;
  int restart = 50;
  int max_iter = 2000;
};

struct SolveResult {
  std::vector<double> x;
  SolverReport report;
};

/// Right-preconditioned restarted GMRES. Convergence is judged on the true
/// relative residual ||b - Ax|| / ||b||.
SolveResult gmres_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                        const GmresSettings& settings, const Preconditioner& precond);

/// Jacobi-preconditioned conjugate gradients. Throws std::domain_error when
/// non-positive curvature reveals a matrix that is not SPD.
SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, double tol, int max_iter,
                     std::span<const double> x0 = {});

struct MultiSolveResult {
  std::vector<std::vector<double>> solutions;
  std::vector<SolverReport> reports;
  double setup_seconds = 0.0;
  int preconditioner_builds = 0;

  bool all_converged() const;
};

/// Solves A x_j = b_j for every right-hand side with a preconditioner built
/// once. `x0` may be empty (zero initial guesses). Right-hand sides are
/// distributed over up to `jobs` threads; results do not depend on `jobs`.
MultiSolveResult multi_rhs_solve(const SparseMatrix& a, std::span<const std::vector<double>> rhs,
                                 std::span<const std::vector<double>> x0, PreconditionerKind kind,
                                 const GmresSettings& settings, int jobs = 1);

/// Same, with a caller-owned preconditioner.
MultiSolveResult multi_rhs_solve(const SparseMatrix& a, std::span<const std::vector<double>> rhs,
                                 std::span<const std::vector<double>> x0, const Preconditioner& precond,
                                 const GmresSettings& settings, int jobs = 1);

/// Preconditioner kept across a sequence of slowly changing matrices. It is
/// rebuilt when the previous solve needed more than `refresh_iterations`
/// GMRES iterations, after invalidate(), and when an attempt with a reused
/// preconditioner fails.
class ReusedPreconditioner {
 public:
  ReusedPreconditioner(PreconditionerKind kind, int refresh_iterations);

  /// Solves all right-hand sides with the current (or a rebuilt)
  /// preconditioner. An attempt with a reused preconditioner is capped at
  /// 4 * refresh_iterations iterations; on failure the preconditioner is
  /// rebuilt and the solve repeated with the full settings.
  MultiSolveResult solve(const SparseMatrix& a, std::span<const std::vector<double>> rhs,
                         std::span<const std::vector<double>> x0, const GmresSettings& settings, int jobs = 1);

  void invalidate() { stale_ = true; }
  int builds() const { return builds_; }
  double setup_seconds() const { return setup_seconds_; }

 private:
  PreconditionerKind kind_;
  int refresh_iterations_;
  std::unique_ptr<Preconditioner> precond_;
  bool stale_ = true;
  int builds_ = 0;
  double setup_seconds_ = 0.0;
};

/// Runs fn(i) for i in [0, count) on up to `jobs` threads.
void parallel_for(int count, int jobs, const std::function<void(int)>& fn);

}  // namespace ace
