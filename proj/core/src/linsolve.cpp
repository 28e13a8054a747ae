#include "ace/linsolve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <Eigen/OrderingMethods>
#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

namespace ace {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void residual(const SparseMatrix& a, std::span<const double> b, std::span<const double> x,
              std::span<double> r) {
  a.multiply(x, r);
  for (std::size_t i = 0; i < r.size(); ++i) {
    r[i] = b[i] - r[i];
  }
}

}  // namespace

void IdentityPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  std::copy(r.begin(), r.end(), z.begin());
}

JacobiPreconditioner::JacobiPreconditioner(const SparseMatrix& a) : inverse_diagonal_(a.rows()) {
  for (int i = 0; i < a.rows(); ++i) {
    const double d = a.at(i, i);
    if (d == 0.0) {
      throw std::invalid_argument("JacobiPreconditioner: zero diagonal entry");
    }
    inverse_diagonal_[i] = 1.0 / d;
  }
}

void JacobiPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  for (std::size_t i = 0; i < r.size(); ++i) {
    z[i] = inverse_diagonal_[i] * r[i];
  }
}

Ilu0Preconditioner::Ilu0Preconditioner(const SparseMatrix& a) : factors_(a), diagonal_(a.rows(), -1) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("Ilu0Preconditioner: matrix must be square");
  }
  const int n = a.rows();
  const auto offsets = factors_.row_offsets();
  const auto cols = factors_.column_indices();
  auto vals = factors_.values();
  for (int i = 0; i < n; ++i) {
    diagonal_[i] = factors_.pattern().find(i, i);
    if (diagonal_[i] < 0) {
      throw std::invalid_argument("Ilu0Preconditioner: missing diagonal entry");
    }
  }
  std::vector<int> position(n, -1);
  for (int i = 0; i < n; ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      position[cols[k]] = k;
    }
    for (int k = offsets[i]; k < offsets[i + 1] && cols[k] < i; ++k) {
      const int pivot_row = cols[k];
      const double pivot = vals[diagonal_[pivot_row]];
      const double lik = vals[k] / pivot;
      vals[k] = lik;
      for (int m = diagonal_[pivot_row] + 1; m < offsets[pivot_row + 1]; ++m) {
        const int p = position[cols[m]];
        if (p >= 0) {
          vals[p] -= lik * vals[m];
        }
      }
    }
    if (vals[diagonal_[i]] == 0.0 || !std::isfinite(vals[diagonal_[i]])) {
      throw std::invalid_argument("Ilu0Preconditioner: zero pivot (singular preconditioner)");
    }
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      position[cols[k]] = -1;
    }
  }
}

void Ilu0Preconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const int n = factors_.rows();
  const auto offsets = factors_.row_offsets();
  const auto cols = factors_.column_indices();
  const auto vals = factors_.values();
  for (int i = 0; i < n; ++i) {
    double sum = r[i];
    for (int k = offsets[i]; k < diagonal_[i]; ++k) {
      sum -= vals[k] * z[cols[k]];
    }
    z[i] = sum;
  }
  for (int i = n - 1; i >= 0; --i) {
    double sum = z[i];
    for (int k = diagonal_[i] + 1; k < offsets[i + 1]; ++k) {
      sum -= vals[k] * z[cols[k]];
    }
    z[i] = sum / vals[diagonal_[i]];
  }
}

struct SparseLuPreconditioner::Impl {
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
};

SparseLuPreconditioner::SparseLuPreconditioner(const SparseMatrix& a) : impl_(std::make_unique<Impl>()) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("SparseLuPreconditioner: matrix must be square");
  }
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(a.nnz());
  const auto offsets = a.row_offsets();
  const auto cols = a.column_indices();
  const auto vals = a.values();
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      if (vals[k] != 0.0) {
        entries.emplace_back(i, cols[k], vals[k]);
      }
    }
  }
  Eigen::SparseMatrix<double> m(a.rows(), a.cols());
  m.setFromTriplets(entries.begin(), entries.end());
  impl_->lu.compute(m);
  if (impl_->lu.info() != Eigen::Success) {
    throw std::invalid_argument("SparseLuPreconditioner: factorization failed: " + impl_->lu.lastErrorMessage());
  }
}

SparseLuPreconditioner::~SparseLuPreconditioner() = default;

void SparseLuPreconditioner::apply(std::span<const double> r, std::span<double> z) const {
  const Eigen::Map<const Eigen::VectorXd> rhs(r.data(), static_cast<Eigen::Index>(r.size()));
  Eigen::Map<Eigen::VectorXd> out(z.data(), static_cast<Eigen::Index>(z.size()));
  out = impl_->lu.solve(rhs);
}

long SparseLuPreconditioner::factor_nonzeros() const {
  return static_cast<long>(impl_->lu.nnzL() + impl_->lu.nnzU());
}

std::unique_ptr<Preconditioner> make_preconditioner(PreconditionerKind kind, const SparseMatrix& a) {
  switch (kind) {
    case PreconditionerKind::Identity:
      return std::make_unique<IdentityPreconditioner>();
    case PreconditionerKind::Jacobi:
      return std::make_unique<JacobiPreconditioner>(a);
    case PreconditionerKind::Ilu0:
      return std::make_unique<Ilu0Preconditioner>(a);
    case PreconditionerKind::SparseLu:
      return std::make_unique<SparseLuPreconditioner>(a);
  }
  throw std::invalid_argument("make_preconditioner: unknown kind");
}

SolveResult gmres_solve(const SparseMatrix& a, std::span<const double> b, std::span<const double> x0,
                        const GmresSettings& settings, const Preconditioner& precond) {
  const auto start = Clock::now();
  const int n = a.rows();
  if (a.cols() != n || b.size() != static_cast<std::size_t>(n) ||
      (!x0.empty() && x0.size() != static_cast<std::size_t>(n))) {
    throw std::invalid_argument("gmres_solve: dimension mismatch");
  }
  if (!(settings.tol > 0.0) || settings.restart < 1 || settings.max_iter < 0) {
    throw std::invalid_argument("gmres_solve: invalid settings");
  }

  SolveResult result;
  result.x.assign(n, 0.0);
  if (!x0.empty()) {
    std::copy(x0.begin(), x0.end(), result.x.begin());
  }
  auto& report = result.report;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(result.x.begin(), result.x.end(), 0.0);
    report.converged = true;
    report.wall_seconds = seconds_since(start);
    return result;
  }

  const int m = settings.restart;
  std::vector<std::vector<double>> basis(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> hessenberg(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1), y(m);
  std::vector<double> r(n), w(n), z(n);

  residual(a, b, result.x, r);
  double rel = norm2(r) / bnorm;
  report.relative_residual = rel;
  report.cycle_residuals.push_back(rel);

  while (rel > settings.tol && report.iterations < settings.max_iter) {
    const double beta = norm2(r);
    for (int i = 0; i < n; ++i) {
      basis[0][i] = r[i] / beta;
    }
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    bool breakdown = false;
    for (; k < m && report.iterations < settings.max_iter; ++k) {
      ++report.iterations;
      precond.apply(basis[k], z);
      a.multiply(z, w);
      // Modified Gram-Schmidt.
      for (int j = 0; j <= k; ++j) {
        const double h = dot(w, basis[j]);
        hessenberg[j][k] = h;
        axpy(-h, basis[j], w);
      }
      const double hnext = norm2(w);
      hessenberg[k + 1][k] = hnext;
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * hessenberg[j][k] + sn[j] * hessenberg[j + 1][k];
        hessenberg[j + 1][k] = -sn[j] * hessenberg[j][k] + cs[j] * hessenberg[j + 1][k];
        hessenberg[j][k] = t;
      }
      const double denom = std::hypot(hessenberg[k][k], hessenberg[k + 1][k]);
      if (denom == 0.0) {
        breakdown = true;
        break;
      }
      cs[k] = hessenberg[k][k] / denom;
      sn[k] = hessenberg[k + 1][k] / denom;
      hessenberg[k][k] = denom;
      hessenberg[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      if (hnext == 0.0) {
        ++k;
        breakdown = true;
        break;
      }
      for (int i = 0; i < n; ++i) {
        basis[k + 1][i] = w[i] / hnext;
      }
      if (std::abs(g[k + 1]) / bnorm <= settings.tol) {
        ++k;
        break;
      }
    }

    // Back substitution for y, then x += M^{-1} V y.
    for (int i = k - 1; i >= 0; --i) {
      double sum = g[i];
      for (int j = i + 1; j < k; ++j) {
        sum -= hessenberg[i][j] * y[j];
      }
      y[i] = sum / hessenberg[i][i];
    }
    std::fill(w.begin(), w.end(), 0.0);
    for (int j = 0; j < k; ++j) {
      axpy(y[j], basis[j], w);
    }
    precond.apply(w, z);
    axpy(1.0, z, result.x);

    residual(a, b, result.x, r);
    rel = norm2(r) / bnorm;
    report.cycle_residuals.push_back(rel);
    if (breakdown && rel > settings.tol) {
      break;
    }
  }

  report.relative_residual = rel;
  report.converged = rel <= settings.tol;
  report.wall_seconds = seconds_since(start);
  return result;
}

SolveResult cg_solve(const SparseMatrix& a, std::span<const double> b, double tol, int max_iter,
                     std::span<const double> x0) {
  const auto start = Clock::now();
  const int n = a.rows();
  if (a.cols() != n || b.size() != static_cast<std::size_t>(n) ||
      (!x0.empty() && x0.size() != static_cast<std::size_t>(n))) {
    throw std::invalid_argument("cg_solve: dimension mismatch");
  }
  SolveResult result;
  result.x.assign(n, 0.0);
  auto& report = result.report;
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    report.converged = true;
    report.wall_seconds = seconds_since(start);
    return result;
  }
  if (!x0.empty()) {
    std::copy(x0.begin(), x0.end(), result.x.begin());
  }

  const JacobiPreconditioner precond(a);
  std::vector<double> r(n), z(n), p(n), q(n);
  residual(a, b, result.x, r);
  precond.apply(r, z);
  p = z;
  double rz = dot(r, z);
  double rel = norm2(r) / bnorm;
  while (rel > tol && report.iterations < max_iter) {
    a.multiply(p, q);
    const double curvature = dot(p, q);
    if (!(curvature > 0.0)) {
      throw std::domain_error("cg_solve: non-positive curvature, matrix is not SPD");
    }
    const double alpha = rz / curvature;
    axpy(alpha, p, result.x);
    axpy(-alpha, q, r);
    ++report.iterations;
    rel = norm2(r) / bnorm;
    if (rel <= tol) {
      break;
    }
    precond.apply(r, z);
    const double rz_next = dot(r, z);
    const double beta = rz_next / rz;
    rz = rz_next;
    for (int i = 0; i < n; ++i) {
      p[i] = z[i] + beta * p[i];
    }
  }
  report.relative_residual = rel;
  report.converged = rel <= tol;
  report.wall_seconds = seconds_since(start);
  return result;
}

bool MultiSolveResult::all_converged() const {
  return std::all_of(reports.begin(), reports.end(), [](const auto& r) { return r.converged; });
}

void parallel_for(int count, int jobs, const std::function<void(int)>& fn) {
  jobs = std::clamp(jobs, 1, std::max(count, 1));
  if (jobs == 1) {
    for (int i = 0; i < count; ++i) {
      fn(i);
    }
    return;
  }
  std::vector<std::thread> workers;
  std::vector<std::exception_ptr> errors(jobs);
  for (int w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      try {
        for (int i = w; i < count; i += jobs) {
          fn(i);
        }
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : workers) {
    t.join();
  }
  for (auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }
}

MultiSolveResult multi_rhs_solve(const SparseMatrix& a, std::span<const std::vector<double>> rhs,
                                 std::span<const std::vector<double>> x0, const Preconditioner& precond,
                                 const GmresSettings& settings, int jobs) {
  if (!x0.empty() && x0.size() != rhs.size()) {
    throw std::invalid_argument("multi_rhs_solve: initial guess count does not match rhs count");
  }
  for (const auto& b : rhs) {
    if (b.size() != static_cast<std::size_t>(a.rows())) {
      throw std::invalid_argument("multi_rhs_solve: rhs dimension mismatch");
    }
  }
  MultiSolveResult out;
  out.solutions.resize(rhs.size());
  out.reports.resize(rhs.size());
  parallel_for(static_cast<int>(rhs.size()), jobs, [&](int j) {
    std::span<const double> guess;
    if (!x0.empty()) {
      guess = x0[j];
    }
    auto solved = gmres_solve(a, rhs[j], guess, settings, precond);
    out.solutions[j] = std::move(solved.x);
    out.reports[j] = std::move(solved.report);
  });
  return out;
}

MultiSolveResult multi_rhs_solve(const SparseMatrix& a, std::span<const std::vector<double>> rhs,
                                 std::span<const std::vector<double>> x0, PreconditionerKind kind,
                                 const GmresSettings& settings, int jobs) {
  const auto start = Clock::now();
  const auto precond = make_preconditioner(kind, a);
  const double setup = seconds_since(start);
  auto out = multi_rhs_solve(a, rhs, x0, *precond, settings, jobs);
  out.setup_seconds = setup;
  out.preconditioner_builds = 1;
  return out;
}

ReusedPreconditioner::ReusedPreconditioner(PreconditionerKind kind, int refresh_iterations)
    : kind_(kind), refresh_iterations_(refresh_iterations) {
  if (refresh_iterations < 0) {
    throw std::invalid_argument("ReusedPreconditioner: refresh_iterations must be non-negative");
  }
}

MultiSolveResult ReusedPreconditioner::solve(const SparseMatrix& a, std::span<const std::vector<double>> rhs,
                                             std::span<const std::vector<double>> x0,
                                             const GmresSettings& settings, int jobs) {
  auto rebuild = [&] {
    const auto start = Clock::now();
    precond_ = make_preconditioner(kind_, a);
    setup_seconds_ += seconds_since(start);
    ++builds_;
    stale_ = false;
  };
  double setup_before = setup_seconds_;
  int builds_before = builds_;
  MultiSolveResult result;
  bool done = false;
  if (!stale_ && precond_) {
    GmresSettings capped = settings;
    capped.max_iter = std::min(settings.max_iter, std::max(1, 4 * refresh_iterations_));
    result = multi_rhs_solve(a, rhs, x0, *precond_, capped, jobs);
    done = result.all_converged();
  }
  if (!done) {
    rebuild();
    result = multi_rhs_solve(a, rhs, x0, *precond_, settings, jobs);
  }
  int worst = 0;
  for (const auto& r : result.reports) {
    worst = std::max(worst, r.iterations);
  }
  if (worst > refresh_iterations_) {
    stale_ = true;
  }
  result.setup_seconds = setup_seconds_ - setup_before;
  result.preconditioner_builds = builds_ - builds_before;
  return result;
}

}  // namespace ace
