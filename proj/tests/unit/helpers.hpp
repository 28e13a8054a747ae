#pragma once

#include <memory>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "ace/fe.hpp"
#include "ace/sparse.hpp"

namespace testing {

inline std::shared_ptr<const ace::Mesh> square_mesh(int n, ace::LabelScheme scheme = ace::LabelScheme::Cavity) {
  return std::make_shared<const ace::Mesh>(ace::build_structured_mesh(n, scheme));
}

inline Eigen::MatrixXd dense(const ace::SparseMatrix& a) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(a.rows(), a.cols());
  const auto off = a.row_offsets();
  const auto col = a.column_indices();
  const auto val = a.values();
  for (int i = 0; i < a.rows(); ++i) {
    for (int k = off[i]; k < off[i + 1]; ++k) {
      m(i, col[k]) += val[k];
    }
  }
  return m;
}

inline std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = d(rng);
  return v;
}

inline Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

/// Max |a - b| over two equally sized vectors.
inline double max_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing
