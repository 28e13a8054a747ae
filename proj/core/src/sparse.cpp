#include "ace/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ace {

int SparsityPattern::find(int row, int col) const {
  const auto begin = column_indices.begin() + row_offsets[row];
  const auto end = column_indices.begin() + row_offsets[row + 1];
  const auto it = std::lower_bound(begin, end, col);
  if (it == end || *it != col) {
    return -1;
  }
  return static_cast<int>(it - column_indices.begin());
}

SparseMatrix::SparseMatrix(std::shared_ptr<const SparsityPattern> pattern)
    : pattern_(std::move(pattern)), values_(pattern_->nnz(), 0.0) {}

SparseMatrix::SparseMatrix(std::shared_ptr<const SparsityPattern> pattern, std::vector<double> values)
    : pattern_(std::move(pattern)), values_(std::move(values)) {
  if (values_.size() != pattern_->nnz()) {
    throw std::invalid_argument("SparseMatrix: value count does not match pattern");
  }
}

SparseMatrix SparseMatrix::from_csr(int n_rows, int n_cols, std::vector<int> row_offsets,
                                    std::vector<int> column_indices, std::vector<double> values) {
  if (n_rows < 0 || n_cols < 0 || row_offsets.size() != static_cast<std::size_t>(n_rows) + 1 ||
      row_offsets.front() != 0 ||
      static_cast<std::size_t>(row_offsets.back()) != column_indices.size() ||
      column_indices.size() != values.size()) {
    throw std::invalid_argument("SparseMatrix::from_csr: inconsistent CSR arrays");
  }
  for (int i = 0; i < n_rows; ++i) {
    if (row_offsets[i + 1] < row_offsets[i]) {
      throw std::invalid_argument("SparseMatrix::from_csr: row offsets not monotone");
    }
    for (int k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      const int c = column_indices[k];
      if (c < 0 || c >= n_cols || (k > row_offsets[i] && column_indices[k - 1] >= c)) {
        throw std::invalid_argument("SparseMatrix::from_csr: columns must be sorted, unique, in range");
      }
    }
  }
  auto pattern = std::make_shared<SparsityPattern>();
  pattern->n_rows = n_rows;
  pattern->n_cols = n_cols;
  pattern->row_offsets = std::move(row_offsets);
  pattern->column_indices = std::move(column_indices);
  return SparseMatrix(std::move(pattern), std::move(values));
}

SparseMatrix SparseMatrix::from_triplets(int n_rows, int n_cols, std::span<const Triplet> triplets) {
  std::vector<Triplet> sorted(triplets.begin(), triplets.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<int> offsets(n_rows + 1, 0);
  std::vector<int> cols;
  std::vector<double> vals;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    const auto& t = sorted[k];
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols) {
      throw std::invalid_argument("SparseMatrix::from_triplets: index out of range");
    }
    if (k > 0 && sorted[k - 1].row == t.row && sorted[k - 1].col == t.col) {
      vals.back() += t.value;
      continue;
    }
    cols.push_back(t.col);
    vals.push_back(t.value);
    ++offsets[t.row + 1];
  }
  for (int i = 0; i < n_rows; ++i) {
    offsets[i + 1] += offsets[i];
  }
  return from_csr(n_rows, n_cols, std::move(offsets), std::move(cols), std::move(vals));
}

SparseMatrix SparseMatrix::identity(int n) {
  std::vector<int> offsets(n + 1);
  std::vector<int> cols(n);
  for (int i = 0; i < n; ++i) {
    offsets[i + 1] = i + 1;
    cols[i] = i;
  }
  return from_csr(n, n, std::move(offsets), std::move(cols), std::vector<double>(n, 1.0));
}

bool SparseMatrix::same_pattern(const SparseMatrix& other) const {
  if (pattern_ == other.pattern_) {
    return true;
  }
  return pattern_ && other.pattern_ && pattern_->n_rows == other.pattern_->n_rows &&
         pattern_->n_cols == other.pattern_->n_cols &&
         pattern_->row_offsets == other.pattern_->row_offsets &&
         pattern_->column_indices == other.pattern_->column_indices;
}

double SparseMatrix::at(int row, int col) const {
  const int k = pattern_->find(row, col);
  return k < 0 ? 0.0 : values_[k];
}

void SparseMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  if (x.size() != static_cast<std::size_t>(cols()) || y.size() != static_cast<std::size_t>(rows())) {
    throw std::invalid_argument("SparseMatrix::multiply: dimension mismatch");
  }
  const auto& offsets = pattern_->row_offsets;
  const auto& columns = pattern_->column_indices;
  const double* v = values_.data();
  for (int i = 0; i < rows(); ++i) {
    double sum = 0.0;
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      sum += v[k] * x[columns[k]];
    }
    y[i] = sum;
  }
}

std::vector<double> SparseMatrix::multiply(std::span<const double> x) const {
  std::vector<double> y(rows());
  multiply(x, y);
  return y;
}

std::vector<double> SparseMatrix::multiply_transpose(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(rows())) {
    throw std::invalid_argument("SparseMatrix::multiply_transpose: dimension mismatch");
  }
  std::vector<double> y(cols(), 0.0);
  const auto& offsets = pattern_->row_offsets;
  const auto& columns = pattern_->column_indices;
  for (int i = 0; i < rows(); ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      y[columns[k]] += values_[k] * x[i];
    }
  }
  return y;
}

SparseMatrix SparseMatrix::transpose() const {
  std::vector<Triplet> t;
  t.reserve(nnz());
  const auto& offsets = pattern_->row_offsets;
  const auto& columns = pattern_->column_indices;
  for (int i = 0; i < rows(); ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      t.push_back({columns[k], i, values_[k]});
    }
  }
  return from_triplets(cols(), rows(), t);
}

std::vector<std::vector<double>> SparseMatrix::to_dense() const {
  std::vector<std::vector<double>> dense(rows(), std::vector<double>(cols(), 0.0));
  const auto& offsets = pattern_->row_offsets;
  const auto& columns = pattern_->column_indices;
  for (int i = 0; i < rows(); ++i) {
    for (int k = offsets[i]; k < offsets[i + 1]; ++k) {
      dense[i][columns[k]] = values_[k];
    }
  }
  return dense;
}

double SparseMatrix::max_abs() const {
  double m = 0.0;
  for (double v : values_) {
    m = std::max(m, std::abs(v));
  }
  return m;
}

void SparseMatrix::add_scaled(double alpha, const SparseMatrix& other) {
  if (!same_pattern(other)) {
    throw std::invalid_argument("SparseMatrix::add_scaled: patterns differ");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    values_[k] += alpha * other.values_[k];
  }
}

void SparseMatrix::scale(double alpha) {
  for (double& v : values_) {
    v *= alpha;
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sum += a[i] * b[i];
  }
  return sum;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] += alpha * x[i];
  }
}

}  // namespace ace
