#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace ace {

/// CSR sparsity structure. Column indices are sorted and unique per row.
struct SparsityPattern {
  int n_rows = 0;
  int n_cols = 0;
  std::vector<int> row_offsets;
  std::vector<int> column_indices;

  std::size_t nnz() const { return column_indices.size(); }
  /// Position of (row, col) in the value array, or -1 if not stored.
  int find(int row, int col) const;
};

struct Triplet {
  int row;
  int col;
  double value;
};

/// Compressed sparse row matrix. Matrices built on the same pattern share it,
/// which makes same-pattern linear combinations a plain loop over values.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  explicit SparseMatrix(std::shared_ptr<const SparsityPattern> pattern);
  SparseMatrix(std::shared_ptr<const SparsityPattern> pattern, std::vector<double> values);

  /// Validates and builds a matrix from raw CSR arrays.
  static SparseMatrix from_csr(int n_rows, int n_cols, std::vector<int> row_offsets,
                               std::vector<int> column_indices, std::vector<double> values);
  /// Duplicate entries are summed.
  static SparseMatrix from_triplets(int n_rows, int n_cols, std::span<const Triplet> triplets);
  static SparseMatrix identity(int n);

  int rows() const { return pattern_ ? pattern_->n_rows : 0; }
  int cols() const { return pattern_ ? pattern_->n_cols : 0; }
  std::size_t nnz() const { return values_.size(); }

  const SparsityPattern& pattern() const { return *pattern_; }
  const std::shared_ptr<const SparsityPattern>& pattern_ptr() const { return pattern_; }
  std::span<const int> row_offsets() const { return pattern_->row_offsets; }
  std::span<const int> column_indices() const { return pattern_->column_indices; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_pattern(const SparseMatrix& other) const;

  /// Stored value at (row, col); zero if the entry is not stored.
  double at(int row, int col) const;

  /// y = A x
  void multiply(std::span<const double> x, std::span<double> y) const;
  std::vector<double> multiply(std::span<const double> x) const;
  /// y = A^T x
  std::vector<double> multiply_transpose(std::span<const double> x) const;

  SparseMatrix transpose() const;
  std::vector<std::vector<double>> to_dense() const;
  /// Max absolute value over stored entries.
  double max_abs() const;

  /// this += alpha * other; patterns must be identical.
  void add_scaled(double alpha, const SparseMatrix& other);
  void scale(double alpha);

 private:
  std::shared_ptr<const SparsityPattern> pattern_;
  std::vector<double> values_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
/// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);

}  // namespace ace
