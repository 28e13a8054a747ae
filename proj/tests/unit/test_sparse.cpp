#include "doctest.h"
#include "helpers.hpp"

using namespace ace;

TEST_SUITE("sparse") {
  TEST_CASE("triplets sum duplicates and keep columns sorted") {
    const std::vector<Triplet> t{{0, 2, 1.0}, {0, 0, 2.0}, {0, 2, 3.0}, {2, 1, -1.0}};
    const auto a = SparseMatrix::from_triplets(3, 3, t);
    CHECK(a.nnz() == 3);
    CHECK(a.at(0, 2) == 4.0);
    CHECK(a.at(0, 0) == 2.0);
    CHECK(a.at(2, 1) == -1.0);
    CHECK(a.at(1, 1) == 0.0);
    CHECK(a.pattern().find(1, 1) == -1);
    const auto col = a.column_indices();
    CHECK(col[0] < col[1]);
  }

  TEST_CASE("from_csr validates input") {
    CHECK_THROWS(SparseMatrix::from_csr(2, 2, {0, 1}, {0}, {1.0}));
    CHECK_THROWS(SparseMatrix::from_csr(2, 2, {0, 1, 2}, {0, 5}, {1.0, 1.0}));
    CHECK_NOTHROW(SparseMatrix::from_csr(2, 2, {0, 1, 2}, {0, 1}, {1.0, 1.0}));
  }

  TEST_CASE("products and transpose agree with dense") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<int> pick(0, 29);
    std::vector<Triplet> t;
    for (int k = 0; k < 200; ++k) t.push_back({pick(rng) % 20, pick(rng), testing::random_vector(1, rng)[0]});
    const auto a = SparseMatrix::from_triplets(20, 30, t);
    const auto d = testing::dense(a);
    const auto x = testing::random_vector(30, rng);
    const auto y = testing::random_vector(20, rng);
    const Eigen::VectorXd ax = d * testing::to_eigen(x);
    const Eigen::VectorXd aty = d.transpose() * testing::to_eigen(y);
    CHECK((testing::to_eigen(a.multiply(x)) - ax).norm() < 1e-13);
    CHECK((testing::to_eigen(a.multiply_transpose(y)) - aty).norm() < 1e-13);
    CHECK((testing::dense(a.transpose()) - d.transpose()).norm() == 0.0);
    const auto rows = a.to_dense();
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 30; ++j) CHECK(rows[i][j] == d(i, j));
  }

  TEST_CASE("same-pattern combinations") {
    const std::vector<Triplet> t{{0, 0, 1.0}, {1, 1, 2.0}, {0, 1, 3.0}};
    auto a = SparseMatrix::from_triplets(2, 2, t);
    SparseMatrix b(a.pattern_ptr(), {1.0, 1.0, 1.0});
    CHECK(a.same_pattern(b));
    a.add_scaled(2.0, b);
    CHECK(a.at(0, 1) == 5.0);
    a.scale(-1.0);
    CHECK(a.max_abs() == 5.0);
    const auto other = SparseMatrix::identity(2);
    CHECK_FALSE(a.same_pattern(other));
    CHECK_THROWS(a.add_scaled(1.0, other));
  }

  TEST_CASE("vector helpers") {
    std::vector<double> a{3.0, 4.0}, b{1.0, 2.0};
    CHECK(dot(a, b) == 11.0);
    CHECK(norm2(a) == 5.0);
    axpy(2.0, b, a);
    CHECK(a == std::vector<double>{5.0, 8.0});
  }
}
