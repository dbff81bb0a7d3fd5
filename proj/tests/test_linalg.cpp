#include <catch2/catch_amalgamated.hpp>

#include "cogc/code.hpp"
#include "cogc/linalg.hpp"
#include "cogc/rng.hpp"
#include "support/oracles.hpp"

using namespace cogc;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      m(i, j) = rng::normal_at(seed, rng::kMask, static_cast<std::uint64_t>(i),
                               static_cast<std::uint64_t>(j));
  return m;
}

}  // namespace

TEST_CASE("rank of simple matrices", "[linalg]") {
  CHECK(numerical_rank(Matrix::Identity(4, 4)) == 4);
  CHECK(numerical_rank(Matrix::Zero(3, 5)) == 0);
  CHECK(numerical_rank(Matrix()) == 0);
  Matrix bad = Matrix::Ones(2, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(numerical_rank(bad), Error);
}

TEST_CASE("rank agrees with the SVD oracle", "[linalg]") {
  for (int trial = 0; trial < 50; ++trial) {
    const int rows = 2 + trial % 7, cols = 2 + (trial / 2) % 7;
    Matrix a = random_matrix(rows, cols, 100 + static_cast<std::uint64_t>(trial));
    if (trial % 3 == 0 && rows > 2) a.row(rows - 1) = 0.5 * a.row(0) - a.row(1);
    if (trial % 5 == 0 && cols > 2) a.col(cols - 1) = a.col(0);
    CHECK(numerical_rank(a) == oracles::svd_rank(a));
  }
}

TEST_CASE("rank is stable under row permutation", "[linalg]") {
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_matrix(6, 5, 200 + static_cast<std::uint64_t>(trial));
    a.row(4) = a.row(0) + a.row(1);
    const int base = numerical_rank(a);
    Matrix shuffled = a;
    shuffled.row(0).swap(shuffled.row(5));
    shuffled.row(2).swap(shuffled.row(3));
    CHECK(numerical_rank(shuffled) == base);
  }
}

TEST_CASE("rref preserves the row space and normalizes pivots", "[linalg]") {
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = random_matrix(5, 4, 300 + static_cast<std::uint64_t>(trial));
    if (trial % 2 == 0) a.row(3) = 2.0 * a.row(1);
    const Rref rr = reduced_row_echelon(a);
    CHECK(rr.rank() == numerical_rank(a));
    for (std::size_t p = 0; p < rr.pivot_cols.size(); ++p)
      CHECK(rr.echelon(static_cast<Eigen::Index>(p), rr.pivot_cols[p]) == 1.0);
    // every original row reduces to zero against the echelon rows
    for (int i = 0; i < a.rows(); ++i) {
      Eigen::RowVectorXd v = a.row(i);
      for (std::size_t p = 0; p < rr.pivot_cols.size(); ++p)
        v -= v(rr.pivot_cols[p]) * rr.echelon.row(static_cast<Eigen::Index>(p));
      CHECK(v.cwiseAbs().maxCoeff() < 1e-8 * std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
  }
}

TEST_CASE("min-norm solve is exact on consistent systems", "[linalg]") {
  Matrix a = random_matrix(3, 5, 400);
  Matrix x_true = random_matrix(5, 2, 401);
  Matrix rhs = a * x_true;
  Matrix x = min_norm_solve(a, rhs);
  CHECK((a * x - rhs).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("matching agrees with brute force", "[linalg]") {
  for (int trial = 0; trial < 200; ++trial) {
    const int rows = 1 + trial % 6, cols = 1 + (trial / 3) % 6;
    std::vector<std::vector<int>> adj(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c)
        if (rng::uniform(500 + static_cast<std::uint64_t>(trial), rng::kMask,
                         static_cast<std::uint64_t>(r), static_cast<std::uint64_t>(c)) < 0.4)
          adj[static_cast<std::size_t>(r)].push_back(c);
    CHECK(max_bipartite_matching(adj, cols) == oracles::brute_matching(adj, cols));
  }
}
