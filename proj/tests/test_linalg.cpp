#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "regmod/linalg.hpp"
#include "regmod/rng.hpp"

using namespace regmod;
using linalg::Cholesky;
using linalg::solve_spd;
using linalg::sort_desc_by_abs;
using linalg::spectral_norm;

namespace {

Mat random_matrix(int r, int c, uint64_t seed) {
  Rng rng(seed, "test-matrix");
  Mat M(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) M(i, j) = rng.normal();
  return M;
}

}  // namespace

TEST_CASE("spectral_norm: identity and diagonal") {
  CHECK(spectral_norm(Mat::Identity(3, 3)) == doctest::Approx(1.0).epsilon(1e-10));
  Mat D = Mat::Zero(2, 2);
  D(0, 0) = 3.0;
  D(1, 1) = -4.0;
  CHECK(spectral_norm(D) == doctest::Approx(4.0).epsilon(1e-8));
}

TEST_CASE("spectral_norm: fixed-seed 6x4 matches Jacobi SVD oracle") {
  Mat M = random_matrix(6, 4, 42);
  const double ref = oracle::svd_norm(M);
  const double got = spectral_norm(M);
  CHECK(std::abs(got - ref) <= 1e-8 * ref);
}

TEST_CASE("spectral_norm: transpose and scaling invariances") {
  for (uint64_t seed : {1u, 2u, 3u, 4u, 5u}) {
    Mat M = random_matrix(7, 5, seed);
    double n1 = spectral_norm(M);
    double n2 = spectral_norm(Mat(M.transpose()));
    CHECK(std::abs(n1 - n2) <= 1e-8 * std::max(1.0, n1));
    double ns = spectral_norm(Mat(-2.5 * M));
    CHECK(std::abs(ns - 2.5 * n1) <= 1e-8 * std::max(1.0, ns));
    // Oracle agreement on every draw.
    CHECK(std::abs(n1 - oracle::svd_norm(M)) <= 1e-8 * std::max(1.0, n1));
  }
}

TEST_CASE("spectral_norm: clustered top eigenvalues converge via gap amplification") {
  // Plain power iteration stalls when sigma_1/sigma_2 is this close to 1; the
  // squaring fallback has to deliver the SVD-oracle value anyway.
  for (uint64_t seed : {11u, 12u, 13u}) {
    Mat B = random_matrix(9, 9, seed);
    Eigen::HouseholderQR<Mat> qr(B);
    Mat Q = qr.householderQ();
    Vec d(9);
    d << 10.0, 10.0 - 1e-9, 10.0 - 2e-9, 10.0 - 3e-9, 5.0, 4.0, 3.0, 2.0, 1.0;
    Mat M = Q * d.asDiagonal() * Q.transpose();
    const double got = spectral_norm(M);
    const double ref = oracle::svd_norm(M);
    CHECK(std::abs(got - ref) <= 1e-8 * ref);
  }
  // Exact ties collapse to the top eigenspace after one squaring.
  Mat T = Mat::Identity(5, 5) * 7.5;
  T(4, 4) = 1.0;
  CHECK(spectral_norm(T) == doctest::Approx(7.5).epsilon(1e-10));
}

TEST_CASE("spectral_norm: empty operand and zero matrix") {
  CHECK_THROWS_WITH_AS(spectral_norm(Mat(0, 3)), doctest::Contains("empty operand"), Error);
  CHECK_THROWS_WITH_AS(spectral_norm(Mat(3, 0)), doctest::Contains("empty operand"), Error);
  CHECK(spectral_norm(Mat::Zero(4, 4)) == 0.0);
}

TEST_CASE("solve_spd: identity and scaled identity") {
  Mat B = random_matrix(4, 2, 7);
  Mat X = solve_spd(Mat::Identity(4, 4), B);
  CHECK((X - B).norm() == doctest::Approx(0.0).epsilon(1e-14));
  Mat X2 = solve_spd(Mat(2.0 * Mat::Identity(4, 4)), Mat(Mat::Identity(4, 4)));
  CHECK((X2 - 0.5 * Mat::Identity(4, 4)).norm() == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("solve_spd: fixed-seed SPD system matches Gaussian elimination oracle") {
  Mat A = random_matrix(5, 3, 11);
  Mat M = A.transpose() * A + 0.1 * Mat::Identity(3, 3);
  Vec b = Vec::Zero(3);
  b[0] = 1.0;
  Vec got = Vec(solve_spd(M, Mat(b)).col(0));
  Vec ref = Vec(oracle::ge_solve(M, Mat(b)).col(0));
  CHECK((got - ref).norm() <= 1e-10);
}

TEST_CASE("solve_spd: residual property over seeds") {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    Mat A = random_matrix(8, 6, 100 + seed);
    Mat M = A.transpose() * A + 0.05 * Mat::Identity(6, 6);
    Vec b = random_matrix(6, 1, 200 + seed).col(0);
    Vec x = Vec(solve_spd(M, Mat(b)).col(0));
    CHECK((M * x - b).norm() <= 1e-8 * b.norm());
  }
}

TEST_CASE("solve_spd: rejects singular and indefinite matrices") {
  CHECK_THROWS_WITH_AS(solve_spd(Mat::Ones(3, 3), Mat(Mat::Identity(3, 3))),
                       doctest::Contains("not positive definite"), Error);
  Mat Ind = Mat::Identity(2, 2);
  Ind(1, 1) = -1.0;
  CHECK_THROWS_WITH_AS(solve_spd(Ind, Mat(Mat::Identity(2, 2))),
                       doctest::Contains("not positive definite"), Error);
}

TEST_CASE("Cholesky: pivot floor detects a numerically singular Gram matrix") {
  // Two duplicate columns give an exactly singular Gram matrix up to rounding.
  Mat A = random_matrix(6, 2, 13);
  Mat A3(6, 3);
  A3 << A.col(0), A.col(1), A.col(0);
  Cholesky chol = Cholesky::compute(Mat(A3.transpose() * A3));
  CHECK_FALSE(chol.ok());
  Cholesky good = Cholesky::compute(Mat(A.transpose() * A));
  CHECK(good.ok());
}

TEST_CASE("Cholesky: zero-dimensional matrix is trivially fine") {
  Cholesky chol = Cholesky::compute(Mat(0, 0));
  CHECK(chol.ok());
  CHECK(chol.solve(Mat(0, 2)).cols() == 2);
}

TEST_CASE("sort_desc_by_abs: pinned examples") {
  Vec v(3);
  v << 0.2, -1.0, 0.5;
  CHECK(sort_desc_by_abs(v) == std::vector<int>{1, 2, 0});
  CHECK(sort_desc_by_abs(Vec(0)).empty());
  Vec t(2);
  t << 0.3, -0.3;
  CHECK(sort_desc_by_abs(t) == std::vector<int>{0, 1});  // tie keeps ascending index
}

TEST_CASE("sort_desc_by_abs: permutation with non-increasing magnitudes") {
  for (uint64_t seed = 0; seed < 10; ++seed) {
    Vec v = random_matrix(17, 1, 300 + seed).col(0);
    auto p = sort_desc_by_abs(v);
    std::vector<int> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    for (int i = 0; i < 17; ++i) CHECK(sorted[static_cast<size_t>(i)] == i);
    for (size_t i = 1; i < p.size(); ++i)
      CHECK(std::abs(v[p[i - 1]]) >= std::abs(v[p[i]]));
  }
}
