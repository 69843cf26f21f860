// Dense kernels with pinned numerical behavior.
//
// These three routines back every invertibility decision and Lipschitz
// constant in the library, so their tolerances are part of the contract:
//  - spectral_norm: power iteration on the smaller Gram matrix, deterministic
//    start vector, tol 1e-10, cap 10000 iterations; a stalled iteration falls
//    back to repeated Gram squaring (gap amplification) before giving up;
//  - Cholesky: pivot below 1e-12 * max(diagonal) declares the matrix not
//    positive definite (the floating-point reading of "invertible");
//  - sort_desc_by_abs: descending magnitude, exact ties broken by ascending
//    index, which fixes the Theorem-3 prefix sets.
#pragma once

#include "regmod/common.hpp"

namespace regmod::linalg {

struct PowerIterationError : Error {
  PowerIterationError(const std::string& msg, double est) : Error(msg), estimate(est) {}
  double estimate;  // best value seen before the iteration cap
};

// Largest singular value of M. Throws Error("empty operand") on an empty
// matrix and PowerIterationError (carrying the best estimate) past the cap.
double spectral_norm(const Mat& M, double tol = 1e-10, int max_iter = 10000);

// Cholesky factorization M = L L^T with the pivot floor above.
class Cholesky {
 public:
  static Cholesky compute(const Mat& M);

  bool ok() const { return ok_; }
  const Mat& factor() const { return L_; }

  // Solves M X = B via the factor. Throws Error("not positive definite")
  // when the factorization failed.
  Mat solve(const Mat& B) const;
  Vec solve(const Vec& b) const;

 private:
  Mat L_;
  bool ok_ = false;
};

// One-shot symmetric positive definite solve.
Mat solve_spd(const Mat& M, const Mat& B);

// Permutation sorting v by |v_i| descending; exact-magnitude ties keep
// ascending index order.
std::vector<int> sort_desc_by_abs(const Vec& v);

}  // namespace regmod::linalg
