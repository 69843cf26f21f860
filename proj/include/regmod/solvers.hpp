// The composite estimator family.
//
// Everything here minimizes one objective,
//
//   L(b) = gamma ||b_{T^c}||_1 + gamma' ||b_T||_1 + 1/2 ||y - A b||_2^2
//        + lambda/2 ||b_T - muHat_T||_2^2 + lambdaC/2 ||b_{T^c}||_2^2,
//
// optionally with b_T frozen at muHat_T (fixedT) or with y shifted by
// A muHat and muHat added back afterwards (residual estimators). The named
// variants in solve_variant are parameter choices of this one objective.
//
// Solver: monotone accelerated proximal gradient (FISTA with adaptive
// restart), fixed step 1/L with L = ||A||_2^2 + max(lambda, lambdaC),
// stopping on relative objective change below tol, iteration cap maxIter.
#pragma once

#include <string_view>

#include "regmod/model.hpp"
#include "regmod/operators.hpp"

namespace regmod::solve {

struct ObjectiveSpec {
  double gamma = 0.0;       // l1 weight off T
  double gammaPrime = 0.0;  // l1 weight on T
  double lambda = 0.0;      // l2 tie of b_T to muHat_T
  double lambdaC = 0.0;     // l2 tie of b_{T^c} to zero
  IndexSet T;
  Vec muHat;                // length m (or empty for zeros)
  bool fixedT = false;      // freeze b_T = muHat_T, optimize only off T
};

struct SolverOptions {
  double tol = 1e-10;
  int maxIter = 50000;
  double normA2 = 0.0;     // spectral norm of A if already known, else 0
  bool recordTrace = false;
  Vec x0;                  // initial iterate in signal coordinates; empty = zeros.
                           // Residual variants translate it to their own coordinates.
};

struct SolverResult {
  Vec estimate;
  double objective = 0.0;
  int iterations = 0;
  bool converged = false;
  double residualNorm = 0.0;    // ||y - A estimate||_2
  double certificateGap = 0.0;  // max subgradient violation at the estimate
  std::string note;             // "uniqueness-not-certified" unless strongly convex
  std::vector<double> trace;    // per-iteration objective when requested
};

// Objective value of the composite at b (frozen-T constants included).
double composite_objective(const Mat& A, const Vec& y, const ObjectiveSpec& spec, const Vec& b);

SolverResult solve_composite(const Mat& A, const Vec& y, const ObjectiveSpec& spec,
                             const SolverOptions& opts = {});

// Estimator identifiers accepted by solve_variant.
const std::vector<std::string>& estimator_ids();

// Runs one named estimator with the supplied prior knowledge. The returned
// estimate is always in original signal coordinates (residual variants add
// muHat back); certificate and objective refer to the problem actually
// solved.
SolverResult solve_variant(std::string_view name, const ops::MeasurementOperator& op,
                           const Vec& y, const model::PriorKnowledge& prior,
                           const SolverOptions& opts = {});

// Closed-form regularized least squares on T u S:
//   [c]_{TuS} = Q^{-1} (A_{TuS}^T y + [lambda muHat_T; 0]),   c zero elsewhere,
// with Q = A_{TuS}^T A_{TuS} + lambda blockdiag(I_T, 0_S). Throws
// Error("Q singular ...") when the Proposition-1 condition fails.
Vec restricted_reg_ls(const Mat& A, const Vec& y, const IndexSet& T, const IndexSet& S,
                      double lambda, const Vec& muHat);

// Minimizer of gamma ||b_S||_1 + 1/2 ||y - A b||^2 + lambda/2 ||b_T - muHat_T||^2
// over vectors supported on T u S (the quantity d_{T,lambda}(S)).
Vec restricted_minimizer(const Mat& A, const Vec& y, const IndexSet& T, const IndexSet& S,
                         double gamma, double lambda, const Vec& muHat,
                         double tol = 1e-14, int maxIter = 200000);

// {i : |xhat_i| > rho}.
IndexSet estimate_support(const Vec& xhat, double rho);

}  // namespace regmod::solve
