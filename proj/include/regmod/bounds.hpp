// Computable error bounds for the composite estimator.
//
// Three report flavors share one g-value engine:
//  - T1: the direct bound at DeltaTilde = Delta; valid only when Q(Delta) is
//    invertible and ERC(Delta) > 0, otherwise marked "not hold";
//  - T2: exhaustive minimization of g over all subsets of Delta (refused past
//    subsetCap, the cost is 2^|Delta|);
//  - T3: polynomial surrogate minimizing over magnitude-sorted prefix sets
//    B_k; always produces a report, possibly the explicit infinity.
// maxcor maximizes over i outside T u DeltaTilde (the proof's index set; the
// printed equation has the complement flipped).
#pragma once

#include <string>

#include <json.hpp>

#include "regmod/model.hpp"
#include "regmod/operators.hpp"

namespace regmod::bounds {

struct BoundInputs {
  ops::MeasurementOperator A;
  Vec y;
  Vec w;
  Vec x;           // ground truth, supported on T u Delta
  IndexSet T;
  IndexSet Delta;  // misses; disjoint from T
  double lambda = 0.0;
  Vec muHat;       // length m, zero off T

  void validate() const;
};

struct FMultipliers {
  double f1 = 0.0;
  double f2 = 0.0;
  double f3 = 0.0;
  double f4 = 1.0;
};

struct GMultipliers {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double g4 = 0.0;
  double maxcor = 0.0;
  double ercValue = 1.0;
  FMultipliers f;
  double value = 0.0;  // g1 |x_T - muHat_T| + g2 |w| + g3 |x_{Delta \ DeltaTilde}| + g4
};

struct BoundReport {
  std::string theorem;  // "T1" | "T2" | "T3"
  bool holds = false;
  bool infinite = false;  // T2/T3 with empty candidate family
  double ercValue = 0.0;  // at Delta (T1) or at the winning DeltaTilde (T2/T3)
  double gammaStar = 0.0;
  FMultipliers f;
  GMultipliers g;          // T2/T3 only (hasG)
  bool hasG = false;
  IndexSet deltaTilde;     // Delta (T1), argmin subset (T2), prefix set (T3)
  int kMin = -1;           // T3 only; -1 when every B_k is infinite
  double boundValue = 0.0; // +inf when infinite or not holding
  std::string note;

  nlohmann::json to_json() const;
};

// Q_{T,lambda}(S) = A_{TuS}' A_{TuS} + lambda blockdiag(I_T, 0_S), T block
// first in the (T, S) column ordering.
Mat q_matrix(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda);

// Proposition 1: for lambda > 0 tests rank of A_S, for lambda = 0 rank of
// A_{TuS}, both through the pivoted Cholesky floor.
bool check_invertible(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda);

// M_{T,lambda} = I - A_T (A_T'A_T + lambda I)^-1 A_T'.
Mat m_matrix(const Mat& A, const IndexSet& T, double lambda);

// P_{T,lambda}(S) = (A_S' M_{T,lambda} A_S)^-1, computed by solve. Throws
// Error("P undefined") when the inner matrix is not positive definite.
Mat p_matrix(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda);

// ERC_{T,lambda}(S) = 1 - max_{w not in TuS} |P A_S' M A_w|_1; ERC(empty) = 1.
double erc(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda);

// gamma*_{T,lambda}(S) = |A_{(TuS)^c}' (y - A c_{T,lambda}(S))|_inf / ERC.
// Throws Error("sufficient condition fails") when ERC <= 0.
double gamma_star(const BoundInputs& in, const IndexSet& S);

// f1..f3 evaluated at DeltaTilde, f4 against the leftover Delta \ DeltaTilde.
// Throws Error("Q singular") when Q(DeltaTilde) fails the Cholesky floor.
FMultipliers f_multipliers(const Mat& A, const IndexSet& T, const IndexSet& Delta,
                           const IndexSet& DeltaTilde, double lambda);

// Corollary-2 multipliers and the g-value at one DeltaTilde. Throws when
// DeltaTilde is outside the candidate family (Q singular or ERC <= 0).
GMultipliers corollary2_g(const BoundInputs& in, const IndexSet& DeltaTilde);

BoundReport theorem1_bound(const BoundInputs& in);
BoundReport theorem2_bound(const BoundInputs& in, int subsetCap = 12);
BoundReport theorem3_bound(const BoundInputs& in);

}  // namespace regmod::bounds
