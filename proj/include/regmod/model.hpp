// Signal and measurement model for the simulation study.
//
// A sparse signal on support N with partial, partly erroneous support
// knowledge T = (N \ Delta) u DeltaE, where Delta holds the misses and
// DeltaE the extras. Values sit at three magnitude tiers (betaL for settled
// entries, betaS / betaM for the two halves of the missed set), perturbed by
// N(0, sigmaP2). Supports, signs, signal perturbation, and measurement noise
// come from independent named sub-streams of one seed, so (for example)
// changing sigmaW2 never perturbs the signal draw.
#pragma once

#include <cstdint>

#include <json.hpp>

#include "regmod/operators.hpp"

namespace regmod::model {

struct SignalModelParams {
  int m = 256;             // ambient dimension
  int supportSize = 26;    // |N|
  double missFrac = 0.0;   // |Delta| = floor(missFrac * |N|)
  double extraFrac = 0.0;  // |DeltaE| = floor(extraFrac * |N|)
  double betaL = 1.0;
  double betaM = 0.25;
  double betaS = 0.25;
  double sigmaP2 = 1e-3;
  double sigmaW2 = 1e-5;

  void validate() const;
};

struct SupportLayout {
  int m = 0;
  IndexSet N;       // true support
  IndexSet T;       // known (partly wrong) support
  IndexSet Delta;   // N \ T, misses
  IndexSet DeltaE;  // T \ N, extras
  IndexSet Delta1;  // small-magnitude half of Delta (betaS tier)
  IndexSet Delta2;  // Delta \ Delta1 (betaM tier)

  void validate() const;
};

struct PriorKnowledge {
  IndexSet T;
  Vec muHat;  // length m, zero off T
  double gamma = 0.0;
  double gammaPrime = 0.0;
  double lambda = 0.0;
};

struct GeneratedSignal {
  Vec x;      // true signal, zero off N
  Vec mu;     // tier means, zero off N
  Vec muHat;  // prior estimate, zero off T
};

struct ProblemInstance {
  ops::MeasurementOperator op;
  Vec x;
  Vec y;
  Vec w;
  SupportLayout layout;
  PriorKnowledge prior;
  Vec mu;

  nlohmann::json to_json() const;
  static ProblemInstance from_json(const nlohmann::json& j);
};

// Draws N, Delta, DeltaE, Delta1 from the (seed, "supports") stream.
SupportLayout sample_supports(const SignalModelParams& params, uint64_t seed);

// Draws tier signs from (seed, "signs") and the on-support perturbation from
// (seed, "nu").
GeneratedSignal generate_signal(const SupportLayout& layout, const SignalModelParams& params,
                                uint64_t seed);

// y = A x + w with w ~ N(0, sigmaW2 I) from (seed, "noise"); returns (y, w).
std::pair<Vec, Vec> generate_measurements(const ops::MeasurementOperator& op, const Vec& x,
                                          double sigmaW2, uint64_t seed);

// Convenience composition of the three draws against a ready operator.
ProblemInstance make_instance(const ops::MeasurementOperator& op,
                              const SignalModelParams& params, uint64_t seed);

}  // namespace regmod::model
