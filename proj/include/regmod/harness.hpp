// Configuration-driven Monte Carlo experiment runner.
//
// Five experiments share one config type and one CSV row schema:
//  - table1: normalized Theorem-1 bounds per (n, estimator) cell with the
//    >= 98/100 holds rule and the reg-mod lambda grid;
//  - recon-compare: tuned N-RMSE curves over the miss fraction for the whole
//    estimator family (pilot grid selection, then fresh averaging trials);
//  - bound-compare: Theorem 1/2/3 per-trial normalized bounds next to the
//    realized N-RMSE at gamma = gammaStar from Theorem 3;
//  - dynamic-demo: the recursive reconstruction chains on a compressible
//    wavelet sequence through partial-Fourier measurements;
//  - solve-one: one named estimator on a serialized ProblemInstance.
//
// Reproducibility contract: identical config + seed produce byte-identical
// CSV regardless of the thread count. Trials are seeded individually from
// named sub-streams, results land in trial-indexed slots, and every
// aggregation walks those slots in index order. Pilot trials draw from
// sub-streams disjoint from the averaging trials.
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "regmod/dynamic.hpp"
#include "regmod/model.hpp"

namespace regmod::harness {

inline constexpr std::string_view kVersion = "1.0.0";

// The 8-value tuning grid used for gamma, gammaPrime, and lambda selection.
const std::vector<double>& tuning_grid();

struct ExperimentConfig {
  std::string experiment = "table1";  // table1 | recon-compare | bound-compare
                                      // | dynamic-demo | solve-one
  std::string matrix = "gaussian";    // gaussian | mri (dynamic-demo only)
  int m = 256;
  std::vector<double> nFracs;     // measurement fractions; rows n = round(nFrac * m)
  std::vector<double> missFracs;  // sweep of model.missFrac values
  model::SignalModelParams model;
  std::vector<std::string> estimators;
  int trials = 100;
  int pilotTrials = 10;
  std::string gammaMode = "grid-best";    // grid-best | theorem3-star | fixed
  double gamma = 0.0;                     // used when gammaMode == fixed
  std::string lambdaMode = "alpha-rule";  // grid-best-bound | alpha-rule | fixed
  double alpha = 0.2;                     // lambda = alpha * sigmaW2 / sigmaP2
  double lambda = 0.0;                    // used when lambdaMode == fixed
  uint64_t seed = 0;
  std::string outPath = ".";
  int threads = 1;
  bool timing = false;  // record per-solve wall millis (sacrifices byte-identity)

  // dynamic-demo
  dyn::SequenceSpec sequence;
  int trainFrames = 5;

  // solve-one
  std::string instancePath;
  std::string estimator = "reg-mod-bpdn";
  bool withBounds = false;

  void validate() const;
  nlohmann::json to_json() const;
  // Starts from defaults_for(j["experiment"]) and overrides the keys present.
  static ExperimentConfig from_json(const nlohmann::json& j);
  // Paper-protocol defaults for each experiment name.
  static ExperimentConfig defaults_for(const std::string& experiment);
};

// One CSV field: blank, a number, or one of the two literal sentinels.
struct CsvCell {
  enum class Kind { blank, number, not_hold, inf };
  Kind kind = Kind::blank;
  double value = 0.0;

  static CsvCell blank() { return {}; }
  static CsvCell num(double v) { return {Kind::number, v}; }
  static CsvCell notHold() { return {Kind::not_hold, 0.0}; }
  static CsvCell infinite() { return {Kind::inf, 0.0}; }
  std::string str() const;  // %.17g for numbers
};

// One row of <experiment>.csv. The header is fixed:
//   experiment,n_frac,miss_frac,trial,estimator,nrmse,bound_t1,bound_t2,
//   bound_t3,erc_holds,gamma_used,lambda_used,solve_millis
// table1 rows carry the raw per-trial bound; bound-compare rows carry bounds
// divided by ||x||_2 so they compare directly against nrmse.
struct TrialRow {
  std::string experiment;
  double nFrac = 0.0;
  double missFrac = 0.0;
  int trial = 0;
  std::string estimator;
  CsvCell nrmse, boundT1, boundT2, boundT3, ercHolds, gammaUsed, lambdaUsed, solveMillis;
};

std::string csv_header();
std::string csv_string(const std::vector<TrialRow>& rows);

struct Table1Cell {
  double nFrac = 0.0;
  std::string estimator;
  int trials = 0;
  int holdsCount = 0;  // at the selected lambda
  bool holds = false;  // holdsCount >= ceil(0.98 * trials)
  double value = 0.0;  // sqrt(E[bound^2] / E[||x||^2]) over holding trials
  double lambda = 0.0;
  // Full audit of the lambda grid (single entry for mod-BPDN / BPDN).
  std::vector<double> lambdaGrid;
  std::vector<int> holdsPerLambda;
  std::vector<double> valuePerLambda;  // +inf where never holding

  nlohmann::json to_json() const;
};

struct Table1Result {
  ExperimentConfig config;
  std::vector<Table1Cell> cells;
  std::vector<TrialRow> rows;
};

struct ReconPoint {
  double missFrac = 0.0;
  std::string estimator;
  double meanNrmse = 0.0;
  double gamma = 0.0;
  double gammaPrime = 0.0;  // weighted-l1 only
  double lambda = 0.0;
  int trials = 0;

  nlohmann::json to_json() const;
};

struct ReconResult {
  ExperimentConfig config;
  std::vector<ReconPoint> points;
  std::vector<TrialRow> rows;
};

struct BoundComparePoint {
  double missFrac = 0.0;
  std::string estimator;
  int trials = 0;
  int t1Holds = 0;
  int t2Attempted = 0;   // trials where |Delta| was within the enumeration cap
  double t1Value = 0.0;  // sqrt(E[bound^2]/E[||x||^2]) over holding trials, inf if none
  double t2Value = 0.0;
  double t3Value = 0.0;
  double nrmseValue = 0.0;  // sqrt(E[error^2]/E[||x||^2])

  nlohmann::json to_json() const;
};

struct BoundCompareResult {
  ExperimentConfig config;
  std::vector<BoundComparePoint> points;
  std::vector<TrialRow> rows;
};

struct DynamicChainResult {
  std::string estimator;
  double gamma = 0.0;
  double lambda = 0.0;
  double trainScore = 0.0;  // mean training nrmse at the selected pair
  std::vector<dyn::FrameResult> frames;
};

struct DynamicDemoResult {
  ExperimentConfig config;
  double rho = 0.0;
  std::vector<DynamicChainResult> chains;
};

// Per-frame CSV for dynamic-demo:
//   estimator,t,nrmse,support_size,misses,extras,converged
std::string dynamic_csv_string(const DynamicDemoResult& result);

Table1Result run_table1(const ExperimentConfig& config);
ReconResult run_recon_compare(const ExperimentConfig& config);
BoundCompareResult run_bound_compare(const ExperimentConfig& config);
DynamicDemoResult run_dynamic_demo(const ExperimentConfig& config);
nlohmann::json solve_one(const ExperimentConfig& config);

// Runs config.experiment, writes <outPath>/<experiment>.csv (dynamic-demo:
// per-frame schema; solve-one: .json instead) plus <experiment>.meta.json,
// and returns the paths written.
std::vector<std::string> run_experiment(const ExperimentConfig& config);

}  // namespace regmod::harness
