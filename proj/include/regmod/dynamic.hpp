// Dynamic reg-mod-BPDN over a signal sequence.
//
// One loop per frame: solve, threshold at rho, output, feed the detected
// support and values forward as (T, muHat) for the next frame. Frame 0 is
// mod-BPDN (lambda = 0) on the richer n0-row operator, with T either empty,
// the wavelet approximation band, or an explicit set; later frames run the
// chosen feedback estimator on the steady-state operator. Sequences are
// synthetic: an exact-sparse birth-death walk (newborns enter at betaS and
// grow to betaL over growthFrames; the smallest-magnitude elements die), or
// a drifting-bump smooth image observed through its Daubechies-4 wavelet
// coefficients, whose support is its 99-percent-energy set.
#pragma once

#include <string_view>

#include "regmod/common.hpp"
#include "regmod/operators.hpp"

namespace regmod::dyn {

enum class SequenceKind { exact_sparse_walk, compressible_wavelet };
enum class InitialTMode { empty, approximation_band, explicit_set };

struct SequenceSpec {
  int frameCount = 8;
  int m = 128;
  SequenceKind generator = SequenceKind::exact_sparse_walk;

  // exact-sparse-walk knobs
  int supportSize = 10;
  double addFrac = 0.014;     // fraction of |N| born per frame
  double removeFrac = 0.014;  // fraction of |N| dying per frame, smallest first
  double valueSigma = 0.03;   // per-frame N(0, sigma^2) value perturbation
  double betaL = 1.0;
  double betaS = 0.25;
  int growthFrames = 3;  // frames for a newborn magnitude to reach betaL

  // compressible-wavelet knobs (requires m == imageH * imageW)
  int imageH = 32;
  int imageW = 32;
  double energyFraction = 0.99;

  // measurement model
  int n0 = 64;  // frame-0 rows; must exceed n
  int n = 40;   // steady-state rows
  double sigmaW2 = 1e-5;

  // support threshold; negative requests the automatic choice (walk:
  // betaS / 2; wavelet: 1.05 x the smallest frame-0 energy-support magnitude)
  double rho = -1.0;
  InitialTMode initialTMode = InitialTMode::empty;
  IndexSet initialT;  // used when initialTMode == explicit_set

  void validate() const;
};

struct SequenceFrame {
  Vec x;
  IndexSet N;
};

struct FrameResult {
  int t = 0;
  Vec estimate;
  IndexSet supportEstimate;  // {i : |estimate_i| > rho}, exactly
  IndexSet priorSupport;     // the T fed into this frame's solve
  double nrmse = 0.0;
  int supportMisses = 0;  // |N_t \ priorSupport|
  int supportExtras = 0;  // |priorSupport \ N_t|
  bool converged = true;
};

// Frames (x_t, N_t). Sub-streams: "walk-supports", "walk-signs",
// "walk-values", "bumps"; measurement noise is NOT drawn here.
std::vector<SequenceFrame> generate_sequence(const SequenceSpec& spec, uint64_t seed);

// Threshold actually used for a spec (resolves rho < 0 against frame 0).
double resolve_rho(const SequenceSpec& spec, const std::vector<SequenceFrame>& frames);

// The feedback loop with a chosen estimator for frames t > 0 ("reg-mod-bpdn",
// "reg-mod-bpdn-var", "cs-residual", ...). "bpdn" disables feedback entirely
// and solves every frame cold; "cs-residual" starts from plain BPDN at t = 0
// (no prior values exist yet). Measurement noise comes from the (seed,
// "dyn-noise") stream, n0 deviates for frame 0 then n per later frame.
std::vector<FrameResult> run_dynamic_chain(std::string_view estimator, const SequenceSpec& spec,
                                           const ops::MeasurementOperator& opA0,
                                           const ops::MeasurementOperator& opA, double gamma,
                                           double lambda, uint64_t seed);

// Dynamic reg-mod-BPDN: run_dynamic_chain("reg-mod-bpdn", ...).
std::vector<FrameResult> run_dynamic(const SequenceSpec& spec,
                                     const ops::MeasurementOperator& opA0,
                                     const ops::MeasurementOperator& opA, double gamma,
                                     double lambda, uint64_t seed);

}  // namespace regmod::dyn
