#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "regmod/dynamic.hpp"
#include "regmod/operators.hpp"
#include "regmod/rng.hpp"
#include "regmod/solvers.hpp"

using namespace regmod;
using namespace regmod::dyn;

namespace {

SequenceSpec walk_spec() {
  SequenceSpec s;
  s.frameCount = 6;
  s.m = 128;
  s.generator = SequenceKind::exact_sparse_walk;
  s.supportSize = 10;
  s.addFrac = 0.1;  // one element churned per frame at |N| = 10
  s.removeFrac = 0.1;
  s.valueSigma = 0.02;
  s.n0 = 64;
  s.n = 40;
  s.sigmaW2 = 1e-6;
  return s;
}

// The measurement noise stream as the chain consumes it: n0 deviates for
// frame 0, then n per frame, in order.
Vec chain_noise(const SequenceSpec& s, uint64_t seed, int frame) {
  Rng noise(seed, "dyn-noise");
  const double sw = std::sqrt(s.sigmaW2);
  for (int t = 0; t < frame; ++t) {
    const int rows = t == 0 ? s.n0 : s.n;
    for (int i = 0; i < rows; ++i) noise.normal(0.0, sw);
  }
  const int rows = frame == 0 ? s.n0 : s.n;
  Vec w(rows);
  for (int i = 0; i < rows; ++i) w[i] = noise.normal(0.0, sw);
  return w;
}

}  // namespace

TEST_CASE("generate_sequence: frozen walk is constant across frames") {
  SequenceSpec s = walk_spec();
  s.addFrac = 0.0;
  s.removeFrac = 0.0;
  s.valueSigma = 0.0;
  auto frames = generate_sequence(s, 7);
  REQUIRE(frames.size() == 6);
  for (const auto& f : frames) {
    CHECK(f.N == frames[0].N);
    CHECK((f.x - frames[0].x).norm() == 0.0);
  }
  CHECK(static_cast<int>(frames[0].N.size()) == 10);
}

TEST_CASE("generate_sequence: balanced birth-death keeps sizes and rates exact") {
  SequenceSpec s;
  s.frameCount = 21;
  s.m = 512;
  s.supportSize = 72;
  s.addFrac = 0.02;  // floor(0.02 * 72) = 1 per frame
  s.removeFrac = 0.02;
  s.valueSigma = 0.03;
  s.n0 = 2;
  s.n = 1;  // unused by the generator
  auto frames = generate_sequence(s, 11);
  const double target = 0.02 * 72;
  for (size_t t = 1; t < frames.size(); ++t) {
    CHECK(frames[t].N.size() == 72);
    const auto added = set_difference(frames[t].N, frames[t - 1].N).size();
    const auto removed = set_difference(frames[t - 1].N, frames[t].N).size();
    CHECK(std::abs(static_cast<double>(added) - target) <= 1.0);
    CHECK(added == removed);
  }
}

TEST_CASE("generate_sequence: newborns enter at betaS and mature to betaL") {
  SequenceSpec s = walk_spec();
  s.frameCount = 8;
  s.valueSigma = 0.0;  // expose the magnitude schedule exactly
  // Two births against one death per frame: the death quota always eats the
  // newest (smallest) element, so the other newborn survives and matures.
  s.addFrac = 0.2;
  s.removeFrac = 0.1;
  auto frames = generate_sequence(s, 3);
  bool sawGrowth = false;
  for (size_t t = 1; t + 3 < frames.size(); ++t) {
    for (int idx : set_difference(frames[t].N, frames[t - 1].N)) {
      CHECK(std::abs(frames[t].x[idx]) == doctest::Approx(0.25).epsilon(1e-12));
      // If it survives three more frames it must have reached betaL.
      if (set_contains(frames[t + 3].N, idx) && set_contains(frames[t + 1].N, idx) &&
          set_contains(frames[t + 2].N, idx)) {
        CHECK(std::abs(frames[t + 3].x[idx]) == doctest::Approx(1.0).epsilon(1e-12));
        sawGrowth = true;
      }
    }
  }
  CHECK(sawGrowth);
}

TEST_CASE("generate_sequence: wavelet frames are compressible and deterministic") {
  SequenceSpec s;
  s.generator = SequenceKind::compressible_wavelet;
  s.frameCount = 3;
  s.imageH = 32;
  s.imageW = 32;
  s.m = 1024;
  s.n0 = 184;
  s.n = 61;
  auto frames = generate_sequence(s, 5);
  REQUIRE(frames.size() == 3);
  for (const auto& f : frames) {
    const double total = f.x.squaredNorm();
    double onN = 0.0;
    for (int i : f.N) onN += f.x[i] * f.x[i];
    CHECK(onN >= 0.99 * total);
    // Minimality: dropping the weakest member of N breaks the energy budget.
    double weakest = std::numeric_limits<double>::infinity();
    for (int i : f.N) weakest = std::min(weakest, f.x[i] * f.x[i]);
    CHECK(onN - weakest < 0.99 * total);
    CHECK(f.N.size() >= 40);
    CHECK(f.N.size() <= 210);
  }
  // Support drifts slowly, never jumps.
  for (size_t t = 1; t < frames.size(); ++t) {
    const auto changed = set_difference(frames[t].N, frames[t - 1].N).size() +
                         set_difference(frames[t - 1].N, frames[t].N).size();
    CHECK(changed <= frames[t].N.size() / 5);
  }
  auto again = generate_sequence(s, 5);
  CHECK((again[2].x - frames[2].x).norm() == 0.0);
  auto other = generate_sequence(s, 6);
  CHECK((other[2].x - frames[2].x).norm() > 0.0);
}

TEST_CASE("resolve_rho: automatic choices and passthrough") {
  SequenceSpec s = walk_spec();
  CHECK(resolve_rho(s, {}) == doctest::Approx(0.125).epsilon(1e-15));
  s.rho = 0.4;
  CHECK(resolve_rho(s, {}) == 0.4);

  SequenceSpec w;
  w.generator = SequenceKind::compressible_wavelet;
  w.frameCount = 1;
  w.imageH = 16;
  w.imageW = 16;
  w.m = 256;
  w.n0 = 2;
  w.n = 1;
  auto frames = generate_sequence(w, 9);
  double smallest = std::numeric_limits<double>::infinity();
  for (int i : frames[0].N) smallest = std::min(smallest, std::abs(frames[0].x[i]));
  CHECK(resolve_rho(w, frames) == doctest::Approx(1.05 * smallest).epsilon(1e-12));
}

TEST_CASE("SequenceSpec validation errors") {
  SequenceSpec s = walk_spec();
  s.n0 = s.n;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("n0 must exceed n"), Error);
  s = walk_spec();
  s.generator = SequenceKind::compressible_wavelet;
  s.m = 100;  // != 32 * 32
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("imageH * imageW"), Error);
  s = walk_spec();
  s.initialTMode = InitialTMode::approximation_band;
  CHECK_THROWS_WITH_AS(s.validate(), doctest::Contains("wavelet generator"), Error);
  s = walk_spec();
  s.initialTMode = InitialTMode::explicit_set;
  s.initialT = {0, 0, 5};
  CHECK_THROWS_AS(s.validate(), Error);
}

TEST_CASE("run_dynamic: static noise-free sequence locks onto N within 2 frames") {
  SequenceSpec s = walk_spec();
  s.addFrac = 0.0;
  s.removeFrac = 0.0;
  s.valueSigma = 0.0;
  s.sigmaW2 = 0.0;
  s.n0 = 96;
  s.n = 80;
  auto opA0 = ops::gaussian_operator(s.n0, s.m, 301);
  auto opA = ops::gaussian_operator(s.n, s.m, 302);
  auto frames = generate_sequence(s, 13);
  auto res = run_dynamic(s, opA0, opA, 1e-4, 1e-3, 13);
  REQUIRE(res.size() == frames.size());
  for (size_t t = 1; t < res.size(); ++t) {
    CHECK(res[t].supportEstimate == frames[t].N);
    CHECK(res[t].nrmse < 1e-3);
    CHECK(res[t].converged);
  }
  // Fixed point: the feedback support stops moving.
  for (size_t t = 2; t < res.size(); ++t) CHECK(res[t].priorSupport == res[t - 1].priorSupport);
}

TEST_CASE("run_dynamic: feedback wiring is exact (T_t equals prior frame's Nhat)") {
  SequenceSpec s = walk_spec();
  auto opA0 = ops::gaussian_operator(s.n0, s.m, 311);
  auto opA = ops::gaussian_operator(s.n, s.m, 312);
  auto res = run_dynamic(s, opA0, opA, 1e-3, 0.1, 21);
  REQUIRE(res.size() == 6);
  CHECK(res[0].priorSupport.empty());  // walk default initial T
  for (size_t t = 1; t < res.size(); ++t) {
    CHECK(res[t].priorSupport == res[t - 1].supportEstimate);
    CHECK(is_sorted_unique(res[t].supportEstimate));
  }
  // Misses/extras compare the fed-in T against the frame's true support.
  auto frames = generate_sequence(s, 21);
  for (size_t t = 0; t < res.size(); ++t) {
    CHECK(res[t].supportMisses ==
          static_cast<int>(set_difference(frames[t].N, res[t].priorSupport).size()));
    CHECK(res[t].supportExtras ==
          static_cast<int>(set_difference(res[t].priorSupport, frames[t].N).size()));
  }
}

TEST_CASE("run_dynamic_chain: infinite rho degenerates to cold BPDN every frame") {
  SequenceSpec s = walk_spec();
  s.rho = std::numeric_limits<double>::infinity();
  auto opA0 = ops::gaussian_operator(s.n0, s.m, 321);
  auto opA = ops::gaussian_operator(s.n, s.m, 322);
  auto res = run_dynamic(s, opA0, opA, 1e-3, 0.1, 33);
  auto frames = generate_sequence(s, 33);
  for (const auto& r : res) {
    CHECK(r.supportEstimate.empty());
    CHECK(r.priorSupport.empty());
  }
  // Frame 1 must coincide with a cold BPDN solve on the same measurements.
  Vec y1 = opA.matrix * frames[1].x + chain_noise(s, 33, 1);
  model::PriorKnowledge prior;
  prior.gamma = 1e-3;
  solve::SolverOptions opts;
  opts.normA2 = opA.norm2;
  auto cold = solve_variant("bpdn", opA, y1, prior, opts);
  CHECK((res[1].estimate - cold.estimate).norm() <= 1e-12);
}

TEST_CASE("run_dynamic_chain: dynamic reg-mod-BPDN beats cold BPDN each frame") {
  SequenceSpec s = walk_spec();
  s.n0 = 44;
  s.n = 26;
  auto opA0 = ops::gaussian_operator(s.n0, s.m, 331);
  auto opA = ops::gaussian_operator(s.n, s.m, 332);
  for (uint64_t seed : {41u, 42u}) {
    auto dynRes = run_dynamic_chain("reg-mod-bpdn", s, opA0, opA, 1e-3, 0.1, seed);
    auto coldRes = run_dynamic_chain("bpdn", s, opA0, opA, 1e-3, 0.1, seed);
    REQUIRE(dynRes.size() == coldRes.size());
    // Same measurement stream, so frame 0 solves the identical problem.
    CHECK(dynRes[0].nrmse == doctest::Approx(coldRes[0].nrmse).epsilon(1e-12));
    for (size_t t = 1; t < dynRes.size(); ++t) CHECK(dynRes[t].nrmse < coldRes[t].nrmse);
  }
}

TEST_CASE("run_dynamic_chain: operator preconditions") {
  SequenceSpec s = walk_spec();
  auto opA0 = ops::gaussian_operator(s.n0, s.m, 341);
  auto opA = ops::gaussian_operator(s.n, s.m, 342);
  CHECK_THROWS_WITH_AS(run_dynamic(s, opA, opA0, 1e-3, 0.1, 1),
                       doctest::Contains("more rows"), Error);
  auto wrong = ops::gaussian_operator(s.n, 64, 343);
  CHECK_THROWS_WITH_AS(run_dynamic(s, opA0, wrong, 1e-3, 0.1, 1),
                       doctest::Contains("columns"), Error);
}
