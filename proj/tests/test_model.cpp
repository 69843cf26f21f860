#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "regmod/model.hpp"
#include "regmod/rng.hpp"

using namespace regmod;
using namespace regmod::model;

namespace {

SignalModelParams table_params() {
  SignalModelParams p;
  p.m = 256;
  p.supportSize = 26;
  p.missFrac = 0.04;
  p.extraFrac = 0.04;
  p.betaL = 1.0;
  p.betaM = 0.25;
  p.betaS = 0.25;
  p.sigmaP2 = 1e-3;
  p.sigmaW2 = 1e-5;
  return p;
}

}  // namespace

TEST_CASE("sample_supports: sizes from floor rule and set identities") {
  SignalModelParams p = table_params();
  auto lay = sample_supports(p, 17);
  CHECK(lay.N.size() == 26);
  CHECK(lay.Delta.size() == 1);   // floor(0.04 * 26)
  CHECK(lay.DeltaE.size() == 1);
  CHECK(lay.T.size() == 26);
  CHECK(set_difference(lay.Delta, lay.N).empty());
  CHECK(sets_disjoint(lay.DeltaE, lay.N));
  CHECK(lay.T == set_union(set_difference(lay.N, lay.Delta), lay.DeltaE));
  CHECK(set_union(lay.Delta1, lay.Delta2) == lay.Delta);

  p.missFrac = 0.2;
  p.extraFrac = 0.1;
  auto lay2 = sample_supports(p, 17);
  CHECK(lay2.Delta.size() == 5);   // floor(5.2)
  CHECK(lay2.DeltaE.size() == 2);  // floor(2.6)
  CHECK(lay2.Delta1.size() == 2);  // floor(5 / 2)
  CHECK(lay2.Delta2.size() == 3);
}

TEST_CASE("sample_supports: deterministic per seed, varies across seeds") {
  SignalModelParams p = table_params();
  auto a = sample_supports(p, 5);
  auto b = sample_supports(p, 5);
  CHECK(a.N == b.N);
  CHECK(a.Delta == b.Delta);
  CHECK(a.DeltaE == b.DeltaE);
  bool differs = false;
  for (uint64_t s = 6; s < 10 && !differs; ++s) differs = (sample_supports(p, s).N != a.N);
  CHECK(differs);
}

TEST_CASE("generate_signal: tier magnitudes and prior structure") {
  SignalModelParams p = table_params();
  p.missFrac = 0.2;
  p.extraFrac = 0.1;
  p.betaM = 0.4;
  p.betaS = 0.2;
  auto lay = sample_supports(p, 23);
  auto sig = generate_signal(lay, p, 23);

  for (int i = 0; i < p.m; ++i)
    if (!set_contains(lay.N, i)) CHECK(sig.x[i] == 0.0);
  for (int i : lay.Delta1) CHECK(std::abs(sig.mu[i]) == doctest::Approx(p.betaS));
  for (int i : lay.Delta2) CHECK(std::abs(sig.mu[i]) == doctest::Approx(p.betaM));
  for (int i : set_difference(lay.N, lay.Delta)) CHECK(std::abs(sig.mu[i]) == doctest::Approx(p.betaL));

  for (int i = 0; i < p.m; ++i)
    if (!set_contains(lay.T, i)) CHECK(sig.muHat[i] == 0.0);
  for (int i : set_intersection(lay.T, lay.N)) CHECK(sig.muHat[i] == sig.mu[i]);
  for (int i : lay.DeltaE) CHECK(std::abs(sig.muHat[i]) == doctest::Approx(p.betaS));

  // Perturbation is confined to N.
  for (int i : lay.N) CHECK(sig.x[i] != sig.mu[i]);
}

TEST_CASE("generate_signal: second-moment matches the tier formula") {
  SignalModelParams p = table_params();
  p.missFrac = 0.2;  // |Delta| = 5: 2 at betaS, 3 at betaM, 21 at betaL
  double expect = 21.0 * 1.0 + 2.0 * 0.0625 + 3.0 * 0.0625 + 26.0 * 1e-3;
  double acc = 0.0;
  const int trials = 500;
  for (uint64_t s = 0; s < trials; ++s) {
    auto lay = sample_supports(p, s);
    acc += generate_signal(lay, p, s).x.squaredNorm();
  }
  CHECK(acc / trials == doctest::Approx(expect).epsilon(0.01));
}

TEST_CASE("generate_measurements: exact composition and zero-noise edge") {
  SignalModelParams p = table_params();
  auto op = ops::gaussian_operator(40, p.m, 3);
  auto lay = sample_supports(p, 3);
  auto sig = generate_signal(lay, p, 3);
  auto [y, w] = generate_measurements(op, sig.x, p.sigmaW2, 3);
  CHECK((y - (op.matrix * sig.x + w)).norm() == 0.0);
  auto [y0, w0] = generate_measurements(op, sig.x, 0.0, 3);
  CHECK(w0.norm() == 0.0);
  CHECK((y0 - op.matrix * sig.x).norm() == 0.0);
}

TEST_CASE("sub-streams: noise level does not perturb the signal; noise scales exactly") {
  SignalModelParams p = table_params();
  auto op = ops::gaussian_operator(40, p.m, 9);
  auto lay = sample_supports(p, 11);
  auto sigA = generate_signal(lay, p, 11);
  p.sigmaW2 = 1e-2;
  auto sigB = generate_signal(lay, p, 11);
  CHECK(sigA.x == sigB.x);
  auto [y1, w1] = generate_measurements(op, sigA.x, 1e-6, 11);
  auto [y4, w4] = generate_measurements(op, sigA.x, 4e-6, 11);
  CHECK((w4 - 2.0 * w1).norm() == 0.0);
}

TEST_CASE("make_instance: bundle JSON round trip is lossless") {
  SignalModelParams p = table_params();
  auto op = ops::gaussian_operator(33, p.m, 4);
  auto inst = make_instance(op, p, 7);
  inst.prior.gamma = 1e-3;
  inst.prior.lambda = 2e-3;
  auto j = inst.to_json();
  auto back = ProblemInstance::from_json(j);
  CHECK(back.op.matrix == inst.op.matrix);
  CHECK(back.x == inst.x);
  CHECK(back.y == inst.y);
  CHECK(back.w == inst.w);
  CHECK(back.layout.N == inst.layout.N);
  CHECK(back.layout.T == inst.layout.T);
  CHECK(back.prior.muHat == inst.prior.muHat);
  CHECK(back.prior.gamma == inst.prior.gamma);
  CHECK(back.prior.lambda == inst.prior.lambda);
}

TEST_CASE("bundle: dimension mismatch errors name both sides") {
  SignalModelParams p = table_params();
  p.m = 16;
  p.supportSize = 4;
  auto op = ops::gaussian_operator(8, 16, 4);
  auto inst = make_instance(op, p, 7);
  auto j = inst.to_json();
  j["x"].push_back(0.0);
  CHECK_THROWS_WITH_AS(ProblemInstance::from_json(j), doctest::Contains("17"), Error);
  auto j2 = inst.to_json();
  j2["operator"]["rows"] = 9;
  CHECK_THROWS_AS(ProblemInstance::from_json(j2), Error);
}

TEST_CASE("model parameter validation") {
  SignalModelParams p = table_params();
  p.betaS = 0.0;
  CHECK_THROWS_WITH_AS(p.validate(), doctest::Contains("betaL >= betaM >= betaS"), Error);
  p = table_params();
  p.supportSize = 300;
  CHECK_THROWS_AS(p.validate(), Error);
  p = table_params();
  p.extraFrac = 40.0;  // DeltaE cannot fit outside N
  CHECK_THROWS_AS(sample_supports(p, 1), Error);
}
