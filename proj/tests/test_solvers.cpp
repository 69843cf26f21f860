#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "regmod/rng.hpp"
#include "regmod/solvers.hpp"

using namespace regmod;
using namespace regmod::solve;

namespace {

Mat random_matrix(int r, int c, uint64_t seed) {
  Rng rng(seed, "test-matrix");
  Mat M(r, c);
  for (int j = 0; j < c; ++j)
    for (int i = 0; i < r; ++i) M(i, j) = rng.normal();
  return M;
}

model::PriorKnowledge prior_of(const model::ProblemInstance& inst, double gamma, double lambda) {
  model::PriorKnowledge p = inst.prior;
  p.gamma = gamma;
  p.lambda = lambda;
  return p;
}

model::ProblemInstance demo_instance(uint64_t seed, int n = 64) {
  model::SignalModelParams params;
  params.m = 128;
  params.supportSize = 13;
  params.missFrac = 0.2;
  params.extraFrac = 0.1;
  params.betaM = 0.4;
  params.betaS = 0.2;
  auto op = ops::gaussian_operator(n, params.m, seed);
  return model::make_instance(op, params, seed);
}

}  // namespace

TEST_CASE("solve_composite: zero weights on a square system reach A^-1 y") {
  Mat A = random_matrix(8, 8, 2);
  Vec y = random_matrix(8, 1, 3).col(0);
  Vec ref = Vec(oracle::ge_solve(A, Mat(y)).col(0));
  ObjectiveSpec spec;
  SolverResult res = solve_composite(A, y, spec);
  CHECK(res.converged);
  CHECK((res.estimate - ref).norm() <= 1e-6 * std::max(1.0, ref.norm()));
}

TEST_CASE("solve_composite: identity operator gives the soft threshold") {
  Vec y = random_matrix(12, 1, 5).col(0);
  ObjectiveSpec spec;
  spec.gamma = 0.3;
  SolverResult res = solve_composite(Mat(Mat::Identity(12, 12)), y, spec);
  for (int i = 0; i < 12; ++i) {
    double want = (y[i] > 0.3) ? y[i] - 0.3 : (y[i] < -0.3 ? y[i] + 0.3 : 0.0);
    CHECK(res.estimate[i] == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("solve_composite: objective trace is non-increasing") {
  auto inst = demo_instance(7);
  ObjectiveSpec spec;
  spec.gamma = 1e-3;
  spec.lambda = 2e-3;
  spec.T = inst.layout.T;
  spec.muHat = inst.prior.muHat;
  SolverOptions opts;
  opts.recordTrace = true;
  opts.normA2 = inst.op.norm2;
  SolverResult res = solve_composite(inst.op.matrix, inst.y, spec, opts);
  CHECK(res.converged);
  for (size_t k = 1; k < res.trace.size(); ++k)
    CHECK(res.trace[k] <= res.trace[k - 1] + 1e-15 * std::max(1.0, std::abs(res.trace[k])));
  // And the result matches an independent objective evaluation.
  CHECK(res.objective ==
        doctest::Approx(composite_objective(inst.op.matrix, inst.y, spec, res.estimate))
            .epsilon(1e-12));
}

TEST_CASE("solve_composite: subgradient certificate within 1e-5") {
  auto inst = demo_instance(11);
  ObjectiveSpec spec;
  spec.gamma = 5e-3;
  SolverResult res = solve_composite(inst.op.matrix, inst.y, spec, {.normA2 = inst.op.norm2});
  CHECK(res.converged);
  CHECK(res.certificateGap <= 1e-5);
}

TEST_CASE("solve_composite: iteration cap reports non-convergence honestly") {
  auto inst = demo_instance(13);
  ObjectiveSpec spec;
  spec.gamma = 1e-4;
  SolverOptions opts;
  opts.maxIter = 3;
  SolverResult res = solve_composite(inst.op.matrix, inst.y, spec, opts);
  CHECK_FALSE(res.converged);
  CHECK(res.iterations == 3);
}

TEST_CASE("solve_variant: family reductions coincide") {
  auto inst = demo_instance(17);
  auto prior = prior_of(inst, 1e-3, 0.0);

  // mod-bpdn with empty T is bpdn.
  model::PriorKnowledge noT = prior;
  noT.T.clear();
  noT.muHat = Vec::Zero(128);
  auto bp = solve_variant("bpdn", inst.op, inst.y, noT);
  auto modEmpty = solve_variant("mod-bpdn", inst.op, inst.y, noT);
  CHECK((bp.estimate - modEmpty.estimate).norm() == 0.0);

  // reg-mod-bpdn with lambda = 0 is mod-bpdn.
  auto mod = solve_variant("mod-bpdn", inst.op, inst.y, prior);
  auto reg0 = solve_variant("reg-mod-bpdn", inst.op, inst.y, prior);
  CHECK((mod.estimate - reg0.estimate).norm() == 0.0);

  // cs-residual with muHat = 0 is bpdn.
  auto cs0 = solve_variant("cs-residual", inst.op, inst.y, noT);
  CHECK((cs0.estimate - bp.estimate).norm() == 0.0);

  // kf-cs-static at lambda = 0 degenerates to ls-cs.
  auto kf = solve_variant("kf-cs-static", inst.op, inst.y, prior);
  auto ls = solve_variant("ls-cs", inst.op, inst.y, prior);
  CHECK((kf.estimate - ls.estimate).norm() == 0.0);
}

TEST_CASE("solve_variant: cs-mod-residual freezes T and matches the two-step route") {
  auto inst = demo_instance(19);
  auto prior = prior_of(inst, 2e-3, 0.0);
  SolverOptions tight;
  tight.tol = 1e-14;
  tight.maxIter = 200000;
  auto res = solve_variant("cs-mod-residual", inst.op, inst.y, prior, tight);
  for (int i : prior.T) CHECK(res.estimate[i] == prior.muHat[i]);

  // Independent route: plain l1 on the T-complement columns of the residual.
  IndexSet Tc = set_complement(prior.T, 128);
  Mat Ac = columns(inst.op.matrix, Tc);
  Vec yres = inst.y - inst.op.matrix * prior.muHat;
  ObjectiveSpec sub;
  sub.gamma = prior.gamma;
  auto ref = solve_composite(Ac, yres, sub, tight);
  Vec refFull = prior.muHat + scatter(ref.estimate, Tc, 128);
  CHECK((res.estimate - refFull).norm() <= 1e-6 * std::max(1.0, refFull.norm()));
}

TEST_CASE("solve_variant: residual estimators differ when the prior is informative") {
  auto inst = demo_instance(23);
  auto prior = prior_of(inst, 1e-3, 1e-2);
  auto cs = solve_variant("cs-residual", inst.op, inst.y, prior);
  auto modcs = solve_variant("mod-cs-residual", inst.op, inst.y, prior);
  CHECK((cs.estimate - modcs.estimate).norm() > 0.0);
}

TEST_CASE("solve_variant: unknown estimator lists the valid ids") {
  auto inst = demo_instance(29);
  CHECK_THROWS_WITH_AS(solve_variant("lasso", inst.op, inst.y, inst.prior),
                       doctest::Contains("reg-mod-bpdn"), Error);
}

TEST_CASE("solve_variant: ls-cs on a rank-deficient A_T reports an undefined prior") {
  // T larger than the row count makes A_T^T A_T singular.
  auto op = ops::gaussian_operator(6, 32, 3);
  model::PriorKnowledge prior;
  for (int i = 0; i < 10; ++i) prior.T.push_back(i);
  prior.muHat = Vec::Zero(32);
  prior.gamma = 1e-3;
  Vec y = random_matrix(6, 1, 9).col(0);
  CHECK_THROWS_WITH_AS(solve_variant("ls-cs", op, y, prior),
                       doctest::Contains("LS prior undefined"), Error);
}

TEST_CASE("restricted_reg_ls: identity operator closed forms") {
  Mat A = Mat::Identity(10, 10);
  Vec y = random_matrix(10, 1, 31).col(0);
  IndexSet T = {1, 4};
  IndexSet S = {7};
  Vec c = restricted_reg_ls(A, y, T, S, 0.0, Vec());
  for (int i : IndexSet{1, 4, 7}) CHECK(c[i] == doctest::Approx(y[i]).epsilon(1e-12));
  for (int i : IndexSet{0, 2, 3, 5, 6, 8, 9}) CHECK(c[i] == 0.0);

  Vec mu = Vec::Zero(10);
  mu[1] = 2.0;
  mu[4] = -1.0;
  double lam = 3.0;
  Vec cl = restricted_reg_ls(A, y, T, S, lam, mu);
  CHECK(cl[1] == doctest::Approx((y[1] + lam * 2.0) / (1.0 + lam)).epsilon(1e-12));
  CHECK(cl[4] == doctest::Approx((y[4] - lam * 1.0) / (1.0 + lam)).epsilon(1e-12));
  CHECK(cl[7] == doctest::Approx(y[7]).epsilon(1e-12));
}

TEST_CASE("restricted_reg_ls: huge lambda pins c_T to muHat") {
  // S stays empty: with S nonempty the pivot floor (relative to the lambda-
  // inflated diagonal) would reject the O(1) S-block pivots by design.
  auto inst = demo_instance(37);
  Vec c = restricted_reg_ls(inst.op.matrix, inst.y, inst.layout.T, {}, 1e12, inst.prior.muHat);
  for (int i : inst.layout.T)
    CHECK(c[i] == doctest::Approx(inst.prior.muHat[i]).epsilon(1e-4));
}

TEST_CASE("restricted_reg_ls: matches the Gaussian-elimination oracle") {
  Mat A = random_matrix(8, 12, 41);
  for (int j = 0; j < 12; ++j) A.col(j) /= A.col(j).norm();
  Vec y = random_matrix(8, 1, 43).col(0);
  IndexSet T = {0, 3, 5};
  IndexSet S = {7, 9};
  Vec mu = Vec::Zero(12);
  mu[0] = 0.5;
  mu[3] = -0.25;
  mu[5] = 1.0;
  double lam = 0.2;
  Vec got = restricted_reg_ls(A, y, T, S, lam, mu);

  IndexSet TS = {0, 3, 5, 7, 9};
  Mat Asub = columns(A, TS);
  Mat Q = Asub.transpose() * Asub;
  for (int i = 0; i < 3; ++i) Q(i, i) += lam;
  Vec rhs = Asub.transpose() * y;
  rhs[0] += lam * 0.5;
  rhs[1] += lam * -0.25;
  rhs[2] += lam * 1.0;
  Vec ref = Vec(oracle::ge_solve(Q, Mat(rhs)).col(0));
  for (size_t i = 0; i < TS.size(); ++i)
    CHECK(got[TS[i]] == doctest::Approx(ref[static_cast<Eigen::Index>(i)]).epsilon(1e-10));
}

TEST_CASE("restricted_reg_ls: Proposition-1 error reporting") {
  Mat A = random_matrix(4, 8, 47);
  IndexSet bigT = {0, 1, 2, 3, 4};
  CHECK_THROWS_WITH_AS(restricted_reg_ls(A, Vec::Zero(4), bigT, {}, 0.0, Vec()),
                       doctest::Contains("Q singular"), Error);
  CHECK_THROWS_WITH_AS(restricted_reg_ls(A, Vec::Zero(4), {0, 2}, {2}, 0.5, Vec()),
                       doctest::Contains("T and S"), Error);
}

TEST_CASE("restricted_minimizer: gamma = 0 reduces to restricted_reg_ls") {
  auto inst = demo_instance(53);
  Vec d = restricted_minimizer(inst.op.matrix, inst.y, inst.layout.T, inst.layout.Delta, 0.0,
                               1e-2, inst.prior.muHat);
  Vec c = restricted_reg_ls(inst.op.matrix, inst.y, inst.layout.T, inst.layout.Delta, 1e-2,
                            inst.prior.muHat);
  CHECK((d - c).norm() <= 1e-8 * std::max(1.0, c.norm()));
}

TEST_CASE("restricted_minimizer: support stays inside T u S and beats nearby points") {
  auto inst = demo_instance(59);
  const IndexSet& T = inst.layout.T;
  const IndexSet& S = inst.layout.Delta;
  double gamma = 5e-3, lambda = 1e-2;
  Vec d = restricted_minimizer(inst.op.matrix, inst.y, T, S, gamma, lambda, inst.prior.muHat);
  IndexSet TS = set_union(T, S);
  for (int i = 0; i < 128; ++i)
    if (!set_contains(TS, i)) CHECK(d[i] == 0.0);

  // Restricted optimality: no better value on a few random supported perturbations.
  ObjectiveSpec spec;
  spec.gamma = gamma;
  spec.lambda = lambda;
  spec.T = T;
  spec.muHat = inst.prior.muHat;
  double fd = composite_objective(inst.op.matrix, inst.y, spec, d);
  Rng rng(61, "perturb");
  for (int k = 0; k < 8; ++k) {
    Vec p = d;
    for (int i : TS) p[i] += 1e-4 * rng.normal();
    CHECK(composite_objective(inst.op.matrix, inst.y, spec, p) >= fd - 1e-12);
  }
}

TEST_CASE("estimate_support: threshold semantics") {
  Vec v(4);
  v << 0.5, -0.01, 0.0, 0.2;
  CHECK(estimate_support(v, 0.05) == IndexSet{0, 3});
  CHECK(estimate_support(v, 0.0) == IndexSet{0, 1, 3});
  CHECK(estimate_support(v, 2.0).empty());
}
