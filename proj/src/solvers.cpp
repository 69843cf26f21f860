#include "regmod/solvers.hpp"

#include <cmath>

#include "regmod/linalg.hpp"

namespace regmod::solve {

namespace {

double soft(double u, double t) {
  if (u > t) return u - t;
  if (u < -t) return u + t;
  return 0.0;
}

struct Weights {
  std::vector<char> inT;  // coordinate membership mask
  Vec mu;                 // muHat padded to length m
};

Weights prepare(const Mat& A, const Vec& y, const ObjectiveSpec& spec) {
  const int m = static_cast<int>(A.cols());
  if (y.size() != A.rows())
    throw Error("solve: y has length " + std::to_string(y.size()) + ", operator expects " +
                std::to_string(A.rows()));
  if (spec.gamma < 0 || spec.gammaPrime < 0 || spec.lambda < 0 || spec.lambdaC < 0)
    throw Error("solve: weights must be nonnegative");
  require_index_set(spec.T, m, "T");
  Weights w;
  w.inT.assign(static_cast<size_t>(m), 0);
  for (int i : spec.T) w.inT[static_cast<size_t>(i)] = 1;
  if (spec.muHat.size() == 0) {
    w.mu = Vec::Zero(m);
  } else if (spec.muHat.size() == m) {
    w.mu = spec.muHat;
  } else {
    throw Error("solve: muHat has length " + std::to_string(spec.muHat.size()) +
                ", expected " + std::to_string(m));
  }
  return w;
}

}  // namespace

double composite_objective(const Mat& A, const Vec& y, const ObjectiveSpec& spec, const Vec& b) {
  Weights w = prepare(A, y, spec);
  const int m = static_cast<int>(A.cols());
  if (b.size() != m) throw Error("objective: b has wrong length");
  double l1 = 0.0, tie = 0.0, ridge = 0.0;
  for (int i = 0; i < m; ++i) {
    if (w.inT[static_cast<size_t>(i)]) {
      l1 += spec.gammaPrime * std::abs(b[i]);
      double d = b[i] - w.mu[i];
      tie += d * d;
    } else {
      l1 += spec.gamma * std::abs(b[i]);
      ridge += b[i] * b[i];
    }
  }
  double data = 0.5 * (y - A * b).squaredNorm();
  return l1 + data + 0.5 * spec.lambda * tie + 0.5 * spec.lambdaC * ridge;
}

SolverResult solve_composite(const Mat& A, const Vec& y, const ObjectiveSpec& spec,
                             const SolverOptions& opts) {
  Weights w = prepare(A, y, spec);
  const int m = static_cast<int>(A.cols());

  const double normA = opts.normA2 > 0.0 ? opts.normA2 : linalg::spectral_norm(A);
  const double L = normA * normA + std::max(spec.lambda, spec.lambdaC);
  const double step = 1.0 / std::max(L, 1e-300);

  // Per-coordinate l1 weight; frozen coordinates never move.
  Vec thr(m);
  for (int i = 0; i < m; ++i)
    thr[i] = (w.inT[static_cast<size_t>(i)] ? spec.gammaPrime : spec.gamma) * step;

  auto objective = [&](const Vec& b, const Vec& Ab) {
    double l1 = 0.0, tie = 0.0, ridge = 0.0;
    for (int i = 0; i < m; ++i) {
      if (w.inT[static_cast<size_t>(i)]) {
        l1 += spec.gammaPrime * std::abs(b[i]);
        double d = b[i] - w.mu[i];
        tie += d * d;
      } else {
        l1 += spec.gamma * std::abs(b[i]);
        ridge += b[i] * b[i];
      }
    }
    return l1 + 0.5 * (y - Ab).squaredNorm() + 0.5 * spec.lambda * tie +
           0.5 * spec.lambdaC * ridge;
  };

  // State with cached products; momentum point yk tracked implicitly.
  Vec xk = Vec::Zero(m);
  if (opts.x0.size() == m)
    xk = opts.x0;
  else if (opts.x0.size() != 0)
    throw Error("SolverOptions: x0 length must match the signal dimension");
  if (spec.fixedT)
    for (int i : spec.T) xk[i] = w.mu[i];
  Vec xprev = xk;
  Vec Axk = A * xk;
  Vec Axprev = Axk;
  Vec yk = xk;
  Vec Ayk = Axk;

  SolverResult res;
  double Fx = objective(xk, Axk);
  if (opts.recordTrace) res.trace.push_back(Fx);
  double t = 1.0;
  int stable = 0;
  bool converged = false;
  int it = 0;

  Vec grad(m), z(m), Az(y.size());
  for (; it < opts.maxIter; ++it) {
    // Smooth gradient at the momentum point.
    grad.noalias() = A.transpose() * (Ayk - y);
    for (int i = 0; i < m; ++i) {
      if (w.inT[static_cast<size_t>(i)])
        grad[i] += spec.lambda * (yk[i] - w.mu[i]);
      else
        grad[i] += spec.lambdaC * yk[i];
    }
    for (int i = 0; i < m; ++i) z[i] = soft(yk[i] - step * grad[i], thr[i]);
    if (spec.fixedT)
      for (int i : spec.T) z[i] = w.mu[i];
    Az.noalias() = A * z;
    double Fz = objective(z, Az);

    double tnext = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    double Fnew;
    if (Fz <= Fx) {
      // Accept; standard accelerated extrapolation around the new iterate.
      yk = z + ((t - 1.0) / tnext) * (z - xk);
      Ayk = Az + ((t - 1.0) / tnext) * (Az - Axk);
      xprev = xk;
      Axprev = Axk;
      xk = z;
      Axk = Az;
      Fnew = Fz;
      t = tnext;
    } else {
      // Monotone guard: keep xk, restart momentum at the incumbent.
      yk = xk;
      Ayk = Axk;
      xprev = xk;
      Axprev = Axk;
      Fnew = Fx;
      t = 1.0;
    }

    if (opts.recordTrace) res.trace.push_back(Fnew);
    // Relative to the objective itself: near-zero optima are refined until the
    // monotone guard freezes F at floating-point exhaustion.
    double change = std::abs(Fx - Fnew);
    if (change <= opts.tol * std::max(std::abs(Fnew), 1e-300)) {
      if (++stable >= 3) {
        converged = true;
        Fx = Fnew;
        ++it;
        break;
      }
    } else {
      stable = 0;
    }
    Fx = Fnew;
  }

  res.estimate = xk;
  res.objective = Fx;
  res.iterations = it;
  res.converged = converged;
  Vec r = y - Axk;
  res.residualNorm = r.norm();

  // Subgradient certificate: for active coordinates the smooth gradient must
  // cancel the l1 subgradient; for zeros it must stay inside the weight box.
  Vec gs = A.transpose() * r;
  double gap = 0.0;
  for (int i = 0; i < m; ++i) {
    if (spec.fixedT && w.inT[static_cast<size_t>(i)]) continue;
    double gi = gs[i];
    double wi;
    if (w.inT[static_cast<size_t>(i)]) {
      gi -= spec.lambda * (xk[i] - w.mu[i]);
      wi = spec.gammaPrime;
    } else {
      gi -= spec.lambdaC * xk[i];
      wi = spec.gamma;
    }
    double v = (xk[i] != 0.0) ? std::abs(gi - wi * (xk[i] > 0 ? 1.0 : -1.0))
                              : std::max(0.0, std::abs(gi) - wi);
    gap = std::max(gap, v);
  }
  res.certificateGap = gap;
  if (!(spec.lambda > 0.0 && spec.lambdaC > 0.0)) res.note = "uniqueness-not-certified";
  return res;
}

const std::vector<std::string>& estimator_ids() {
  static const std::vector<std::string> ids = {
      "reg-mod-bpdn",    "mod-bpdn",       "bpdn",        "weighted-l1",
      "cs-residual",     "cs-mod-residual", "mod-cs-residual", "reg-mod-bpdn-var",
      "reg-bpdn",        "ls-cs",          "kf-cs-static"};
  return ids;
}

namespace {

SolverResult residual_solve(const ops::MeasurementOperator& op, const Vec& y, const Vec& muHat,
                            const ObjectiveSpec& inner, const SolverOptions& opts) {
  Vec ytil = y - op.matrix * muHat;
  SolverOptions o = opts;
  o.normA2 = op.norm2;
  if (o.x0.size() == muHat.size()) o.x0 -= muHat;  // shift into residual coordinates
  SolverResult res = solve_composite(op.matrix, ytil, inner, o);
  res.estimate = muHat + res.estimate;
  return res;
}

}  // namespace

SolverResult solve_variant(std::string_view name, const ops::MeasurementOperator& op,
                           const Vec& y, const model::PriorKnowledge& prior,
                           const SolverOptions& opts) {
  SolverOptions o = opts;
  o.normA2 = op.norm2;
  const int m = op.cols();
  Vec mu = prior.muHat.size() ? prior.muHat : Vec(Vec::Zero(m));

  ObjectiveSpec spec;
  spec.gamma = prior.gamma;

  if (name == "reg-mod-bpdn" || name == "mod-bpdn") {
    spec.T = prior.T;
    spec.muHat = mu;
    spec.lambda = (name == "reg-mod-bpdn") ? prior.lambda : 0.0;
    return solve_composite(op.matrix, y, spec, o);
  }
  if (name == "bpdn") {
    return solve_composite(op.matrix, y, spec, o);
  }
  if (name == "weighted-l1") {
    spec.T = prior.T;
    spec.gammaPrime = prior.gammaPrime;
    return solve_composite(op.matrix, y, spec, o);
  }
  if (name == "reg-mod-bpdn-var" || name == "reg-bpdn") {
    spec.T = prior.T;
    spec.muHat = mu;
    spec.lambda = prior.lambda;
    spec.lambdaC = prior.lambda;
    if (name == "reg-bpdn") spec.gammaPrime = prior.gamma;
    return solve_composite(op.matrix, y, spec, o);
  }
  if (name == "cs-residual") {
    return residual_solve(op, y, mu, spec, opts);
  }
  if (name == "mod-cs-residual") {
    spec.T = prior.T;  // gammaPrime stays 0: T is unpenalized in the residual solve
    return residual_solve(op, y, mu, spec, opts);
  }
  if (name == "cs-mod-residual") {
    spec.T = prior.T;
    spec.muHat = mu;
    spec.fixedT = true;
    return solve_composite(op.matrix, y, spec, o);
  }
  if (name == "ls-cs" || name == "kf-cs-static") {
    double lam = (name == "kf-cs-static") ? prior.lambda : 0.0;
    Vec muFit;
    try {
      muFit = restricted_reg_ls(op.matrix, y, prior.T, {}, lam, mu);
    } catch (const Error& e) {
      throw Error(std::string(name) + ": LS prior undefined (" + e.what() + ")");
    }
    return residual_solve(op, y, muFit, spec, opts);
  }
  std::string valid;
  for (const auto& id : estimator_ids()) valid += (valid.empty() ? "" : ", ") + id;
  throw Error("unknown estimator '" + std::string(name) + "' (valid: " + valid + ")");
}

Vec restricted_reg_ls(const Mat& A, const Vec& y, const IndexSet& T, const IndexSet& S,
                      double lambda, const Vec& muHat) {
  const int m = static_cast<int>(A.cols());
  require_index_set(T, m, "T");
  require_index_set(S, m, "S");
  if (!sets_disjoint(T, S)) throw Error("restricted_reg_ls: T and S must be disjoint");
  if (lambda < 0) throw Error("restricted_reg_ls: lambda negative");
  IndexSet TS = T;
  TS.insert(TS.end(), S.begin(), S.end());  // T block first, then S
  if (TS.empty()) return Vec::Zero(m);

  Mat Asub = columns(A, TS);
  Mat Q = Asub.transpose() * Asub;
  for (size_t i = 0; i < T.size(); ++i) Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lambda;

  auto chol = linalg::Cholesky::compute(Q);
  if (!chol.ok()) {
    throw Error(lambda > 0.0 ? "Q singular (A_S rank-deficient with lambda > 0)"
                             : "Q singular (A_{T u S} rank-deficient with lambda = 0)");
  }
  Vec rhs = Asub.transpose() * y;
  if (muHat.size() == m)
    for (size_t i = 0; i < T.size(); ++i) rhs[static_cast<Eigen::Index>(i)] += lambda * muHat[T[i]];
  else if (muHat.size() != 0)
    throw Error("restricted_reg_ls: muHat has wrong length");
  Vec c = chol.solve(rhs);

  Vec out = Vec::Zero(m);
  for (size_t i = 0; i < TS.size(); ++i) out[TS[i]] = c[static_cast<Eigen::Index>(i)];
  return out;
}

Vec restricted_minimizer(const Mat& A, const Vec& y, const IndexSet& T, const IndexSet& S,
                         double gamma, double lambda, const Vec& muHat, double tol, int maxIter) {
  const int m = static_cast<int>(A.cols());
  require_index_set(T, m, "T");
  require_index_set(S, m, "S");
  if (!sets_disjoint(T, S)) throw Error("restricted_minimizer: T and S must be disjoint");
  IndexSet TS = T;
  TS.insert(TS.end(), S.begin(), S.end());
  if (TS.empty()) return Vec::Zero(m);

  // The restricted problem must be strictly convex (Q invertible).
  Mat Asub = columns(A, TS);
  {
    Mat Q = Asub.transpose() * Asub;
    for (size_t i = 0; i < T.size(); ++i)
      Q(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += lambda;
    if (!linalg::Cholesky::compute(Q).ok())
      throw Error(lambda > 0.0 ? "Q singular (A_S rank-deficient with lambda > 0)"
                               : "Q singular (A_{T u S} rank-deficient with lambda = 0)");
  }

  ObjectiveSpec sub;
  sub.gamma = gamma;
  sub.lambda = lambda;
  sub.T.resize(T.size());
  for (size_t i = 0; i < T.size(); ++i) sub.T[i] = static_cast<int>(i);
  sub.muHat = Vec::Zero(static_cast<Eigen::Index>(TS.size()));
  if (muHat.size() == m)
    for (size_t i = 0; i < T.size(); ++i) sub.muHat[static_cast<Eigen::Index>(i)] = muHat[T[i]];

  SolverOptions opts;
  opts.tol = tol;
  opts.maxIter = maxIter;
  SolverResult res = solve_composite(Asub, y, sub, opts);

  Vec out = Vec::Zero(m);
  for (size_t i = 0; i < TS.size(); ++i) out[TS[i]] = res.estimate[static_cast<Eigen::Index>(i)];
  return out;
}

IndexSet estimate_support(const Vec& xhat, double rho) {
  if (rho < 0) throw Error("estimate_support: rho negative");
  IndexSet out;
  for (Eigen::Index i = 0; i < xhat.size(); ++i)
    if (std::abs(xhat[i]) > rho) out.push_back(static_cast<int>(i));
  return out;
}

}  // namespace regmod::solve
