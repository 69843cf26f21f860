#include "regmod/bounds.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include "regmod/linalg.hpp"
#include "regmod/solvers.hpp"

namespace regmod::bounds {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// spectral_norm rejects empty operands; empty and exactly-zero blocks appear
// here as legitimate degenerate limits with norm 0.
double safe_norm2(const Mat& M) {
  if (M.rows() == 0 || M.cols() == 0 || M.squaredNorm() == 0.0) return 0.0;
  return linalg::spectral_norm(M);
}

Mat stack_columns(const Mat& A, const IndexSet& T, const IndexSet& S) {
  Mat sub(A.rows(), static_cast<Eigen::Index>(T.size() + S.size()));
  Eigen::Index k = 0;
  for (int i : T) sub.col(k++) = A.col(i);
  for (int i : S) sub.col(k++) = A.col(i);
  return sub;
}

// Everything reused across DeltaTilde evaluations at fixed (A, T, Delta,
// lambda). cholT may be unusable (lambda = 0 with rank-deficient A_T); in
// that state every Q(DeltaTilde) is singular and evaluations throw.
struct Workspace {
  const BoundInputs* in = nullptr;
  Mat AT;
  linalg::Cholesky cholT;
  Vec corNorm;       // per column i: |A_i' A_{TuDelta}|_2
  Vec atw;           // A' w
  double priorDist;  // |x_T - muHat_T|_2
  double noiseNorm;  // |w|_2
};

Workspace make_workspace(const BoundInputs& in) {
  Workspace ws;
  ws.in = &in;
  const Mat& A = in.A.matrix;
  ws.AT = columns(A, in.T);
  Mat gramT = ws.AT.transpose() * ws.AT;
  gramT += in.lambda * Mat::Identity(gramT.rows(), gramT.cols());
  ws.cholT = linalg::Cholesky::compute(gramT);
  Mat Ats = columns(A, set_union(in.T, in.Delta));
  ws.corNorm = (Ats.transpose() * A).colwise().norm().transpose();
  ws.atw = A.transpose() * in.w;
  ws.priorDist = (gather(in.x, in.T) - gather(in.muHat, in.T)).norm();
  ws.noiseNorm = in.w.norm();
  return ws;
}

// M_{T,lambda} V without materializing the n x n projector.
Mat apply_m(const Mat& AT, const linalg::Cholesky& cholT, const Mat& V) {
  if (AT.cols() == 0) return V;
  return V - AT * cholT.solve(Mat(AT.transpose() * V));
}

// ERC over the factorization of A_S' M A_S; S nonempty, factor valid.
double erc_from_factor(const Mat& A, const IndexSet& TS, const Mat& MAs,
                       const linalg::Cholesky& cholG) {
  double worst = 0.0;
  for (int w = 0; w < static_cast<int>(A.cols()); ++w) {
    if (set_contains(TS, w)) continue;
    Vec v = MAs.transpose() * A.col(w);
    worst = std::max(worst, cholG.solve(v).lpNorm<1>());
  }
  return 1.0 - worst;
}

double complement_max_abs(const Vec& v, const IndexSet& excluded) {
  double mx = 0.0;
  for (int i = 0; i < static_cast<int>(v.size()); ++i)
    if (!set_contains(excluded, i)) mx = std::max(mx, std::abs(v[i]));
  return mx;
}

double gamma_star_given_erc(const BoundInputs& in, const IndexSet& S, double ercValue) {
  Vec c = solve::restricted_reg_ls(in.A.matrix, in.y, in.T, S, in.lambda, in.muHat);
  Vec atr = in.A.matrix.transpose() * (in.y - in.A.matrix * c);
  return complement_max_abs(atr, set_union(in.T, S)) / ercValue;
}

// One DeltaTilde candidate: throws when it falls outside the family
// (Q singular, P undefined, or ERC <= 0); otherwise the full multiplier set.
GMultipliers eval_tilde(const Workspace& ws, const IndexSet& dt) {
  const BoundInputs& in = *ws.in;
  const Mat& A = in.A.matrix;
  const auto tsz = static_cast<Eigen::Index>(in.T.size());
  const auto dsz = static_cast<Eigen::Index>(dt.size());
  const Eigen::Index qn = tsz + dsz;

  if (!check_invertible(A, in.T, dt, in.lambda))
    throw Error("Q singular (DeltaTilde outside the candidate family)");
  if (tsz > 0 && !ws.cholT.ok()) throw Error("Q singular (T block not positive definite)");

  GMultipliers out;
  Mat Adt = columns(A, dt);
  IndexSet tdt = set_union(in.T, dt);

  // P factor and ERC.
  Mat MAdt, P;
  linalg::Cholesky cholG;
  if (dsz > 0) {
    MAdt = apply_m(ws.AT, ws.cholT, Adt);
    cholG = linalg::Cholesky::compute(Mat(Adt.transpose() * MAdt));
    if (!cholG.ok()) throw Error("P undefined (A_S' M A_S not positive definite)");
    out.ercValue = erc_from_factor(A, tdt, MAdt, cholG);
    P = cholG.solve(Mat(Mat::Identity(dsz, dsz)));
  } else {
    out.ercValue = 1.0;
  }
  if (out.ercValue <= 0.0) throw Error("sufficient condition fails (ERC <= 0)");

  // f multipliers at DeltaTilde; f4 against the leftover Delta \ DeltaTilde.
  IndexSet left = set_difference(in.Delta, dt);
  if (qn > 0) {
    Mat Q = q_matrix(A, in.T, dt, in.lambda);
    linalg::Cholesky cholQ = linalg::Cholesky::compute(Q);
    if (!cholQ.ok()) throw Error("Q singular (DeltaTilde outside the candidate family)");
    Mat Qinv = cholQ.solve(Mat(Mat::Identity(qn, qn)));
    Mat Asub = stack_columns(A, in.T, dt);
    Mat QiAt = Qinv * Asub.transpose();
    out.f.f2 = safe_norm2(Qinv);
    out.f.f3 = safe_norm2(QiAt);
    double crossLeft = left.empty() ? 0.0 : safe_norm2(Mat(QiAt * columns(A, left)));
    out.f.f4 = std::sqrt(crossLeft * crossLeft + 1.0);
  } else {
    out.f = FMultipliers{};  // f2 = f3 = 0, f4 = 1 at the empty problem
  }
  if (dsz > 0) {
    double pNorm = safe_norm2(P);
    double headNorm = 0.0;
    if (tsz > 0) headNorm = safe_norm2(Mat(ws.cholT.solve(Mat(ws.AT.transpose() * Adt)) * P));
    out.f.f1 = std::sqrt(headNorm * headNorm + pNorm * pNorm);
  } else {
    out.f.f1 = 0.0;
  }

  out.maxcor = complement_max_abs(ws.corNorm, tdt);
  double winf = complement_max_abs(ws.atw, tdt);
  double sq = std::sqrt(static_cast<double>(dsz));
  double e = out.ercValue;
  out.g1 = in.lambda * out.f.f2 * (sq * out.f.f1 * out.maxcor / e + 1.0);
  out.g2 = sq * out.f.f1 * out.f.f3 * out.maxcor / e + out.f.f3;
  out.g3 = sq * out.f.f1 * out.f.f4 * out.maxcor / e + out.f.f4;
  out.g4 = sq * winf * out.f.f1 / e;
  double leftNorm = gather(in.x, left).norm();
  out.value = out.g1 * ws.priorDist + out.g2 * ws.noiseNorm + out.g3 * leftNorm + out.g4;
  return out;
}

nlohmann::json jreal(double v) {
  if (std::isinf(v)) return v > 0 ? nlohmann::json("inf") : nlohmann::json("-inf");
  return nlohmann::json(v);
}

}  // namespace

void BoundInputs::validate() const {
  const Mat& M = A.matrix;
  const int m = static_cast<int>(M.cols());
  require_index_set(T, m, "BoundInputs.T");
  require_index_set(Delta, m, "BoundInputs.Delta");
  if (!sets_disjoint(T, Delta)) throw Error("BoundInputs: T and Delta must be disjoint");
  if (y.size() != M.rows() || w.size() != M.rows())
    throw Error("BoundInputs: y/w length does not match operator rows");
  if (x.size() != M.cols() || muHat.size() != M.cols())
    throw Error("BoundInputs: x/muHat length does not match operator columns");
  if (lambda < 0.0) throw Error("BoundInputs: lambda must be nonnegative");
  IndexSet ts = set_union(T, Delta);
  for (int i = 0; i < m; ++i)
    if (x[i] != 0.0 && !set_contains(ts, i))
      throw Error("BoundInputs: x has support outside T u Delta");
}

Mat q_matrix(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda) {
  const int m = static_cast<int>(A.cols());
  require_index_set(T, m, "q_matrix T");
  require_index_set(S, m, "q_matrix S");
  if (!sets_disjoint(T, S)) throw Error("q_matrix: T and S must be disjoint");
  Mat sub = stack_columns(A, T, S);
  Mat Q = sub.transpose() * sub;
  const auto tsz = static_cast<Eigen::Index>(T.size());
  Q.topLeftCorner(tsz, tsz) += lambda * Mat::Identity(tsz, tsz);
  return Q;
}

bool check_invertible(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda) {
  if (lambda > 0.0) {
    if (S.empty()) return true;
    Mat As = columns(A, S);
    return linalg::Cholesky::compute(Mat(As.transpose() * As)).ok();
  }
  IndexSet ts = set_union(T, S);
  if (ts.empty()) return true;
  Mat Ats = columns(A, ts);
  return linalg::Cholesky::compute(Mat(Ats.transpose() * Ats)).ok();
}

Mat m_matrix(const Mat& A, const IndexSet& T, double lambda) {
  Mat AT = columns(A, T);
  if (AT.cols() == 0) return Mat::Identity(A.rows(), A.rows());
  Mat gramT = AT.transpose() * AT;
  gramT += lambda * Mat::Identity(gramT.rows(), gramT.cols());
  linalg::Cholesky chol = linalg::Cholesky::compute(gramT);
  if (!chol.ok()) throw Error("M undefined (A_T'A_T + lambda I not positive definite)");
  Mat M = Mat::Identity(A.rows(), A.rows()) - AT * chol.solve(Mat(AT.transpose()));
  return 0.5 * (M + M.transpose());  // symmetric by construction, pinned exactly
}

Mat p_matrix(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda) {
  if (S.empty()) return Mat(0, 0);
  Mat AT = columns(A, T);
  Mat As = columns(A, S);
  linalg::Cholesky cholT;
  if (AT.cols() > 0) {
    Mat gramT = AT.transpose() * AT;
    gramT += lambda * Mat::Identity(gramT.rows(), gramT.cols());
    cholT = linalg::Cholesky::compute(gramT);
    if (!cholT.ok()) throw Error("P undefined (A_T'A_T + lambda I not positive definite)");
  }
  Mat MAs = apply_m(AT, cholT, As);
  linalg::Cholesky cholG = linalg::Cholesky::compute(Mat(As.transpose() * MAs));
  if (!cholG.ok()) throw Error("P undefined (A_S' M A_S not positive definite)");
  const auto s = static_cast<Eigen::Index>(S.size());
  return cholG.solve(Mat(Mat::Identity(s, s)));
}

double erc(const Mat& A, const IndexSet& T, const IndexSet& S, double lambda) {
  if (S.empty()) return 1.0;
  Mat AT = columns(A, T);
  Mat As = columns(A, S);
  linalg::Cholesky cholT;
  if (AT.cols() > 0) {
    Mat gramT = AT.transpose() * AT;
    gramT += lambda * Mat::Identity(gramT.rows(), gramT.cols());
    cholT = linalg::Cholesky::compute(gramT);
    if (!cholT.ok()) throw Error("P undefined (A_T'A_T + lambda I not positive definite)");
  }
  Mat MAs = apply_m(AT, cholT, As);
  linalg::Cholesky cholG = linalg::Cholesky::compute(Mat(As.transpose() * MAs));
  if (!cholG.ok()) throw Error("P undefined (A_S' M A_S not positive definite)");
  return erc_from_factor(A, set_union(T, S), MAs, cholG);
}

double gamma_star(const BoundInputs& in, const IndexSet& S) {
  in.validate();
  double e = erc(in.A.matrix, in.T, S, in.lambda);
  if (e <= 0.0) throw Error("gamma_star: sufficient condition fails (ERC <= 0)");
  return gamma_star_given_erc(in, S, e);
}

FMultipliers f_multipliers(const Mat& A, const IndexSet& T, const IndexSet& Delta,
                           const IndexSet& DeltaTilde, double lambda) {
  const int m = static_cast<int>(A.cols());
  require_index_set(T, m, "f_multipliers T");
  require_index_set(Delta, m, "f_multipliers Delta");
  require_index_set(DeltaTilde, m, "f_multipliers DeltaTilde");
  if (!set_difference(DeltaTilde, Delta).empty())
    throw Error("f_multipliers: DeltaTilde must be a subset of Delta");
  if (!sets_disjoint(T, Delta)) throw Error("f_multipliers: T and Delta must be disjoint");

  const auto tsz = static_cast<Eigen::Index>(T.size());
  const auto dsz = static_cast<Eigen::Index>(DeltaTilde.size());
  const Eigen::Index qn = tsz + dsz;
  FMultipliers out;
  if (qn == 0) return out;  // f1 = f2 = f3 = 0, f4 = 1

  Mat Q = q_matrix(A, T, DeltaTilde, lambda);
  linalg::Cholesky cholQ = linalg::Cholesky::compute(Q);
  if (!cholQ.ok()) throw Error("f_multipliers: Q singular");
  Mat Qinv = cholQ.solve(Mat(Mat::Identity(qn, qn)));
  Mat Asub = stack_columns(A, T, DeltaTilde);
  Mat QiAt = Qinv * Asub.transpose();
  out.f2 = safe_norm2(Qinv);
  out.f3 = safe_norm2(QiAt);
  IndexSet left = set_difference(Delta, DeltaTilde);
  double crossLeft = left.empty() ? 0.0 : safe_norm2(Mat(QiAt * columns(A, left)));
  out.f4 = std::sqrt(crossLeft * crossLeft + 1.0);

  if (dsz == 0) {
    out.f1 = 0.0;
    return out;
  }
  Mat AT = columns(A, T);
  linalg::Cholesky cholT;
  if (tsz > 0) {
    Mat gramT = AT.transpose() * AT;
    gramT += lambda * Mat::Identity(tsz, tsz);
    cholT = linalg::Cholesky::compute(gramT);
    if (!cholT.ok()) throw Error("f_multipliers: Q singular");
  }
  Mat Adt = columns(A, DeltaTilde);
  Mat MAdt = apply_m(AT, cholT, Adt);
  linalg::Cholesky cholG = linalg::Cholesky::compute(Mat(Adt.transpose() * MAdt));
  if (!cholG.ok()) throw Error("f_multipliers: Q singular (P undefined)");
  Mat P = cholG.solve(Mat(Mat::Identity(dsz, dsz)));
  double pNorm = safe_norm2(P);
  double headNorm = 0.0;
  if (tsz > 0) headNorm = safe_norm2(Mat(cholT.solve(Mat(AT.transpose() * Adt)) * P));
  out.f1 = std::sqrt(headNorm * headNorm + pNorm * pNorm);
  return out;
}

GMultipliers corollary2_g(const BoundInputs& in, const IndexSet& DeltaTilde) {
  in.validate();
  require_index_set(DeltaTilde, static_cast<int>(in.A.matrix.cols()), "corollary2_g DeltaTilde");
  if (!set_difference(DeltaTilde, in.Delta).empty())
    throw Error("corollary2_g: DeltaTilde must be a subset of Delta");
  Workspace ws = make_workspace(in);
  return eval_tilde(ws, DeltaTilde);
}

BoundReport theorem1_bound(const BoundInputs& in) {
  in.validate();
  BoundReport r;
  r.theorem = "T1";
  r.deltaTilde = in.Delta;
  r.ercValue = -kInf;
  r.gammaStar = kInf;
  r.boundValue = kInf;

  if (!check_invertible(in.A.matrix, in.T, in.Delta, in.lambda)) {
    r.note = "Q(Delta) singular";
    return r;
  }
  try {
    r.ercValue = erc(in.A.matrix, in.T, in.Delta, in.lambda);
  } catch (const Error&) {
    r.note = "P undefined";
    return r;
  }
  if (r.ercValue <= 0.0) {
    r.note = "ERC(Delta) <= 0";
    return r;
  }
  r.f = f_multipliers(in.A.matrix, in.T, in.Delta, in.Delta, in.lambda);
  r.gammaStar = gamma_star_given_erc(in, in.Delta, r.ercValue);
  double priorDist = (gather(in.x, in.T) - gather(in.muHat, in.T)).norm();
  r.boundValue = r.gammaStar * std::sqrt(static_cast<double>(in.Delta.size())) * r.f.f1 +
                 in.lambda * r.f.f2 * priorDist + r.f.f3 * in.w.norm();
  r.holds = true;
  return r;
}

BoundReport theorem2_bound(const BoundInputs& in, int subsetCap) {
  in.validate();
  const int d = static_cast<int>(in.Delta.size());
  if (d > subsetCap)
    throw Error("theorem2_bound: exponential enumeration refused (|Delta| = " +
                std::to_string(d) + " > subsetCap = " + std::to_string(subsetCap) + ")");
  Workspace ws = make_workspace(in);

  BoundReport r;
  r.theorem = "T2";
  bool found = false;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << d); ++mask) {
    IndexSet dt;
    for (int b = 0; b < d; ++b)
      if (mask & (std::uint64_t{1} << b)) dt.push_back(in.Delta[static_cast<size_t>(b)]);
    try {
      GMultipliers g = eval_tilde(ws, dt);
      if (!found || g.value < r.boundValue) {
        found = true;
        r.boundValue = g.value;
        r.deltaTilde = dt;
        r.g = g;
      }
    } catch (const Error&) {
      continue;  // outside the candidate family
    }
  }
  if (!found) {
    r.infinite = true;
    r.boundValue = kInf;
    r.ercValue = -kInf;
    r.gammaStar = kInf;
    r.note = "candidate family empty";
    return r;
  }
  r.holds = true;
  r.hasG = true;
  r.f = r.g.f;
  r.ercValue = r.g.ercValue;
  r.gammaStar = gamma_star_given_erc(in, r.deltaTilde, r.ercValue);
  return r;
}

BoundReport theorem3_bound(const BoundInputs& in) {
  in.validate();
  const int d = static_cast<int>(in.Delta.size());
  Workspace ws = make_workspace(in);
  std::vector<int> order = linalg::sort_desc_by_abs(gather(in.x, in.Delta));

  BoundReport r;
  r.theorem = "T3";
  bool found = false;
  IndexSet prefix;
  for (int k = 0; k <= d; ++k) {
    if (k > 0) {
      prefix.push_back(in.Delta[static_cast<size_t>(order[static_cast<size_t>(k - 1)])]);
      std::sort(prefix.begin(), prefix.end());
    }
    try {
      GMultipliers g = eval_tilde(ws, prefix);
      if (!found || g.value < r.boundValue) {  // strict: equal B_k keeps the smaller k
        found = true;
        r.boundValue = g.value;
        r.deltaTilde = prefix;
        r.kMin = k;
        r.g = g;
      }
    } catch (const Error&) {
      continue;  // B_k = infinity
    }
  }
  if (!found) {
    r.infinite = true;
    r.boundValue = kInf;
    r.ercValue = -kInf;
    r.gammaStar = kInf;
    r.kMin = -1;
    r.note = "every B_k infinite";
    return r;
  }
  r.holds = true;
  r.hasG = true;
  r.f = r.g.f;
  r.ercValue = r.g.ercValue;
  r.gammaStar = gamma_star_given_erc(in, r.deltaTilde, r.ercValue);
  return r;
}

nlohmann::json BoundReport::to_json() const {
  nlohmann::json j;
  j["theorem"] = theorem;
  j["holds"] = holds;
  j["ercValue"] = jreal(ercValue);
  j["gammaStar"] = jreal(gammaStar);
  nlohmann::json mult;
  mult["f1"] = jreal(f.f1);
  mult["f2"] = jreal(f.f2);
  mult["f3"] = jreal(f.f3);
  mult["f4"] = jreal(f.f4);
  if (hasG) {
    mult["g1"] = jreal(g.g1);
    mult["g2"] = jreal(g.g2);
    mult["g3"] = jreal(g.g3);
    mult["g4"] = jreal(g.g4);
    mult["maxcor"] = jreal(g.maxcor);
  }
  j["multipliers"] = mult;
  j["deltaTilde"] = deltaTilde;
  if (theorem == "T3") j["kMin"] = kMin;
  if (theorem == "T1" && !holds)
    j["boundValue"] = "not hold";
  else if (infinite)
    j["boundValue"] = "inf";
  else
    j["boundValue"] = jreal(boundValue);
  if (!note.empty()) j["note"] = note;
  return j;
}

}  // namespace regmod::bounds
