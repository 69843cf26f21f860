#include "regmod/model.hpp"

#include <cmath>

#include "regmod/linalg.hpp"
#include "regmod/rng.hpp"

namespace regmod::model {

void SignalModelParams::validate() const {
  if (m <= 0) throw Error("model: m must be positive");
  if (supportSize < 0 || supportSize > m) throw Error("model: need 0 <= |N| <= m");
  if (missFrac < 0.0 || missFrac > 1.0) throw Error("model: missFrac outside [0, 1]");
  if (extraFrac < 0.0) throw Error("model: extraFrac negative");
  if (!(betaL >= betaM && betaM >= betaS && betaS > 0.0))
    throw Error("model: need betaL >= betaM >= betaS > 0");
  if (sigmaP2 < 0.0 || sigmaW2 < 0.0) throw Error("model: variances must be nonnegative");
}

void SupportLayout::validate() const {
  require_index_set(N, m, "N");
  require_index_set(T, m, "T");
  require_index_set(Delta, m, "Delta");
  require_index_set(DeltaE, m, "DeltaE");
  if (set_difference(Delta, N) != IndexSet{}) throw Error("layout: Delta must be inside N");
  if (!sets_disjoint(DeltaE, N)) throw Error("layout: DeltaE must avoid N");
  if (T != set_union(set_difference(N, Delta), DeltaE))
    throw Error("layout: T != (N \\ Delta) u DeltaE");
  if (set_union(Delta1, Delta2) != Delta || !sets_disjoint(Delta1, Delta2))
    throw Error("layout: Delta1, Delta2 must partition Delta");
}

SupportLayout sample_supports(const SignalModelParams& params, uint64_t seed) {
  params.validate();
  const int sizeN = params.supportSize;
  const int sizeD = static_cast<int>(std::floor(params.missFrac * sizeN));
  const int sizeE = static_cast<int>(std::floor(params.extraFrac * sizeN));
  if (sizeE > params.m - sizeN) throw Error("model: DeltaE does not fit outside N");

  Rng rng(seed, "supports");
  SupportLayout layout;
  layout.m = params.m;
  layout.N = rng.subset(params.m, sizeN);

  auto pick = [&](const IndexSet& from, int k) {
    IndexSet out;
    for (int i : rng.subset(static_cast<int>(from.size()), k))
      out.push_back(from[static_cast<size_t>(i)]);
    return out;
  };
  layout.Delta = pick(layout.N, sizeD);
  layout.DeltaE = pick(set_complement(layout.N, params.m), sizeE);
  layout.Delta1 = pick(layout.Delta, sizeD / 2);
  layout.Delta2 = set_difference(layout.Delta, layout.Delta1);
  layout.T = set_union(set_difference(layout.N, layout.Delta), layout.DeltaE);
  layout.validate();
  return layout;
}

GeneratedSignal generate_signal(const SupportLayout& layout, const SignalModelParams& params,
                                uint64_t seed) {
  params.validate();
  layout.validate();
  Rng signs(seed, "signs");
  Rng nu(seed, "nu");

  GeneratedSignal out;
  out.mu = Vec::Zero(layout.m);
  out.x = Vec::Zero(layout.m);
  out.muHat = Vec::Zero(layout.m);

  const double sigmaP = std::sqrt(params.sigmaP2);
  for (int i : layout.N) {
    double beta = params.betaL;
    if (set_contains(layout.Delta1, i)) beta = params.betaS;
    else if (set_contains(layout.Delta2, i)) beta = params.betaM;
    out.mu[i] = signs.sign() * beta;
  }
  for (int i : layout.N) out.x[i] = out.mu[i] + sigmaP * nu.normal();

  // The prior knows the tier means on T ^ N and guesses betaS (random sign)
  // on the extras.
  for (int i : set_intersection(layout.T, layout.N)) out.muHat[i] = out.mu[i];
  for (int i : layout.DeltaE) out.muHat[i] = signs.sign() * params.betaS;
  return out;
}

std::pair<Vec, Vec> generate_measurements(const ops::MeasurementOperator& op, const Vec& x,
                                          double sigmaW2, uint64_t seed) {
  if (x.size() != op.cols())
    throw Error("generate_measurements: x has length " + std::to_string(x.size()) +
                ", operator expects " + std::to_string(op.cols()));
  if (sigmaW2 < 0.0) throw Error("generate_measurements: sigmaW2 negative");
  Rng rng(seed, "noise");
  const double sigmaW = std::sqrt(sigmaW2);
  Vec w(op.rows());
  for (int i = 0; i < op.rows(); ++i) w[i] = sigmaW * rng.normal();
  Vec y = op.matrix * x + w;
  return {y, w};
}

ProblemInstance make_instance(const ops::MeasurementOperator& op,
                              const SignalModelParams& params, uint64_t seed) {
  if (params.m != op.cols())
    throw Error("make_instance: params.m " + std::to_string(params.m) +
                " does not match operator columns " + std::to_string(op.cols()));
  ProblemInstance inst;
  inst.op = op;
  inst.layout = sample_supports(params, seed);
  GeneratedSignal sig = generate_signal(inst.layout, params, seed);
  inst.x = sig.x;
  inst.mu = sig.mu;
  auto [y, w] = generate_measurements(op, sig.x, params.sigmaW2, seed);
  inst.y = y;
  inst.w = w;
  inst.prior.T = inst.layout.T;
  inst.prior.muHat = sig.muHat;
  return inst;
}

namespace {

nlohmann::json vec_to_json(const Vec& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const nlohmann::json& j, const char* name) {
  if (!j.is_array()) throw Error(std::string("bundle: ") + name + " must be an array");
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

IndexSet set_from_json(const nlohmann::json& j, const char* name) {
  IndexSet s;
  for (const auto& e : j) s.push_back(e.get<int>());
  if (!is_sorted_unique(s)) throw Error(std::string("bundle: ") + name + " must be sorted unique");
  return s;
}

}  // namespace

nlohmann::json ProblemInstance::to_json() const {
  nlohmann::json jop;
  jop["kind"] = ops::kind_name(op.kind);
  jop["rows"] = op.rows();
  jop["cols"] = op.cols();
  jop["seed"] = op.seed;
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < op.rows(); ++i)
    for (int j = 0; j < op.cols(); ++j) entries.push_back(op.matrix(i, j));
  jop["matrix"] = std::move(entries);
  if (op.mask) jop["mask"] = op.mask->to_json();

  nlohmann::json jlay{{"m", layout.m},     {"N", layout.N},           {"T", layout.T},
                      {"Delta", layout.Delta}, {"DeltaE", layout.DeltaE}, {"Delta1", layout.Delta1},
                      {"Delta2", layout.Delta2}};
  nlohmann::json jprior{{"T", prior.T},
                        {"muHat", vec_to_json(prior.muHat)},
                        {"gamma", prior.gamma},
                        {"gammaPrime", prior.gammaPrime},
                        {"lambda", prior.lambda}};
  return nlohmann::json{{"operator", jop},        {"x", vec_to_json(x)}, {"y", vec_to_json(y)},
                        {"w", vec_to_json(w)},    {"layout", jlay},      {"prior", jprior},
                        {"mu", vec_to_json(mu)}};
}

ProblemInstance ProblemInstance::from_json(const nlohmann::json& j) {
  ProblemInstance inst;
  const auto& jop = j.at("operator");
  const int rows = jop.at("rows").get<int>();
  const int cols = jop.at("cols").get<int>();
  const auto& entries = jop.at("matrix");
  if (static_cast<long>(entries.size()) != static_cast<long>(rows) * cols)
    throw Error("bundle: matrix has " + std::to_string(entries.size()) + " entries, expected " +
                std::to_string(static_cast<long>(rows) * cols));
  inst.op.matrix.resize(rows, cols);
  size_t k = 0;
  for (int i = 0; i < rows; ++i)
    for (int jj = 0; jj < cols; ++jj) inst.op.matrix(i, jj) = entries[k++].get<double>();
  std::string kind = jop.at("kind").get<std::string>();
  if (kind == "gaussian") inst.op.kind = ops::OperatorKind::gaussian;
  else if (kind == "mri-composite") inst.op.kind = ops::OperatorKind::mri_composite;
  else throw Error("bundle: unknown operator kind '" + kind + "'");
  inst.op.seed = jop.at("seed").get<uint64_t>();
  if (jop.contains("mask")) inst.op.mask = ops::SamplingMask::from_json(jop.at("mask"));
  inst.op.norm2 = linalg::spectral_norm(inst.op.matrix);

  inst.x = vec_from_json(j.at("x"), "x");
  inst.y = vec_from_json(j.at("y"), "y");
  inst.w = vec_from_json(j.at("w"), "w");
  if (j.contains("mu")) inst.mu = vec_from_json(j.at("mu"), "mu");

  const auto& jlay = j.at("layout");
  inst.layout.m = jlay.at("m").get<int>();
  inst.layout.N = set_from_json(jlay.at("N"), "N");
  inst.layout.T = set_from_json(jlay.at("T"), "T");
  inst.layout.Delta = set_from_json(jlay.at("Delta"), "Delta");
  inst.layout.DeltaE = set_from_json(jlay.at("DeltaE"), "DeltaE");
  inst.layout.Delta1 = set_from_json(jlay.at("Delta1"), "Delta1");
  inst.layout.Delta2 = set_from_json(jlay.at("Delta2"), "Delta2");
  inst.layout.validate();

  const auto& jprior = j.at("prior");
  inst.prior.T = set_from_json(jprior.at("T"), "prior.T");
  inst.prior.muHat = vec_from_json(jprior.at("muHat"), "muHat");
  inst.prior.gamma = jprior.at("gamma").get<double>();
  inst.prior.gammaPrime = jprior.at("gammaPrime").get<double>();
  inst.prior.lambda = jprior.at("lambda").get<double>();

  if (inst.x.size() != cols)
    throw Error("bundle: x has length " + std::to_string(inst.x.size()) + ", operator expects " +
                std::to_string(cols));
  if (inst.y.size() != rows)
    throw Error("bundle: y has length " + std::to_string(inst.y.size()) + ", operator expects " +
                std::to_string(rows));
  if (inst.w.size() != rows)
    throw Error("bundle: w has length " + std::to_string(inst.w.size()) + ", operator expects " +
                std::to_string(rows));
  if (inst.prior.muHat.size() != cols)
    throw Error("bundle: muHat has length " + std::to_string(inst.prior.muHat.size()) +
                ", operator expects " + std::to_string(cols));
  if (inst.layout.m != cols)
    throw Error("bundle: layout.m " + std::to_string(inst.layout.m) +
                " does not match operator columns " + std::to_string(cols));
  return inst;
}

}  // namespace regmod::model
