#include "regmod/operators.hpp"

#include <cmath>

#include "regmod/linalg.hpp"
#include "regmod/rng.hpp"

namespace regmod::ops {

const char* kind_name(OperatorKind k) {
  return k == OperatorKind::gaussian ? "gaussian" : "mri-composite";
}

namespace {

// Daubechies-4 orthonormal filter pair.
const double kSqrt3 = std::sqrt(3.0);
const double kNorm = 4.0 * std::sqrt(2.0);
const double H[4] = {(1.0 + kSqrt3) / kNorm, (3.0 + kSqrt3) / kNorm,
                     (3.0 - kSqrt3) / kNorm, (1.0 - kSqrt3) / kNorm};
const double G[4] = {H[3], -H[2], H[1], -H[0]};

// One periodized analysis pass: s (length L, even) -> [approx | detail].
void dwt1(const double* s, double* out, int L) {
  const int half = L / 2;
  for (int i = 0; i < half; ++i) {
    double a = 0.0, d = 0.0;
    for (int k = 0; k < 4; ++k) {
      double x = s[(2 * i + k) % L];
      a += H[k] * x;
      d += G[k] * x;
    }
    out[i] = a;
    out[half + i] = d;
  }
}

void idwt1(const double* c, double* out, int L) {
  const int half = L / 2;
  for (int i = 0; i < L; ++i) out[i] = 0.0;
  for (int i = 0; i < half; ++i) {
    for (int k = 0; k < 4; ++k) {
      out[(2 * i + k) % L] += c[i] * H[k] + c[half + i] * G[k];
    }
  }
}

// Analysis on the top-left hb x wb block of grid: rows, then columns.
void dwt2_block(Mat& grid, int hb, int wb) {
  std::vector<double> buf(static_cast<size_t>(std::max(hb, wb)));
  std::vector<double> line(buf.size());
  for (int i = 0; i < hb; ++i) {
    for (int j = 0; j < wb; ++j) line[static_cast<size_t>(j)] = grid(i, j);
    dwt1(line.data(), buf.data(), wb);
    for (int j = 0; j < wb; ++j) grid(i, j) = buf[static_cast<size_t>(j)];
  }
  for (int j = 0; j < wb; ++j) {
    for (int i = 0; i < hb; ++i) line[static_cast<size_t>(i)] = grid(i, j);
    dwt1(line.data(), buf.data(), hb);
    for (int i = 0; i < hb; ++i) grid(i, j) = buf[static_cast<size_t>(i)];
  }
}

// Inverse of dwt2_block: columns, then rows.
void idwt2_block(Mat& grid, int hb, int wb) {
  std::vector<double> buf(static_cast<size_t>(std::max(hb, wb)));
  std::vector<double> line(buf.size());
  for (int j = 0; j < wb; ++j) {
    for (int i = 0; i < hb; ++i) line[static_cast<size_t>(i)] = grid(i, j);
    idwt1(line.data(), buf.data(), hb);
    for (int i = 0; i < hb; ++i) grid(i, j) = buf[static_cast<size_t>(i)];
  }
  for (int i = 0; i < hb; ++i) {
    for (int j = 0; j < wb; ++j) line[static_cast<size_t>(j)] = grid(i, j);
    idwt1(line.data(), buf.data(), wb);
    for (int j = 0; j < wb; ++j) grid(i, j) = buf[static_cast<size_t>(j)];
  }
}

void require_dyadic(int h, int w) {
  // Both levels need an even length no shorter than the filter.
  if (h < 8 || w < 8 || h % 4 != 0 || w % 4 != 0)
    throw Error("dimension not dyadic for 2 levels");
}

}  // namespace

MeasurementOperator gaussian_operator(int n, int m, uint64_t seed) {
  if (n <= 0 || m <= 0) throw Error("gaussian_operator: dimensions must be positive");
  Rng rng(seed, "gaussian-operator");
  MeasurementOperator op;
  op.kind = OperatorKind::gaussian;
  op.seed = seed;
  op.matrix.resize(n, m);
  for (int j = 0; j < m; ++j) {
    for (int i = 0; i < n; ++i) op.matrix(i, j) = rng.normal();
    double nc = op.matrix.col(j).norm();
    if (nc == 0.0) throw Error("gaussian_operator: zero column");
    op.matrix.col(j) /= nc;
  }
  op.norm2 = linalg::spectral_norm(op.matrix);
  return op;
}

Vec dwt2_daub4(const Mat& image) {
  const int h = static_cast<int>(image.rows());
  const int w = static_cast<int>(image.cols());
  require_dyadic(h, w);
  Mat grid = image;
  dwt2_block(grid, h, w);
  dwt2_block(grid, h / 2, w / 2);
  Vec c(h * w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) c[i * w + j] = grid(i, j);
  return c;
}

Mat idwt2_daub4(const Vec& coeffs, int h, int w) {
  require_dyadic(h, w);
  if (coeffs.size() != static_cast<Eigen::Index>(h) * w)
    throw Error("idwt2_daub4: coefficient length " + std::to_string(coeffs.size()) +
                " does not match grid " + std::to_string(h) + "x" + std::to_string(w));
  Mat grid(h, w);
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) grid(i, j) = coeffs[i * w + j];
  idwt2_block(grid, h / 2, w / 2);
  idwt2_block(grid, h, w);
  return grid;
}

IndexSet approximation_band_indices(int h, int w) {
  require_dyadic(h, w);
  IndexSet out;
  out.reserve(static_cast<size_t>(h / 4) * (w / 4));
  for (int i = 0; i < h / 4; ++i)
    for (int j = 0; j < w / 4; ++j) out.push_back(i * w + j);
  return out;
}

Mat materialize_dwt_synthesis(int h, int w) {
  const int m = h * w;
  Mat W(m, m);
  Vec e = Vec::Zero(m);
  for (int k = 0; k < m; ++k) {
    e[k] = 1.0;
    Mat img = idwt2_daub4(e, h, w);
    for (int i = 0; i < h; ++i)
      for (int j = 0; j < w; ++j) W(i * w + j, k) = img(i, j);
    e[k] = 0.0;
  }
  return W;
}

SamplingMask variable_density_mask(int h, int w, int budget, uint64_t seed) {
  const long total = static_cast<long>(h) * w;
  if (h <= 0 || w <= 0) throw Error("variable_density_mask: bad grid");
  if (budget < 1 || budget > total)
    throw Error("variable_density_mask: budget must be in [1, " + std::to_string(total) + "]");

  // Wrapped radial distance, normalized by the Nyquist corner.
  const double rmax = std::hypot(h / 2.0, w / 2.0);
  std::vector<double> weight(static_cast<size_t>(total));
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j) {
      double fi = std::min(i, h - i);
      double fj = std::min(j, w - j);
      double r = std::hypot(fi, fj) / rmax;
      // The exponent keeps the low-frequency box densely covered at small
      // budgets; flatter laws leave part of the approximation band unmeasured.
      weight[static_cast<size_t>(i) * w + j] = std::pow(1.0 + r, -10.0);
    }

  std::vector<char> chosen(static_cast<size_t>(total), 0);
  chosen[0] = 1;  // DC forced
  weight[0] = 0.0;
  Rng rng(seed, "variable-density-mask");
  for (int picked = 1; picked < budget; ++picked) {
    double sum = 0.0;
    for (double v : weight) sum += v;
    double u = rng.uniform01() * sum;
    size_t sel = weight.size();
    double acc = 0.0;
    for (size_t k = 0; k < weight.size(); ++k) {
      if (weight[k] <= 0.0) continue;
      acc += weight[k];
      sel = k;
      if (u <= acc) break;  // falls through to the last positive weight on fp spill
    }
    chosen[sel] = 1;
    weight[sel] = 0.0;
  }

  SamplingMask mask;
  mask.height = h;
  mask.width = w;
  mask.seed = seed;
  for (long k = 0; k < total; ++k)
    if (chosen[static_cast<size_t>(k)])
      mask.selected.push_back({static_cast<int>(k / w), static_cast<int>(k % w)});
  return mask;
}

MeasurementOperator mri_operator(const SamplingMask& mask) {
  const int h = mask.height;
  const int w = mask.width;
  require_dyadic(h, w);
  const int m = h * w;
  const int s = static_cast<int>(mask.selected.size());
  if (s == 0) throw Error("mri_operator: empty mask");
  for (const auto& f : mask.selected)
    if (f[0] < 0 || f[0] >= h || f[1] < 0 || f[1] >= w)
      throw Error("mri_operator: frequency out of grid");

  // Selected rows of the unnormalized 2D DFT, split into real and imaginary.
  Mat D(2 * s, m);
  for (int k = 0; k < s; ++k) {
    const int u = mask.selected[static_cast<size_t>(k)][0];
    const int v = mask.selected[static_cast<size_t>(k)][1];
    for (int p = 0; p < h; ++p)
      for (int q = 0; q < w; ++q) {
        double ang = -2.0 * M_PI *
                     (static_cast<double>(u) * p / h + static_cast<double>(v) * q / w);
        D(k, p * w + q) = std::cos(ang);
        D(s + k, p * w + q) = std::sin(ang);
      }
  }

  MeasurementOperator op;
  op.kind = OperatorKind::mri_composite;
  op.mask = mask;
  op.seed = mask.seed;
  op.matrix.noalias() = D * materialize_dwt_synthesis(h, w);
  op.norm2 = linalg::spectral_norm(op.matrix);
  return op;
}

nlohmann::json SamplingMask::to_json() const {
  nlohmann::json sel = nlohmann::json::array();
  for (const auto& f : selected) sel.push_back({f[0], f[1]});
  return nlohmann::json{{"grid", {height, width}}, {"selected", sel}, {"seed", seed}};
}

SamplingMask SamplingMask::from_json(const nlohmann::json& j) {
  SamplingMask mask;
  const auto& grid = j.at("grid");
  if (!grid.is_array() || grid.size() != 2) throw Error("mask: grid must be [h, w]");
  mask.height = grid[0].get<int>();
  mask.width = grid[1].get<int>();
  mask.seed = j.at("seed").get<uint64_t>();
  for (const auto& f : j.at("selected")) {
    if (!f.is_array() || f.size() != 2) throw Error("mask: selected entries must be [i, j]");
    mask.selected.push_back({f[0].get<int>(), f[1].get<int>()});
  }
  return mask;
}

}  // namespace regmod::ops
