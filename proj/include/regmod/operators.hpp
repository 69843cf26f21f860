// Measurement operators.
//
// Two families are materialized as explicit dense matrices so every solver
// and bound sees the same object: seeded Gaussian ensembles with unit-norm
// columns, and a partial-2D-DFT-of-wavelet-synthesis composite. The wavelet
// transform is the orthonormal periodized two-level Daubechies-4 2D DWT;
// coefficient grids are flattened row-major. DFT rows are unnormalized sums
// and the composite's columns are deliberately not renormalized.
#pragma once

#include <array>
#include <cstdint>
#include <optional>

#include <json.hpp>

#include "regmod/common.hpp"

namespace regmod::ops {

enum class OperatorKind { gaussian, mri_composite };

const char* kind_name(OperatorKind k);

// k-space sampling pattern on an h x w DFT grid.
struct SamplingMask {
  int height = 0;
  int width = 0;
  std::vector<std::array<int, 2>> selected;  // (row, col) frequency pairs, sorted
  uint64_t seed = 0;

  nlohmann::json to_json() const;
  static SamplingMask from_json(const nlohmann::json& j);
};

struct MeasurementOperator {
  OperatorKind kind = OperatorKind::gaussian;
  Mat matrix;
  std::optional<SamplingMask> mask;
  uint64_t seed = 0;
  double norm2 = 0.0;  // cached spectral norm of matrix

  int rows() const { return static_cast<int>(matrix.rows()); }
  int cols() const { return static_cast<int>(matrix.cols()); }
};

// n x m iid N(0,1) entries from the (seed, "gaussian-operator") stream, each
// column scaled to unit l2 norm.
MeasurementOperator gaussian_operator(int n, int m, uint64_t seed);

// Two-level periodized Daubechies-4 analysis of an image; returns the
// flattened coefficient grid. Throws Error("dimension not dyadic for 2
// levels") unless both dimensions are multiples of 4 and at least 8.
Vec dwt2_daub4(const Mat& image);

// Inverse of dwt2_daub4.
Mat idwt2_daub4(const Vec& coeffs, int h, int w);

// Indices (into the flattened grid) of the level-2 approximation band.
IndexSet approximation_band_indices(int h, int w);

// Synthesis matrix W with column k = vec(idwt2(e_k)); orthonormal.
Mat materialize_dwt_synthesis(int h, int w);

// Random k-space mask with density proportional to (1 + r)^-10 in normalized
// wrapped radius r, DC always selected, budget entries total.
SamplingMask variable_density_mask(int h, int w, int budget, uint64_t seed);

// Composite operator: coefficient vector -> selected DFT values of the
// synthesized image, real parts of all selected rows stacked above the
// imaginary parts (2 * |selected| rows).
MeasurementOperator mri_operator(const SamplingMask& mask);

}  // namespace regmod::ops
