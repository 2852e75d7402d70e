#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "fgsgd/matkernel.hpp"

namespace fgsgd {

double frobenius(const Matrix& m);
double spectral(const Matrix& m);
// Sum of the Euclidean norms of the rows.
double l2to1(const Matrix& m);

struct NormTriple {
  double frobenius = 0.0;
  double spectral = 0.0;
  double l2to1 = 0.0;
};

NormTriple norms_of(const Matrix& m);

// Members side by side along columns; all members must share the row count.
Matrix concatenate_columns(std::span<const Matrix> members);

NormTriple group_norms(std::span<const Matrix> members);

struct NormCapFlags {
  bool frobenius = false;
  bool spectral = false;
  bool l2to1 = false;
  bool all() const noexcept { return frobenius && spectral && l2to1; }
};

inline constexpr double kNormCapTolerance = 1e-9;

// Each flag is true iff the corresponding concatenated norm is <= 1 + 1e-9.
NormCapFlags check_norm_caps(const NormTriple& group);
NormCapFlags check_norm_caps(std::span<const Matrix> rescaled_members);

/// Per-layer, per-group upper bounds delta_{g,l}; outer index is the layer.
using LayerDeltas = std::vector<std::vector<double>>;

// 2^L * prod_l prod_g dF / sqrt(N).
double bound_neyshabur15(const LayerDeltas& delta_f, std::size_t samples);

// prod d2 / sqrt(N) * (sum_l prod_g (d21 / d2)^(2/3))^(3/2).
double bound_bartlett(const LayerDeltas& delta_2, const LayerDeltas& delta_2to1,
                      std::size_t samples);

// prod d2 / sqrt(N) * sqrt(L^2 * width * sum_l prod_g dF^2 / d2^2).
double bound_neyshabur18(const LayerDeltas& delta_2, const LayerDeltas& delta_f, double width,
                         std::size_t samples);

}  // namespace fgsgd
