#pragma once

#include <cstddef>
#include <span>

#include "fgsgd/pom.hpp"

namespace fgsgd {

/// fan_in: input channels x receptive-field size.
/// fan_out: output feature-map size x output channels.
struct LayerGeometry {
  std::size_t fan_in = 1;
  std::size_t fan_out = 1;
};

/// gamma = sqrt(1 / (fan_in + fan_out)).
double gamma(const LayerGeometry& geom);

// B * gamma^2 <= 1.
bool check_gamma_condition(const LayerGeometry& geom, std::size_t cols);

/// Per-weight renormalization state. Invariant: re == gamma / lambda, lambda >= 1.
struct ScaleState {
  double gamma = 1.0;
  double lambda = 1.0;
  double re = 1.0;
  double ema_momentum = 0.9;

  static ScaleState make(double gamma, double ema_momentum = 0.9);
};

/// lambda <- max(1, m * lambda + (1 - m) * std(batch)), re <- gamma / lambda.
/// std is the population standard deviation; an empty batch is a no-op.
ScaleState update_lambda(const ScaleState& state, std::span<const double> feature_batch);
ScaleState update_lambda_with_std(const ScaleState& state, double batch_std);

double population_std(std::span<const double> values);

/// Sets every non-Euclidean component's scale to the matching state's re and
/// transports its point by sqrt(re_new / re_old). Euclidean components pass through.
ProductPoint rescale_specs(const ProductPoint& w, std::span<const ScaleState> states);

}  // namespace fgsgd
