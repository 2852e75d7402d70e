#include "fgsgd/renorm.hpp"

#include <algorithm>
#include <cmath>

#include "fgsgd/error.hpp"

namespace fgsgd {

double gamma(const LayerGeometry& geom) {
  if (geom.fan_in == 0 || geom.fan_out == 0) throw ValueError("gamma: empty layer geometry");
  return std::sqrt(1.0 / static_cast<double>(geom.fan_in + geom.fan_out));
}

bool check_gamma_condition(const LayerGeometry& geom, std::size_t cols) {
  (void)gamma(geom);
  // Equivalent to cols * gamma^2 <= 1.
  return cols <= geom.fan_in + geom.fan_out;
}

ScaleState ScaleState::make(double gamma, double ema_momentum) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ValueError("ScaleState: gamma must lie in (0, 1]");
  if (!(ema_momentum > 0.0 && ema_momentum < 1.0)) {
    throw ValueError("ScaleState: ema momentum must lie in (0, 1)");
  }
  return ScaleState{gamma, 1.0, gamma, ema_momentum};
}

double population_std(std::span<const double> values) {
  if (values.empty()) return 0.0;
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  return std::sqrt(var / static_cast<double>(values.size()));
}

ScaleState update_lambda_with_std(const ScaleState& state, double batch_std) {
  ScaleState next = state;
  const double m = state.ema_momentum;
  next.lambda = std::max(1.0, m * state.lambda + (1.0 - m) * batch_std);
  next.re = next.gamma / next.lambda;
  return next;
}

ScaleState update_lambda(const ScaleState& state, std::span<const double> feature_batch) {
  if (feature_batch.empty()) return state;
  return update_lambda_with_std(state, population_std(feature_batch));
}

ProductPoint rescale_specs(const ProductPoint& w, std::span<const ScaleState> states) {
  if (states.size() != w.size()) {
    throw ShapeError("rescale_specs: need one scale state per component");
  }
  ProductPoint out = w;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const ManifoldSpec& spec = w.specs[i];
    if (spec.kind == ManifoldKind::euclidean) continue;
    out.parts[i] = transport_scale(spec, w.parts[i], states[i].re);
    out.specs[i] = spec.with_scale(states[i].re);
  }
  return out;
}

}  // namespace fgsgd
