#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fgsgd/optimizer.hpp"
#include "fgsgd/pom.hpp"
#include "fgsgd/renorm.hpp"
#include "fgsgd/tinynet.hpp"

namespace fgsgd {

/// How one layer's kernels are grouped.
struct LayoutChoice {
  Scheme scheme = Scheme::pi;
  std::vector<ManifoldKind> kinds{ManifoldKind::sphere};
  std::size_t subset_count = 1;
  std::uint64_t seed = 0;
};

struct ComponentState {
  ManifoldSpec spec;
  ScaleState scale;
};

/// Network weights together with their group structure and renormalization state.
/// components[l][g][i] describes member i of group g in layer l.
struct Model {
  std::vector<LayerShape> shapes;
  std::vector<GroupLayout> layouts;
  std::vector<std::vector<std::vector<ComponentState>>> components;
  NetWeights weights;

  std::size_t group_count() const;
  ProductPoint group_point(std::size_t layer, std::size_t group) const;
  void set_group_point(std::size_t layer, std::size_t group, const ProductPoint& point);
  // Largest constraint violation over every component.
  double max_violation() const;
};

/// Builds layouts (one per layer, layer index l uses choices[l]) and draws every
/// component on its manifold at scale Re = gamma of its layer.
Model init_model(std::span<const LayerShape> shapes, std::span<const LayoutChoice> choices,
                 std::uint64_t seed, double ema_momentum = 0.9);

struct EpochMetrics {
  std::size_t epoch = 0;
  double loss = 0.0;      // sample-weighted mean over the epoch's batches, before each step
  double accuracy = 0.0;  // same, fraction in [0, 1]
  double mean_grad_norm = 0.0;
  double max_grad_norm = 0.0;
  double max_violation = 0.0;  // after the epoch-end rescale
  double lr = 0.0;
};

struct TrainOptions {
  std::size_t batch_size = 0;  // 0: full batch
  std::uint64_t shuffle_seed = 0;
};

/// One pass over `data`. Per batch: forward, loss, lambda updates from the input
/// feature statistics, backward, then one fgsgd_step per group (layer by layer).
/// At the end of the epoch every component moves to its new Re and the schedule
/// counter advances.
EpochMetrics train_epoch(Model& model, OptState& state, const OptConfig& config,
                         const Dataset& data, const TrainOptions& options);

// Creates an OptState with one momentum slot per group of `model`.
OptState make_opt_state(const Model& model);

/// Loss and accuracy of `model` on the whole dataset.
LossStats evaluate(const Model& model, const Dataset& data);

}  // namespace fgsgd
