#include "fgsgd/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <string>

#include "fgsgd/error.hpp"

namespace fgsgd {

namespace {

std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t component_seed(std::uint64_t seed, std::size_t l, std::size_t g, std::size_t i) {
  return mix(mix(mix(seed ^ l) ^ g) ^ i);
}

std::string group_name(std::size_t l, std::size_t g) {
  return "layer " + std::to_string(l) + " group " + std::to_string(g);
}

}  // namespace

std::size_t Model::group_count() const {
  std::size_t n = 0;
  for (const auto& layer : components) n += layer.size();
  return n;
}

ProductPoint Model::group_point(std::size_t layer, std::size_t group) const {
  const Group& grp = layouts.at(layer).groups().at(group);
  const LayerShape& s = shapes.at(layer);
  ProductPoint p;
  for (std::size_t i = 0; i < grp.members.size(); ++i) {
    p.specs.push_back(components[layer][group][i].spec);
    p.parts.push_back(weights[layer][s.index(grp.members[i].in, grp.members[i].out)]);
  }
  return p;
}

void Model::set_group_point(std::size_t layer, std::size_t group, const ProductPoint& point) {
  const Group& grp = layouts.at(layer).groups().at(group);
  const LayerShape& s = shapes.at(layer);
  if (point.size() != grp.members.size()) throw ShapeError("set_group_point: member count");
  for (std::size_t i = 0; i < grp.members.size(); ++i) {
    components[layer][group][i].spec = point.specs[i];
    weights[layer][s.index(grp.members[i].in, grp.members[i].out)] = point.parts[i];
  }
}

double Model::max_violation() const {
  double worst = 0.0;
  for (std::size_t l = 0; l < layouts.size(); ++l)
    for (std::size_t g = 0; g < layouts[l].groups().size(); ++g)
      worst = std::max(worst, fgsgd::max_violation(group_point(l, g)));
  return worst;
}

Model init_model(std::span<const LayerShape> shapes, std::span<const LayoutChoice> choices,
                 std::uint64_t seed, double ema_momentum) {
  if (choices.size() != shapes.size()) {
    throw ValueError("init_model: need one layout choice per layer");
  }
  Model model;
  model.shapes.assign(shapes.begin(), shapes.end());
  model.weights = zero_weights(shapes);
  for (std::size_t l = 0; l < shapes.size(); ++l) {
    const LayerShape& s = shapes[l];
    const LayoutChoice& ch = choices[l];
    model.layouts.push_back(build_layout(ch.scheme, s.in_channels, s.out_channels,
                                         ch.subset_count, ch.kinds, ch.seed,
                                         static_cast<int>(l)));
    const double g = gamma(s.geometry());
    const auto& groups = model.layouts.back().groups();
    auto& layer = model.components.emplace_back(groups.size());
    for (std::size_t gi = 0; gi < groups.size(); ++gi) {
      for (std::size_t i = 0; i < groups[gi].members.size(); ++i) {
        const ManifoldSpec spec =
            ManifoldSpec::make(groups[gi].kinds[i], s.kernel_rows, s.kernel_cols, g);
        layer[gi].push_back({spec, ScaleState::make(g, ema_momentum)});
        const Coord c = groups[gi].members[i];
        model.weights[l][s.index(c.in, c.out)] =
            random_point(spec, component_seed(seed, l, gi, i));
      }
    }
  }
  return model;
}

OptState make_opt_state(const Model& model) { return OptState(model.group_count()); }

LossStats evaluate(const Model& model, const Dataset& data) {
  return softmax_cross_entropy(forward(model.shapes, model.weights, data.inputs).logits,
                               data.labels);
}

EpochMetrics train_epoch(Model& model, OptState& state, const OptConfig& config,
                         const Dataset& data, const TrainOptions& options) {
  if (state.group_count() != model.group_count()) {
    throw ShapeError("train_epoch: optimizer state does not match the model");
  }
  EpochMetrics m;
  m.epoch = state.epoch();
  m.lr = lr_schedule(state.epoch(), config);

  const std::size_t n = data.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  if (options.batch_size != 0 && options.batch_size < n) {
    std::mt19937_64 rng(mix(options.shuffle_seed ^ mix(state.epoch())));
    for (std::size_t i = n; i > 1; --i) {
      std::uniform_int_distribution<std::size_t> pick(0, i - 1);
      std::swap(order[i - 1], order[pick(rng)]);
    }
  }
  const std::size_t batch = options.batch_size == 0 ? std::max<std::size_t>(n, 1)
                                                    : options.batch_size;

  double loss_sum = 0.0;
  std::size_t correct = 0;
  double grad_sum = 0.0;
  std::size_t steps = 0;

  std::vector<std::vector<double>> xs;
  std::vector<int> ys;
  for (std::size_t start = 0; start < n; start += batch) {
    const std::size_t stop = std::min(n, start + batch);
    xs.clear();
    ys.clear();
    for (std::size_t k = start; k < stop; ++k) {
      xs.push_back(data.inputs[order[k]]);
      ys.push_back(data.labels[order[k]]);
    }

    const ForwardResult fwd = forward(model.shapes, model.weights, xs);
    const LossStats stats = softmax_cross_entropy(fwd.logits, ys);
    loss_sum += stats.loss * static_cast<double>(xs.size());
    correct += stats.correct;

    const NetWeights grads = backward(model.shapes, model.weights, fwd, ys);

    std::size_t flat = 0;
    for (std::size_t l = 0; l < model.shapes.size(); ++l) {
      const LayerShape& s = model.shapes[l];
      const auto& groups = model.layouts[l].groups();
      for (std::size_t g = 0; g < groups.size(); ++g, ++flat) {
        std::vector<Matrix> gs;
        for (std::size_t i = 0; i < groups[g].members.size(); ++i) {
          const Coord c = groups[g].members[i];
          ComponentState& comp = model.components[l][g][i];
          comp.scale = update_lambda_with_std(comp.scale, fwd.channel_std[l][s.dense ? 0 : c.in]);
          gs.push_back(grads[l][s.index(c.in, c.out)]);
        }
        const StepReport r = fgsgd_step(config, m.lr, model.group_point(l, g), gs,
                                        state.buffers(flat), group_name(l, g));
        model.set_group_point(l, g, r.point);
        grad_sum += r.grad_norm;
        m.max_grad_norm = std::max(m.max_grad_norm, r.grad_norm);
        ++steps;
      }
    }
  }

  for (std::size_t l = 0; l < model.shapes.size(); ++l) {
    for (std::size_t g = 0; g < model.layouts[l].groups().size(); ++g) {
      std::vector<ScaleState> states;
      for (const ComponentState& c : model.components[l][g]) states.push_back(c.scale);
      model.set_group_point(l, g, rescale_specs(model.group_point(l, g), states));
    }
  }

  if (n > 0) {
    m.loss = loss_sum / static_cast<double>(n);
    m.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  }
  if (steps > 0) m.mean_grad_norm = grad_sum / static_cast<double>(steps);
  m.max_violation = model.max_violation();
  state.advance_epoch();
  return m;
}

}  // namespace fgsgd
