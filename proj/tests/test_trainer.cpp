#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "fgsgd/checkpoint.hpp"
#include "fgsgd/error.hpp"
#include "fgsgd/trainer.hpp"

namespace {

using fgsgd::ManifoldKind;
using fgsgd::Matrix;

struct Fixture {
  std::vector<fgsgd::LayerShape> shapes;
  std::vector<fgsgd::LayoutChoice> choices;
  fgsgd::Dataset data;
};

Fixture small_problem(double spread = 1.0) {
  fgsgd::NetSpec net;
  net.input = {2, 4, 4};
  net.layers = {fgsgd::Conv2dLayer{4, 3, 3, 1}, fgsgd::DenseLayer{3}};
  net.classes = 3;
  Fixture f;
  f.shapes = fgsgd::resolve_shapes(net);
  fgsgd::LayoutChoice c0{fgsgd::Scheme::pio,
                         {ManifoldKind::sphere, ManifoldKind::oblique, ManifoldKind::stiefel,
                          ManifoldKind::euclidean},
                         2,
                         5};
  fgsgd::LayoutChoice c1 = c0;
  c1.subset_count = 3;
  f.choices = {c0, c1};
  f.data = fgsgd::synth_blobs(3, 20, 32, spread, 4);
  return f;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("fgsgd_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

TEST(InitModel, ComponentsStartOnTheirManifoldsAtGamma) {
  const auto f = small_problem();
  const auto model = fgsgd::init_model(f.shapes, f.choices, 1);
  EXPECT_EQ(model.layouts.size(), 2u);
  EXPECT_LE(model.max_violation(), 1e-12);
  for (std::size_t l = 0; l < 2; ++l) {
    EXPECT_TRUE(model.layouts[l].is_partition());
    const double g = fgsgd::gamma(f.shapes[l].geometry());
    for (const auto& group : model.components[l])
      for (const auto& c : group) {
        EXPECT_EQ(c.spec.scale, g);
        EXPECT_EQ(c.scale.re, g);
        EXPECT_EQ(c.scale.lambda, 1.0);
      }
  }
  EXPECT_THROW(fgsgd::init_model(f.shapes, std::vector<fgsgd::LayoutChoice>{f.choices[0]}, 1),
               fgsgd::ValueError);
}

TEST(TrainEpoch, ZeroEpochsGiveNoMetrics) {
  const auto f = small_problem();
  auto model = fgsgd::init_model(f.shapes, f.choices, 1);
  auto state = fgsgd::make_opt_state(model);
  std::vector<fgsgd::EpochMetrics> metrics;
  for (std::size_t e = 0; e < 0; ++e)
    metrics.push_back(fgsgd::train_epoch(model, state, fgsgd::OptConfig{}, f.data, {}));
  EXPECT_TRUE(metrics.empty());
  EXPECT_EQ(state.epoch(), 0u);
}

TEST(TrainEpoch, ZeroLearningRateKeepsLossConstant) {
  // Small inputs keep every lambda clamped at 1, so the epoch-end rescale is the identity.
  const auto f = small_problem(0.1);
  auto model = fgsgd::init_model(f.shapes, f.choices, 1);
  auto state = fgsgd::make_opt_state(model);
  fgsgd::OptConfig c;
  c.base_lr = 0.0;
  const auto first = fgsgd::train_epoch(model, state, c, f.data, {});
  for (int e = 0; e < 4; ++e) EXPECT_EQ(fgsgd::train_epoch(model, state, c, f.data, {}).loss, first.loss);
}

TEST(TrainEpoch, ReportsConsistentMetricsAndKeepsConstraints) {
  const auto f = small_problem();
  auto model = fgsgd::init_model(f.shapes, f.choices, 2);
  auto state = fgsgd::make_opt_state(model);
  fgsgd::OptConfig c;
  fgsgd::TrainOptions opts{16, 9};
  for (std::size_t e = 0; e < 10; ++e) {
    const double before = fgsgd::evaluate(model, f.data).loss;
    const auto m = fgsgd::train_epoch(model, state, c, f.data, opts);
    EXPECT_EQ(m.epoch, e);
    EXPECT_DOUBLE_EQ(m.lr, fgsgd::lr_schedule(e, c));
    EXPECT_LE(m.max_violation, 1e-9);
    EXPECT_LE(m.mean_grad_norm, m.max_grad_norm);
    EXPECT_GE(m.accuracy, 0.0);
    EXPECT_LE(m.accuracy, 1.0);
    EXPECT_TRUE(std::isfinite(m.loss));
    if (e == 0) EXPECT_NEAR(m.loss, before, 1.0);
  }
  EXPECT_EQ(state.epoch(), 10u);
}

TEST(TrainEpoch, RescaleHappensAtEpochEnd) {
  const auto f = small_problem(2.0);
  auto model = fgsgd::init_model(f.shapes, f.choices, 3);
  auto state = fgsgd::make_opt_state(model);
  (void)fgsgd::train_epoch(model, state, fgsgd::OptConfig{}, f.data, {});
  bool moved = false;
  for (std::size_t l = 0; l < model.components.size(); ++l)
    for (const auto& group : model.components[l])
      for (const auto& comp : group) {
        EXPECT_GE(comp.scale.lambda, 1.0);
        EXPECT_DOUBLE_EQ(comp.scale.re, comp.scale.gamma / comp.scale.lambda);
        if (comp.spec.kind != ManifoldKind::euclidean) {
          EXPECT_EQ(comp.spec.scale, comp.scale.re);
          moved = moved || comp.scale.lambda > 1.0;
        }
      }
  EXPECT_TRUE(moved) << "wide inputs should lift lambda above its floor";
  EXPECT_LE(model.max_violation(), 1e-9);
}

TEST(TrainEpoch, DeterministicRepeat) {
  const auto f = small_problem();
  auto run = [&] {
    auto model = fgsgd::init_model(f.shapes, f.choices, 7);
    auto state = fgsgd::make_opt_state(model);
    std::vector<double> trace;
    for (int e = 0; e < 5; ++e) {
      const auto m = fgsgd::train_epoch(model, state, fgsgd::OptConfig{}, f.data, {8, 3});
      trace.insert(trace.end(), {m.loss, m.accuracy, m.mean_grad_norm, m.max_grad_norm, m.max_violation});
    }
    return std::make_pair(trace, model.weights);
  };
  const auto a = run();
  const auto b = run();
  EXPECT_EQ(a.first, b.first);
  EXPECT_EQ(a.second, b.second);
}

TEST(TrainEpoch, StateMismatch) {
  const auto f = small_problem();
  auto model = fgsgd::init_model(f.shapes, f.choices, 1);
  fgsgd::OptState wrong(1);
  EXPECT_THROW(fgsgd::train_epoch(model, wrong, fgsgd::OptConfig{}, f.data, {}), fgsgd::ShapeError);
}

TEST(Checkpoint, RoundTripRestoresModel) {
  const auto f = small_problem();
  auto model = fgsgd::init_model(f.shapes, f.choices, 1);
  auto state = fgsgd::make_opt_state(model);
  for (int e = 0; e < 3; ++e) (void)fgsgd::train_epoch(model, state, fgsgd::OptConfig{}, f.data, {});

  const auto dir = scratch("ckpt_roundtrip");
  const nlohmann::json config = {{"note", "round trip"}};
  const auto path = fgsgd::save_checkpoint(fgsgd::checkpoint_from_model(model, 3, config), dir);
  const auto loaded = fgsgd::load_checkpoint(dir);
  EXPECT_EQ(loaded.epoch, 3u);
  EXPECT_EQ(loaded.config, config);
  EXPECT_EQ(fgsgd::load_checkpoint(path).layers.size(), 2u);

  const auto restored = fgsgd::model_from_checkpoint(loaded, f.shapes);
  EXPECT_EQ(restored.weights, model.weights);
  EXPECT_EQ(restored.layouts, model.layouts);
  for (std::size_t l = 0; l < 2; ++l)
    for (std::size_t g = 0; g < model.components[l].size(); ++g)
      for (std::size_t i = 0; i < model.components[l][g].size(); ++i) {
        const auto& a = model.components[l][g][i];
        const auto& b = restored.components[l][g][i];
        EXPECT_EQ(a.spec, b.spec);
        EXPECT_EQ(a.scale.lambda, b.scale.lambda);
        EXPECT_EQ(a.scale.re, b.scale.re);
        EXPECT_EQ(a.scale.gamma, b.scale.gamma);
      }
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, BlobLayoutIsLittleEndianFloat64) {
  fgsgd::Checkpoint ckpt;
  fgsgd::CheckpointLayer layer;
  fgsgd::CheckpointMember m;
  m.spec = fgsgd::ManifoldSpec::make(ManifoldKind::euclidean, 1, 2);
  m.weight = Matrix::from_rows({{1.0, -2.0}});
  layer.groups.push_back({{m}});
  ckpt.layers.push_back(layer);
  const auto dir = scratch("ckpt_bytes");
  fgsgd::save_checkpoint(ckpt, dir);
  std::ifstream in(dir / "checkpoint.bin", std::ios::binary);
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 4u + 4 + 4 + (4 + 4 + 8 + 16));
  EXPECT_EQ(bytes.substr(0, 4), "FGCK");
  EXPECT_EQ(static_cast<unsigned char>(bytes[12]), 1u);  // rows
  EXPECT_EQ(static_cast<unsigned char>(bytes[16]), 2u);  // cols
  // 1.0 = 0x3FF0000000000000, stored low byte first.
  EXPECT_EQ(static_cast<unsigned char>(bytes[28 + 7]), 0x3Fu);
  EXPECT_EQ(static_cast<unsigned char>(bytes[28 + 6]), 0xF0u);
  EXPECT_EQ(static_cast<unsigned char>(bytes[28]), 0x00u);
  std::filesystem::remove_all(dir);
}

TEST(Checkpoint, MalformedInputsAreInputErrors) {
  const auto dir = scratch("ckpt_bad");
  std::filesystem::create_directories(dir);
  EXPECT_THROW(fgsgd::load_checkpoint(dir / "missing.json"), fgsgd::InputError);

  std::ofstream(dir / "checkpoint.json") << "{ not json";
  EXPECT_THROW(fgsgd::load_checkpoint(dir), fgsgd::InputError);

  std::ofstream(dir / "checkpoint.json", std::ios::trunc)
      << R"({"format":"fgsgd-checkpoint","version":1,"epoch":0,"blob":"checkpoint.bin","layers":[]})";
  EXPECT_THROW(fgsgd::load_checkpoint(dir), fgsgd::InputError);

  fgsgd::Checkpoint ckpt;
  fgsgd::CheckpointLayer layer;
  fgsgd::CheckpointMember m;
  m.spec = fgsgd::ManifoldSpec::make(ManifoldKind::sphere, 2, 1);
  m.weight = Matrix::from_rows({{1.0}, {0.0}});
  layer.groups.push_back({{m}});
  ckpt.layers.push_back(layer);
  fgsgd::save_checkpoint(ckpt, dir);
  std::filesystem::resize_file(dir / "checkpoint.bin", 20);
  EXPECT_THROW(fgsgd::load_checkpoint(dir), fgsgd::InputError);
  std::filesystem::remove_all(dir);
}

}  // namespace
