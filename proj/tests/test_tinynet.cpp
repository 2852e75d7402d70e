#include <cmath>
#include <cstdio>
#include <filesystem>

#include <gtest/gtest.h>

#include "fgsgd/error.hpp"
#include "fgsgd/tinynet.hpp"

namespace {

using fgsgd::Conv2dLayer;
using fgsgd::DenseLayer;
using fgsgd::Matrix;
using fgsgd::NetSpec;
using fgsgd::NetWeights;

NetSpec reference_net() {
  NetSpec net;
  net.input = {2, 5, 5};
  net.layers = {Conv2dLayer{3, 3, 3, 1}, Conv2dLayer{4, 2, 2, 2}, DenseLayer{3}};
  net.classes = 3;
  return net;
}

std::vector<std::vector<double>> random_batch(std::size_t n, std::size_t dim, std::uint64_t seed) {
  const Matrix m = fgsgd::random_gaussian(n, dim, seed);
  std::vector<std::vector<double>> out(n);
  for (std::size_t i = 0; i < n; ++i)
    out[i].assign(m.values().begin() + static_cast<std::ptrdiff_t>(i * dim),
                  m.values().begin() + static_cast<std::ptrdiff_t>((i + 1) * dim));
  return out;
}

TEST(ResolveShapes, ComposesAndComputesGeometry) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  ASSERT_EQ(shapes.size(), 3u);
  EXPECT_EQ(shapes[0].out, (fgsgd::TensorShape{3, 3, 3}));
  EXPECT_EQ(shapes[1].out, (fgsgd::TensorShape{4, 1, 1}));
  EXPECT_TRUE(shapes[2].dense);
  EXPECT_EQ(shapes[2].kernel_rows, 4u);
  EXPECT_EQ(shapes[0].geometry().fan_in, 2u * 9u);
  EXPECT_EQ(shapes[0].geometry().fan_out, 27u);
  EXPECT_EQ(shapes[2].geometry().fan_in, 4u);
  EXPECT_EQ(shapes[2].geometry().fan_out, 3u);
}

TEST(ResolveShapes, Errors) {
  NetSpec net = reference_net();
  net.classes = 4;
  EXPECT_THROW(fgsgd::resolve_shapes(net), fgsgd::ShapeError);
  net = reference_net();
  net.layers[0] = Conv2dLayer{3, 6, 6, 1};
  EXPECT_THROW(fgsgd::resolve_shapes(net), fgsgd::ShapeError);
  net = reference_net();
  net.classes = 1;
  EXPECT_THROW(fgsgd::resolve_shapes(net), fgsgd::ValueError);
}

TEST(Forward, ZeroWeightsGiveLnK) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  const auto batch = random_batch(6, 50, 1);
  const std::vector<int> labels{0, 1, 2, 0, 1, 2};
  EXPECT_NEAR(fgsgd::loss_at(shapes, fgsgd::zero_weights(shapes), batch, labels), std::log(3.0), 1e-12);
}

TEST(Forward, ZeroFinalLayerGivesLnK) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  NetWeights w = fgsgd::random_weights(shapes, 3);
  for (Matrix& k : w.back()) k *= 0.0;
  const std::vector<int> labels{2, 0};
  EXPECT_NEAR(fgsgd::loss_at(shapes, w, random_batch(2, 50, 2), labels), std::log(3.0), 1e-12);
}

TEST(Forward, IdentityConvOnConstantImage) {
  NetSpec net;
  net.input = {1, 4, 4};
  net.layers = {Conv2dLayer{1, 1, 1, 1}, DenseLayer{2}};
  net.classes = 2;
  const auto shapes = fgsgd::resolve_shapes(net);
  NetWeights w = fgsgd::zero_weights(shapes);
  w[0][0](0, 0) = 1.0;
  const auto res = fgsgd::forward(shapes, w, std::vector<std::vector<double>>{std::vector<double>(16, 0.75)});
  for (double v : res.cache.preact[0][0]) EXPECT_EQ(v, 0.75);
  EXPECT_EQ(res.channel_std[0][0], 0.0);
}

TEST(Forward, DenseIdentityGivesInput) {
  NetSpec net;
  net.input = {1, 1, 3};
  net.layers = {DenseLayer{3}};
  net.classes = 3;
  const auto shapes = fgsgd::resolve_shapes(net);
  NetWeights w = fgsgd::zero_weights(shapes);
  for (std::size_t d = 0; d < 3; ++d) w[0][d](d, 0) = 1.0;
  const std::vector<double> x{0.5, -2.0, 7.0};
  EXPECT_EQ(fgsgd::forward(shapes, w, std::vector<std::vector<double>>{x}).logits[0], x);
}

TEST(Forward, StridedConvMatchesHandComputation) {
  NetSpec net;
  net.input = {1, 3, 3};
  net.layers = {Conv2dLayer{1, 2, 2, 1}, DenseLayer{2}};
  net.classes = 2;
  const auto shapes = fgsgd::resolve_shapes(net);
  NetWeights w = fgsgd::zero_weights(shapes);
  w[0][0] = Matrix::from_rows({{1, 2}, {-1, 0.5}});
  const std::vector<double> x{1, 2, 3, 4, 5, 6, 7, 8, 9};
  const auto res = fgsgd::forward(shapes, w, std::vector<std::vector<double>>{x});
  // out(i,j) = x(i,j) + 2 x(i,j+1) - x(i+1,j) + 0.5 x(i+1,j+1)
  const std::vector<double> expected{1 + 4 - 4 + 2.5, 2 + 6 - 5 + 3, 4 + 10 - 7 + 4, 5 + 12 - 8 + 4.5};
  EXPECT_EQ(res.cache.preact[0][0], expected);

  net.layers = {Conv2dLayer{1, 2, 2, 2}, DenseLayer{2}};
  const auto strided = fgsgd::resolve_shapes(net);
  EXPECT_EQ(strided[0].out, (fgsgd::TensorShape{1, 1, 1}));
}

TEST(Forward, ChannelStdPerInputChannel) {
  NetSpec net;
  net.input = {2, 1, 2};
  net.layers = {Conv2dLayer{1, 1, 1, 1}, DenseLayer{2}};
  net.classes = 2;
  const auto shapes = fgsgd::resolve_shapes(net);
  const std::vector<std::vector<double>> batch{{0, 2, 5, 5}, {0, 2, 5, 5}};
  const auto res = fgsgd::forward(shapes, fgsgd::random_weights(shapes, 1), batch);
  EXPECT_DOUBLE_EQ(res.channel_std[0][0], 1.0);
  EXPECT_DOUBLE_EQ(res.channel_std[0][1], 0.0);
}

TEST(Forward, RejectsWrongSampleSize) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  EXPECT_THROW(fgsgd::forward(shapes, fgsgd::zero_weights(shapes), random_batch(1, 49, 1)),
               fgsgd::ShapeError);
}

TEST(Forward, Deterministic) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  const auto w = fgsgd::random_weights(shapes, 5);
  const auto batch = random_batch(4, 50, 5);
  EXPECT_EQ(fgsgd::forward(shapes, w, batch).logits, fgsgd::forward(shapes, w, batch).logits);
}

TEST(Backward, MatchesCentralDifferences) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  const auto batch = random_batch(5, 50, 11);
  const std::vector<int> labels{0, 2, 1, 1, 0};
  const double h = 1e-5;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    NetWeights w = fgsgd::random_weights(shapes, seed);
    const NetWeights g = fgsgd::backward(shapes, w, fgsgd::forward(shapes, w, batch), labels);
    double worst = 0.0;
    for (std::size_t l = 0; l < w.size(); ++l)
      for (std::size_t k = 0; k < w[l].size(); ++k)
        for (std::size_t e = 0; e < w[l][k].size(); ++e) {
          double& x = w[l][k].values()[e];
          const double saved = x;
          x = saved + h;
          const double up = fgsgd::loss_at(shapes, w, batch, labels);
          x = saved - h;
          const double down = fgsgd::loss_at(shapes, w, batch, labels);
          x = saved;
          const double numeric = (up - down) / (2 * h);
          const double a = g[l][k].values()[e];
          worst = std::max(worst, std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), 1e-3}));
        }
    EXPECT_LT(worst, 1e-5) << "seed " << seed;
  }
}

TEST(Backward, DeadNetworkHasZeroGradient) {
  NetSpec net;
  net.input = {1, 1, 2};
  net.layers = {DenseLayer{2}, DenseLayer{2}};
  net.classes = 2;
  const auto shapes = fgsgd::resolve_shapes(net);
  NetWeights w = fgsgd::zero_weights(shapes);
  w[0][0] = Matrix::from_rows({{-1}, {-1}});
  w[0][1] = Matrix::from_rows({{-2}, {-1}});
  w[1][0] = Matrix::from_rows({{1}, {0}});
  w[1][1] = Matrix::from_rows({{0}, {1}});
  const std::vector<std::vector<double>> batch{{1, 2}, {3, 0.5}};
  const std::vector<int> labels{0, 1};
  for (const auto& layer : fgsgd::backward(shapes, w, fgsgd::forward(shapes, w, batch), labels))
    for (const Matrix& k : layer) EXPECT_EQ(fgsgd::max_abs(k), 0.0);
}

TEST(Backward, DuplicatedBatchKeepsMeanGradient) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  const auto w = fgsgd::random_weights(shapes, 2);
  auto batch = random_batch(3, 50, 4);
  std::vector<int> labels{1, 0, 2};
  const auto g1 = fgsgd::backward(shapes, w, fgsgd::forward(shapes, w, batch), labels);
  const auto batch_copy = batch;
  const auto labels_copy = labels;
  batch.insert(batch.end(), batch_copy.begin(), batch_copy.end());
  labels.insert(labels.end(), labels_copy.begin(), labels_copy.end());
  const auto g2 = fgsgd::backward(shapes, w, fgsgd::forward(shapes, w, batch), labels);
  for (std::size_t l = 0; l < g1.size(); ++l)
    for (std::size_t k = 0; k < g1[l].size(); ++k) EXPECT_LT(fgsgd::max_abs_diff(g1[l][k], g2[l][k]), 1e-13);
}

TEST(Backward, StaleCacheRejected) {
  const auto shapes = fgsgd::resolve_shapes(reference_net());
  const auto w = fgsgd::random_weights(shapes, 2);
  const auto fwd = fgsgd::forward(shapes, w, random_batch(3, 50, 4));
  EXPECT_THROW(fgsgd::backward(shapes, w, fwd, std::vector<int>{0, 1}), fgsgd::ShapeError);
  NetSpec other = reference_net();
  other.input = {2, 6, 6};
  const auto other_shapes = fgsgd::resolve_shapes(other);
  EXPECT_THROW(fgsgd::backward(other_shapes, fgsgd::random_weights(other_shapes, 1), fwd,
                               std::vector<int>{0, 1, 2}),
               fgsgd::ShapeError);
}

TEST(SoftmaxCrossEntropy, HandValues) {
  const std::vector<std::vector<double>> logits{{0.0, std::log(3.0)}, {5.0, 1.0}};
  const auto s = fgsgd::softmax_cross_entropy(logits, std::vector<int>{1, 1});
  // -log(3/4) and -log(e/(e^5+e))
  const double expected = (-std::log(0.75) + std::log(std::exp(5.0) + std::exp(1.0)) - 1.0) / 2.0;
  EXPECT_NEAR(s.loss, expected, 1e-14);
  EXPECT_EQ(s.correct, 1u);
  EXPECT_THROW(fgsgd::softmax_cross_entropy(logits, std::vector<int>{0, 2}), fgsgd::ValueError);
}

TEST(SynthBlobs, DeterministicAndSized) {
  const auto a = fgsgd::synth_blobs(3, 10, 5, 0.5, 9);
  const auto b = fgsgd::synth_blobs(3, 10, 5, 0.5, 9);
  EXPECT_EQ(a.inputs, b.inputs);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_EQ(a.size(), 30u);
  EXPECT_NO_THROW(a.validate());
  EXPECT_EQ(fgsgd::synth_blobs(3, 0, 5, 0.5, 9).size(), 0u);
  EXPECT_THROW(fgsgd::synth_blobs(1, 3, 5, 0.5, 9), fgsgd::ValueError);
}

TEST(SynthBlobs, ClassMeansSitOnSphereOfRadiusThreeSpread) {
  const double spread = 0.5;
  const std::size_t n = 4000;
  const auto d = fgsgd::synth_blobs(3, n, 6, spread, 3);
  std::vector<std::vector<double>> mean(3, std::vector<double>(6, 0.0));
  for (std::size_t i = 0; i < d.size(); ++i)
    for (std::size_t k = 0; k < 6; ++k) mean[d.labels[i]][k] += d.inputs[i][k] / double(n);
  std::vector<double> centroid(6, 0.0);
  for (const auto& m : mean) {
    double n2 = 0.0;
    for (std::size_t k = 0; k < 6; ++k) {
      n2 += m[k] * m[k];
      centroid[k] += m[k] / 3.0;
    }
    // Sampling error of each coordinate is spread / sqrt(n), about 0.008.
    EXPECT_NEAR(std::sqrt(n2), 3 * spread, 0.05);
  }
  // Centred simplex: the means sum to zero and are pairwise equidistant.
  for (double c : centroid) EXPECT_NEAR(c, 0.0, 0.05);
  auto dist = [&](int a, int b) {
    double s = 0.0;
    for (std::size_t k = 0; k < 6; ++k) s += (mean[a][k] - mean[b][k]) * (mean[a][k] - mean[b][k]);
    return std::sqrt(s);
  };
  EXPECT_NEAR(dist(0, 1), 3 * spread * std::sqrt(3.0), 0.1);
  EXPECT_NEAR(dist(1, 2), 3 * spread * std::sqrt(3.0), 0.1);
}

TEST(SynthBlobs, ZeroSpreadCollapsesToMeans) {
  const auto d = fgsgd::synth_blobs(2, 3, 4, 0.0, 8);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const std::size_t first = d.labels[i] == 0 ? 0 : 3;
    EXPECT_EQ(d.inputs[i], d.inputs[first]);
  }
}

TEST(DatasetCsv, RoundTripIsExact) {
  const auto d = fgsgd::synth_blobs(3, 4, 6, 1.3, 21);
  const auto path = std::filesystem::temp_directory_path() / "fgsgd_dataset_roundtrip.csv";
  fgsgd::write_dataset_csv(d, path);
  const auto r = fgsgd::read_dataset_csv(path);
  std::filesystem::remove(path);
  EXPECT_EQ(r.inputs, d.inputs);
  EXPECT_EQ(r.labels, d.labels);
  EXPECT_EQ(r.dim, 6u);
  EXPECT_EQ(r.classes, 3u);
}

TEST(DatasetCsv, MalformedRowsNameTheLine) {
  const auto path = std::filesystem::temp_directory_path() / "fgsgd_dataset_bad.csv";
  {
    std::FILE* f = std::fopen(path.string().c_str(), "w");
    std::fputs("1,2,0\n3,x,1\n", f);
    std::fclose(f);
  }
  try {
    (void)fgsgd::read_dataset_csv(path);
    FAIL() << "expected InputError";
  } catch (const fgsgd::InputError& e) {
    EXPECT_NE(std::string(e.what()).find(":2:"), std::string::npos) << e.what();
  }
  std::filesystem::remove(path);
  EXPECT_THROW(fgsgd::read_dataset_csv(path), fgsgd::InputError);
}

}  // namespace
