#include <benchmark/benchmark.h>

#include "fgsgd/manifolds.hpp"
#include "fgsgd/matkernel.hpp"
#include "fgsgd/optimizer.hpp"
#include "fgsgd/tinynet.hpp"

namespace {

using fgsgd::ManifoldKind;
using fgsgd::ManifoldSpec;
using fgsgd::Matrix;

void BM_QrOrthonormal(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = fgsgd::random_gaussian(2 * n, n, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fgsgd::qr_orthonormal(m));
}
BENCHMARK(BM_QrOrthonormal)->Arg(4)->Arg(16)->Arg(64);

void BM_TopSingularValue(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = fgsgd::random_gaussian(n, n, 2);
  for (auto _ : state) benchmark::DoNotOptimize(fgsgd::top_singular_value(m));
}
BENCHMARK(BM_TopSingularValue)->Arg(4)->Arg(16)->Arg(64);

void BM_MatrixExp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Matrix m = fgsgd::skew(fgsgd::random_gaussian(n, n, 3));
  for (auto _ : state) benchmark::DoNotOptimize(fgsgd::matrix_exp(m));
}
BENCHMARK(BM_MatrixExp)->Arg(4)->Arg(16)->Arg(32);

void BM_Move(benchmark::State& state) {
  const auto kind = static_cast<ManifoldKind>(state.range(0));
  const auto map = static_cast<fgsgd::MapKind>(state.range(1));
  const auto spec = ManifoldSpec::make(kind, 27, 8, 0.1);
  const Matrix w = fgsgd::random_point(spec, 4);
  const Matrix v = fgsgd::project_tangent(spec, w, fgsgd::random_gaussian(27, 8, 5) * 0.01);
  for (auto _ : state) benchmark::DoNotOptimize(fgsgd::move(spec, w, v, map));
  state.SetLabel(std::string(fgsgd::to_string(kind)) + "/" + std::string(fgsgd::to_string(map)));
}
BENCHMARK(BM_Move)->ArgsProduct({{0, 1, 2, 3}, {0, 1}});

void BM_FgsgdStep(benchmark::State& state) {
  fgsgd::ProductPoint w;
  for (ManifoldKind kind : {ManifoldKind::sphere, ManifoldKind::oblique, ManifoldKind::stiefel,
                            ManifoldKind::euclidean}) {
    w.specs.push_back(ManifoldSpec::make(kind, 18, 4, 0.2));
    w.parts.push_back(fgsgd::random_point(w.specs.back(), 6));
  }
  std::vector<Matrix> g;
  for (std::size_t i = 0; i < w.size(); ++i) g.push_back(fgsgd::random_gaussian(18, 4, 7 + i));
  std::vector<Matrix> momentum;
  const fgsgd::OptConfig config;
  for (auto _ : state) benchmark::DoNotOptimize(fgsgd::fgsgd_step(config, 0.01, w, g, momentum));
}
BENCHMARK(BM_FgsgdStep);

void BM_ForwardBackward(benchmark::State& state) {
  fgsgd::NetSpec net;
  net.input = {2, 8, 8};
  net.layers = {fgsgd::Conv2dLayer{8, 3, 3, 1}, fgsgd::DenseLayer{3}};
  net.classes = 3;
  const auto shapes = fgsgd::resolve_shapes(net);
  const auto weights = fgsgd::random_weights(shapes, 8);
  const auto data = fgsgd::synth_blobs(3, static_cast<std::size_t>(state.range(0)), net.input.size(), 1.0, 9);
  for (auto _ : state) {
    const auto cache = fgsgd::forward(shapes, weights, data.inputs);
    benchmark::DoNotOptimize(fgsgd::backward(shapes, weights, cache, data.labels));
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(data.size()));
}
BENCHMARK(BM_ForwardBackward)->Arg(10)->Arg(100);

}  // namespace

BENCHMARK_MAIN();
