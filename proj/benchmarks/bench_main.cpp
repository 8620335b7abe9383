#include <random>

#include <benchmark/benchmark.h>
#include <infodense/infodense.hpp>

using namespace infodense;

namespace {

SynthField field_of(benchmark::State& state) {
  SynthSpec spec;
  spec.n_clusters = 4;
  spec.sensors_per_cluster = static_cast<int>(state.range(0)) / 4;
  spec.samples = 96 * 60;
  spec.frame_len = 96;
  return generate(spec);
}

void BM_AngleField(benchmark::State& state) {
  const auto f = field_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(eigen_phase_field(f.matrix, {96, 96}));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_AngleField)->Arg(8)->Arg(16)->Arg(36)->Unit(benchmark::kMillisecond);

void BM_MiField(benchmark::State& state) {
  const auto f = field_of(state);
  for (auto _ : state) benchmark::DoNotOptimize(mi_field(f.matrix));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MiField)->Arg(8)->Arg(16)->Arg(36)->Unit(benchmark::kMillisecond);

// One mini-batch through the largest virtual-sensing network.
void BM_ForwardBackward(benchmark::State& state) {
  const auto model = build_imvs_model(3, 33, 1);
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd x(state.range(0), 3), y(state.range(0), 33);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  for (Eigen::Index i = 0; i < y.size(); ++i) y.data()[i] = normal(rng);
  for (auto _ : state) {
    const auto loss = mse_loss(forward(model, x), y);
    benchmark::DoNotOptimize(backward(model, x, loss.gradient));
  }
}
BENCHMARK(BM_ForwardBackward)->Arg(64)->Arg(256)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
