#include <benchmark/benchmark.h>

#include <numeric>

#include "gps/labelgen.hpp"
#include "gps/losses.hpp"
#include "gps/synthdata.hpp"
#include "gps/trainer.hpp"

namespace {

gps::Mat random_mat(gps::Rng& rng, Eigen::Index r, Eigen::Index c) {
  std::normal_distribution<double> nd;
  gps::Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = nd(rng);
  return m;
}

void BM_Hungarian(benchmark::State& state) {
  gps::Rng rng(1);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const gps::Mat H = random_mat(rng, n, n).cwiseAbs();
  for (auto _ : state) benchmark::DoNotOptimize(gps::labelgen::hungarian_max(H));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Hungarian)->RangeMultiplier(2)->Range(4, 64)->Complexity();

void BM_HsicRbf(benchmark::State& state) {
  gps::Rng rng(2);
  const auto n = static_cast<Eigen::Index>(state.range(0));
  const gps::Mat a = random_mat(rng, n, 1), b = random_mat(rng, n, 1);
  gps::KernelSpec k;
  for (auto _ : state) benchmark::DoNotOptimize(gps::loss::hsic_fnorm(a, b, k).value);
}
BENCHMARK(BM_HsicRbf)->RangeMultiplier(2)->Range(32, 512);

void BM_HsicRandomFeatures(benchmark::State& state) {
  gps::Rng rng(3);
  const gps::Mat a = random_mat(rng, 512, 1), b = random_mat(rng, 512, 1);
  gps::KernelSpec k;
  k.kind = gps::KernelKind::random_features;
  k.num_random_features = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gps::loss::hsic_random_features(a, b, k).value);
}
BENCHMARK(BM_HsicRandomFeatures)->Arg(64)->Arg(256)->Arg(1024);

// One full training epoch on a reduced dataset.
void BM_TrainEpoch(benchmark::State& state) {
  gps::Config c;
  c.generator.videos_per_domain = 4;
  c.generator.frames_per_video = 24;
  const auto ds = gps::synth::corrupt(gps::synth::generate_dataset(c.generator), c.generator);
  const auto parts = gps::synth::split(ds, c.holdout_domain());
  for (auto _ : state) {
    state.PauseTiming();
    gps::train::Trainer t(c, parts.first);
    state.ResumeTiming();
    benchmark::DoNotOptimize(t.train_epoch(0));
  }
}
BENCHMARK(BM_TrainEpoch)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
