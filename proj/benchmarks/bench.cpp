#include <benchmark/benchmark.h>

#include "motifmix/collapsed.hpp"
#include "motifmix/datagen.hpp"
#include "motifmix/gibbs.hpp"
#include "motifmix/spectral.hpp"

using namespace motifmix;

namespace {

Sequence make_data(int n_blocks, int w, int M, std::uint64_t seed) {
  GenerativeModel gen = GenerativeModel::deterministic(
      w, M, {std::vector<Symbol>(w, 1), std::vector<Symbol>(w, 2)},
      {0.05, 0.05}, std::vector<double>(M, 1.0 / M));
  return sample_sequence(gen, n_blocks, seed, 0).first;
}

void BM_SystematicSweep(benchmark::State& state) {
  const int n_blocks = static_cast<int>(state.range(0));
  const int w = static_cast<int>(state.range(1));
  Sequence seq = make_data(n_blocks, w, 4, 42);
  ModelParams params = ModelParams::flat(w, 4, 0.01, 1.0);
  GibbsSampler sampler(seq, params, Assignment(n_blocks, false));
  CounterRng rng(1);
  for (auto _ : state) {
    sampler.systematic_sweep(rng);
    benchmark::DoNotOptimize(sampler.ones());
  }
  state.SetItemsProcessed(state.iterations() * n_blocks);
}
BENCHMARK(BM_SystematicSweep)->Args({2000, 6})->Args({3000, 10});

void BM_FullChainGap(benchmark::State& state) {
  const int n_blocks = static_cast<int>(state.range(0));
  Sequence seq = make_data(n_blocks, 2, 2, 7);
  ModelParams params = ModelParams::flat(2, 2, 0.1, 1.0);
  for (auto _ : state) {
    ReversibleChain chain = build_full_chain(seq, params);
    benchmark::DoNotOptimize(spectral_gap(chain));
  }
}
BENCHMARK(BM_FullChainGap)->Arg(8)->Arg(10)->Arg(12);

void BM_CollapsedPosterior(benchmark::State& state) {
  const int n_blocks = static_cast<int>(state.range(0));
  Sequence seq = make_data(n_blocks, 2, 2, 11);
  ModelParams params = ModelParams::flat(2, 2, 0.1, 1.0);
  for (auto _ : state) {
    CollapsedChain chain = collapsed_posterior(seq, params);
    benchmark::DoNotOptimize(chain.log_pi.data());
  }
}
BENCHMARK(BM_CollapsedPosterior)->Arg(40)->Arg(80)->Arg(160);

void BM_BottleneckD(benchmark::State& state) {
  const int n_blocks = static_cast<int>(state.range(0));
  Sequence seq = make_data(n_blocks, 2, 2, 13);
  ModelParams params = ModelParams::flat(2, 2, 0.1, 1.0);
  CollapsedChain chain = collapsed_posterior(seq, params);
  for (auto _ : state) {
    BottleneckResult d = bottleneck_d(chain);
    benchmark::DoNotOptimize(d.log_d);
  }
  state.counters["states"] = static_cast<double>(chain.n_states);
}
BENCHMARK(BM_BottleneckD)->Arg(80)->Arg(160);

void BM_ConductanceExact(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
  const double step = 0.5 / n;
  for (int i = 0; i < n; ++i) {
    if (i > 0) T(i, i - 1) = step;
    if (i + 1 < n) T(i, i + 1) = step;
    T(i, i) = 1.0 - T.row(i).sum();
  }
  ReversibleChain chain =
      make_chain_dense(std::move(T), std::vector<double>(n, -std::log(double(n))));
  for (auto _ : state) {
    ConductanceResult c = conductance_exact(chain);
    benchmark::DoNotOptimize(c.phi);
  }
}
BENCHMARK(BM_ConductanceExact)->Arg(12)->Arg(16)->Arg(20);

}  // namespace

BENCHMARK_MAIN();
