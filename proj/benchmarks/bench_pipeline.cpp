// Copyright 2026 The ldpgof Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "ldpgof/harness.hpp"

namespace {

using namespace ldpgof;

ExperimentSpec bench_spec(Mechanism mechanism, int n) {
  ExperimentSpec spec;
  spec.config.n = n;
  spec.config.alpha = 0.5;
  spec.config.beta = 1.0;
  spec.config.l = 8.0;
  spec.config.gamma = 0.2;
  spec.config.mechanism = mechanism;
  spec.null_spec = "uniform:0,1";
  spec.master_seed = 1;
  return spec;
}

void BM_LaplaceDraws(benchmark::State& state) {
  Rng rng(1);
  for (auto _ : state) {
    double acc = 0.0;
    for (int i = 0; i < 1024; ++i) acc += rng.next_laplace();
    benchmark::DoNotOptimize(acc);
  }
  state.SetItemsProcessed(state.iterations() * 1024);
}
BENCHMARK(BM_LaplaceDraws);

void BM_NiKernelPrivatize(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto null = NullDensity::uniform(0.0, 1.0);
  const auto part = make_partition({0.0, 1.0}, 0.05);
  const auto params = PrivacyParams::non_interactive(0.5);
  const auto kernel = boxcar();
  Rng rng(2);
  const auto xs = null.sample(static_cast<std::size_t>(n), rng);
  for (auto _ : state) {
    auto copy = xs;
    const auto batch =
        ni_kernel_privatize(std::move(copy), part, kernel, params, rng);
    benchmark::DoNotOptimize(batch.values.data());
  }
  state.SetItemsProcessed(state.iterations() * n * part.n_bins);
}
BENCHMARK(BM_NiKernelPrivatize)->Arg(2000)->Arg(16000);

void BM_StatSFast(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t cols = 8;
  Rng rng(3);
  PrivatizedBatch batch;
  batch.kind = BatchKind::kKernelMatrix;
  batch.rows = n;
  batch.cols = cols;
  batch.values.resize(n * cols);
  for (auto& v : batch.values) v = rng.next_laplace();
  const std::vector<double> f0c(cols, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(stat_s(batch, f0c));
  }
}
BENCHMARK(BM_StatSFast)->Arg(64)->Arg(2000);

// Quadratic reference implementation; kept here to show the gap to the
// O(nN) identity used by stat_s.
void BM_StatSNaive(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  const std::size_t cols = 8;
  Rng rng(3);
  PrivatizedBatch batch;
  batch.kind = BatchKind::kKernelMatrix;
  batch.rows = n;
  batch.cols = cols;
  batch.values.resize(n * cols);
  for (auto& v : batch.values) v = rng.next_laplace();
  const std::vector<double> f0c(cols, 1.0);
  for (auto _ : state) {
    double total = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < n; ++k) {
          if (i == k) continue;
          total += (batch.at(i, j) - f0c[j]) * (batch.at(k, j) - f0c[j]);
        }
      }
    }
    benchmark::DoNotOptimize(total);
  }
}
BENCHMARK(BM_StatSNaive)->Arg(64)->Arg(2000);

void BM_TrialNonInteractive(benchmark::State& state) {
  const Experiment experiment =
      prepare(bench_spec(Mechanism::kNonInteractive,
                         static_cast<int>(state.range(0))));
  uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_trial(experiment, Arm::kNull, trial++));
  }
}
BENCHMARK(BM_TrialNonInteractive)->Arg(2000)->Arg(32768);

void BM_TrialInteractive(benchmark::State& state) {
  const Experiment experiment = prepare(
      bench_spec(Mechanism::kInteractive, static_cast<int>(state.range(0))));
  uint64_t trial = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_trial(experiment, Arm::kNull, trial++));
  }
}
BENCHMARK(BM_TrialInteractive)->Arg(2000)->Arg(32768);

}  // namespace

BENCHMARK_MAIN();
