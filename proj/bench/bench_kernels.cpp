// Serial reference kernels against the blocked OpenMP kernels.
// The parallel variants take the thread count as their benchmark argument.

#include "bli/contrastive.hpp"
#include "bli/linear_mapping.hpp"
#include "bli/reference.hpp"
#include "bli/retrieval.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace bli;

namespace {

Matrix gaussian(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist;
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

struct Data {
  Matrix x = gaussian(4000, 64, 1);
  Matrix y = gaussian(4000, 64, 2);
  Matrix w = gaussian(64, 64, 3);
  BilingualDictionary dict;
  NegativePool pool;
  Data() {
    for (Index i = 0; i < 500; ++i) dict.add(i, (i * 13) % 4000);
    pool = mine_hard_negatives(dict, x, y, 50);
  }
};

const Data& data() {
  static const Data d;
  return d;
}

void threads_from(benchmark::State& st) { set_thread_count(static_cast<int>(st.range(0))); }

void BM_ApplyMap_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::apply_map(data().x, data().w));
}
void BM_ApplyMap_Parallel(benchmark::State& st) {
  threads_from(st);
  for (auto _ : st) benchmark::DoNotOptimize(apply_map(data().x, data().w));
}

void BM_NnTopk_Serial(benchmark::State& st) {
  const Matrix q = data().x.topRows(500);
  for (auto _ : st) benchmark::DoNotOptimize(reference::nn_topk(q, data().y, 10, Measure::Cosine));
}
void BM_NnTopk_Parallel(benchmark::State& st) {
  threads_from(st);
  const Matrix q = data().x.topRows(500);
  for (auto _ : st) benchmark::DoNotOptimize(nn_topk(q, data().y, 10));
}

void BM_CslsStats_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::compute_csls_stats(data().x, data().y, 10));
}
void BM_CslsStats_Parallel(benchmark::State& st) {
  threads_from(st);
  for (auto _ : st) benchmark::DoNotOptimize(compute_csls_stats(data().x, data().y, 10));
}

void BM_MineNegatives_Serial(benchmark::State& st) {
  for (auto _ : st) benchmark::DoNotOptimize(reference::mine_hard_negatives(data().dict, data().x, data().y, 50));
}
void BM_MineNegatives_Parallel(benchmark::State& st) {
  threads_from(st);
  for (auto _ : st) benchmark::DoNotOptimize(mine_hard_negatives(data().dict, data().x, data().y, 50));
}

void BM_InfoNceGrad_Serial(benchmark::State& st) {
  const Matrix eye = Matrix::Identity(64, 64);
  for (auto _ : st) {
    benchmark::DoNotOptimize(
        reference::infonce_loss_grad(data().dict, data().pool, data().x, data().y, eye, eye, 1.0));
  }
}
void BM_InfoNceGrad_Parallel(benchmark::State& st) {
  threads_from(st);
  const Matrix eye = Matrix::Identity(64, 64);
  for (auto _ : st) {
    benchmark::DoNotOptimize(infonce_loss_grad(data().dict, data().pool, data().x, data().y, eye, eye, 1.0));
  }
}

}  // namespace

BENCHMARK(BM_ApplyMap_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_ApplyMap_Parallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NnTopk_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_NnTopk_Parallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CslsStats_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_CslsStats_Parallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MineNegatives_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_MineNegatives_Parallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InfoNceGrad_Serial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_InfoNceGrad_Parallel)->RangeMultiplier(2)->Range(1, 8)->UseRealTime()->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
