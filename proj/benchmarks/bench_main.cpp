#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "pacvote/bounds.hpp"
#include "pacvote/margins.hpp"
#include "pacvote/mincq.hpp"
#include "pacvote/numerics.hpp"
#include "pacvote/voters.hpp"
#include "test_util.hpp"

namespace pacvote {
namespace {

// Uncached cost: a fresh m on every iteration.
void BM_Xi(benchmark::State& state) {
  std::size_t m = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(xi(m++));
}
BENCHMARK(BM_Xi)->Arg(1000)->Arg(100000);

void BM_KlInvert(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(kl_invert({0.3, 0.0117, KlDirection::sup, 0.5}));
}
BENCHMARK(BM_KlInvert);

void BM_MaximizeFc(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(maximize_fc_over_region(0.40, 0.10, 0.0199));
}
BENCHMARK(BM_MaximizeFc);

void BM_Bound(benchmark::State& state) {
  const auto id = static_cast<BoundId>(state.range(0));
  BoundInputs in;
  in.m = 1000;
  in.kl_qp = 5.0;
  in.stats = summary_from_rates(0.30, 0.40);
  in.m_unlabeled = 10000;
  in.aligned = true;
  in.compression_size = 1;
  for (auto _ : state) benchmark::DoNotOptimize(compute_bound(id, in));
  state.SetLabel(to_string(id));
}
BENCHMARK(BM_Bound)->DenseRange(0, 6);

void BM_MinCqQp(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int n = static_cast<int>(state.range(0));
  const VoteMatrix f = testing::informative_votes(rng, 500, n, false);
  auto voters = std::make_shared<const SelfComplementedVoterSet>(
      SelfComplementedVoterSet::from_explicit(static_cast<std::size_t>(n)));
  const double mu = 0.2 * realizable_margin_range(f).second;
  for (auto _ : state) benchmark::DoNotOptimize(mincq_train(voters, f, mu));
}
BENCHMARK(BM_MinCqQp)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_VoteMatrix(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Example> ex;
  for (int i = 0; i < state.range(0); ++i) {
    ex.push_back({{g(rng), g(rng), g(rng), g(rng)}, i % 2 == 0 ? 1 : -1});
  }
  const Dataset d(std::move(ex));
  const SelfComplementedVoterSet stumps = build_stumps(d, 10);
  const SelfComplementedVoterSet rbf = build_kernel_voters(d, {KernelSpec::Type::rbf, 1.0});
  const bool kernel = state.range(1) != 0;
  for (auto _ : state) benchmark::DoNotOptimize(vote_matrix(kernel ? rbf : stumps, d));
  state.SetLabel(kernel ? "rbf" : "stumps");
}
BENCHMARK(BM_VoteMatrix)->Args({500, 0})->Args({500, 1})->Unit(benchmark::kMillisecond);

void BM_Margins(benchmark::State& state) {
  std::mt19937_64 rng(3);
  const VoteMatrix f = testing::random_votes(rng, 2000, 200, false);
  const Posterior q = testing::random_posterior(rng, 400);
  for (auto _ : state) benchmark::DoNotOptimize(summarize(margins(f, q)));
}
BENCHMARK(BM_Margins);

}  // namespace
}  // namespace pacvote
BENCHMARK_MAIN();
