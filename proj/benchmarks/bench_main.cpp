#include <benchmark/benchmark.h>

#include <memory>
#include <string>
#include <vector>

#include "ddgk/attention.hpp"
#include "ddgk/divergence.hpp"
#include "ddgk/encoder.hpp"
#include "ddgk/generators.hpp"

namespace {

using namespace ddgk;

void BM_EncoderTraining(benchmark::State& state) {
  const Graph g = random_connected_graph(static_cast<int>(state.range(0)), 0.1, 7);
  TrainConfig cfg;
  cfg.encoding_epochs = 100;
  for (auto _ : state) benchmark::DoNotOptimize(train_encoder(g, cfg, "g"));
  state.counters["nodes"] = static_cast<double>(g.node_count());
}
BENCHMARK(BM_EncoderTraining)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_AttentionPair(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const Graph s = random_connected_graph(n, 0.1, 3);
  const Graph t = random_connected_graph(n, 0.1, 4);
  TrainConfig cfg;
  cfg.scoring_epochs = 100;
  const auto enc = std::make_shared<const SourceEncoder>(train_encoder(s, cfg, "s"));
  for (auto _ : state) benchmark::DoNotOptimize(train_attention(enc, s, t, cfg, "t"));
}
BENCHMARK(BM_AttentionPair)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

// Full two-stage embedding with M sources and N targets of 12 nodes each.
void BM_EmbedAll(benchmark::State& state) {
  const auto m = static_cast<std::size_t>(state.range(0));
  const auto n = static_cast<std::size_t>(state.range(1));
  std::vector<Graph> pool;
  for (std::size_t i = 0; i < std::max(m, n); ++i) pool.push_back(random_connected_graph(12, 0.15, 50 + i));
  std::vector<NamedGraph> named;
  for (std::size_t i = 0; i < pool.size(); ++i) named.push_back({"g" + std::to_string(i), &pool[i]});
  const std::span<const NamedGraph> all(named);
  TrainConfig cfg;
  cfg.encoding_epochs = 50;
  cfg.scoring_epochs = 50;
  EmbedOptions opts;
  opts.workers = 1;
  for (auto _ : state) benchmark::DoNotOptimize(embed_all(all.first(m), all.first(n), cfg, opts));
  state.counters["cells"] = static_cast<double>(m * n);
}
BENCHMARK(BM_EmbedAll)->Args({2, 8})->Args({4, 8})->Args({8, 8})->Args({8, 16})->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
