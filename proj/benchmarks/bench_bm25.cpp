#include <benchmark/benchmark.h>

#include <random>

#include "xlel/bm25.hpp"

namespace {

using namespace xlel;

std::vector<std::vector<std::string>> synthetic_docs(std::size_t n, std::size_t vocab, std::size_t len, std::mt19937& rng) {
  std::uniform_int_distribution<std::size_t> term(0, vocab - 1);
  std::vector<std::vector<std::string>> docs(n);
  for (auto& d : docs) {
    for (std::size_t i = 0; i < len; ++i) d.push_back("t" + std::to_string(term(rng) * term(rng) / vocab));
  }
  return docs;
}

bm25::Index make_index(std::size_t n, bm25::Variant v) {
  std::mt19937 rng(7);
  auto docs = synthetic_docs(n, 5000, 60, rng);
  std::vector<bm25::DocKey> keys;
  for (std::size_t i = 0; i < n; ++i) keys.push_back({Qid(i + 1), "en"});
  return bm25::Index::from_tokens(std::move(keys), docs, v, {}, "bench");
}

void BM_Rank(benchmark::State& state) {
  const auto v = static_cast<bm25::Variant>(state.range(1));
  const auto index = make_index(static_cast<std::size_t>(state.range(0)), v);
  std::mt19937 rng(11);
  const auto queries = synthetic_docs(64, 5000, 33, rng);
  std::size_t q = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(bm25::rank(index, queries[q++ % queries.size()], 8));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_Rank)->ArgsProduct({{1000, 10000}, {0, 1, 2}});

void BM_Build(benchmark::State& state) {
  std::mt19937 rng(3);
  const auto docs = synthetic_docs(static_cast<std::size_t>(state.range(0)), 5000, 60, rng);
  for (auto _ : state) {
    std::vector<bm25::DocKey> keys;
    for (std::size_t i = 0; i < docs.size(); ++i) keys.push_back({Qid(i + 1), "en"});
    benchmark::DoNotOptimize(bm25::Index::from_tokens(std::move(keys), docs, bm25::Variant::plus, {}, "bench"));
  }
}
BENCHMARK(BM_Build)->Arg(1000)->Arg(10000);

}  // namespace
