#include <benchmark/benchmark.h>

#include "xlel/tokenizer.hpp"

namespace {

const char* kMixed =
    "Die Schwimmeuropameisterschaften 2010 fanden in Budapest statt. "
    "2010年ヨーロッパ水泳選手権は ブダペストで開催された。 "
    "Чемпионат Европы по водным видам спорта 2010 года. "
    "Le championnat d'Europe de natation 2010 s'est tenu à Budapest.";

void BM_Tokenize(benchmark::State& state) {
  const xlel::bm25::Tokenizer tok;
  std::size_t bytes = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(tok.tokenize(kMixed));
    bytes += std::char_traits<char>::length(kMixed);
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(bytes));
}
BENCHMARK(BM_Tokenize);

}  // namespace
BENCHMARK_MAIN();
