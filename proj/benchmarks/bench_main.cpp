#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "mosaic/alpha.hpp"
#include "mosaic/metrics.hpp"
#include "mosaic/weighting.hpp"

namespace {

std::vector<mosaic::PriceBar> synth_bars(std::size_t n) {
    std::mt19937 rng(12345);
    std::normal_distribution<double> step(0.0, 1.0);
    std::vector<mosaic::PriceBar> bars(n);
    double px = 100.0;
    for (std::size_t i = 0; i < n; ++i) {
        px = std::max(1.0, px + step(rng));
        bars[i].date = mosaic::Date::parse_iso("2014-01-01").plus_days(static_cast<int>(i));
        bars[i].open = px;
        bars[i].high = px + 1;
        bars[i].low = px - 1;
        bars[i].close = px;
        bars[i].adj_close = px;
        bars[i].volume = 1000 + static_cast<std::int64_t>(i);
    }
    return bars;
}

void BM_AlphaEvalCatalog(benchmark::State& state) {
    auto bars = synth_bars(static_cast<std::size_t>(state.range(0)));
    const auto& catalog = mosaic::alpha::builtin_catalog();
    for (auto _ : state) {
        for (const auto& def : catalog)
            benchmark::DoNotOptimize(mosaic::alpha::eval(*def.formula, bars));
    }
    state.SetItemsProcessed(state.iterations() *
                            static_cast<std::int64_t>(bars.size() * catalog.size()));
}
BENCHMARK(BM_AlphaEvalCatalog)->Arg(256)->Arg(1024)->Arg(4096);

void BM_Mcc(benchmark::State& state) {
    std::mt19937 rng(7);
    std::bernoulli_distribution coin(0.5);
    std::vector<int> preds, labels;
    for (int i = 0; i < state.range(0); ++i) {
        preds.push_back(coin(rng));
        labels.push_back(coin(rng));
    }
    for (auto _ : state) {
        auto c = mosaic::metrics::confusion(preds, labels);
        benchmark::DoNotOptimize(mosaic::metrics::mcc(c));
    }
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Mcc)->Arg(1024)->Arg(65536);

void BM_TokenWeights(benchmark::State& state) {
    const int m = static_cast<int>(state.range(0));
    const int dim = 32;
    std::mt19937 rng(99);
    std::normal_distribution<double> g(0.0, 1.0);
    std::vector<mosaic::weighting::Vec> hidden(m, mosaic::weighting::Vec(dim));
    mosaic::weighting::Vec type_emb(dim);
    for (auto& h : hidden)
        for (auto& v : h) v = g(rng);
    for (auto& v : type_emb) v = g(rng);
    for (auto _ : state)
        benchmark::DoNotOptimize(mosaic::weighting::token_weights(hidden, type_emb, 0.5));
    state.SetItemsProcessed(state.iterations() * m);
}
BENCHMARK(BM_TokenWeights)->Arg(16)->Arg(128)->Arg(1024);

}  // namespace

BENCHMARK_MAIN();
