#include <constance/baselines.hpp>
#include <constance/evaluation.hpp>
#include <constance/featurizer.hpp>
#include <constance/simulator.hpp>

#include <benchmark/benchmark.h>

#include <random>

using namespace constance;

namespace {

std::vector<std::string> tweet_corpus(std::size_t n) {
    const std::vector<std::string> words = {"vote", "wall", "jobs", "care", "debate", "tax", "rally",
                                            "her", "him", "great", "again", "#maga", "#imwithher", "the",
                                            "a", "tonight", "@cnn", "fake", "news", "plan"};
    std::mt19937_64 rng(4);
    std::vector<std::string> out;
    for (std::size_t d = 0; d < n; ++d) {
        std::string doc;
        for (std::size_t w = 0, len = 8 + rng() % 16; w < len; ++w) doc += (w ? " " : "") + words[rng() % words.size()];
        out.push_back(doc);
    }
    return out;
}

void BM_BuildVocabulary(benchmark::State& state) {
    const auto corpus = tweet_corpus(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(build_vocabulary(corpus, NgramConfig{}));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_BuildVocabulary)->Arg(562)->Arg(5000)->Unit(benchmark::kMillisecond);

void BM_Featurize(benchmark::State& state) {
    const auto corpus = tweet_corpus(562);
    const auto vocab = build_vocabulary(corpus, NgramConfig{});
    for (auto _ : state)
        for (const auto& doc : corpus) benchmark::DoNotOptimize(featurize(vocab, doc));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(corpus.size()));
}
BENCHMARK(BM_Featurize)->Unit(benchmark::kMillisecond);

void BM_Simulate(benchmark::State& state) {
    const auto spec = random_simulation_spec(RandomSpecOptions{}, 2);
    for (auto _ : state) benchmark::DoNotOptimize(simulate(spec));
}
BENCHMARK(BM_Simulate)->Unit(benchmark::kMillisecond);

void BM_MajorityVoteAll(benchmark::State& state) {
    const auto sim = simulate(random_simulation_spec(RandomSpecOptions{}, 2));
    for (auto _ : state) benchmark::DoNotOptimize(per_context_labels(sim.dataset, std::nullopt));
}
BENCHMARK(BM_MajorityVoteAll)->Unit(benchmark::kMicrosecond);

void BM_Bootstrap(benchmark::State& state) {
    std::mt19937_64 rng(5);
    std::vector<Label> gold(562), a(562), b(562);
    for (std::size_t k = 0; k < gold.size(); ++k) {
        gold[k] = label_from_index(rng() % 3);
        a[k] = rng() % 4 ? gold[k] : label_from_index(rng() % 3);
        b[k] = rng() % 2 ? gold[k] : label_from_index(rng() % 3);
    }
    for (auto _ : state) benchmark::DoNotOptimize(bootstrap_f1_diff(a, b, gold, 1000, 1));
}
BENCHMARK(BM_Bootstrap)->Unit(benchmark::kMillisecond);

void BM_MannWhitney(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::mt19937_64 rng(6);
    std::normal_distribution<double> gauss;
    std::vector<double> x(n), y(n);
    for (auto& v : x) v = gauss(rng);
    for (auto& v : y) v = gauss(rng) + 0.2;
    for (auto _ : state) benchmark::DoNotOptimize(mann_whitney_u(x, y));
}
BENCHMARK(BM_MannWhitney)->Arg(19)->Arg(562)->Unit(benchmark::kMicrosecond);

}  // namespace
