#include <constance/classifier.hpp>
#include <constance/em.hpp>
#include <constance/simulator.hpp>

#include <benchmark/benchmark.h>

using namespace constance;

namespace {

SimulationResult full_scale(std::size_t contexts) {
    RandomSpecOptions opts;
    opts.n_contexts = contexts;
    return simulate(random_simulation_spec(opts, 1));
}

void BM_EStep(benchmark::State& state) {
    const auto sim = full_scale(static_cast<std::size_t>(state.range(0)));
    const FitView view(sim.dataset);
    const auto priors = cold_start_priors(view, kDefaultLabelPrior);
    const auto gamma = MatrixSet::filled(view.context_ids(), init_transition(0.8));
    const auto alpha = MatrixSet::filled(view.annotator_ids(), init_transition(0.8));
    for (auto _ : state) benchmark::DoNotOptimize(e_step(view, priors, gamma, alpha));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(view.items().size()));
}
BENCHMARK(BM_EStep)->Arg(2)->Arg(4)->Arg(6)->Unit(benchmark::kMillisecond);

void BM_LogLikelihood(benchmark::State& state) {
    const auto sim = full_scale(6);
    const FitView view(sim.dataset);
    const auto priors = cold_start_priors(view, kDefaultLabelPrior);
    const auto gamma = MatrixSet::filled(view.context_ids(), init_transition(0.8));
    const auto alpha = MatrixSet::filled(view.annotator_ids(), init_transition(0.8));
    for (auto _ : state) benchmark::DoNotOptimize(incomplete_data_log_likelihood(view, priors, gamma, alpha));
}
BENCHMARK(BM_LogLikelihood)->Unit(benchmark::kMillisecond);

void BM_MSteps(benchmark::State& state) {
    const auto sim = full_scale(6);
    const FitView view(sim.dataset);
    const auto priors = cold_start_priors(view, kDefaultLabelPrior);
    const auto init = init_transition(0.8);
    const auto post = e_step(view, priors, MatrixSet::filled(view.context_ids(), init),
                             MatrixSet::filled(view.annotator_ids(), init));
    for (auto _ : state) {
        benchmark::DoNotOptimize(m_step_gamma(view, post, 1e-6));
        benchmark::DoNotOptimize(m_step_alpha(view, post, 1e-6));
    }
}
BENCHMARK(BM_MSteps)->Unit(benchmark::kMillisecond);

void BM_TrainSoftmax(benchmark::State& state) {
    const auto sim = full_scale(6);
    const FitView view(sim.dataset);
    std::vector<LabelDist> marginals;
    for (const auto& p : cold_start_priors(view, kDefaultLabelPrior)) marginals.push_back(p);
    const auto train = build_train_set(view, sample_training_labels(marginals, 10, 3));
    for (auto _ : state) benchmark::DoNotOptimize(train_softmax(train, SoftmaxOptions{}, 0));
}
BENCHMARK(BM_TrainSoftmax)->Unit(benchmark::kMillisecond);

void BM_FitFullScale(benchmark::State& state) {
    const auto sim = full_scale(6);
    const FitView view(sim.dataset);
    FitConfig config;
    config.overrelaxation = state.range(0) != 0;
    for (auto _ : state) {
        const auto result = fit(view, SoftmaxTrainer{}, config);
        state.counters["iterations"] = static_cast<double>(result.iterations);
    }
}
BENCHMARK(BM_FitFullScale)->Arg(0)->Arg(1)->Unit(benchmark::kSecond)->Iterations(1);

}  // namespace
