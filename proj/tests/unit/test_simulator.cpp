#include <constance/errors.hpp>
#include <constance/simulator.hpp>

#include <gtest/gtest.h>

#include "fixtures.hpp"

using namespace constance;
using namespace constance::testing;

namespace {

SimulationSpec base_spec(std::size_t n_items, const TransitionMatrix& gamma,
                         const TransitionMatrix& alpha) {
    SimulationSpec spec;
    spec.n_items = n_items;
    spec.contexts = MatrixSet({"c"}, {gamma});
    spec.annotators = MatrixSet({"a"}, {alpha});
    spec.annotators_per_context = 1;
    spec.feature_model.class_means = {std::vector<double>{-1.0}, std::vector<double>{0.0},
                                      std::vector<double>{1.0}};
    spec.rng_seed = 5;
    return spec;
}

}  // namespace

TEST(Simulate, NoiselessChainCopiesGold) {
    RandomSpecOptions opts;
    opts.n_items = 200;
    auto spec = random_simulation_spec(opts, 1);
    spec.contexts = MatrixSet::filled(spec.contexts.ids(), TransitionMatrix::identity());
    spec.annotators = MatrixSet::filled(spec.annotators.ids(), TransitionMatrix::identity());
    const auto sim = simulate(spec);
    for (const auto& a : sim.dataset.annotations()) {
        const auto& item = sim.dataset.items()[*sim.dataset.item_index(a.item_id)];
        EXPECT_EQ(a.label, *item.gold);
    }
}

TEST(Simulate, FullScaleCounts) {
    const auto sim = simulate(random_simulation_spec(RandomSpecOptions{}, 3));
    EXPECT_EQ(sim.dataset.num_items(), 562u);
    EXPECT_EQ(sim.dataset.contexts().size(), 6u);
    EXPECT_EQ(sim.dataset.annotations().size(), 10116u);
    EXPECT_TRUE(sim.dataset.has_gold());
    EXPECT_EQ(sim.dataset.feature_dim(), 10u);
    const FitView view(sim.dataset);
    for (const auto& item : view.items()) {
        ASSERT_EQ(item.observations.size(), 6u);
        for (const auto& obs : item.observations) EXPECT_EQ(obs.labels.size(), 3u);
    }
}

TEST(Simulate, RoundRobinAnnotatorAssignment) {
    RandomSpecOptions opts;
    opts.n_items = 7;
    opts.n_contexts = 2;
    opts.n_annotators = 5;
    opts.annotators_per_context = 2;
    const auto sim = simulate(random_simulation_spec(opts, 2));
    const auto& ids = sim.true_alpha.ids();
    for (std::size_t k = 0; k < sim.dataset.annotations().size(); ++k)
        EXPECT_EQ(sim.dataset.annotations()[k].annotator_id, ids[k % ids.size()]);
}

TEST(Simulate, UniformContextRowsGiveUniformFrequencies) {
    auto spec = base_spec(10000, TransitionMatrix::uniform(), TransitionMatrix::identity());
    spec.true_label_distribution = {0, 0, 1};
    const auto sim = simulate(spec);
    std::array<double, 3> freq{};
    for (const auto& a : sim.dataset.annotations()) freq[label_index(a.label)] += 1.0;
    for (double f : freq) EXPECT_NEAR(f / 10000.0, 1.0 / 3.0, 0.02);
}

TEST(Simulate, EmpiricalConditionalsConvergeToMatrices) {
    std::mt19937_64 rng(77);
    const auto gamma = random_transition(rng);
    const auto alpha = random_transition(rng);
    for (std::size_t y = 0; y < 3; ++y) {
        auto spec = base_spec(10000, gamma, TransitionMatrix::identity());
        spec.true_label_distribution = {0, 0, 0};
        spec.true_label_distribution[y] = 1.0;
        spec.rng_seed = 100 + y;
        const auto sim = simulate(spec);
        std::array<double, 3> freq{};
        for (const auto& a : sim.dataset.annotations()) freq[label_index(a.label)] += 1.0;
        for (std::size_t s = 0; s < 3; ++s) EXPECT_NEAR(freq[s] / 10000.0, gamma.at(y, s), 0.02);

        auto chain = base_spec(10000, TransitionMatrix::identity(), alpha);
        chain.true_label_distribution = spec.true_label_distribution;
        chain.rng_seed = 200 + y;
        const auto sim2 = simulate(chain);
        std::array<double, 3> rfreq{};
        for (const auto& a : sim2.dataset.annotations()) rfreq[label_index(a.label)] += 1.0;
        for (std::size_t r = 0; r < 3; ++r) EXPECT_NEAR(rfreq[r] / 10000.0, alpha.at(y, r), 0.02);
    }
}

TEST(Simulate, BitReproducible) {
    RandomSpecOptions opts;
    opts.n_items = 100;
    opts.n_holdout_items = 20;
    const auto spec = random_simulation_spec(opts, 42);
    const auto a = simulate(spec);
    const auto b = simulate(spec);
    EXPECT_EQ(a.dataset, b.dataset);
    EXPECT_EQ(a.holdout, b.holdout);
    EXPECT_EQ(a.true_gamma, b.true_gamma);
    EXPECT_EQ(a.holdout.size(), 20u);
    auto other = spec;
    other.rng_seed += 1;
    EXPECT_NE(simulate(other).dataset, a.dataset);
}

TEST(Simulate, SpecValidation) {
    auto spec = base_spec(10, TransitionMatrix::identity(), TransitionMatrix::identity());
    spec.annotators_per_context = 2;
    EXPECT_THROW(simulate(spec), ValidationError);
    spec = base_spec(10, TransitionMatrix::identity(), TransitionMatrix::identity());
    spec.true_label_distribution = {0.5, 0.5, 0.5};
    EXPECT_THROW(simulate(spec), ValidationError);
    spec = base_spec(0, TransitionMatrix::identity(), TransitionMatrix::identity());
    EXPECT_THROW(simulate(spec), ValidationError);
}

TEST(RandomSimulationSpec, MatricesRespectDiagonalRanges) {
    RandomSpecOptions opts;
    const auto spec = random_simulation_spec(opts, 8);
    EXPECT_EQ(spec.contexts.size(), 6u);
    EXPECT_EQ(spec.annotators.size(), 30u);
    for (const auto& m : spec.contexts.matrices())
        for (std::size_t r = 0; r < 3; ++r) {
            EXPECT_GE(m.at(r, r), opts.gamma_diag.first);
            EXPECT_LE(m.at(r, r), opts.gamma_diag.second);
        }
    for (const auto& m : spec.annotators.matrices())
        for (std::size_t r = 0; r < 3; ++r) {
            EXPECT_GE(m.at(r, r), opts.alpha_diag.first);
            EXPECT_LE(m.at(r, r), opts.alpha_diag.second);
        }
}

TEST(RecoveryError, Examples) {
    const MatrixSet ident({"x", "y"}, {TransitionMatrix::identity(), TransitionMatrix::identity()});
    const MatrixSet unif({"x", "y"}, {TransitionMatrix::uniform(), TransitionMatrix::uniform()});
    EXPECT_EQ(recovery_error(ident, ident), 0.0);
    EXPECT_NEAR(recovery_error(ident, unif), 4.0 / 9.0, 1e-15);
    const MatrixSet other({"x", "z"}, {TransitionMatrix::identity(), TransitionMatrix::identity()});
    EXPECT_THROW(recovery_error(ident, other), ValidationError);
    EXPECT_THROW(recovery_error(ident, MatrixSet({"x"}, {TransitionMatrix::identity()})), ValidationError);
    std::mt19937_64 rng(1);
    const MatrixSet a({"x"}, {random_transition(rng)});
    const MatrixSet b({"x"}, {random_transition(rng)});
    const double e = recovery_error(a, b);
    EXPECT_GE(e, 0.0);
    EXPECT_LE(e, 1.0);
}
