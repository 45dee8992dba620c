// SPDX-License-Identifier: MIT

#include <gtest/gtest.h>

#include <cmath>
#include <unordered_map>

#include "diagen/simulator.hpp"

using namespace diagen;

TEST(SolveProbability, KnownValues)
{
    EXPECT_DOUBLE_EQ(solve_probability(0.3, 0.3, 0.0), 0.5);
    EXPECT_DOUBLE_EQ(solve_probability(-1.0, -1.0, 0.25), 0.625);
    // 0.25 + 0.75 / (1 + e^2)
    EXPECT_NEAR(solve_probability(2.0, 0.0, 0.25), 0.3394021915165882, 1e-15);
}

TEST(SolveProbability, RangeIsFloorToOne)
{
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const double a = 6.0 * rng.normal();
        const double b = 6.0 * rng.normal();
        const double c = 0.99 * rng.uniform();
        const double p = solve_probability(a, b, c);
        EXPECT_GE(p, c);
        EXPECT_LE(p, 1.0);
    }
}

TEST(Simulate, TableScale)
{
    SimConfig cfg;
    cfg.seed = 3;
    auto sim = simulate(cfg);
    EXPECT_EQ(sim.log.size(), 300000u);
    EXPECT_EQ(sim.true_snapshot.num_questions(), 50u);
    EXPECT_EQ(sim.true_snapshot.num_learners(), 6000u);
    std::unordered_map<std::string, std::size_t> per_learner;
    for (const auto& r : sim.log.records) {
        ++per_learner[r.learner];
    }
    EXPECT_EQ(per_learner.size(), 6000u);
    for (const auto& [id, n] : per_learner) {
        EXPECT_EQ(n, 50u);
    }
}

TEST(Simulate, QuestionsInIncreasingOrder)
{
    SimConfig cfg;
    cfg.num_learners = 20;
    auto sim = simulate(cfg);
    for (std::size_t i = 0; i < sim.log.size(); ++i) {
        const auto& r = sim.log.records[i];
        EXPECT_EQ(r.order, i % 50);
        EXPECT_EQ(r.question, "q" + std::to_string(i % 50));
        EXPECT_EQ(r.learner, "l" + std::to_string(i / 50));
    }
    EXPECT_NO_THROW(sim.log.validate_order());
}

TEST(Simulate, WorldShapes)
{
    SimConfig cfg;
    cfg.num_learners = 7;
    cfg.num_questions = 12;
    cfg.num_concepts = 4;
    auto sim = simulate(cfg);
    const auto& w = sim.world;
    EXPECT_EQ(w.question_concept.size(), 12u);
    EXPECT_EQ(w.question_difficulty.size(), 12u);
    EXPECT_EQ(w.question_growth.size(), 12u);
    ASSERT_EQ(w.learner_skill.size(), 7u);
    std::vector<int> per_concept(4, 0);
    for (auto c : w.question_concept) {
        ASSERT_LT(c, 4u);
        ++per_concept[c];
    }
    for (int n : per_concept) {
        EXPECT_EQ(n, 3);
    }
    for (const auto& s : w.learner_skill) {
        EXPECT_EQ(s.size(), 4u);
    }
}

TEST(Simulate, ForcedSuccessAccumulatesAllGrowth)
{
    SimConfig cfg;
    cfg.num_learners = 30;
    cfg.slip = 1.0 - 1e-12;
    auto sim = simulate(cfg);
    for (const auto& r : sim.log.records) {
        ASSERT_TRUE(r.correct);
    }
    const auto& w = sim.world;
    for (std::size_t l = 0; l < cfg.num_learners; ++l) {
        auto skill = w.learner_skill[l];
        for (std::size_t q = 0; q < cfg.num_questions; ++q) {
            skill[w.question_concept[q]] += w.question_growth[q];
        }
        for (std::size_t q = 0; q < cfg.num_questions; ++q) {
            EXPECT_DOUBLE_EQ(sim.true_snapshot(q, l), solve_probability(w.question_difficulty[q], skill[w.question_concept[q]], cfg.slip));
        }
    }
}

TEST(Simulate, NoGrowthGivesStaticMatrix)
{
    SimConfig cfg;
    cfg.num_learners = 40;
    cfg.growth_mean = 0.0;
    cfg.growth_std = 0.0;
    auto sim = simulate(cfg);
    const auto& w = sim.world;
    for (std::size_t l = 0; l < cfg.num_learners; ++l) {
        for (std::size_t q = 0; q < cfg.num_questions; ++q) {
            EXPECT_EQ(sim.true_snapshot(q, l),
                solve_probability(w.question_difficulty[q], w.learner_skill[l][w.question_concept[q]], cfg.slip));
        }
    }
}

TEST(Simulate, GrowthNeverLowersTruth)
{
    SimConfig cfg;
    cfg.num_learners = 200;
    cfg.growth_std = 0.0;
    auto sim = simulate(cfg);
    const auto& w = sim.world;
    for (std::size_t l = 0; l < cfg.num_learners; ++l) {
        for (std::size_t q = 0; q < cfg.num_questions; ++q) {
            EXPECT_GE(sim.true_snapshot(q, l),
                solve_probability(w.question_difficulty[q], w.learner_skill[l][w.question_concept[q]], cfg.slip));
        }
    }
}

TEST(Simulate, TruthWithinFloorAndOne)
{
    SimConfig cfg;
    cfg.num_learners = 500;
    cfg.slip = 0.3;
    auto sim = simulate(cfg);
    for (double v : sim.true_snapshot.values()) {
        EXPECT_GE(v, 0.3);
        EXPECT_LE(v, 1.0);
    }
}

TEST(Simulate, Deterministic)
{
    SimConfig cfg;
    cfg.num_learners = 10;
    cfg.seed = 1;
    auto a = simulate(cfg);
    auto b = simulate(cfg);
    EXPECT_EQ(a.log, b.log);
    cfg.seed = 2;
    EXPECT_NE(simulate(cfg).log, a.log);
}

TEST(Simulate, MonteCarloCorrectRate)
{
    SimConfig cfg;
    cfg.num_learners = 100000;
    cfg.num_questions = 1;
    cfg.num_concepts = 1;
    cfg.seed = 12;
    auto sim = simulate(cfg);
    double expected = 0.0;
    double observed = 0.0;
    for (std::size_t l = 0; l < cfg.num_learners; ++l) {
        expected += solve_probability(sim.world.question_difficulty[0], sim.world.learner_skill[l][0], cfg.slip);
        observed += sim.log.records[l].correct ? 1.0 : 0.0;
    }
    EXPECT_NEAR(observed / 1e5, expected / 1e5, 0.01);
}

TEST(Simulate, PerQuestionRateConvergesWithoutGrowth)
{
    SimConfig cfg;
    cfg.num_learners = 10000;
    cfg.growth_mean = 0.0;
    cfg.growth_std = 0.0;
    cfg.seed = 5;
    auto sim = simulate(cfg);
    const auto nq = cfg.num_questions;
    std::vector<double> observed(nq, 0.0);
    for (std::size_t i = 0; i < sim.log.size(); ++i) {
        observed[i % nq] += sim.log.records[i].correct ? 1.0 : 0.0;
    }
    for (std::size_t q = 0; q < nq; ++q) {
        double expected = 0.0;
        for (double v : sim.true_snapshot.row(q)) {
            expected += v;
        }
        EXPECT_NEAR(observed[q] / 10000.0, expected / 10000.0, 0.02) << "question " << q;
    }
}

TEST(SimConfig, Validation)
{
    SimConfig cfg;
    cfg.slip = 1.0;
    EXPECT_THROW(simulate(cfg), Error);
    cfg = {};
    cfg.num_concepts = 0;
    EXPECT_THROW(simulate(cfg), Error);
    cfg = {};
    cfg.num_questions = 3;
    EXPECT_THROW(simulate(cfg), Error);
    cfg = {};
    cfg.growth_std = -1.0;
    EXPECT_THROW(simulate(cfg), Error);
}
