// SPDX-License-Identifier: MIT

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "diagen/core.hpp"
#include "diagen/rng.hpp"
#include "diagen/simulator.hpp"

using namespace diagen;

namespace {

InteractionLog log_of(std::initializer_list<std::pair<const char*, const char*>> pairs)
{
    InteractionLog log;
    std::uint64_t order = 0;
    for (auto [l, q] : pairs) {
        log.records.push_back({ l, q, true, order++ });
    }
    return log;
}

} // namespace

TEST(Rng, EngineMatchesStandardSequence)
{
    // The standard pins the 10000th output of a default-seeded mt19937_64.
    Rng rng(5489u);
    std::uint64_t x = 0;
    for (int i = 0; i < 10000; ++i) {
        x = rng.next();
    }
    EXPECT_EQ(x, 9981545732273789042ULL);
}

TEST(Rng, DrawsStayInRange)
{
    Rng rng(11);
    for (std::size_t n : { 1u, 2u, 3u, 7u, 1000u }) {
        for (int i = 0; i < 2000; ++i) {
            EXPECT_LT(rng.index(n), n);
        }
    }
    for (int i = 0; i < 10000; ++i) {
        const double u = rng.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
    }
}

TEST(Rng, SampleIsDistinct)
{
    Rng rng(3);
    for (int trial = 0; trial < 200; ++trial) {
        auto s = rng.sample(20, 7);
        std::set<std::size_t> uniq(s.begin(), s.end());
        EXPECT_EQ(uniq.size(), 7u);
        EXPECT_LT(*uniq.rbegin(), 20u);
    }
}

TEST(Rng, NormalMoments)
{
    Rng rng(17);
    const int n = 200000;
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        sum += z;
        sq += z * z;
    }
    const double mean = sum / n;
    EXPECT_NEAR(mean, 0.0, 0.01);
    EXPECT_NEAR(sq / n - mean * mean, 1.0, 0.02);
}

TEST(Rng, DerivedSeedsDiffer)
{
    std::set<std::uint64_t> seeds;
    for (std::uint64_t s = 0; s < 100; ++s) {
        seeds.insert(derive_seed(42, s));
    }
    EXPECT_EQ(seeds.size(), 100u);
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Pool, FirstAppearanceOrder)
{
    auto pool = build_pool(log_of({ { "x", "b" }, { "x", "a" }, { "y", "b" } }));
    ASSERT_EQ(pool.questions.size(), 2u);
    EXPECT_EQ(pool.questions.index("b"), 0u);
    EXPECT_EQ(pool.questions.index("a"), 1u);
    EXPECT_EQ(pool.questions.id(1), "a");
    EXPECT_EQ(pool.learners.size(), 2u);
}

TEST(Pool, SingleRecord)
{
    auto pool = build_pool(log_of({ { "l", "q" } }));
    EXPECT_EQ(pool.questions.size(), 1u);
    EXPECT_EQ(pool.learners.size(), 1u);
}

TEST(Pool, EmptyLogRejected)
{
    try {
        build_pool(InteractionLog {});
        FAIL() << "expected error";
    } catch (const Error& e) {
        EXPECT_STREQ(e.what(), "empty interaction log");
    }
}

TEST(Pool, Idempotent)
{
    const auto log = log_of({ { "u1", "q9" }, { "u2", "q3" }, { "u1", "q3" } });
    auto a = build_pool(log);
    auto b = build_pool(log);
    EXPECT_EQ(a.questions, b.questions);
    EXPECT_EQ(a.learners, b.learners);
}

TEST(Pool, SimulatedScale)
{
    SimConfig cfg;
    cfg.seed = 1;
    const auto sim = simulate(cfg);
    ASSERT_EQ(sim.log.size(), 300000u);
    auto pool = build_pool(sim.log);
    EXPECT_EQ(pool.questions.size(), 50u);
    EXPECT_EQ(pool.learners.size(), 6000u);
}

TEST(IdMap, RejectsDuplicatesAndUnknown)
{
    EXPECT_THROW(IdMap({ "a", "a" }), Error);
    IdMap m({ "a", "b" });
    EXPECT_THROW(m.index("c"), Error);
}

TEST(Split, Cardinality)
{
    auto s = split_learners(10, 0.8, 7);
    EXPECT_EQ(s.train.size(), 8u);
    EXPECT_EQ(s.test.size(), 2u);
    std::vector<std::size_t> all;
    std::set_union(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(all));
    EXPECT_EQ(all.size(), 10u);
    std::vector<std::size_t> both;
    std::set_intersection(s.train.begin(), s.train.end(), s.test.begin(), s.test.end(), std::back_inserter(both));
    EXPECT_TRUE(both.empty());
}

TEST(Split, Deterministic)
{
    EXPECT_EQ(split_learners(10, 0.8, 7), split_learners(10, 0.8, 7));
    EXPECT_NE(split_learners(100, 0.8, 7).train, split_learners(100, 0.8, 8).train);
}

TEST(Split, LargeCardinality)
{
    // round(0.9 * 6000) = 5400
    auto s = split_learners(6000, 0.9, 1);
    EXPECT_EQ(s.train.size(), 5400u);
    EXPECT_EQ(s.test.size(), 600u);
}

TEST(Split, DependsOnlyOnLearnerSet)
{
    std::vector<std::size_t> a { 4, 1, 9, 3, 7 };
    std::vector<std::size_t> b { 9, 7, 4, 3, 1 };
    EXPECT_EQ(split_learners(a, 0.6, 5), split_learners(b, 0.6, 5));
}

TEST(Split, KeepsOneOnEachSide)
{
    auto lo = split_learners(2, 0.01, 1);
    EXPECT_EQ(lo.train.size(), 1u);
    auto hi = split_learners(3, 0.99, 1);
    EXPECT_EQ(hi.test.size(), 1u);
}

TEST(Split, Errors)
{
    EXPECT_THROW(split_learners(1, 0.5, 0), Error);
    EXPECT_THROW(split_learners(10, 0.0, 0), Error);
    EXPECT_THROW(split_learners(10, 1.0, 0), Error);
}

TEST(Snapshot, ValidatesValues)
{
    EXPECT_THROW(Snapshot::with_default_ids(1, 2, { 0.5, 1.5 }), Error);
    EXPECT_THROW(Snapshot::with_default_ids(1, 2, { 0.5, -0.1 }), Error);
    EXPECT_THROW(Snapshot::with_default_ids(1, 2, { 0.5, std::numeric_limits<double>::quiet_NaN() }), Error);
    EXPECT_THROW(Snapshot::with_default_ids(2, 2, { 0.5, 0.5, 0.5 }), Error);
    auto s = Snapshot::with_default_ids(2, 2, { 0.0, 1.0, 0.25, 0.75 });
    EXPECT_EQ(s(1, 0), 0.25);
    EXPECT_EQ(s.question_ids()[1], "q1");
    EXPECT_EQ(s.learner_ids()[0], "l0");
}

TEST(Snapshot, LearnerMeansAndSelection)
{
    auto s = Snapshot::with_default_ids(2, 3, { 0.0, 0.5, 1.0, 1.0, 0.5, 0.0 });
    auto m = s.learner_means();
    EXPECT_DOUBLE_EQ(m[0], 0.5);
    EXPECT_DOUBLE_EQ(m[1], 0.5);
    std::vector<std::size_t> cols { 2, 0 };
    auto sub = s.select_learners(cols);
    EXPECT_EQ(sub.learner_ids(), (std::vector<std::string> { "l2", "l0" }));
    EXPECT_EQ(sub(0, 0), 1.0);
    EXPECT_EQ(sub(1, 1), 1.0);
}

TEST(Assessment, Validity)
{
    EXPECT_TRUE((Assessment { { 0, 2, 1 } }).is_valid(3));
    EXPECT_FALSE((Assessment { { 0, 0 } }).is_valid(3));
    EXPECT_FALSE((Assessment { { 3 } }).is_valid(3));
    EXPECT_THROW((Assessment { { 1, 1 } }).validate(3), Error);
}

TEST(InteractionLog, OrderValidation)
{
    InteractionLog ok { { { "a", "q", true, 0 }, { "b", "q", true, 0 }, { "a", "r", false, 3 } } };
    EXPECT_NO_THROW(ok.validate_order());
    InteractionLog bad { { { "a", "q", true, 2 }, { "a", "r", false, 2 } } };
    EXPECT_THROW(bad.validate_order(), Error);
}
