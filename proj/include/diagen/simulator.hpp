// SPDX-License-Identifier: MIT

#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "diagen/core.hpp"
#include "diagen/rng.hpp"

namespace diagen {

/// Synthetic learner population with concept skills that grow on success.
struct SimConfig {
    std::size_t num_learners { 6000 };
    std::size_t num_questions { 50 };
    std::size_t num_concepts { 5 };
    double slip { 0.25 }; // floor on P(correct); acts as a guessing rate
    double growth_mean { 0.4 };
    double growth_std { 0.05 };
    std::uint64_t seed { 0 };

    void validate() const
    {
        if (num_concepts < 1 || num_questions < num_concepts) {
            throw Error("need num_questions >= num_concepts >= 1");
        }
        if (!(slip >= 0.0 && slip < 1.0)) {
            throw Error("slip must lie in [0,1)");
        }
        if (!(growth_std >= 0.0)) {
            throw Error("growth std must be non-negative");
        }
    }
};

struct SimWorld {
    std::vector<std::size_t> question_concept;
    std::vector<double> question_difficulty;
    std::vector<double> question_growth;
    std::vector<std::vector<double>> learner_skill; // initial skills, [learner][concept]
};

struct SimOutput {
    SimWorld world;
    InteractionLog log;
    Snapshot true_snapshot;
};

/// c + (1 - c) / (1 + exp(alpha - beta))
inline double solve_probability(double alpha, double beta, double c)
{
    return c + (1.0 - c) / (1.0 + std::exp(alpha - beta));
}

/// Question parameters come from stream 0 of the seed; learner l draws its
/// skills and responses from stream l + 1, so learners are independent of
/// each other and of evaluation order.
inline SimWorld make_world(const SimConfig& cfg)
{
    cfg.validate();
    SimWorld w;
    Rng rng(derive_seed(cfg.seed, 0));
    w.question_concept.resize(cfg.num_questions);
    for (std::size_t q = 0; q < cfg.num_questions; ++q) {
        w.question_concept[q] = q % cfg.num_concepts;
    }
    rng.shuffle(std::span<std::size_t>(w.question_concept));
    w.question_difficulty.resize(cfg.num_questions);
    for (auto& a : w.question_difficulty) {
        a = rng.normal();
    }
    w.question_growth.resize(cfg.num_questions);
    for (auto& d : w.question_growth) {
        d = rng.normal(cfg.growth_mean, cfg.growth_std);
    }
    return w;
}

inline SimOutput simulate(const SimConfig& cfg)
{
    SimOutput out;
    out.world = make_world(cfg);
    const auto& w = out.world;
    const auto nq = cfg.num_questions;
    const auto nl = cfg.num_learners;

    std::vector<std::string> qids(nq);
    for (std::size_t q = 0; q < nq; ++q) {
        qids[q] = "q" + std::to_string(q);
    }
    std::vector<std::string> lids(nl);
    std::vector<double> truth(nq * nl);
    out.world.learner_skill.resize(nl);
    out.log.records.reserve(nq * nl);

    for (std::size_t l = 0; l < nl; ++l) {
        lids[l] = "l" + std::to_string(l);
        Rng rng(derive_seed(cfg.seed, l + 1));
        std::vector<double> skill(cfg.num_concepts);
        for (auto& b : skill) {
            b = rng.normal();
        }
        out.world.learner_skill[l] = skill;
        for (std::size_t q = 0; q < nq; ++q) {
            const auto concept_id = w.question_concept[q];
            const double p = solve_probability(w.question_difficulty[q], skill[concept_id], cfg.slip);
            const bool correct = rng.bernoulli(p);
            if (correct) {
                skill[concept_id] += w.question_growth[q];
            }
            out.log.records.push_back({ lids[l], qids[q], correct, q });
        }
        for (std::size_t q = 0; q < nq; ++q) {
            truth[q * nl + l] = solve_probability(w.question_difficulty[q], skill[w.question_concept[q]], cfg.slip);
        }
    }
    out.true_snapshot = Snapshot(std::move(qids), std::move(lids), std::move(truth));
    return out;
}

} // namespace diagen
