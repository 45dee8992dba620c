// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "diagen/core.hpp"
#include "diagen/criteria.hpp"
#include "diagen/rng.hpp"

namespace diagen {

/// Genetic algorithm settings. Defaults are the Simulated-5 hyperparameters.
struct GaConfig {
    std::size_t k { 10 };
    std::size_t population_size { 1000 };
    std::size_t generations { 5 };
    double crossover_prob { 0.75 };
    double individual_mutation_prob { 0.5 };
    double gene_mutation_prob { 0.25 };
    double tournament_fraction { 0.10 };
    std::uint64_t seed { 0 };
    bool track_best_ever { false };

    void validate(std::size_t pool_size) const
    {
        auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
        if (k == 0 || k > pool_size) {
            throw Error("k must lie in [1, " + std::to_string(pool_size) + "], got " + std::to_string(k));
        }
        if (population_size < 2) {
            throw Error("population size must be at least 2");
        }
        if (generations < 1) {
            throw Error("generations must be at least 1");
        }
        if (!prob(crossover_prob) || !prob(individual_mutation_prob) || !prob(gene_mutation_prob)) {
            throw Error("GA probabilities must lie in [0,1]");
        }
        if (!(tournament_fraction > 0.0 && tournament_fraction <= 1.0)) {
            throw Error("tournament fraction must lie in (0,1]");
        }
    }
};

struct GenerationStats {
    std::size_t generation; // 0 is the initial population
    double best;
    double mean;
};

struct SearchResult {
    Assessment best;
    FitnessReport report;
    std::vector<GenerationStats> history;
    std::size_t evaluations { 0 };
};

namespace detail {

    inline void check_k(const CriteriaContext& ctx, std::size_t k)
    {
        if (k == 0 || k > ctx.num_questions()) {
            throw Error("k must lie in [1, " + std::to_string(ctx.num_questions()) + "], got " + std::to_string(k));
        }
    }

    /// Uniform question outside `present`; `absent` is how many are outside.
    inline std::size_t draw_absent(const std::vector<char>& present, std::size_t absent, Rng& rng)
    {
        auto target = rng.index(absent);
        for (std::size_t q = 0; q < present.size(); ++q) {
            if (!present[q]) {
                if (target == 0) {
                    return q;
                }
                --target;
            }
        }
        throw Error("draw_absent: inconsistent presence mask");
    }

    /// Replaces genes at positions >= cut that repeat a gene before them.
    inline void repair_tail(Assessment& child, std::size_t cut, std::size_t pool_size, Rng& rng)
    {
        std::vector<char> present(pool_size, 0);
        std::size_t distinct = 0;
        for (auto g : child.genes) {
            if (!present[g]) {
                present[g] = 1;
                ++distinct;
            }
        }
        std::vector<char> head(pool_size, 0);
        for (std::size_t i = 0; i < cut; ++i) {
            head[child.genes[i]] = 1;
        }
        for (std::size_t i = cut; i < child.genes.size(); ++i) {
            if (head[child.genes[i]]) {
                const auto q = draw_absent(present, pool_size - distinct, rng);
                present[q] = 1;
                ++distinct;
                child.genes[i] = q;
            }
        }
    }

} // namespace detail

/// One uniform K-subset without replacement.
inline SearchResult random_search(const CriteriaContext& ctx, std::size_t k, std::uint64_t seed)
{
    detail::check_k(ctx, k);
    Rng rng(seed);
    SearchResult out;
    out.best.genes = rng.sample(ctx.num_questions(), k);
    out.report = fitness(ctx, out.best);
    out.evaluations = 1;
    return out;
}

/// Adds one question at a time, each time the non-member maximizing C(S + q).
/// Exact ties go to the lower question index.
inline SearchResult greedy_search(const CriteriaContext& ctx, std::size_t k)
{
    detail::check_k(ctx, k);
    const auto n = ctx.num_learners();
    std::vector<double> sums(n, 0.0);
    std::vector<double> means(n);
    std::vector<char> chosen(ctx.num_questions(), 0);

    SearchResult out;
    for (std::size_t step = 0; step < k; ++step) {
        const double size = static_cast<double>(step + 1);
        std::size_t best_q = ctx.num_questions();
        FitnessReport best_report;
        for (std::size_t q = 0; q < ctx.num_questions(); ++q) {
            if (chosen[q]) {
                continue;
            }
            auto r = ctx.row(q);
            for (std::size_t j = 0; j < n; ++j) {
                means[j] = (sums[j] + r[j]) / size;
            }
            const auto report = detail::report_from_means(ctx, means);
            ++out.evaluations;
            if (best_q == ctx.num_questions() || report.fitness > best_report.fitness) {
                best_q = q;
                best_report = report;
            }
        }
        chosen[best_q] = 1;
        out.best.genes.push_back(best_q);
        auto r = ctx.row(best_q);
        for (std::size_t j = 0; j < n; ++j) {
            sums[j] += r[j];
        }
    }
    out.report = fitness(ctx, out.best);
    return out;
}

inline double binomial(std::size_t n, std::size_t k)
{
    if (k > n) {
        return 0.0;
    }
    k = std::min(k, n - k);
    double c = 1.0;
    for (std::size_t i = 1; i <= k; ++i) {
        c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
    }
    return std::round(c);
}

/// Exhaustive argmax over all K-subsets, enumerated in lexicographic order so
/// exact ties resolve to the lexicographically smallest gene list.
inline SearchResult brute_force(const CriteriaContext& ctx, std::size_t k, double max_combinations = 1e7)
{
    detail::check_k(ctx, k);
    const auto n = ctx.num_questions();
    if (binomial(n, k) > max_combinations) {
        throw Error("instance too large for exhaustive search");
    }
    std::vector<std::size_t> genes(k);
    std::iota(genes.begin(), genes.end(), std::size_t { 0 });
    SearchResult out;
    bool first = true;
    while (true) {
        const auto report = fitness(ctx, genes);
        ++out.evaluations;
        if (first || report.fitness > out.report.fitness) {
            out.best.genes = genes;
            out.report = report;
            first = false;
        }
        // next combination
        std::size_t i = k;
        while (i > 0 && genes[i - 1] == n - k + (i - 1)) {
            --i;
        }
        if (i == 0) {
            break;
        }
        ++genes[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            genes[j] = genes[j - 1] + 1;
        }
    }
    return out;
}

/// Mean fitness over every K-subset (the expected fitness of random_search).
inline double exhaustive_mean_fitness(const CriteriaContext& ctx, std::size_t k, double max_combinations = 1e7)
{
    detail::check_k(ctx, k);
    const auto n = ctx.num_questions();
    if (binomial(n, k) > max_combinations) {
        throw Error("instance too large for exhaustive search");
    }
    std::vector<std::size_t> genes(k);
    std::iota(genes.begin(), genes.end(), std::size_t { 0 });
    double total = 0.0;
    std::size_t count = 0;
    while (true) {
        total += fitness(ctx, genes).fitness;
        ++count;
        std::size_t i = k;
        while (i > 0 && genes[i - 1] == n - k + (i - 1)) {
            --i;
        }
        if (i == 0) {
            break;
        }
        ++genes[i - 1];
        for (std::size_t j = i; j < k; ++j) {
            genes[j] = genes[j - 1] + 1;
        }
    }
    return total / static_cast<double>(count);
}

namespace ga {

    inline std::size_t tournament_size(std::size_t population, double fraction)
    {
        const auto t = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(population)));
        return std::clamp<std::size_t>(t, 1, population);
    }

    /// P tournaments. Each draws tournament_size(P) distinct members (a partial
    /// Fisher-Yates pass over a permutation carried across tournaments) and
    /// keeps the fittest; exact ties go to the lower population index.
    inline std::vector<Assessment> select(std::span<const Assessment> population, std::span<const double> fitnesses,
        double tournament_fraction, Rng& rng)
    {
        const auto p = population.size();
        const auto t = tournament_size(p, tournament_fraction);
        std::vector<std::size_t> perm(p);
        std::iota(perm.begin(), perm.end(), std::size_t { 0 });
        std::vector<Assessment> next;
        next.reserve(p);
        for (std::size_t round = 0; round < p; ++round) {
            std::size_t winner = p;
            for (std::size_t i = 0; i < t; ++i) {
                std::swap(perm[i], perm[i + rng.index(p - i)]);
                const auto c = perm[i];
                if (winner == p || fitnesses[c] > fitnesses[winner] || (fitnesses[c] == fitnesses[winner] && c < winner)) {
                    winner = c;
                }
            }
            next.push_back(population[winner]);
        }
        return next;
    }

    /// Swaps the tails after `cut` (1 <= cut < K) and repairs both children.
    inline void crossover_at(Assessment& a, Assessment& b, std::size_t cut, std::size_t pool_size, Rng& rng)
    {
        const auto k = a.genes.size();
        if (k != b.genes.size() || cut == 0 || cut >= k) {
            throw Error("invalid crossover cut");
        }
        for (std::size_t i = cut; i < k; ++i) {
            std::swap(a.genes[i], b.genes[i]);
        }
        detail::repair_tail(a, cut, pool_size, rng);
        detail::repair_tail(b, cut, pool_size, rng);
    }

    /// Single-point crossover with probability p_c. Returns whether it fired.
    /// K = 1 has no cut point and consumes no randomness.
    inline bool crossover(Assessment& a, Assessment& b, double p_c, std::size_t pool_size, Rng& rng)
    {
        const auto k = a.genes.size();
        if (k < 2) {
            return false;
        }
        if (!rng.bernoulli(p_c)) {
            return false;
        }
        const auto cut = 1 + rng.index(k - 1);
        crossover_at(a, b, cut, pool_size, rng);
        return true;
    }

    /// With probability p_m1 the individual is mutated: each gene in turn is,
    /// with probability p_m2, replaced by a question not currently in it.
    /// Returns the number of replaced genes.
    inline std::size_t mutate(Assessment& s, double p_m1, double p_m2, std::size_t pool_size, Rng& rng)
    {
        if (!rng.bernoulli(p_m1)) {
            return 0;
        }
        std::vector<char> present(pool_size, 0);
        for (auto g : s.genes) {
            present[g] = 1;
        }
        const auto absent = pool_size - s.genes.size();
        std::size_t replaced = 0;
        for (auto& g : s.genes) {
            if (!rng.bernoulli(p_m2) || absent == 0) {
                continue;
            }
            const auto q = detail::draw_absent(present, absent, rng);
            present[g] = 0;
            present[q] = 1;
            g = q;
            ++replaced;
        }
        return replaced;
    }

} // namespace ga

/// Production, then N_g rounds of selection, pairwise crossover and mutation.
/// Returns the fittest member of the final population, or with
/// track_best_ever the fittest individual evaluated at any point.
inline SearchResult ga_search(const CriteriaContext& ctx, const GaConfig& cfg)
{
    cfg.validate(ctx.num_questions());
    const auto pool = ctx.num_questions();
    const auto p = cfg.population_size;
    Rng rng(cfg.seed);

    std::vector<Assessment> population(p);
    for (auto& s : population) {
        s.genes = rng.sample(pool, cfg.k);
    }

    SearchResult out;
    std::vector<double> fit(p);
    std::vector<FitnessReport> reports(p);
    bool have_best = false;

    auto evaluate = [&](std::size_t generation) {
        double sum = 0.0;
        std::size_t best = 0;
        for (std::size_t i = 0; i < p; ++i) {
            reports[i] = fitness(ctx, population[i]);
            fit[i] = reports[i].fitness;
            sum += fit[i];
            if (fit[i] > fit[best]) {
                best = i;
            }
        }
        out.evaluations += p;
        out.history.push_back({ generation, fit[best], sum / static_cast<double>(p) });
        if (!cfg.track_best_ever || !have_best || fit[best] > out.report.fitness) {
            out.best = population[best];
            out.report = reports[best];
            have_best = true;
        }
    };

    evaluate(0);
    for (std::size_t gen = 1; gen <= cfg.generations; ++gen) {
        population = ga::select(population, fit, cfg.tournament_fraction, rng);
        for (std::size_t i = 0; i + 1 < p; i += 2) {
            ga::crossover(population[i], population[i + 1], cfg.crossover_prob, pool, rng);
        }
        for (auto& s : population) {
            ga::mutate(s, cfg.individual_mutation_prob, cfg.gene_mutation_prob, pool, rng);
        }
        evaluate(gen);
    }
    return out;
}

} // namespace diagen
