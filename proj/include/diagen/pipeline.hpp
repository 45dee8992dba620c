// SPDX-License-Identifier: MIT

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diagen/core.hpp"
#include "diagen/criteria.hpp"
#include "diagen/io.hpp"
#include "diagen/rng.hpp"
#include "diagen/search.hpp"
#include "diagen/stats.hpp"

namespace diagen {

enum class Algorithm { random, greedy, ga, brute };

inline std::string_view algorithm_name(Algorithm a)
{
    switch (a) {
    case Algorithm::random:
        return "random";
    case Algorithm::greedy:
        return "greedy";
    case Algorithm::ga:
        return "ga";
    case Algorithm::brute:
        return "brute";
    }
    return "unknown";
}

inline Algorithm parse_algorithm(std::string_view name)
{
    for (auto a : { Algorithm::random, Algorithm::greedy, Algorithm::ga, Algorithm::brute }) {
        if (algorithm_name(a) == name) {
            return a;
        }
    }
    throw Error("unknown algorithm '" + std::string(name) + "' (expected random, greedy, ga or brute)");
}

/// Everything needed to reproduce a search run from a snapshot.
///
/// Seeds are derived from `seed`: the learner split uses `seed` itself,
/// lambda calibration uses derive_seed(seed, 1) and repeat r searches with
/// derive_seed(seed, 100 + r).
struct SearchSettings {
    Algorithm algorithm { Algorithm::ga };
    GaConfig ga {}; // k lives here for every algorithm; ga.seed is overwritten per repeat
    double split_ratio { 0.8 };
    std::size_t lambda_samples { 10'000 };
    std::optional<double> lambda; // fixed lambda instead of calibrating
    std::uint64_t seed { 0 };
    std::size_t repeats { 1 };
};

inline std::uint64_t lambda_seed(std::uint64_t seed) { return derive_seed(seed, 1); }
inline std::uint64_t repeat_seed(std::uint64_t seed, std::size_t r) { return derive_seed(seed, 100 + r); }

struct RunOutcome {
    std::uint64_t seed { 0 };
    SearchResult result;
    FitnessReport train;
    FitnessReport test;
};

struct SearchRun {
    LearnerSplit split;
    LambdaCalibration calibration {};
    std::vector<RunOutcome> runs;
};

/// One search on the training context, scored on both contexts.
inline RunOutcome run_algorithm(const CriteriaContext& train, const CriteriaContext& test, const SearchSettings& settings, std::uint64_t seed)
{
    RunOutcome out;
    out.seed = seed;
    const auto k = settings.ga.k;
    switch (settings.algorithm) {
    case Algorithm::random:
        out.result = random_search(train, k, seed);
        break;
    case Algorithm::greedy:
        out.result = greedy_search(train, k);
        break;
    case Algorithm::brute:
        out.result = brute_force(train, k);
        break;
    case Algorithm::ga: {
        auto cfg = settings.ga;
        cfg.seed = seed;
        out.result = ga_search(train, cfg);
        break;
    }
    }
    out.train = out.result.report;
    out.test = fitness(test, out.result.best);
    return out;
}

/// Split learners, calibrate lambda on the training learners, search on them
/// and report the chosen assessment on the held-out learners. Test columns
/// never reach calibration or search.
inline SearchRun run_search(const Snapshot& snapshot, const SearchSettings& settings, std::optional<LearnerSplit> split = std::nullopt)
{
    if (settings.repeats < 1) {
        throw Error("repeats must be at least 1");
    }
    SearchRun run;
    run.split = split ? *split : split_learners(snapshot.num_learners(), settings.split_ratio, settings.seed);
    if (run.split.train.empty() || run.split.test.empty()) {
        throw Error("split needs learners on both sides");
    }
    CriteriaContext train(snapshot, run.split.train);
    if (settings.ga.k == 0 || settings.ga.k > snapshot.num_questions()) {
        throw Error("k must lie in [1, " + std::to_string(snapshot.num_questions()) + "], got " + std::to_string(settings.ga.k));
    }
    if (settings.lambda) {
        run.calibration = { *settings.lambda, 0.0, 0.0, 0 };
    } else {
        run.calibration = calibrate_lambda_detail(train, settings.ga.k, settings.lambda_samples, lambda_seed(settings.seed));
    }
    train = train.with_lambda(run.calibration.lambda);
    const CriteriaContext test(snapshot, run.split.test, run.calibration.lambda);
    for (std::size_t r = 0; r < settings.repeats; ++r) {
        run.runs.push_back(run_algorithm(train, test, settings, repeat_seed(settings.seed, r)));
    }
    return run;
}

struct Evaluation {
    FitnessReport train;
    FitnessReport test;
};

/// Scores a fixed assessment on both halves of a split with one lambda.
inline Evaluation evaluate_assessment(const Snapshot& snapshot, const LearnerSplit& split, const Assessment& s, double lambda)
{
    s.validate(snapshot.num_questions());
    return { fitness(CriteriaContext(snapshot, split.train, lambda), s), fitness(CriteriaContext(snapshot, split.test, lambda), s) };
}

inline std::vector<std::string> question_names(const Snapshot& snapshot, const Assessment& s)
{
    std::vector<std::string> names;
    names.reserve(s.genes.size());
    for (auto g : s.genes) {
        names.push_back(snapshot.question_ids().at(g));
    }
    return names;
}

inline Assessment assessment_from_names(const Snapshot& snapshot, const std::vector<std::string>& names)
{
    const IdMap ids(snapshot.question_ids());
    Assessment s;
    for (const auto& n : names) {
        s.genes.push_back(ids.index(n));
    }
    s.validate(snapshot.num_questions());
    return s;
}

/// JSON block for one search: selected questions, train/test reports,
/// per-generation history and evaluation count.
inline io::json run_to_json(const Snapshot& snapshot, const RunOutcome& run)
{
    io::json j;
    j["seed"] = run.seed;
    j["questions"] = question_names(snapshot, run.result.best);
    j["genes"] = run.result.best.genes;
    j["train"] = io::report_to_json(run.train);
    j["test"] = io::report_to_json(run.test);
    j["history"] = io::json::array();
    for (const auto& h : run.result.history) {
        j["history"].push_back({ { "generation", h.generation }, { "best", h.best }, { "mean", h.mean } });
    }
    j["evaluations"] = run.result.evaluations;
    return j;
}

inline io::json summarize_metric(const std::vector<double>& xs)
{
    return { { "mean", stats::mean(xs) }, { "std", stats::stddev(xs) } };
}

/// Full result document (schema_version 1). `config` is embedded verbatim so
/// the run can be reproduced from the file alone.
inline io::json search_report(const Snapshot& snapshot, const SearchSettings& settings, const SearchRun& run, const io::json& config)
{
    io::json j;
    j["schema_version"] = 1;
    j["algorithm"] = algorithm_name(settings.algorithm);
    j["config"] = config;
    j["lambda"] = run.calibration.lambda;
    j["calibration"] = { { "lambda", run.calibration.lambda }, { "mean_c1", run.calibration.mean_c1 },
        { "mean_c2", run.calibration.mean_c2 }, { "samples", run.calibration.samples },
        { "seed", settings.lambda ? io::json(nullptr) : io::json(lambda_seed(settings.seed)) } };
    j["split"] = io::split_to_json(run.split, snapshot.learner_ids());
    j["runs"] = io::json::array();
    for (const auto& r : run.runs) {
        j["runs"].push_back(run_to_json(snapshot, r));
    }
    io::json summary;
    for (const char* side : { "train", "test" }) {
        std::vector<double> rmse, std, fit;
        for (const auto& r : run.runs) {
            const auto& rep = std::string_view(side) == "train" ? r.train : r.test;
            rmse.push_back(rep.c1);
            std.push_back(rep.c2);
            fit.push_back(rep.fitness);
        }
        summary[side] = { { "rmse", summarize_metric(rmse) }, { "std", summarize_metric(std) }, { "fitness", summarize_metric(fit) } };
    }
    j["summary"] = summary;
    return j;
}

} // namespace diagen
