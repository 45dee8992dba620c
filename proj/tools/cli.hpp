// SPDX-License-Identifier: MIT

// Command-line front end. Kept in a header so the test suites can drive the
// exact same entry point as the `diagen` binary.

#pragma once

#include <chrono>
#include <ctime>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diagen/diagen.hpp"

namespace diagen::cli {

using nlohmann::json;

struct SimulateConfig {
    std::size_t learners { 6000 };
    std::size_t questions { 50 };
    std::size_t concepts { 5 };
    double slip { 0.25 };
    double growth_mean { 0.4 };
    double growth_std { 0.05 };
    std::uint64_t seed { 0 };
    std::string interactions { "interactions.csv" };
    std::string truth { "truth.csv" };
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SimulateConfig, learners, questions, concepts, slip, growth_mean, growth_std, seed, interactions, truth)

struct EstimateConfig {
    std::string interactions;
    std::string out { "snapshot.csv" };
    std::string estimator { "rasch" };
    double ratio { 0.8 };
    std::uint64_t seed { 0 };
    double smoothing { 1.0 };
    double reg { 1e-4 };
    double learning_rate { 0.1 };
    std::size_t max_epochs { 500 };
    double tol { 1e-6 };
    std::size_t max_learners { 0 }; // 0 keeps every learner
    std::string truth;             // optional true snapshot for correlation
    std::string split_out;         // optional split JSON
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EstimateConfig, interactions, out, estimator, ratio, seed, smoothing, reg, learning_rate, max_epochs,
    tol, max_learners, truth, split_out)

struct CalibrateConfig {
    std::string snapshot;
    std::size_t k { 10 };
    std::size_t samples { 10'000 };
    double ratio { 0.8 };
    std::uint64_t seed { 0 };
    std::string split; // optional split JSON
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(CalibrateConfig, snapshot, k, samples, ratio, seed, split)

struct SearchConfig {
    std::string snapshot;
    std::string algo { "ga" };
    std::size_t k { 10 };
    std::size_t population { 1000 };
    std::size_t generations { 5 };
    double pc { 0.75 };
    double pm1 { 0.5 };
    double pm2 { 0.25 };
    double tournament_fraction { 0.10 };
    bool track_best_ever { false };
    double ratio { 0.8 };
    std::uint64_t seed { 0 };
    std::size_t lambda_samples { 10'000 };
    double lambda { -1.0 }; // negative: calibrate on training learners
    std::size_t repeats { 1 };
    std::string split; // optional split JSON
    std::string out { "result.json" };
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SearchConfig, snapshot, algo, k, population, generations, pc, pm1, pm2, tournament_fraction,
    track_best_ever, ratio, seed, lambda_samples, lambda, repeats, split, out)

struct SufficiencyConfig {
    std::string snapshot;
    std::size_t step { 100 };
    double epsilon { 1e-4 };
    std::size_t window { 3 };
    std::uint64_t seed { 0 };
    std::string out { "sufficiency.csv" };
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SufficiencyConfig, snapshot, step, epsilon, window, seed, out)

struct EvaluateConfig {
    std::string snapshot;
    std::string questions; // comma-separated external ids
    std::string result;    // or: take the questions of runs[0] in a result file
    std::string split;
    double ratio { 0.8 };
    std::uint64_t seed { 0 };
    double lambda { -1.0 };
    std::size_t samples { 10'000 };
    std::string out;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EvaluateConfig, snapshot, questions, result, split, ratio, seed, lambda, samples, out)

/// Overlays a JSON config file onto `cfg`; file values win over flags.
template <typename Config>
void apply_config_file(const std::string& path, Config& cfg)
{
    if (path.empty()) {
        return;
    }
    json current = cfg;
    const json patch = io::read_json(path);
    if (!patch.is_object()) {
        throw Error("config file must hold a JSON object");
    }
    for (const auto& [key, value] : patch.items()) {
        if (!current.contains(key)) {
            throw Error("unknown config key '" + key + "'");
        }
    }
    current.merge_patch(patch);
    try {
        cfg = current.get<Config>();
    } catch (const json::exception& e) {
        throw Error(std::string("bad config value: ") + e.what());
    }
}

inline std::string utc_timestamp()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm {};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

inline LearnerSplit load_or_make_split(const std::string& path, const Snapshot& snapshot, double ratio, std::uint64_t seed)
{
    if (!path.empty()) {
        return io::split_from_json(io::read_json(path), snapshot.learner_ids());
    }
    return split_learners(snapshot.num_learners(), ratio, seed);
}

/// Aligns two snapshots' learner means by learner id.
inline json correlation_block(const Snapshot& predicted, const Snapshot& truth, const LearnerSplit& split)
{
    const IdMap truth_ids(truth.learner_ids());
    const auto pm = predicted.learner_means();
    const auto tm = truth.learner_means();
    std::vector<char> in_train(predicted.num_learners(), 0);
    for (auto l : split.train) {
        if (l < in_train.size()) {
            in_train[l] = 1;
        }
    }
    std::vector<double> xa, ya, xt, yt;
    for (std::size_t l = 0; l < predicted.num_learners(); ++l) {
        const auto& id = predicted.learner_ids()[l];
        if (!truth_ids.contains(id)) {
            continue;
        }
        const double t = tm[truth_ids.index(id)];
        xa.push_back(pm[l]);
        ya.push_back(t);
        if (in_train[l]) {
            xt.push_back(pm[l]);
            yt.push_back(t);
        }
    }
    if (xa.size() < 2) {
        throw Error("truth snapshot shares fewer than 2 learners with the estimate");
    }
    json j = { { "learners", xa.size() }, { "pearson", stats::pearson(xa, ya) }, { "spearman", stats::spearman(xa, ya) } };
    if (xt.size() >= 2) {
        j["train"] = { { "learners", xt.size() }, { "pearson", stats::pearson(xt, yt) }, { "spearman", stats::spearman(xt, yt) } };
    }
    return j;
}

inline void cmd_simulate(const SimulateConfig& c, std::ostream& out)
{
    SimConfig sc;
    sc.num_learners = c.learners;
    sc.num_questions = c.questions;
    sc.num_concepts = c.concepts;
    sc.slip = c.slip;
    sc.growth_mean = c.growth_mean;
    sc.growth_std = c.growth_std;
    sc.seed = c.seed;
    const auto sim = simulate(sc);
    io::write_interactions(sim.log, c.interactions);
    io::write_snapshot(sim.true_snapshot, c.truth);
    out << json { { "interactions", sim.log.size() }, { "learners", c.learners }, { "questions", c.questions },
        { "interactions_file", c.interactions }, { "truth_file", c.truth } }
               .dump()
        << '\n';
}

inline void cmd_estimate(const EstimateConfig& c, std::ostream& out)
{
    const auto log = IndexedLog::from(io::read_interactions(c.interactions));
    const auto split = split_learners(log.pool.learners.size(), c.ratio, c.seed);
    json report = { { "estimator", c.estimator }, { "learners", log.pool.learners.size() }, { "questions", log.pool.questions.size() },
        { "train_learners", split.train.size() } };
    Snapshot snapshot;
    if (c.estimator == "rasch") {
        const auto model = fit_rasch(log, { c.reg, c.learning_rate, c.max_epochs, c.tol }, split.train);
        report["epochs"] = model.epochs;
        snapshot = rasch_snapshot(model);
    } else if (c.estimator == "ratio") {
        snapshot = correct_ratio_snapshot(log, c.smoothing, split.train);
    } else {
        throw Error("unknown estimator '" + c.estimator + "' (expected rasch or ratio)");
    }
    if (!c.truth.empty()) {
        report["correlation"] = correlation_block(snapshot, io::read_snapshot(c.truth), split);
    }
    if (!c.split_out.empty()) {
        io::write_json(io::split_to_json(split, snapshot.learner_ids()), c.split_out);
    }
    if (c.max_learners > 0 && c.max_learners < snapshot.num_learners()) {
        snapshot = subsample_learners(snapshot, c.max_learners, derive_seed(c.seed, 2));
        report["subsampled_learners"] = c.max_learners;
    }
    io::write_snapshot(snapshot, c.out);
    report["out"] = c.out;
    out << report.dump() << '\n';
}

inline void cmd_calibrate(const CalibrateConfig& c, std::ostream& out)
{
    const auto snapshot = io::read_snapshot(c.snapshot);
    const auto split = load_or_make_split(c.split, snapshot, c.ratio, c.seed);
    const CriteriaContext train(snapshot, split.train);
    const auto cal = calibrate_lambda_detail(train, c.k, c.samples, lambda_seed(c.seed));
    out << json { { "lambda", cal.lambda }, { "mean_c1", cal.mean_c1 }, { "mean_c2", cal.mean_c2 }, { "samples", cal.samples }, { "k", c.k },
        { "train_learners", split.train.size() } }
               .dump()
        << '\n';
}

inline SearchSettings to_settings(const SearchConfig& c)
{
    SearchSettings s;
    s.algorithm = parse_algorithm(c.algo);
    s.ga.k = c.k;
    s.ga.population_size = c.population;
    s.ga.generations = c.generations;
    s.ga.crossover_prob = c.pc;
    s.ga.individual_mutation_prob = c.pm1;
    s.ga.gene_mutation_prob = c.pm2;
    s.ga.tournament_fraction = c.tournament_fraction;
    s.ga.track_best_ever = c.track_best_ever;
    s.split_ratio = c.ratio;
    s.lambda_samples = c.lambda_samples;
    if (c.lambda >= 0.0) {
        s.lambda = c.lambda;
    }
    s.seed = c.seed;
    s.repeats = c.repeats;
    return s;
}

inline void cmd_search(const SearchConfig& c, std::ostream& out)
{
    const auto snapshot = io::read_snapshot(c.snapshot);
    const auto settings = to_settings(c);
    if (settings.algorithm == Algorithm::ga) {
        settings.ga.validate(snapshot.num_questions());
    }
    std::optional<LearnerSplit> split;
    if (!c.split.empty()) {
        split = io::split_from_json(io::read_json(c.split), snapshot.learner_ids());
    }
    const auto run = run_search(snapshot, settings, split);
    auto doc = search_report(snapshot, settings, run, json(c));
    doc["created_at"] = utc_timestamp();
    io::write_json(doc, c.out);
    out << json { { "algorithm", c.algo }, { "lambda", run.calibration.lambda }, { "summary", doc["summary"] }, { "out", c.out } }.dump()
        << '\n';
}

inline void cmd_sufficiency(const SufficiencyConfig& c, std::ostream& out)
{
    const auto snapshot = io::read_snapshot(c.snapshot);
    const auto curve = sufficiency_curve(snapshot, c.step, c.epsilon, c.window, c.seed);
    std::ostringstream csv;
    csv << std::setprecision(17);
    csv << "count,mean,delta,question_delta\n";
    csv << c.step << ',' << curve.base_mean << ",,\n";
    for (std::size_t i = 0; i < curve.counts.size(); ++i) {
        csv << curve.counts[i] << ',' << curve.means[i] << ',' << curve.deltas[i] << ',' << curve.question_deltas[i] << '\n';
    }
    auto file = io::detail::open_out(c.out);
    file << csv.str();
    auto opt = [](const std::optional<std::size_t>& v) { return v ? json(*v) : json(nullptr); };
    out << json { { "points", curve.counts.size() + 1 }, { "chosen_n", opt(curve.chosen_n) },
        { "question_chosen_n", opt(curve.question_chosen_n) }, { "out", c.out } }
               .dump()
        << '\n';
}

inline std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) {
            out.push_back(item);
        }
    }
    return out;
}

inline void cmd_evaluate(const EvaluateConfig& c, std::ostream& out)
{
    const auto snapshot = io::read_snapshot(c.snapshot);
    std::vector<std::string> names;
    double lambda = c.lambda;
    LearnerSplit split;
    if (!c.result.empty()) {
        const auto doc = io::read_json(c.result);
        try {
            names = doc.at("runs").at(0).at("questions").get<std::vector<std::string>>();
            if (c.split.empty()) {
                split = io::split_from_json(doc.at("split"), snapshot.learner_ids());
            }
            if (lambda < 0.0) {
                lambda = doc.at("lambda").get<double>();
            }
        } catch (const json::exception& e) {
            throw Error(std::string("malformed result document: ") + e.what());
        }
    } else {
        names = split_list(c.questions);
    }
    if (names.empty()) {
        throw Error("no questions given (use --questions or --result)");
    }
    if (!c.split.empty() || c.result.empty()) {
        split = load_or_make_split(c.split, snapshot, c.ratio, c.seed);
    }
    const auto s = assessment_from_names(snapshot, names);
    if (lambda < 0.0) {
        lambda = calibrate_lambda(CriteriaContext(snapshot, split.train), s.size(), c.samples, lambda_seed(c.seed));
    }
    const auto ev = evaluate_assessment(snapshot, split, s, lambda);
    json doc = { { "schema_version", 1 }, { "questions", names }, { "lambda", lambda }, { "train", io::report_to_json(ev.train) },
        { "test", io::report_to_json(ev.test) } };
    if (!c.out.empty()) {
        io::write_json(doc, c.out);
    }
    out << doc.dump() << '\n';
}

/// Returns the process exit code. Errors go to `err` as one JSON line.
inline int run(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr)
{
    CLI::App app { "Diagnostic assessment generation by subset search over learner snapshots", "diagen" };
    app.require_subcommand(1);

    SimulateConfig sim;
    EstimateConfig est;
    CalibrateConfig cal;
    SearchConfig sea;
    SufficiencyConfig suf;
    EvaluateConfig eva;
    std::string config_path;

    auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic learner population and its true snapshot");
    simulate_cmd->add_option("--learners", sim.learners, "Number of learners");
    simulate_cmd->add_option("--questions", sim.questions, "Number of questions");
    simulate_cmd->add_option("--concepts", sim.concepts, "Number of concepts");
    simulate_cmd->add_option("--slip", sim.slip, "Floor on the probability of a correct answer");
    simulate_cmd->add_option("--growth-mean", sim.growth_mean, "Mean skill growth per correct answer");
    simulate_cmd->add_option("--growth-std", sim.growth_std, "Std of skill growth per question");
    simulate_cmd->add_option("--seed", sim.seed, "Random seed");
    simulate_cmd->add_option("--interactions", sim.interactions, "Output interaction CSV");
    simulate_cmd->add_option("--truth", sim.truth, "Output true snapshot CSV");

    auto* estimate_cmd = app.add_subcommand("estimate", "Estimate a snapshot from an interaction log");
    estimate_cmd->add_option("--interactions", est.interactions, "Input interaction CSV");
    estimate_cmd->add_option("--out", est.out, "Output snapshot CSV");
    estimate_cmd->add_option("--estimator", est.estimator, "rasch or ratio");
    estimate_cmd->add_option("--ratio", est.ratio, "Fraction of learners the estimator is fitted on");
    estimate_cmd->add_option("--seed", est.seed, "Split seed");
    estimate_cmd->add_option("--smoothing", est.smoothing, "Ratio estimator smoothing");
    estimate_cmd->add_option("--reg", est.reg, "Rasch L2 coefficient");
    estimate_cmd->add_option("--learning-rate", est.learning_rate, "Rasch step size");
    estimate_cmd->add_option("--max-epochs", est.max_epochs, "Rasch epoch limit");
    estimate_cmd->add_option("--tol", est.tol, "Rasch convergence tolerance");
    estimate_cmd->add_option("--max-learners", est.max_learners, "Randomly keep at most this many learner columns");
    estimate_cmd->add_option("--truth", est.truth, "True snapshot CSV to correlate against");
    estimate_cmd->add_option("--split-out", est.split_out, "Write the fit/held-out split as JSON");

    auto* calibrate_cmd = app.add_subcommand("calibrate", "Calibrate lambda on training learners");
    calibrate_cmd->add_option("--snapshot", cal.snapshot, "Snapshot CSV");
    calibrate_cmd->add_option("--k", cal.k, "Questions per assessment");
    calibrate_cmd->add_option("--samples", cal.samples, "Random subsets to average over");
    calibrate_cmd->add_option("--ratio", cal.ratio, "Training fraction");
    calibrate_cmd->add_option("--seed", cal.seed, "Master seed");
    calibrate_cmd->add_option("--split", cal.split, "Split JSON (overrides --ratio)");

    auto* search_cmd = app.add_subcommand("search", "Search for a K-question assessment");
    search_cmd->add_option("--snapshot", sea.snapshot, "Snapshot CSV");
    search_cmd->add_option("--algo", sea.algo, "random, greedy, ga or brute");
    search_cmd->add_option("--k", sea.k, "Questions per assessment");
    search_cmd->add_option("--population", sea.population, "GA population size");
    search_cmd->add_option("--generations", sea.generations, "GA generations");
    search_cmd->add_option("--pc", sea.pc, "GA crossover probability");
    search_cmd->add_option("--pm1", sea.pm1, "GA individual mutation probability");
    search_cmd->add_option("--pm2", sea.pm2, "GA gene mutation probability");
    search_cmd->add_option("--tournament-fraction", sea.tournament_fraction, "GA tournament size as population fraction");
    search_cmd->add_flag("--track-best-ever", sea.track_best_ever, "Return the best individual ever evaluated");
    search_cmd->add_option("--ratio", sea.ratio, "Training fraction");
    search_cmd->add_option("--seed", sea.seed, "Master seed");
    search_cmd->add_option("--lambda-samples", sea.lambda_samples, "Random subsets for lambda calibration");
    search_cmd->add_option("--lambda", sea.lambda, "Fixed lambda (skip calibration)");
    search_cmd->add_option("--repeats", sea.repeats, "Independent runs with derived seeds");
    search_cmd->add_option("--split", sea.split, "Split JSON (overrides --ratio)");
    search_cmd->add_option("--out", sea.out, "Output result JSON");

    auto* sufficiency_cmd = app.add_subcommand("sufficiency", "Learner-count sufficiency curve");
    sufficiency_cmd->add_option("--snapshot", suf.snapshot, "Snapshot CSV");
    sufficiency_cmd->add_option("--step", suf.step, "Learners added per increment");
    sufficiency_cmd->add_option("--epsilon", suf.epsilon, "Stability threshold on the mean change");
    sufficiency_cmd->add_option("--window", suf.window, "Consecutive stable increments required");
    sufficiency_cmd->add_option("--seed", suf.seed, "Learner order seed");
    sufficiency_cmd->add_option("--out", suf.out, "Output curve CSV");

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a given assessment on a split");
    evaluate_cmd->add_option("--snapshot", eva.snapshot, "Snapshot CSV");
    evaluate_cmd->add_option("--questions", eva.questions, "Comma-separated question ids");
    evaluate_cmd->add_option("--result", eva.result, "Result JSON whose first run is scored");
    evaluate_cmd->add_option("--split", eva.split, "Split JSON");
    evaluate_cmd->add_option("--ratio", eva.ratio, "Training fraction");
    evaluate_cmd->add_option("--seed", eva.seed, "Master seed");
    evaluate_cmd->add_option("--lambda", eva.lambda, "Fixed lambda (default: calibrate)");
    evaluate_cmd->add_option("--samples", eva.samples, "Random subsets for lambda calibration");
    evaluate_cmd->add_option("--out", eva.out, "Output JSON");

    for (auto* sub : { simulate_cmd, estimate_cmd, calibrate_cmd, search_cmd, sufficiency_cmd, evaluate_cmd }) {
        sub->add_option("--config", config_path, "JSON file whose keys override flags");
    }

    auto fail = [&err](const std::string& message, int code) {
        err << json { { "error", message } }.dump() << '\n';
        return code;
    };

    try {
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        return fail(e.what(), 2);
    }

    try {
        if (simulate_cmd->parsed()) {
            apply_config_file(config_path, sim);
            cmd_simulate(sim, out);
        } else if (estimate_cmd->parsed()) {
            apply_config_file(config_path, est);
            cmd_estimate(est, out);
        } else if (calibrate_cmd->parsed()) {
            apply_config_file(config_path, cal);
            cmd_calibrate(cal, out);
        } else if (search_cmd->parsed()) {
            apply_config_file(config_path, sea);
            cmd_search(sea, out);
        } else if (sufficiency_cmd->parsed()) {
            apply_config_file(config_path, suf);
            cmd_sufficiency(suf, out);
        } else if (evaluate_cmd->parsed()) {
            apply_config_file(config_path, eva);
            cmd_evaluate(eva, out);
        }
    } catch (const std::exception& e) {
        return fail(e.what(), 1);
    }
    return 0;
}

} // namespace diagen::cli
