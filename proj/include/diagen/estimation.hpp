// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "diagen/core.hpp"
#include "diagen/rng.hpp"

namespace diagen {

namespace detail {

    /// Mask of learners whose records fit the model; empty span means all.
    inline std::vector<char> fit_mask(std::size_t num_learners, std::span<const std::size_t> fit_learners)
    {
        std::vector<char> mask(num_learners, fit_learners.empty() ? 1 : 0);
        for (auto l : fit_learners) {
            if (l >= num_learners) {
                throw Error("fit learner index " + std::to_string(l) + " out of range");
            }
            mask[l] = 1;
        }
        return mask;
    }

    inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

    /// log(1 + e^z) without overflow.
    inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

} // namespace detail

// ---------------------------------------------------------------------------
// Additive correct-ratio estimator
// ---------------------------------------------------------------------------

constexpr double kRatioClip = 1e-3;

/// Q[q][l] = clip(p_q + a_l - g, eps, 1 - eps) with Laplace-style smoothed
/// question, learner and global correct ratios (x + s) / (n + 2s).
/// Question and global ratios use only `fit_learners` (all when empty); each
/// learner's own ratio uses that learner's full history.
inline Snapshot correct_ratio_snapshot(const IndexedLog& log, double smoothing = 1.0, std::span<const std::size_t> fit_learners = {})
{
    if (log.records.empty()) {
        throw Error("empty interaction log");
    }
    if (!(smoothing >= 0.0)) {
        throw Error("smoothing must be non-negative");
    }
    const auto nq = log.pool.questions.size();
    const auto nl = log.pool.learners.size();
    const auto mask = detail::fit_mask(nl, fit_learners);

    std::vector<double> q_right(nq, 0.0), q_seen(nq, 0.0), l_right(nl, 0.0), l_seen(nl, 0.0);
    double g_right = 0.0, g_seen = 0.0;
    for (const auto& r : log.records) {
        const double x = r.correct ? 1.0 : 0.0;
        l_right[r.learner] += x;
        l_seen[r.learner] += 1.0;
        if (mask[r.learner]) {
            q_right[r.question] += x;
            q_seen[r.question] += 1.0;
            g_right += x;
            g_seen += 1.0;
        }
    }
    if (g_seen == 0.0) {
        throw Error("no interactions from fit learners");
    }
    auto ratio = [&](double right, double seen, double fallback) {
        const double denom = seen + 2.0 * smoothing;
        return (seen == 0.0 || denom == 0.0) ? fallback : (right + smoothing) / denom;
    };
    const double g = ratio(g_right, g_seen, 0.5);
    std::vector<double> values(nq * nl);
    for (std::size_t q = 0; q < nq; ++q) {
        const double pq = ratio(q_right[q], q_seen[q], g);
        for (std::size_t l = 0; l < nl; ++l) {
            const double al = ratio(l_right[l], l_seen[l], g);
            values[q * nl + l] = std::clamp(pq + al - g, kRatioClip, 1.0 - kRatioClip);
        }
    }
    return Snapshot(log.pool.questions.ids(), log.pool.learners.ids(), std::move(values));
}

// ---------------------------------------------------------------------------
// Rasch (1PL) estimator
// ---------------------------------------------------------------------------

struct RaschParams {
    double reg { 1e-4 };
    double learning_rate { 0.1 };
    std::size_t max_epochs { 500 };
    double tol { 1e-6 };
};

struct RaschModel {
    std::vector<double> theta; // per learner
    std::vector<double> b;     // per question, centered to zero mean
    std::vector<std::string> question_ids;
    std::vector<std::string> learner_ids;
    RaschParams params;
    std::size_t epochs { 0 };
    std::vector<double> objective; // penalized NLL after each accepted epoch
};

namespace detail {

    struct RaschState {
        std::vector<double>& theta;
        std::vector<double>& b;
        const std::vector<char>& active; // learners whose records and theta take part
        bool update_b;
    };

    inline double rasch_objective(const IndexedLog& log, const RaschState& s, double reg)
    {
        double nll = 0.0;
        for (const auto& r : log.records) {
            if (!s.active[r.learner]) {
                continue;
            }
            const double z = s.theta[r.learner] - s.b[r.question];
            nll += softplus(z) - (r.correct ? z : 0.0);
        }
        double penalty = 0.0;
        for (std::size_t l = 0; l < s.theta.size(); ++l) {
            if (s.active[l]) {
                penalty += s.theta[l] * s.theta[l];
            }
        }
        if (s.update_b) {
            for (double v : s.b) {
                penalty += v * v;
            }
        }
        return nll + 0.5 * reg * penalty;
    }

    /// Preconditioned gradient descent on the penalized NLL. Each parameter's
    /// step is scaled by 1 / (n/4 + reg), the inverse of its curvature bound.
    /// An epoch that raises the objective by more than 1e-9 is undone and the
    /// step halved, so the accepted objective trace never increases.
    inline std::size_t rasch_descend(const IndexedLog& log, RaschState s, const RaschParams& p, std::vector<double>& trace)
    {
        const auto nl = s.theta.size();
        const auto nq = s.b.size();
        std::vector<double> l_count(nl, 0.0), q_count(nq, 0.0);
        for (const auto& r : log.records) {
            if (s.active[r.learner]) {
                l_count[r.learner] += 1.0;
                q_count[r.question] += 1.0;
            }
        }
        for (std::size_t l = 0; l < nl; ++l) {
            if (s.active[l] && l_count[l] == 0.0) {
                throw Error("learner " + log.pool.learners.id(l) + " has no interactions");
            }
        }
        if (s.update_b) {
            for (std::size_t q = 0; q < nq; ++q) {
                if (q_count[q] == 0.0) {
                    throw Error("question " + log.pool.questions.id(q) + " has no interactions");
                }
            }
        }

        double step = p.learning_rate;
        double current = rasch_objective(log, s, p.reg);
        std::vector<double> g_theta(nl), g_b(nq);
        std::size_t epoch = 0;
        while (epoch < p.max_epochs) {
            ++epoch;
            std::fill(g_theta.begin(), g_theta.end(), 0.0);
            std::fill(g_b.begin(), g_b.end(), 0.0);
            for (const auto& r : log.records) {
                if (!s.active[r.learner]) {
                    continue;
                }
                // d(NLL)/dz = sigmoid(z) - x
                const double resid = sigmoid(s.theta[r.learner] - s.b[r.question]) - (r.correct ? 1.0 : 0.0);
                g_theta[r.learner] += resid;
                g_b[r.question] -= resid;
            }
            const auto old_theta = s.theta;
            const auto old_b = s.b;
            double max_change = 0.0;
            for (std::size_t l = 0; l < nl; ++l) {
                if (!s.active[l]) {
                    continue;
                }
                const double d = -step * (g_theta[l] + p.reg * s.theta[l]) / (0.25 * l_count[l] + p.reg);
                s.theta[l] += d;
                max_change = std::max(max_change, std::abs(d));
            }
            if (s.update_b) {
                for (std::size_t q = 0; q < nq; ++q) {
                    const double d = -step * (g_b[q] + p.reg * s.b[q]) / (0.25 * q_count[q] + p.reg);
                    s.b[q] += d;
                    max_change = std::max(max_change, std::abs(d));
                }
            }
            const double next = rasch_objective(log, s, p.reg);
            if (!std::isfinite(next)) {
                throw Error("rasch fit diverged (non-finite likelihood) at epoch " + std::to_string(epoch));
            }
            if (next > current + 1e-9) {
                s.theta = old_theta;
                s.b = old_b;
                step *= 0.5;
                continue;
            }
            current = next;
            trace.push_back(current);
            if (max_change < p.tol) {
                break;
            }
        }
        return epoch;
    }

} // namespace detail

/// Joint fit of abilities and difficulties on the records of `fit_learners`
/// (all learners when empty). Learners outside the fit set get their ability
/// fitted afterwards against the frozen difficulties. P(correct) =
/// sigmoid(theta_l - b_q); difficulties are centered to zero mean.
inline RaschModel fit_rasch(const IndexedLog& log, const RaschParams& params = {}, std::span<const std::size_t> fit_learners = {})
{
    if (log.records.empty()) {
        throw Error("empty interaction log");
    }
    if (!(params.learning_rate > 0.0) || !(params.reg >= 0.0) || !(params.tol >= 0.0)) {
        throw Error("invalid rasch parameters");
    }
    const auto nl = log.pool.learners.size();
    const auto nq = log.pool.questions.size();
    RaschModel m;
    m.params = params;
    m.question_ids = log.pool.questions.ids();
    m.learner_ids = log.pool.learners.ids();
    m.theta.assign(nl, 0.0);
    m.b.assign(nq, 0.0);

    const auto mask = detail::fit_mask(nl, fit_learners);
    m.epochs = detail::rasch_descend(log, { m.theta, m.b, mask, true }, params, m.objective);

    double center = 0.0;
    for (double v : m.b) {
        center += v;
    }
    center /= static_cast<double>(nq);
    for (auto& v : m.b) {
        v -= center;
    }
    for (std::size_t l = 0; l < nl; ++l) {
        if (mask[l]) {
            m.theta[l] -= center;
        }
    }

    std::vector<char> rest(nl, 0);
    bool any = false;
    for (std::size_t l = 0; l < nl; ++l) {
        rest[l] = mask[l] ? 0 : 1;
        any = any || rest[l];
    }
    if (any) {
        std::vector<double> unused;
        detail::rasch_descend(log, { m.theta, m.b, rest, false }, params, unused);
    }
    return m;
}

/// Q[q][l] = sigmoid(theta_l - b_q).
inline Snapshot rasch_snapshot(const RaschModel& model)
{
    const auto nq = model.b.size();
    const auto nl = model.theta.size();
    std::vector<double> values(nq * nl);
    for (std::size_t q = 0; q < nq; ++q) {
        for (std::size_t l = 0; l < nl; ++l) {
            values[q * nl + l] = detail::sigmoid(model.theta[l] - model.b[q]);
        }
    }
    return Snapshot(model.question_ids, model.learner_ids, std::move(values));
}

// ---------------------------------------------------------------------------
// Snapshot downsizing
// ---------------------------------------------------------------------------

/// n uniformly chosen learner columns, kept in their original order.
inline Snapshot subsample_learners(const Snapshot& snapshot, std::size_t n, std::uint64_t seed)
{
    if (n < 1 || n > snapshot.num_learners()) {
        throw Error("subsample size must lie in [1, " + std::to_string(snapshot.num_learners()) + "]");
    }
    Rng rng(seed);
    auto cols = rng.sample(snapshot.num_learners(), n);
    std::sort(cols.begin(), cols.end());
    return snapshot.select_learners(cols);
}

struct SufficiencyCurve {
    std::size_t step { 0 };
    double base_mean { 0.0 };         // mean performance of the first `step` learners
    std::vector<std::size_t> counts;  // 2*step, 3*step, ...
    std::vector<double> means;        // mean performance at each count
    std::vector<double> deltas;       // |means[i] - previous mean|
    std::optional<std::size_t> chosen_n;
    std::vector<double> question_deltas; // largest per-question change at each count
    std::optional<std::size_t> question_chosen_n;
};

namespace detail {

    /// First count from which `window` consecutive deltas stay below epsilon.
    inline std::optional<std::size_t> first_stable(const std::vector<std::size_t>& counts, const std::vector<double>& deltas,
        double epsilon, std::size_t window)
    {
        std::size_t run = 0;
        for (std::size_t i = 0; i < deltas.size(); ++i) {
            run = deltas[i] < epsilon ? run + 1 : 0;
            if (run == window) {
                return counts[i + 1 - window];
            }
        }
        return std::nullopt;
    }

} // namespace detail

/// Adds learners in a seeded random order, `step` at a time, and tracks how
/// much the mean learner performance moves with each increment.
inline SufficiencyCurve sufficiency_curve(const Snapshot& snapshot, std::size_t step, double epsilon = 1e-4, std::size_t window = 3,
    std::uint64_t seed = 0)
{
    if (step < 1) {
        throw Error("step must be at least 1");
    }
    if (!(epsilon > 0.0)) {
        throw Error("epsilon must be positive");
    }
    if (window < 1) {
        throw Error("window must be at least 1");
    }
    const auto nl = snapshot.num_learners();
    const auto nq = snapshot.num_questions();
    std::vector<std::size_t> order(nl);
    std::iota(order.begin(), order.end(), std::size_t { 0 });
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));
    const auto learner_means = snapshot.learner_means();

    SufficiencyCurve c;
    c.step = step;
    // Running means are updated one learner at a time, which keeps them exact
    // when every learner has the same value.
    double m = 0.0;
    std::vector<double> q_mean(nq, 0.0);
    std::vector<double> q_prev(nq, 0.0);
    double prev = 0.0;
    std::size_t added = 0;
    for (std::size_t count = step; count <= nl; count += step) {
        for (; added < count; ++added) {
            const auto l = order[added];
            const double i = static_cast<double>(added + 1);
            m += (learner_means[l] - m) / i;
            for (std::size_t q = 0; q < nq; ++q) {
                q_mean[q] += (snapshot(q, l) - q_mean[q]) / i;
            }
        }
        double q_delta = 0.0;
        for (std::size_t q = 0; q < nq; ++q) {
            q_delta = std::max(q_delta, std::abs(q_mean[q] - q_prev[q]));
            q_prev[q] = q_mean[q];
        }
        if (count == step) {
            c.base_mean = m;
        } else {
            c.counts.push_back(count);
            c.means.push_back(m);
            c.deltas.push_back(std::abs(m - prev));
            c.question_deltas.push_back(q_delta);
        }
        prev = m;
    }
    c.chosen_n = detail::first_stable(c.counts, c.deltas, epsilon, window);
    c.question_chosen_n = detail::first_stable(c.counts, c.question_deltas, epsilon, window);
    return c;
}

} // namespace diagen
