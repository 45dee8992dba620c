// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "diagen/core.hpp"
#include "diagen/rng.hpp"

namespace diagen {

struct FitnessReport {
    double c1 { 0.0 }; // RMSE between pool means and subset means
    double c2 { 0.0 }; // population std of subset means
    double fitness { 0.0 };
    double lambda { 0.0 };
};

/// Read-only scoring context: the snapshot restricted to one learner subset,
/// with per-learner means over the whole pool precomputed.
class CriteriaContext {
public:
    CriteriaContext(const Snapshot& snapshot, std::vector<std::size_t> learner_subset, double lambda = 0.0)
        : questions_(snapshot.num_questions())
        , learners_(std::move(learner_subset))
        , lambda_(lambda)
    {
        if (questions_ == 0) {
            throw Error("snapshot has no questions");
        }
        if (learners_.empty()) {
            throw Error("learner subset is empty");
        }
        for (auto l : learners_) {
            if (l >= snapshot.num_learners()) {
                throw Error("learner index " + std::to_string(l) + " out of range");
            }
        }
        if (!(lambda >= 0.0)) {
            throw Error("lambda must be non-negative");
        }
        const auto n = learners_.size();
        rows_.resize(questions_ * n);
        pool_means_.assign(n, 0.0);
        for (std::size_t q = 0; q < questions_; ++q) {
            auto src = snapshot.row(q);
            double* dst = rows_.data() + q * n;
            for (std::size_t j = 0; j < n; ++j) {
                dst[j] = src[learners_[j]];
                pool_means_[j] += dst[j];
            }
        }
        for (auto& m : pool_means_) {
            m /= static_cast<double>(questions_);
        }
    }

    /// Context over every learner of the snapshot.
    static CriteriaContext all_learners(const Snapshot& snapshot, double lambda = 0.0)
    {
        std::vector<std::size_t> all(snapshot.num_learners());
        for (std::size_t l = 0; l < all.size(); ++l) {
            all[l] = l;
        }
        return CriteriaContext(snapshot, std::move(all), lambda);
    }

    CriteriaContext with_lambda(double lambda) const
    {
        if (!(lambda >= 0.0)) {
            throw Error("lambda must be non-negative");
        }
        CriteriaContext copy = *this;
        copy.lambda_ = lambda;
        return copy;
    }

    std::size_t num_questions() const { return questions_; }
    std::size_t num_learners() const { return learners_.size(); }
    double lambda() const { return lambda_; }
    const std::vector<std::size_t>& learner_subset() const { return learners_; }
    const std::vector<double>& pool_means() const { return pool_means_; }

    /// Question row restricted to the learner subset.
    std::span<const double> row(std::size_t question) const
    {
        return { rows_.data() + question * learners_.size(), learners_.size() };
    }

private:
    std::size_t questions_;
    std::vector<std::size_t> learners_;
    std::vector<double> rows_;
    std::vector<double> pool_means_;
    double lambda_;
};

namespace detail {

    inline void check_genes(const CriteriaContext& ctx, std::span<const std::size_t> genes)
    {
        if (genes.empty()) {
            throw Error("assessment is empty");
        }
        for (auto g : genes) {
            if (g >= ctx.num_questions()) {
                throw Error("question index " + std::to_string(g) + " out of range");
            }
        }
    }

    inline double rmse(std::span<const double> a, std::span<const double> b)
    {
        double acc = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        return std::sqrt(acc / static_cast<double>(a.size()));
    }

    inline double population_std(std::span<const double> xs)
    {
        double mean = 0.0;
        for (double x : xs) {
            mean += x;
        }
        mean /= static_cast<double>(xs.size());
        double acc = 0.0;
        for (double x : xs) {
            acc += (x - mean) * (x - mean);
        }
        return std::sqrt(acc / static_cast<double>(xs.size()));
    }

    inline FitnessReport report_from_means(const CriteriaContext& ctx, std::span<const double> means)
    {
        FitnessReport r;
        r.c1 = rmse(ctx.pool_means(), means);
        r.c2 = population_std(means);
        r.lambda = ctx.lambda();
        r.fitness = -r.c1 + r.lambda * r.c2;
        return r;
    }

} // namespace detail

inline std::vector<double> subset_means(const CriteriaContext& ctx, std::span<const std::size_t> genes)
{
    detail::check_genes(ctx, genes);
    // Rows are summed in ascending question order so that equal sets score
    // bit-identically whatever their gene order.
    std::vector<std::size_t> order(genes.begin(), genes.end());
    std::sort(order.begin(), order.end());
    std::vector<double> means(ctx.num_learners(), 0.0);
    for (auto q : order) {
        auto r = ctx.row(q);
        for (std::size_t j = 0; j < means.size(); ++j) {
            means[j] += r[j];
        }
    }
    const double k = static_cast<double>(genes.size());
    for (auto& m : means) {
        m /= k;
    }
    return means;
}

inline std::vector<double> subset_means(const CriteriaContext& ctx, const Assessment& s)
{
    return subset_means(ctx, std::span<const std::size_t>(s.genes));
}

inline double c1(const CriteriaContext& ctx, const Assessment& s)
{
    return detail::rmse(ctx.pool_means(), subset_means(ctx, s));
}

inline double c2(const CriteriaContext& ctx, const Assessment& s)
{
    return detail::population_std(subset_means(ctx, s));
}

inline FitnessReport fitness(const CriteriaContext& ctx, std::span<const std::size_t> genes)
{
    return detail::report_from_means(ctx, subset_means(ctx, genes));
}

inline FitnessReport fitness(const CriteriaContext& ctx, const Assessment& s)
{
    return fitness(ctx, std::span<const std::size_t>(s.genes));
}

struct LambdaCalibration {
    double lambda;
    double mean_c1;
    double mean_c2;
    std::size_t samples;
};

/// Averages C1 and C2 over `n_samples` uniform K-subsets (drawn independently,
/// so repeats are possible) and returns their ratio. The context's own lambda
/// is ignored.
inline LambdaCalibration calibrate_lambda_detail(const CriteriaContext& ctx, std::size_t k, std::size_t n_samples, std::uint64_t seed)
{
    if (n_samples == 0) {
        throw Error("lambda calibration needs at least one sample");
    }
    if (k == 0 || k > ctx.num_questions()) {
        throw Error("k must lie in [1, " + std::to_string(ctx.num_questions()) + "], got " + std::to_string(k));
    }
    Rng rng(seed);
    double sum_c1 = 0.0;
    double sum_c2 = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
        const auto genes = rng.sample(ctx.num_questions(), k);
        const auto r = fitness(ctx, genes);
        sum_c1 += r.c1;
        sum_c2 += r.c2;
    }
    const double n = static_cast<double>(n_samples);
    LambdaCalibration out { 0.0, sum_c1 / n, sum_c2 / n, n_samples };
    // Std of [0,1] values below this is rounding noise of a constant column.
    if (!(out.mean_c2 > 1e-12)) {
        throw Error("snapshot has no learner discrimination; lambda undefined");
    }
    out.lambda = out.mean_c1 / out.mean_c2;
    return out;
}

inline double calibrate_lambda(const CriteriaContext& ctx, std::size_t k, std::size_t n_samples = 10'000, std::uint64_t seed = 0)
{
    return calibrate_lambda_detail(ctx, k, n_samples, seed).lambda;
}

} // namespace diagen
