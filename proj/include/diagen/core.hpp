// SPDX-License-Identifier: MIT

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "diagen/rng.hpp"

namespace diagen {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bijection between external string ids and dense 0-based indices.
/// Indices are assigned in order of first insertion.
class IdMap {
public:
    IdMap() = default;

    explicit IdMap(std::vector<std::string> ids)
    {
        for (auto& id : ids) {
            if (!insert(id).second) {
                throw Error("duplicate id '" + id + "'");
            }
        }
    }

    /// Returns (index, inserted).
    std::pair<std::size_t, bool> insert(const std::string& id)
    {
        auto [it, inserted] = lookup_.try_emplace(id, ids_.size());
        if (inserted) {
            ids_.push_back(id);
        }
        return { it->second, inserted };
    }

    std::size_t index(const std::string& id) const
    {
        auto it = lookup_.find(id);
        if (it == lookup_.end()) {
            throw Error("unknown id '" + id + "'");
        }
        return it->second;
    }

    bool contains(const std::string& id) const { return lookup_.contains(id); }
    const std::string& id(std::size_t index) const { return ids_.at(index); }
    const std::vector<std::string>& ids() const { return ids_; }
    std::size_t size() const { return ids_.size(); }

    friend bool operator==(const IdMap& a, const IdMap& b) { return a.ids_ == b.ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, std::size_t> lookup_;
};

/// Learner performance snapshot: probability that each learner answers each
/// question correctly. Questions are rows, learners are columns, row-major.
class Snapshot {
public:
    Snapshot() = default;

    Snapshot(std::vector<std::string> question_ids, std::vector<std::string> learner_ids, std::vector<double> values)
        : questions_(std::move(question_ids))
        , learners_(std::move(learner_ids))
        , values_(std::move(values))
    {
        if (values_.size() != questions_.size() * learners_.size()) {
            throw Error("snapshot shape mismatch: " + std::to_string(values_.size()) + " values for "
                + std::to_string(questions_.size()) + "x" + std::to_string(learners_.size()));
        }
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double v = values_[i];
            if (!(v >= 0.0 && v <= 1.0)) {
                throw Error("snapshot value out of [0,1] at question " + std::to_string(i / learners_.size())
                    + ", learner " + std::to_string(i % learners_.size()));
            }
        }
    }

    /// Snapshot with generated ids q0.. and l0..
    static Snapshot with_default_ids(std::size_t questions, std::size_t learners, std::vector<double> values)
    {
        std::vector<std::string> qids(questions);
        std::vector<std::string> lids(learners);
        for (std::size_t q = 0; q < questions; ++q) {
            qids[q] = "q" + std::to_string(q);
        }
        for (std::size_t l = 0; l < learners; ++l) {
            lids[l] = "l" + std::to_string(l);
        }
        return Snapshot(std::move(qids), std::move(lids), std::move(values));
    }

    std::size_t num_questions() const { return questions_.size(); }
    std::size_t num_learners() const { return learners_.size(); }

    double operator()(std::size_t question, std::size_t learner) const
    {
        return values_[question * learners_.size() + learner];
    }

    std::span<const double> row(std::size_t question) const
    {
        return { values_.data() + question * learners_.size(), learners_.size() };
    }

    std::span<const double> values() const { return values_; }
    const std::vector<std::string>& question_ids() const { return questions_; }
    const std::vector<std::string>& learner_ids() const { return learners_; }

    /// Mean over questions for each learner (column means).
    std::vector<double> learner_means() const
    {
        std::vector<double> means(num_learners(), 0.0);
        for (std::size_t q = 0; q < num_questions(); ++q) {
            auto r = row(q);
            for (std::size_t l = 0; l < r.size(); ++l) {
                means[l] += r[l];
            }
        }
        for (auto& m : means) {
            m /= static_cast<double>(num_questions());
        }
        return means;
    }

    /// Copy restricted to the given learner columns, in the given order.
    Snapshot select_learners(std::span<const std::size_t> columns) const
    {
        std::vector<std::string> lids;
        lids.reserve(columns.size());
        for (auto c : columns) {
            lids.push_back(learners_.at(c));
        }
        std::vector<double> values;
        values.reserve(num_questions() * columns.size());
        for (std::size_t q = 0; q < num_questions(); ++q) {
            for (auto c : columns) {
                values.push_back((*this)(q, c));
            }
        }
        return Snapshot(questions_, std::move(lids), std::move(values));
    }

private:
    std::vector<std::string> questions_;
    std::vector<std::string> learners_;
    std::vector<double> values_;
};

/// A candidate diagnostic test: K distinct question indices. Gene order is
/// kept for reproducibility but never affects fitness.
struct Assessment {
    std::vector<std::size_t> genes;

    std::size_t size() const { return genes.size(); }

    bool is_valid(std::size_t pool_size) const
    {
        std::vector<char> seen(pool_size, 0);
        for (auto g : genes) {
            if (g >= pool_size || seen[g]) {
                return false;
            }
            seen[g] = 1;
        }
        return true;
    }

    void validate(std::size_t pool_size) const
    {
        if (!is_valid(pool_size)) {
            throw Error("assessment must contain distinct question indices below " + std::to_string(pool_size));
        }
    }

    std::vector<std::size_t> sorted() const
    {
        auto s = genes;
        std::sort(s.begin(), s.end());
        return s;
    }

    friend bool operator==(const Assessment&, const Assessment&) = default;
};

struct LearnerSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
    std::uint64_t seed { 0 };
    double ratio { 0.8 };

    friend bool operator==(const LearnerSplit&, const LearnerSplit&) = default;
};

/// Learners are shuffled from their sorted order, so the split depends only on
/// the learner set, ratio and seed. Both halves are returned sorted.
inline LearnerSplit split_learners(std::span<const std::size_t> learners, double ratio, std::uint64_t seed)
{
    if (learners.size() < 2) {
        throw Error("need at least 2 learners to split, got " + std::to_string(learners.size()));
    }
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw Error("split ratio must lie in (0,1)");
    }
    std::vector<std::size_t> order(learners.begin(), learners.end());
    std::sort(order.begin(), order.end());
    if (std::adjacent_find(order.begin(), order.end()) != order.end()) {
        throw Error("duplicate learner in split input");
    }
    Rng rng(seed);
    rng.shuffle(std::span<std::size_t>(order));

    const auto n = order.size();
    auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    LearnerSplit split;
    split.seed = seed;
    split.ratio = ratio;
    split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    return split;
}

inline LearnerSplit split_learners(std::size_t num_learners, double ratio, std::uint64_t seed)
{
    std::vector<std::size_t> all(num_learners);
    for (std::size_t i = 0; i < num_learners; ++i) {
        all[i] = i;
    }
    return split_learners(all, ratio, seed);
}

struct InteractionRecord {
    std::string learner;
    std::string question;
    bool correct { false };
    std::uint64_t order { 0 };

    friend bool operator==(const InteractionRecord&, const InteractionRecord&) = default;
};

/// Raw learner-question responses in file order.
struct InteractionLog {
    std::vector<InteractionRecord> records;

    bool empty() const { return records.empty(); }
    std::size_t size() const { return records.size(); }

    /// Throws unless every learner's order values strictly increase.
    void validate_order() const
    {
        std::unordered_map<std::string, std::uint64_t> last;
        for (const auto& r : records) {
            auto [it, inserted] = last.try_emplace(r.learner, r.order);
            if (!inserted) {
                if (r.order <= it->second) {
                    throw Error("order not strictly increasing for learner '" + r.learner + "'");
                }
                it->second = r.order;
            }
        }
    }

    friend bool operator==(const InteractionLog&, const InteractionLog&) = default;
};

struct Pool {
    IdMap questions;
    IdMap learners;
};

inline Pool build_pool(const InteractionLog& log)
{
    if (log.empty()) {
        throw Error("empty interaction log");
    }
    Pool pool;
    for (const auto& r : log.records) {
        pool.learners.insert(r.learner);
        pool.questions.insert(r.question);
    }
    return pool;
}

/// Interaction log resolved against a pool's dense indices.
struct IndexedLog {
    struct Record {
        std::size_t learner;
        std::size_t question;
        bool correct;
    };

    Pool pool;
    std::vector<Record> records;

    static IndexedLog from(const InteractionLog& log)
    {
        return from(log, build_pool(log));
    }

    static IndexedLog from(const InteractionLog& log, Pool pool)
    {
        IndexedLog out;
        out.records.reserve(log.size());
        for (const auto& r : log.records) {
            out.records.push_back({ pool.learners.index(r.learner), pool.questions.index(r.question), r.correct });
        }
        out.pool = std::move(pool);
        return out;
    }
};

} // namespace diagen
