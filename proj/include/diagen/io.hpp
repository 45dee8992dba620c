// SPDX-License-Identifier: MIT

#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "diagen/core.hpp"
#include "diagen/criteria.hpp"

namespace diagen::io {

using nlohmann::json;

inline constexpr std::string_view kInteractionHeader = "learner_id,question_id,correct,order";
inline constexpr std::string_view kSnapshotCorner = "question_id";

namespace detail {

    inline std::vector<std::string_view> split_csv(std::string_view line)
    {
        std::vector<std::string_view> cells;
        std::size_t start = 0;
        while (true) {
            const auto pos = line.find(',', start);
            if (pos == std::string_view::npos) {
                cells.push_back(line.substr(start));
                return cells;
            }
            cells.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
    }

    inline bool next_line(std::istream& in, std::string& line)
    {
        if (!std::getline(in, line)) {
            return false;
        }
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        return true;
    }

    inline std::string at_line(std::size_t n) { return " (line " + std::to_string(n) + ")"; }

    inline std::ifstream open_in(const std::filesystem::path& path)
    {
        std::ifstream in(path);
        if (!in) {
            throw Error("cannot open '" + path.string() + "' for reading");
        }
        return in;
    }

    inline std::ofstream open_out(const std::filesystem::path& path)
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) {
            throw Error("cannot open '" + path.string() + "' for writing");
        }
        return out;
    }

    inline void append_fixed6(std::string& out, double v)
    {
        char buf[64];
        auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, 6);
        out.append(buf, end);
    }

} // namespace detail

// ---------------------------------------------------------------------------
// Interaction CSV: learner_id,question_id,correct,order
// ---------------------------------------------------------------------------

inline InteractionLog parse_interactions(std::istream& in)
{
    std::string line;
    if (!detail::next_line(in, line) || line != kInteractionHeader) {
        throw Error("interaction file must start with header '" + std::string(kInteractionHeader) + "'");
    }
    InteractionLog log;
    std::size_t line_no = 1;
    while (detail::next_line(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (cells.size() != 4) {
            throw Error("malformed row: expected 4 cells, got " + std::to_string(cells.size()) + detail::at_line(line_no));
        }
        if (cells[0].empty() || cells[1].empty()) {
            throw Error("empty learner or question id" + detail::at_line(line_no));
        }
        if (cells[2] != "0" && cells[2] != "1") {
            throw Error("correct must be 0 or 1" + detail::at_line(line_no));
        }
        std::uint64_t order = 0;
        auto [ptr, ec] = std::from_chars(cells[3].data(), cells[3].data() + cells[3].size(), order);
        if (ec != std::errc() || ptr != cells[3].data() + cells[3].size() || cells[3].empty()) {
            throw Error("order must be a non-negative integer" + detail::at_line(line_no));
        }
        log.records.push_back({ std::string(cells[0]), std::string(cells[1]), cells[2] == "1", order });
    }
    log.validate_order();
    return log;
}

inline InteractionLog read_interactions(const std::filesystem::path& path)
{
    auto in = detail::open_in(path);
    return parse_interactions(in);
}

inline void format_interactions(const InteractionLog& log, std::ostream& out)
{
    std::string buf;
    buf.append(kInteractionHeader).push_back('\n');
    for (const auto& r : log.records) {
        buf.append(r.learner).push_back(',');
        buf.append(r.question).push_back(',');
        buf.push_back(r.correct ? '1' : '0');
        buf.push_back(',');
        buf.append(std::to_string(r.order)).push_back('\n');
    }
    out << buf;
}

inline void write_interactions(const InteractionLog& log, const std::filesystem::path& path)
{
    auto out = detail::open_out(path);
    format_interactions(log, out);
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

// ---------------------------------------------------------------------------
// Snapshot CSV: header `question_id,<learner ids...>`, one row per question,
// probabilities with 6 decimals.
// ---------------------------------------------------------------------------

inline void format_snapshot(const Snapshot& s, std::ostream& out)
{
    std::string buf;
    buf.append(kSnapshotCorner);
    for (const auto& id : s.learner_ids()) {
        buf.push_back(',');
        buf.append(id);
    }
    buf.push_back('\n');
    for (std::size_t q = 0; q < s.num_questions(); ++q) {
        buf.append(s.question_ids()[q]);
        for (double v : s.row(q)) {
            buf.push_back(',');
            detail::append_fixed6(buf, v);
        }
        buf.push_back('\n');
    }
    out << buf;
}

inline Snapshot parse_snapshot(std::istream& in)
{
    std::string line;
    if (!detail::next_line(in, line)) {
        throw Error("snapshot file is empty");
    }
    const auto header = detail::split_csv(line);
    if (header.empty() || header[0] != kSnapshotCorner) {
        throw Error("snapshot header must start with '" + std::string(kSnapshotCorner) + "'");
    }
    std::vector<std::string> learners(header.begin() + 1, header.end());
    if (learners.empty()) {
        throw Error("snapshot has no learner columns");
    }
    IdMap check_l(learners);

    std::vector<std::string> questions;
    std::vector<double> values;
    std::size_t line_no = 1;
    while (detail::next_line(in, line)) {
        ++line_no;
        if (line.empty()) {
            continue;
        }
        const auto cells = detail::split_csv(line);
        if (cells.size() != header.size()) {
            throw Error("ragged row: expected " + std::to_string(header.size()) + " cells, got " + std::to_string(cells.size())
                + detail::at_line(line_no));
        }
        questions.emplace_back(cells[0]);
        for (std::size_t c = 1; c < cells.size(); ++c) {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(cells[c].data(), cells[c].data() + cells[c].size(), v);
            const bool parsed = ec == std::errc() && ptr == cells[c].data() + cells[c].size() && !cells[c].empty();
            if (!parsed || !(v >= 0.0 && v <= 1.0)) {
                throw Error("invalid probability '" + std::string(cells[c]) + "' at line " + std::to_string(line_no) + ", column "
                    + std::to_string(c + 1));
            }
            values.push_back(v);
        }
    }
    if (questions.empty()) {
        throw Error("snapshot has no question rows");
    }
    IdMap check_q(questions);
    return Snapshot(std::move(questions), std::move(learners), std::move(values));
}

inline void write_snapshot(const Snapshot& s, const std::filesystem::path& path)
{
    auto out = detail::open_out(path);
    format_snapshot(s, out);
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

inline Snapshot read_snapshot(const std::filesystem::path& path)
{
    auto in = detail::open_in(path);
    return parse_snapshot(in);
}

// ---------------------------------------------------------------------------
// JSON documents
// ---------------------------------------------------------------------------

inline json split_to_json(const LearnerSplit& split, const std::vector<std::string>& learner_ids)
{
    json j;
    j["seed"] = split.seed;
    j["ratio"] = split.ratio;
    j["train"] = json::array();
    j["test"] = json::array();
    for (auto l : split.train) {
        j["train"].push_back(learner_ids.at(l));
    }
    for (auto l : split.test) {
        j["test"].push_back(learner_ids.at(l));
    }
    return j;
}

inline LearnerSplit split_from_json(const json& j, const std::vector<std::string>& learner_ids)
{
    const IdMap ids(learner_ids);
    LearnerSplit split;
    try {
        split.seed = j.at("seed").get<std::uint64_t>();
        split.ratio = j.at("ratio").get<double>();
        for (const auto& id : j.at("train")) {
            split.train.push_back(ids.index(id.get<std::string>()));
        }
        for (const auto& id : j.at("test")) {
            split.test.push_back(ids.index(id.get<std::string>()));
        }
    } catch (const json::exception& e) {
        throw Error(std::string("malformed split document: ") + e.what());
    }
    std::sort(split.train.begin(), split.train.end());
    std::sort(split.test.begin(), split.test.end());
    std::vector<char> seen(learner_ids.size(), 0);
    for (auto l : split.train) {
        seen[l] += 1;
    }
    for (auto l : split.test) {
        seen[l] += 1;
    }
    for (std::size_t l = 0; l < seen.size(); ++l) {
        if (seen[l] != 1) {
            throw Error("split must place learner '" + learner_ids[l] + "' in exactly one of train/test");
        }
    }
    return split;
}

inline void write_json(const json& j, const std::filesystem::path& path)
{
    auto out = detail::open_out(path);
    out << j.dump(2) << '\n';
    if (!out) {
        throw Error("failed writing '" + path.string() + "'");
    }
}

inline json read_json(const std::filesystem::path& path)
{
    auto in = detail::open_in(path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw Error("invalid JSON in '" + path.string() + "': " + e.what());
    }
}

/// Table-style block: rmse (C1), std (C2), fitness and the lambda used.
inline json report_to_json(const FitnessReport& r)
{
    return json { { "rmse", r.c1 }, { "std", r.c2 }, { "fitness", r.fitness }, { "lambda", r.lambda } };
}

} // namespace diagen::io
