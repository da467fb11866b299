#pragma once

#include <algorithm>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include "lrtc/classify/zoo.hpp"

namespace lrtc::pipeline {

/// macro-F1 per system (architecture name) and track.
using ScoreTable = std::map<std::string, std::map<std::string, double>>;

inline std::string format_percent(double f1) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", 100.0 * f1);
    return buf;
}

/// Markdown table of macro-F1 (as percentages): one row per system in zoo
/// order, one column per track in the given order, "-" where no result exists.
/// Tracks with no results at all are dropped unless listed in `columns`.
inline std::string render_report(const ScoreTable &scores, std::vector<std::string> columns = {}) {
    if (columns.empty()) {
        for (const auto &[sys, row] : scores) {
            for (const auto &[track, f1] : row) {
                if (std::find(columns.begin(), columns.end(), track) == columns.end()) columns.push_back(track);
            }
        }
        std::sort(columns.begin(), columns.end());
    }
    std::vector<std::string> rows;
    for (auto a : classify::kAllArchs) {
        if (scores.count(std::string(classify::to_string(a)))) rows.emplace_back(classify::to_string(a));
    }
    for (const auto &[sys, row] : scores) {
        if (std::find(rows.begin(), rows.end(), sys) == rows.end()) rows.push_back(sys);
    }

    std::string out = "| Model |";
    for (const auto &c : columns) out += " " + c + " |";
    out += "\n|---|";
    for (std::size_t i = 0; i < columns.size(); ++i) out += "---:|";
    out += "\n";
    for (const auto &sys : rows) {
        out += "| " + sys + " |";
        const auto &row = scores.at(sys);
        for (const auto &c : columns) {
            auto it = row.find(c);
            out += " " + (it == row.end() ? std::string("-") : format_percent(it->second)) + " |";
        }
        out += "\n";
    }
    return out;
}

}  // namespace lrtc::pipeline
