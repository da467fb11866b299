#pragma once

#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrtc/error.hpp"

namespace lrtc::classify {

struct ClassMetrics {
    std::string label;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::uint64_t support = 0;  // gold count

    bool operator==(const ClassMetrics &) const = default;
};

struct EvalReport {
    std::vector<ClassMetrics> per_class;
    double macro_f1 = 0.0;
    double accuracy = 0.0;
    std::vector<std::vector<std::uint64_t>> confusion;  // [gold][pred], label order of per_class

    bool operator==(const EvalReport &) const = default;
};

/// Per-class precision/recall/F1 (0 whenever a ratio is undefined) and their
/// unweighted mean. An empty `label_set` means the sorted union of gold and pred.
inline EvalReport evaluate(const std::vector<std::string> &gold, const std::vector<std::string> &pred,
                           std::vector<std::string> label_set = {}) {
    if (gold.size() != pred.size()) {
        throw InputError("gold has " + std::to_string(gold.size()) + " labels, predictions " +
                         std::to_string(pred.size()));
    }
    if (gold.empty()) throw InputError("nothing to evaluate");
    if (label_set.empty()) {
        std::set<std::string> all(gold.begin(), gold.end());
        all.insert(pred.begin(), pred.end());
        label_set.assign(all.begin(), all.end());
    }
    std::map<std::string, std::size_t> index;
    for (const auto &l : label_set) {
        if (!index.emplace(l, index.size()).second) throw InputError("duplicate label '" + l + "'");
    }
    auto idx = [&](const std::string &l) {
        auto it = index.find(l);
        if (it == index.end()) throw InputError("label '" + l + "' is not in the label set");
        return it->second;
    };

    const std::size_t k = label_set.size();
    EvalReport r;
    r.confusion.assign(k, std::vector<std::uint64_t>(k, 0));
    std::uint64_t correct = 0;
    for (std::size_t i = 0; i < gold.size(); ++i) {
        const std::size_t g = idx(gold[i]), p = idx(pred[i]);
        ++r.confusion[g][p];
        correct += g == p;
    }
    double f1_sum = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        std::uint64_t tp = r.confusion[c][c], gold_c = 0, pred_c = 0;
        for (std::size_t j = 0; j < k; ++j) {
            gold_c += r.confusion[c][j];
            pred_c += r.confusion[j][c];
        }
        ClassMetrics m{label_set[c], 0.0, 0.0, 0.0, gold_c};
        if (pred_c) m.precision = static_cast<double>(tp) / static_cast<double>(pred_c);
        if (gold_c) m.recall = static_cast<double>(tp) / static_cast<double>(gold_c);
        if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
        f1_sum += m.f1;
        r.per_class.push_back(m);
    }
    r.macro_f1 = f1_sum / static_cast<double>(k);
    r.accuracy = static_cast<double>(correct) / static_cast<double>(gold.size());
    return r;
}

inline nlohmann::json to_json(const EvalReport &r) {
    nlohmann::json j;
    j["macro_f1"] = r.macro_f1;
    j["accuracy"] = r.accuracy;
    j["per_class"] = nlohmann::json::array();
    std::vector<std::string> labels;
    for (const auto &m : r.per_class) {
        j["per_class"].push_back(
            {{"label", m.label}, {"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}, {"support", m.support}});
        labels.push_back(m.label);
    }
    j["labels"] = labels;
    j["confusion"] = r.confusion;
    return j;
}

inline EvalReport report_from_json(const nlohmann::json &j) {
    EvalReport r;
    r.macro_f1 = j.at("macro_f1");
    r.accuracy = j.at("accuracy");
    for (const auto &m : j.at("per_class")) {
        r.per_class.push_back({m.at("label"), m.at("precision"), m.at("recall"), m.at("f1"), m.at("support")});
    }
    r.confusion = j.at("confusion").get<std::vector<std::vector<std::uint64_t>>>();
    return r;
}

struct Prediction {
    std::string id;
    std::string gold;
    std::string pred;
    bool operator==(const Prediction &) const = default;
};

/// TSV: example_id, gold, pred.
inline void write_predictions(const std::string &path, const std::vector<Prediction> &rows) {
    std::ofstream out(path);
    if (!out) throw InvalidDataset("cannot write " + path);
    for (const auto &r : rows) out << r.id << '\t' << r.gold << '\t' << r.pred << '\n';
}

inline std::vector<Prediction> read_predictions(const std::string &path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open " + path);
    std::vector<Prediction> rows;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const auto a = line.find('\t');
        const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
        if (b == std::string::npos) throw ParseError(n, path + ": expected 3 tab-separated fields");
        rows.push_back({line.substr(0, a), line.substr(a + 1, b - a - 1), line.substr(b + 1)});
    }
    return rows;
}

}  // namespace lrtc::classify
