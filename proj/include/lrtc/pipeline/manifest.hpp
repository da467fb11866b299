#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrtc/error.hpp"
#include "lrtc/rng.hpp"

#ifndef LRTC_VERSION
#define LRTC_VERSION "0.1.0"
#endif

namespace lrtc::pipeline {

namespace fs = std::filesystem;

/// The stages in dependency order.
inline const std::vector<std::string> &stage_names() {
    static const std::vector<std::string> names = {"clean",    "segment",      "split",    "balance",
                                                   "bpe-train", "bpe-encode",  "w2v-train", "mlm-pretrain",
                                                   "finetune", "clf-train",    "evaluate",  "report"};
    return names;
}

/// Direct upstream stages of `stage`.
inline std::vector<std::string> stage_dependencies(const std::string &stage) {
    static const std::map<std::string, std::vector<std::string>> deps = {
        {"clean", {}},
        {"segment", {"clean"}},
        {"split", {"segment"}},
        {"balance", {"split"}},
        {"bpe-train", {"balance"}},
        {"bpe-encode", {"bpe-train"}},
        {"w2v-train", {"bpe-train"}},
        {"mlm-pretrain", {"bpe-encode"}},
        {"finetune", {"mlm-pretrain"}},
        {"clf-train", {"w2v-train"}},
        {"evaluate", {"finetune", "clf-train"}},
        {"report", {"evaluate"}},
    };
    auto it = deps.find(stage);
    if (it == deps.end()) throw ConfigError("unknown stage '" + stage + "'");
    return it->second;
}

inline std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Every regular file under `dir`, relative and sorted.
inline std::vector<std::string> list_files(const fs::path &dir) {
    std::vector<std::string> out;
    if (!fs::exists(dir)) return out;
    for (const auto &e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).generic_string());
    }
    std::sort(out.begin(), out.end());
    return out;
}

/// Hash over the relative names and bytes of every file under `dir`.
inline std::string content_hash(const fs::path &dir) {
    std::uint64_t h = fnv1a64("lrtc-artifacts");
    for (const auto &rel : list_files(dir)) {
        h = fnv1a64(rel, h);
        h = fnv1a64(std::string_view("\0", 1), h);
        std::ifstream in(dir / rel, std::ios::binary);
        std::ostringstream ss;
        ss << in.rdbuf();
        h = fnv1a64(ss.str(), h);
        h = fnv1a64(std::string_view("\0", 1), h);
    }
    return hex64(h);
}

/// Per-stage record of outputs, parameters and upstream hashes. Holds no
/// timestamps, so identical runs give identical files; wall-clock times go
/// to a separate timings file.
class Manifest {
   public:
    static Manifest load(const fs::path &path) {
        Manifest m;
        m.path_ = path;
        if (fs::exists(path)) {
            std::ifstream in(path);
            try {
                m.doc_ = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception &e) {
                throw InvalidDataset(path.string() + ": corrupt manifest: " + e.what());
            }
        }
        if (!m.doc_.is_object()) m.doc_ = nlohmann::json::object();
        m.doc_["tool"] = "lrtc";
        m.doc_["version"] = LRTC_VERSION;
        if (!m.doc_.contains("stages")) m.doc_["stages"] = nlohmann::json::object();
        return m;
    }

    bool has(const std::string &stage) const { return doc_["stages"].contains(stage); }

    const nlohmann::json &entry(const std::string &stage) const {
        if (!has(stage)) throw StageDependencyError("stage '" + stage + "' has not run");
        return doc_["stages"][stage];
    }

    std::string hash(const std::string &stage) const { return entry(stage).at("hash").get<std::string>(); }

    /// Throws StageDependencyError unless every upstream stage (transitively)
    /// has run, its outputs on disk still match the recorded hash, and it ran
    /// on the current outputs of its own upstream stages. Returns the hashes
    /// of the direct dependencies.
    std::map<std::string, std::string> require_upstream(const std::string &stage, const fs::path &work_dir) const {
        std::vector<std::string> pending = stage_dependencies(stage);
        std::set<std::string> seen;
        while (!pending.empty()) {
            const std::string dep = pending.back();
            pending.pop_back();
            if (!seen.insert(dep).second) continue;
            if (!has(dep)) {
                throw StageDependencyError("stage '" + stage + "' needs '" + dep + "', which has not run");
            }
            if (content_hash(work_dir / dep) != hash(dep)) {
                throw StageDependencyError("outputs of '" + dep + "' changed since it ran; rerun it before '" +
                                           stage + "'");
            }
            const auto &recorded_inputs = entry(dep).at("inputs");
            for (const auto &up : stage_dependencies(dep)) {
                if (!has(up) || recorded_inputs.value(up, std::string()) != hash(up)) {
                    throw StageDependencyError("'" + dep + "' is stale: '" + up + "' ran again after it");
                }
                pending.push_back(up);
            }
        }
        std::map<std::string, std::string> inputs;
        for (const auto &dep : stage_dependencies(stage)) inputs[dep] = hash(dep);
        return inputs;
    }

    void record(const std::string &stage, const fs::path &work_dir, const std::map<std::string, std::string> &inputs,
                const nlohmann::json &params) {
        nlohmann::json e;
        e["hash"] = content_hash(work_dir / stage);
        e["files"] = list_files(work_dir / stage);
        e["inputs"] = inputs;
        e["params"] = params;
        doc_["stages"][stage] = e;
    }

    void set_seed(std::uint64_t seed) { doc_["seed"] = seed; }

    void save() const {
        fs::create_directories(path_.parent_path().empty() ? fs::path(".") : path_.parent_path());
        const fs::path tmp = path_.string() + ".tmp";
        {
            std::ofstream out(tmp);
            out << doc_.dump(2) << '\n';
        }
        fs::rename(tmp, path_);
    }

    const nlohmann::json &json() const { return doc_; }

   private:
    fs::path path_;
    nlohmann::json doc_;
};

}  // namespace lrtc::pipeline
