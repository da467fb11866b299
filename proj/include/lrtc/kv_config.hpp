#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "lrtc/error.hpp"

namespace lrtc {

/// A flat TOML-style file: `[section]` headers, `key = value` lines, `#`
/// comments. Values are bare numbers/booleans or double-quoted strings.
/// Keys before the first header live in section "".
class KvConfig {
   public:
    static KvConfig parse(std::string_view text) {
        KvConfig cfg;
        std::string section;
        std::size_t line_no = 0;
        std::istringstream in{std::string(text)};
        std::string line;
        while (std::getline(in, line)) {
            ++line_no;
            std::string_view v = strip(strip_comment(line));
            if (v.empty()) continue;
            if (v.front() == '[') {
                if (v.back() != ']') throw ParseError(line_no, "unterminated section header");
                section = std::string(strip(v.substr(1, v.size() - 2)));
                if (section.empty()) throw ParseError(line_no, "empty section name");
                continue;
            }
            const auto eq = v.find('=');
            if (eq == std::string_view::npos) throw ParseError(line_no, "expected key = value");
            const std::string key(strip(v.substr(0, eq)));
            std::string_view value = strip(v.substr(eq + 1));
            if (key.empty()) throw ParseError(line_no, "empty key");
            if (!value.empty() && value.front() == '"') {
                if (value.size() < 2 || value.back() != '"') throw ParseError(line_no, "unterminated string");
                value = value.substr(1, value.size() - 2);
            }
            cfg.values_[section][key] = std::string(value);
        }
        return cfg;
    }

    static KvConfig load(const std::string &path) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file " + path);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            return parse(ss.str());
        } catch (const ParseError &e) {
            throw ConfigError(path + ": " + e.what());
        }
    }

    bool has_section(const std::string &section) const { return values_.count(section) != 0; }

    std::optional<std::string> get(const std::string &section, const std::string &key) const {
        auto s = values_.find(section);
        if (s == values_.end()) return std::nullopt;
        auto k = s->second.find(key);
        if (k == s->second.end()) return std::nullopt;
        return k->second;
    }

    std::string get_string(const std::string &section, const std::string &key, std::string fallback) const {
        return get(section, key).value_or(std::move(fallback));
    }

    template <typename Int>
    Int get_int(const std::string &section, const std::string &key, Int fallback) const {
        auto v = get(section, key);
        if (!v) return fallback;
        Int out{};
        const auto [ptr, ec] = std::from_chars(v->data(), v->data() + v->size(), out);
        if (ec != std::errc{} || ptr != v->data() + v->size()) {
            throw ConfigError("[" + section + "] " + key + ": expected integer, got '" + *v + "'");
        }
        return out;
    }

    double get_double(const std::string &section, const std::string &key, double fallback) const {
        auto v = get(section, key);
        if (!v) return fallback;
        try {
            std::size_t used = 0;
            double out = std::stod(*v, &used);
            if (used != v->size()) throw std::invalid_argument("trailing");
            return out;
        } catch (const std::exception &) {
            throw ConfigError("[" + section + "] " + key + ": expected number, got '" + *v + "'");
        }
    }

    bool get_bool(const std::string &section, const std::string &key, bool fallback) const {
        auto v = get(section, key);
        if (!v) return fallback;
        if (*v == "true") return true;
        if (*v == "false") return false;
        throw ConfigError("[" + section + "] " + key + ": expected true/false, got '" + *v + "'");
    }

    const std::map<std::string, std::map<std::string, std::string>> &sections() const { return values_; }

   private:
    static std::string_view strip(std::string_view v) {
        const auto b = v.find_first_not_of(" \t\r");
        if (b == std::string_view::npos) return {};
        const auto e = v.find_last_not_of(" \t\r");
        return v.substr(b, e - b + 1);
    }

    static std::string_view strip_comment(std::string_view v) {
        bool in_string = false;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (v[i] == '"') in_string = !in_string;
            if (v[i] == '#' && !in_string) return v.substr(0, i);
        }
        return v;
    }

    std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace lrtc
