#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fkmc/errors.hpp"
#include "fkmc/expr.hpp"

namespace fkmc {

/// Flat sectioned key-value configuration (INI style):
///   [section]
///   key = value        # '#' and ';' start comments
/// Keys are unique per section; values are free text up to the comment.
struct Config {
    std::map<std::string, std::map<std::string, std::string>> sections;

    static Config parse(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find_first_of("#;");
            if (hash != std::string::npos) line.erase(hash);
            auto trim = [](std::string s) {
                const auto a = s.find_first_not_of(" \t\r\n");
                if (a == std::string::npos) return std::string();
                const auto b = s.find_last_not_of(" \t\r\n");
                return s.substr(a, b - a + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw ConfigError("line " + std::to_string(lineno) + ": malformed section");
                section = trim(line.substr(1, line.size() - 2));
                cfg.sections[section];
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            cfg.sections[section][key] = value;
        }
        return cfg;
    }

    bool has(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        return s != sections.end() && s->second.count(key) > 0;
    }
    std::string get(const std::string& section, const std::string& key) const {
        const auto s = sections.find(section);
        if (s == sections.end() || !s->second.count(key))
            throw ConfigError("missing config key [" + section + "] " + key);
        return s->second.at(key);
    }
    std::string get_or(const std::string& section, const std::string& key,
                       const std::string& fallback) const {
        return has(section, key) ? get(section, key) : fallback;
    }
    double get_double(const std::string& section, const std::string& key) const {
        const std::string v = get(section, key);
        try {
            std::size_t used = 0;
            const double d = std::stod(v, &used);
            if (used != v.size()) throw std::invalid_argument(v);
            return d;
        } catch (const std::exception&) {
            throw ConfigError("[" + section + "] " + key + ": not a number: " + v);
        }
    }
    double get_double_or(const std::string& section, const std::string& key,
                         double fallback) const {
        return has(section, key) ? get_double(section, key) : fallback;
    }
    std::uint64_t get_u64_or(const std::string& section, const std::string& key,
                             std::uint64_t fallback) const {
        if (!has(section, key)) return fallback;
        const std::string v = get(section, key);
        try {
            return std::stoull(v);
        } catch (const std::exception&) {
            throw ConfigError("[" + section + "] " + key + ": not an integer: " + v);
        }
    }
    bool get_bool_or(const std::string& section, const std::string& key, bool fallback) const {
        if (!has(section, key)) return fallback;
        std::string v = get(section, key);
        std::transform(v.begin(), v.end(), v.begin(), ::tolower);
        if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
        if (v == "false" || v == "0" || v == "no" || v == "off") return false;
        throw ConfigError("[" + section + "] " + key + ": not a boolean: " + v);
    }
    std::vector<double> get_double_list_or(const std::string& section, const std::string& key,
                                           std::vector<double> fallback) const {
        if (!has(section, key)) return fallback;
        std::istringstream in(get(section, key));
        std::vector<double> out;
        double v;
        while (in >> v) out.push_back(v);
        return out;
    }

    /// Canonical dump: sorted sections and keys (maps keep them sorted).
    std::string dump() const {
        std::string out;
        for (const auto& [sec, kv] : sections) {
            out += "[" + sec + "]\n";
            for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
        }
        return out;
    }

    /// User constants plus the always-available pi.
    std::map<std::string, double> constants() const {
        std::map<std::string, double> consts;
        consts["pi"] = std::numbers::pi;
        const auto s = sections.find("constants");
        if (s != sections.end()) {
            for (const auto& [k, v] : s->second) {
                try {
                    consts[k] = std::stod(v);
                } catch (const std::exception&) {
                    throw ConfigError("[constants] " + k + ": not a number: " + v);
                }
            }
        }
        return consts;
    }
};

/// Compiled scalar expression with its environment bindings.
class CompiledExpr {
public:
    CompiledExpr() = default;
    CompiledExpr(const std::string& source, std::map<std::string, double> constants)
        : source_(source), node_(expr::parse(source)), constants_(std::move(constants)) {}

    double operator()(const Vec& x, double t) const {
        expr::Env env;
        env.x = &x;
        env.t = t;
        env.constants = &constants_;
        return expr::eval(node_, env);
    }
    double scalar(double t) const {
        expr::Env env;
        env.t = t;
        env.constants = &constants_;
        return expr::eval(node_, env);
    }
    double of_x(double x) const {
        Vec v{x};
        return (*this)(v, 0.0);
    }
    /// k(t, y, x) for space-time kernels
    double space_time(double t, double y, double x) const {
        Vec v{x};
        std::map<std::string, double> locals{{"y", y}};
        expr::Env env;
        env.x = &v;
        env.t = t;
        env.constants = &constants_;
        env.locals = &locals;
        return expr::eval(node_, env);
    }

    const std::string& source() const { return source_; }
    bool valid() const { return node_ != nullptr; }

    /// Evaluates once at a smoke-test point so configuration errors surface
    /// before any simulation starts.
    void smoke_test(const Vec& x, double t) const {
        expr::Env env;
        env.x = &x;
        env.t = t;
        env.constants = &constants_;
        std::vector<std::string> unknown;
        expr::collect_unknowns(node_, env, unknown);
        if (!unknown.empty())
            throw UnknownIdentifier("unknown identifier '" + unknown.front() + "' in '" +
                                    source_ + "'");
        (void)expr::eval(node_, env);
    }

private:
    std::string source_;
    expr::NodePtr node_;
    std::map<std::string, double> constants_;
};

}  // namespace fkmc
