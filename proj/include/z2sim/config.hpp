#ifndef Z2SIM_CONFIG_HPP
#define Z2SIM_CONFIG_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "z2sim/common.hpp"
#include "z2sim/lattice.hpp"

namespace z2sim {

// Flat key = value configuration: one assignment per line, '#' starts a
// comment, dotted prefixes group related keys.  Unknown keys are rejected so
// typos fail loudly.
class Config {
  public:
    static const std::set<std::string>& known_keys() {
        static const std::set<std::string> keys = {
            "lattice.lx", "lattice.ly", "engine", "seed",
            "schedule.direction", "schedule.total_time", "schedule.steps",
            "schedule.final_ratio", "schedule.order", "schedule.sampling",
            "sweep.min", "sweep.max", "sweep.points", "sweep.scale",
            "observable.loops", "observable.energy", "observable.gauge",
            "trajectory", "record_every", "include_exact",
            "output.state_dump",
            "photonics.kind", "photonics.j", "photonics.l", "photonics.c",
            "gradient.p", "gradient.q", "gradient.g",
            "schedule_check.df", "schedule_check.size_cap", "schedule_check.residual_mode",
            "noise.modes", "noise.strengths",
            "budget.c_min", "budget.c_max", "budget.points", "budget.t_target",
            "budget.order", "budget.trotter_prefactor", "budget.gate_prefactor",
            "budget.gate_exponent", "budget.error_cap",
            "trotter.m_values", "trotter.lambda_e", "trotter.lambda_b", "trotter.t",
            "wilson.state",
            "dual.tolerance", "dual.max_iterations", "dual.dense_threshold",
        };
        return keys;
    }

    static Config from_file(const std::string& path) {
        std::ifstream f(path);
        if (!f) throw ConfigError("cannot open config file " + path);
        std::stringstream ss;
        ss << f.rdbuf();
        return from_text(ss.str());
    }

    static Config from_text(const std::string& text) {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            const auto trim = [](std::string s) {
                const auto b = s.find_first_not_of(" \t\r");
                const auto e = s.find_last_not_of(" \t\r");
                return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
            };
            line = trim(line);
            if (line.empty()) continue;
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
            const std::string key = trim(line.substr(0, eq));
            const std::string value = trim(line.substr(eq + 1));
            if (!known_keys().count(key))
                throw ConfigError("unknown config key '" + key + "'");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    void set(const std::string& key, const std::string& value) {
        if (!known_keys().count(key)) throw ConfigError("unknown config key '" + key + "'");
        values_[key] = value;
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const double v = std::stod(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("key '" + key + "': cannot parse '" + it->second + "' as a number");
        }
    }

    long get_long(const std::string& key, long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        try {
            std::size_t pos = 0;
            const long v = std::stol(it->second, &pos);
            if (pos != it->second.size()) throw std::invalid_argument("");
            return v;
        } catch (...) {
            throw ConfigError("key '" + key + "': cannot parse '" + it->second + "' as an integer");
        }
    }

    int get_int(const std::string& key, int fallback) const {
        return static_cast<int>(get_long(key, fallback));
    }

    bool get_bool(const std::string& key, bool fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        if (it->second == "true" || it->second == "1") return true;
        if (it->second == "false" || it->second == "0") return false;
        throw ConfigError("key '" + key + "': expected true/false");
    }

    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<double> out;
        std::istringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ','))
            try {
                out.push_back(std::stod(tok));
            } catch (...) {
                throw ConfigError("key '" + key + "': bad list entry '" + tok + "'");
            }
        if (out.empty()) throw ConfigError("key '" + key + "': empty list");
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<std::string> out;
        std::istringstream ss(it->second);
        std::string tok;
        while (std::getline(ss, tok, ',')) {
            const auto b = tok.find_first_not_of(" \t");
            const auto e = tok.find_last_not_of(" \t");
            if (b != std::string::npos) out.push_back(tok.substr(b, e - b + 1));
        }
        return out;
    }

    // "ax ay w h ; ax ay w h ; ..."
    std::vector<LoopSpec> get_loops(const std::string& key,
                                    const std::vector<LoopSpec>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<LoopSpec> out;
        std::istringstream groups(it->second);
        std::string group;
        while (std::getline(groups, group, ';')) {
            std::istringstream ss(group);
            LoopSpec c;
            if (!(ss >> c.anchor_x >> c.anchor_y >> c.width >> c.height))
                throw ConfigError("key '" + key + "': expected 'ax ay w h' groups");
            out.push_back(c);
        }
        if (out.empty()) throw ConfigError("key '" + key + "': no loops given");
        return out;
    }

    // canonical serialization (sorted keys), used for the output hash
    std::string canonical() const {
        std::string out;
        for (const auto& [k, v] : values_) {
            out += k;
            out += " = ";
            out += v;
            out += '\n';
        }
        return out;
    }

    std::uint64_t hash() const {
        // FNV-1a over the canonical text
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for (unsigned char c : canonical()) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

  private:
    std::map<std::string, std::string> values_;
};

}  // namespace z2sim

#endif
