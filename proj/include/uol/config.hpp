#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace uol {

/// Flat key-value configuration: `key = value` lines, `[dotted.prefix]`
/// section headers, `#` comments. Keys are section-joined with dots.
class Config {
public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line, section;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            std::string s = trim(line);
            if (s.empty() || s[0] == '#') continue;
            if (s.front() == '[') {
                if (s.back() != ']')
                    throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                                ": malformed section header");
                section = trim(s.substr(1, s.size() - 2));
                continue;
            }
            std::size_t eq = s.find('=');
            if (eq == std::string::npos)
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                            ": expected key = value");
            std::string key = trim(s.substr(0, eq));
            std::string value = trim(s.substr(eq + 1));
            if (key.empty())
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) + ": empty key");
            if (!section.empty()) key = section + "." + key;
            if (cfg.kv_.count(key))
                throw std::invalid_argument(origin + ":" + std::to_string(lineno) +
                                            ": duplicate key " + key);
            cfg.kv_[key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cannot open config file " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return kv_.count(key) != 0; }

    std::string get(const std::string& key) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) throw std::invalid_argument("missing config key: " + key);
        used_.insert(key);
        return it->second;
    }

    std::string get_or(const std::string& key, const std::string& fallback) const {
        auto it = kv_.find(key);
        if (it == kv_.end()) return fallback;
        used_.insert(key);
        return it->second;
    }

    double get_real(const std::string& key) const { return parse_real(get(key), key); }

    double get_real_or(const std::string& key, double fallback) const {
        return has(key) ? get_real(key) : fallback;
    }

    std::uint64_t get_uint(const std::string& key) const {
        const std::string v = get(key);
        try {
            std::size_t pos = 0;
            std::uint64_t u = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return u;
        } catch (...) {
            throw std::invalid_argument("config key " + key + ": expected unsigned integer, got '" +
                                        v + "'");
        }
    }

    std::uint64_t get_uint_or(const std::string& key, std::uint64_t fallback) const {
        return has(key) ? get_uint(key) : fallback;
    }

    bool get_bool_or(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        std::string v = get(key);
        if (v == "true" || v == "on" || v == "1") return true;
        if (v == "false" || v == "off" || v == "0") return false;
        throw std::invalid_argument("config key " + key + ": expected boolean, got '" + v + "'");
    }

    std::vector<std::string> get_list(const std::string& key) const {
        std::vector<std::string> out;
        std::string v = get(key);
        std::size_t start = 0;
        while (start <= v.size()) {
            std::size_t comma = v.find(',', start);
            std::string item =
                trim(comma == std::string::npos ? v.substr(start) : v.substr(start, comma - start));
            if (!item.empty()) out.push_back(item);
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return out;
    }

    std::vector<double> get_real_list(const std::string& key) const {
        std::vector<double> out;
        for (const std::string& s : get_list(key)) out.push_back(parse_real(s, key));
        return out;
    }

    /// Keys never read through a getter; nonempty means the config holds
    /// entries the harness does not understand.
    std::vector<std::string> unused_keys() const {
        std::vector<std::string> out;
        for (const auto& [k, v] : kv_)
            if (!used_.count(k)) out.push_back(k);
        return out;
    }

    /// Scalar values accept plain decimals and p/q fractions (so ratios like
    /// -1/3 stay exact to the last bit of the parse).
    static double parse_real(const std::string& s, const std::string& key) {
        try {
            std::size_t slash = s.find('/');
            if (slash != std::string::npos) {
                double num = std::stod(trim(s.substr(0, slash)));
                double den = std::stod(trim(s.substr(slash + 1)));
                if (den == 0.0) throw std::invalid_argument("");
                return num / den;
            }
            std::size_t pos = 0;
            double d = std::stod(s, &pos);
            if (pos != s.size()) throw std::invalid_argument("");
            return d;
        } catch (...) {
            throw std::invalid_argument("config key " + key + ": expected number, got '" + s + "'");
        }
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t a = s.find_first_not_of(" \t\r\n");
        if (a == std::string::npos) return "";
        std::size_t b = s.find_last_not_of(" \t\r\n");
        return s.substr(a, b - a + 1);
    }

    std::map<std::string, std::string> kv_;
    mutable std::set<std::string> used_;
};

} // namespace uol
