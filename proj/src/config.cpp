#include "plume/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "plume/errors.hpp"

namespace plume {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(std::istream& in, const std::string& origin) {
    KeyValueConfig cfg;
    cfg.origin_ = origin;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) {
            line.erase(hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(origin + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        if (key.empty()) {
            throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
        }
        cfg.entries_[key] = value;
    }
    return cfg;
}

KeyValueConfig KeyValueConfig::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse(in, path);
}

std::string KeyValueConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second;
}

double KeyValueConfig::parse_number(const std::string& text) {
    std::string t = trim(text);
    double mult = 1.0;
    if (t.size() >= 2 && t.compare(t.size() - 2, 2, "pi") == 0) {
        mult = kPi;
        t = trim(t.substr(0, t.size() - 2));
        if (t.empty() || t == "-") {
            t += "1";
        }
    }
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(t, &used);
    } catch (const std::exception&) {
        throw ConfigError("not a number: '" + text + "'");
    }
    if (used != t.size()) {
        throw ConfigError("trailing characters in number: '" + text + "'");
    }
    return v * mult;
}

double KeyValueConfig::get_number(const std::string& key, double fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        return parse_number(it->second);
    } catch (const ConfigError& e) {
        throw ConfigError(origin_ + ": key '" + key + "': " + e.what());
    }
}

std::int64_t KeyValueConfig::get_int(const std::string& key, std::int64_t fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    try {
        std::size_t used = 0;
        const std::int64_t v = std::stoll(it->second, &used);
        if (used != it->second.size()) {
            throw ConfigError("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError(origin_ + ": key '" + key + "' is not an integer: '" + it->second +
                          "'");
    }
}

bool KeyValueConfig::get_bool(const std::string& key, bool fallback) const {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    const std::string& v = it->second;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw ConfigError(origin_ + ": key '" + key + "' is not a boolean: '" + v + "'");
}

std::vector<double> KeyValueConfig::get_number_list(const std::string& key) const {
    const auto it = entries_.find(key);
    std::vector<double> out;
    if (it == entries_.end()) return out;
    std::stringstream ss(it->second);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const std::string t = trim(item);
        if (t.empty()) continue;
        out.push_back(parse_number(t));
    }
    return out;
}

}  // namespace plume
