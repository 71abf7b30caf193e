#pragma once

// Declarative key/value scenario files:
//
//   # comment
//   name = scenario-2
//   rx_radius = 0.1pi        # numbers accept a "pi" multiplier suffix
//   sweep_p_deg2 = 0.001, 0.01, 0.1
//
// Later assignments override earlier ones.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace plume {

class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& in, const std::string& origin = "<stream>");
    static KeyValueConfig parse_file(const std::string& path);

    bool has(const std::string& key) const { return entries_.count(key) != 0; }

    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_number(const std::string& key, double fallback) const;
    std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
    bool get_bool(const std::string& key, bool fallback) const;
    std::vector<double> get_number_list(const std::string& key) const;

    /// Raw entries, for diagnostics.
    const std::map<std::string, std::string>& entries() const { return entries_; }

    /// Parses a scalar that may carry a trailing "pi" multiplier.
    static double parse_number(const std::string& text);

private:
    std::map<std::string, std::string> entries_;
    std::string origin_;
};

}  // namespace plume
