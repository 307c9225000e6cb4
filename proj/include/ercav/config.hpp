#pragma once

#include <fstream>
#include <istream>
#include <map>
#include <set>
#include <string>

#include "ercav/errors.hpp"
#include "ercav/units.hpp"

namespace ercav {

/// Flat key=value configuration. One pair per line, '#' starts a comment,
/// values keep their unit suffixes until a consumer resolves them against a
/// dimension. Duplicate or unrecognized keys are usage errors that name the
/// offending line.
inline std::map<std::string, std::string> parse_config(std::istream& in,
                                                       const std::set<std::string>& known_keys) {
    std::map<std::string, std::string> values;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t");
            if (b == std::string::npos)
                return std::string();
            const auto e = s.find_last_not_of(" \t");
            return s.substr(b, e - b + 1);
        };
        line = trim(line);
        if (line.empty())
            continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw usage_error("config line " + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw usage_error("config line " + std::to_string(lineno) +
                              ": empty key or value");
        if (!known_keys.contains(key))
            throw usage_error("config line " + std::to_string(lineno) + ": unknown key '" + key +
                              "'");
        if (values.contains(key))
            throw usage_error("config line " + std::to_string(lineno) + ": duplicate key '" +
                              key + "'");
        values.emplace(key, value);
    }
    return values;
}

inline std::map<std::string, std::string> load_config(const std::string& path,
                                                      const std::set<std::string>& known_keys) {
    std::ifstream in(path);
    if (!in)
        throw usage_error("cannot open config file '" + path + "'");
    return parse_config(in, known_keys);
}

}  // namespace ercav
