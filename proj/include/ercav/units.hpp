#pragma once

#include <array>
#include <cctype>
#include <cstdlib>
#include <string>
#include <string_view>

#include "ercav/errors.hpp"

namespace ercav {

/// Dimension classes accepted at the CLI/config boundary. Internally
/// everything is SI base units; the suffix is required wherever a dimension
/// is, so a bare number can never be misread.
enum class UnitKind { dimensionless, length, time, frequency, inverse_length };

namespace detail {

struct UnitSuffix {
    std::string_view suffix;
    UnitKind kind;
    double factor;
};

// Longest suffixes first so "ms" wins over "s" and "ghz" over "hz".
inline constexpr std::array<UnitSuffix, 8> kUnitTable{{
    {"/cm", UnitKind::inverse_length, 100.0},
    {"thz", UnitKind::frequency, 1e12},
    {"ghz", UnitKind::frequency, 1e9},
    {"nm", UnitKind::length, 1e-9},
    {"um", UnitKind::length, 1e-6},
    {"ms", UnitKind::time, 1e-3},
    {"hz", UnitKind::frequency, 1.0},
    {"s", UnitKind::time, 1.0},
}};

inline std::string lowercase(std::string_view s) {
    std::string out(s);
    for (char& c : out)
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

}  // namespace detail

inline std::string_view unit_kind_name(UnitKind kind) {
    switch (kind) {
    case UnitKind::dimensionless:
        return "dimensionless";
    case UnitKind::length:
        return "length (nm, um)";
    case UnitKind::time:
        return "time (ms, s)";
    case UnitKind::frequency:
        return "frequency (hz, ghz, thz)";
    case UnitKind::inverse_length:
        return "inverse length (/cm)";
    }
    return "?";
}

/// Parses "11.4ms", "1536nm", "24.5/cm", ... into SI base units, enforcing
/// that the suffix matches the expected dimension. Dimensionless values must
/// be bare numbers.
inline double parse_quantity(std::string_view text, UnitKind kind) {
    std::string s = detail::lowercase(text);
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
        s.erase(s.begin());
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    if (s.empty())
        throw usage_error("empty value where a " + std::string(unit_kind_name(kind)) +
                          " was expected");

    const detail::UnitSuffix* match = nullptr;
    for (const auto& u : detail::kUnitTable) {
        if (s.size() > u.suffix.size() && s.ends_with(u.suffix)) {
            match = &u;
            break;
        }
    }

    const std::string number = match ? s.substr(0, s.size() - match->suffix.size()) : s;
    char* after = nullptr;
    const double value = std::strtod(number.c_str(), &after);
    if (after != number.c_str() + number.size() || number.empty())
        throw usage_error("cannot parse '" + std::string(text) + "' as a number with unit");

    if (kind == UnitKind::dimensionless) {
        if (match)
            throw usage_error("'" + std::string(text) + "' carries a unit, expected a bare number");
        return value;
    }
    if (!match)
        throw usage_error("'" + std::string(text) + "' is missing a unit suffix; expected " +
                          std::string(unit_kind_name(kind)));
    if (match->kind != kind)
        throw usage_error("'" + std::string(text) + "' has the wrong dimension; expected " +
                          std::string(unit_kind_name(kind)));
    return value * match->factor;
}

}  // namespace ercav
