#pragma once

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "ercav/ensemble.hpp"
#include "ercav/errors.hpp"
#include "ercav/fitting.hpp"

namespace ercav {

namespace detail {

inline std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::vector<double> parse_csv_row(const std::string& line, std::size_t min_cols,
                                         std::size_t max_cols, std::size_t lineno) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= line.size()) {
        const std::size_t comma = line.find(',', start);
        const std::string cell =
            line.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
        char* after = nullptr;
        const double v = std::strtod(cell.c_str(), &after);
        if (after == cell.c_str() || !std::isfinite(v))
            throw parse_error("expected a finite number, got '" + cell + "'", lineno);
        out.push_back(v);
        if (comma == std::string::npos)
            break;
        start = comma + 1;
    }
    if (out.size() < min_cols || out.size() > max_cols)
        throw parse_error("wrong number of columns", lineno);
    return out;
}

}  // namespace detail

// --- decay traces: header `time_s,counts`, one row per bin start ------------

inline void write_decay_csv(const DecayTrace& trace, std::ostream& out) {
    trace.validate();
    out << "time_s,counts\n";
    for (std::size_t i = 0; i < trace.counts.size(); ++i) {
        const double t = trace.t0 + static_cast<double>(i) * trace.bin_width;
        out << detail::fmt17(t) << ',' << detail::fmt17(trace.counts[i]) << '\n';
    }
}

inline void write_decay_csv(const DecayTrace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw usage_error("cannot open '" + path + "' for writing");
    write_decay_csv(trace, out);
}

inline DecayTrace load_decay_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!detail::next_line(in, line, lineno) || line != "time_s,counts")
        throw parse_error("expected header 'time_s,counts'", 1);
    std::vector<double> times;
    DecayTrace trace;
    while (detail::next_line(in, line, lineno)) {
        if (line.empty())
            continue;
        const auto row = detail::parse_csv_row(line, 2, 2, lineno);
        times.push_back(row[0]);
        trace.counts.push_back(row[1]);
    }
    if (times.size() < 2)
        throw parse_error("a decay trace needs at least 2 bins", lineno);
    trace.t0 = times[0];
    trace.bin_width = times[1] - times[0];
    if (!(trace.bin_width > 0))
        throw parse_error("times must be strictly increasing", 3);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double expected = trace.t0 + static_cast<double>(i) * trace.bin_width;
        if (std::abs(times[i] - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
            throw parse_error("time bins are not uniformly spaced", i + 2);
    }
    trace.validate();
    return trace;
}

inline DecayTrace load_decay_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw usage_error("cannot open '" + path + "'");
    return load_decay_csv(in);
}

// --- spectra: header `frequency_hz,transmission[,sigma]` ---------------------

inline void write_spectrum_csv(const Spectrum& spec, std::ostream& out) {
    spec.validate();
    const bool with_sigma = !spec.sigma.empty();
    out << (with_sigma ? "frequency_hz,transmission,sigma\n" : "frequency_hz,transmission\n");
    for (std::size_t i = 0; i < spec.nu.size(); ++i) {
        out << detail::fmt17(spec.nu[i]) << ',' << detail::fmt17(spec.transmission[i]);
        if (with_sigma)
            out << ',' << detail::fmt17(spec.sigma[i]);
        out << '\n';
    }
}

inline void write_spectrum_csv(const Spectrum& spec, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw usage_error("cannot open '" + path + "' for writing");
    write_spectrum_csv(spec, out);
}

inline Spectrum load_spectrum_csv(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    bool with_sigma = false;
    if (!detail::next_line(in, line, lineno))
        throw parse_error("empty spectrum file", 1);
    if (line == "frequency_hz,transmission,sigma")
        with_sigma = true;
    else if (line != "frequency_hz,transmission")
        throw parse_error("expected header 'frequency_hz,transmission[,sigma]'", 1);
    Spectrum spec;
    while (detail::next_line(in, line, lineno)) {
        if (line.empty())
            continue;
        const auto row = detail::parse_csv_row(line, with_sigma ? 3 : 2, with_sigma ? 3 : 2, lineno);
        spec.nu.push_back(row[0]);
        spec.transmission.push_back(row[1]);
        if (with_sigma)
            spec.sigma.push_back(row[2]);
    }
    spec.validate();
    return spec;
}

inline Spectrum load_spectrum_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw usage_error("cannot open '" + path + "'");
    return load_spectrum_csv(in);
}

// --- enhancement distributions as JSON ---------------------------------------

inline nlohmann::json distribution_to_json(const EnhancementDistribution& dist) {
    dist.validate();
    return nlohmann::json{{"bin_edges", dist.bin_edges},
                          {"weights", dist.weights},
                          {"uncoupled_fraction", dist.uncoupled_fraction}};
}

inline EnhancementDistribution distribution_from_json(const nlohmann::json& j) {
    EnhancementDistribution dist;
    try {
        dist.bin_edges = j.at("bin_edges").get<std::vector<double>>();
        dist.weights = j.at("weights").get<std::vector<double>>();
        dist.uncoupled_fraction = j.at("uncoupled_fraction").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad distribution JSON: ") + e.what(), 1);
    }
    dist.validate();
    return dist;
}

inline EnhancementDistribution load_distribution_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw usage_error("cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad JSON: ") + e.what(), 1);
    }
    return distribution_from_json(j);
}

inline void save_distribution_json(const EnhancementDistribution& dist, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw usage_error("cannot open '" + path + "' for writing");
    out << distribution_to_json(dist).dump(2) << '\n';
}

// --- fit reports --------------------------------------------------------------

inline nlohmann::json fit_report_json(const std::string& model_name, const FitResult& fit) {
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json errors = nlohmann::json::object();
    for (std::size_t i = 0; i < fit.param_names.size(); ++i) {
        params[fit.param_names[i]] = fit.params[i];
        errors[fit.param_names[i]] = fit.param_stderr[i];
    }
    nlohmann::json j{{"model", model_name}, {"params", params},    {"stderr", errors},
                     {"rss", fit.rss},      {"converged", fit.converged}, {"n_iter", fit.n_iter}};
    if (!fit.warnings.empty())
        j["warnings"] = fit.warnings;
    return j;
}

}  // namespace ercav
