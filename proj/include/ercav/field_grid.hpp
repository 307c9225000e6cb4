#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ercav/errors.hpp"

namespace ercav {

/// Vector mode field and relative permittivity sampled at the cell centers of
/// a regular 3D grid. Storage is x-fastest: index = ix + nx*(iy + ny*iz).
/// Immutable by convention once generated or loaded.
struct FieldGrid {
    std::array<std::size_t, 3> dims{};  // nx, ny, nz; each >= 2
    std::array<double, 3> spacing{};    // dx, dy, dz in m
    std::vector<std::array<double, 3>> field; // E per cell, arbitrary common scale
    std::vector<double> eps;                  // relative permittivity, >= 1

    std::size_t cell_count() const { return dims[0] * dims[1] * dims[2]; }

    std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
        return ix + dims[0] * (iy + dims[1] * iz);
    }

    double cell_volume() const { return spacing[0] * spacing[1] * spacing[2]; }

    /// eps * |E|^2 of one cell, the integrand of the mode-volume quadrature.
    double energy_density(std::size_t i) const {
        const auto& e = field[i];
        return eps[i] * (e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    }

    void validate() const {
        for (int a = 0; a < 3; ++a) {
            if (dims[a] < 2)
                throw std::domain_error("grid dims must be >= 2 in every direction");
            if (!(spacing[a] > 0.0) || !std::isfinite(spacing[a]))
                throw std::domain_error("grid spacing must be positive and finite");
        }
        if (field.size() != cell_count() || eps.size() != cell_count())
            throw std::domain_error("grid storage does not match dims");
        double max_density = 0.0;
        for (std::size_t i = 0; i < eps.size(); ++i) {
            if (!(eps[i] >= 1.0) || !std::isfinite(eps[i]))
                throw std::domain_error("relative permittivity must be finite and >= 1");
            const auto& e = field[i];
            if (!std::isfinite(e[0]) || !std::isfinite(e[1]) || !std::isfinite(e[2]))
                throw std::domain_error("field values must be finite");
            max_density = std::max(max_density, energy_density(i));
        }
        if (!(max_density > 0.0))
            throw std::domain_error("field is zero everywhere");
    }
};

/// Analytic stand-in for a triangular-nanobeam cavity mode: a standing wave
/// along the beam under a Gaussian envelope, with a transverse bump confined
/// to the equilateral triangular cross-section. Not an eigenmode; its value is
/// that every integral of it can be checked independently.
struct SurrogateModeParams {
    double beam_side = 1.38e-6;       // triangle edge length, m
    double period = 570e-9;           // standing-wave period along z, m
    double n_mat = 1.785;             // refractive index of the dielectric
    double envelope_sigma = 2.0e-6;   // Gaussian sigma along z; +inf disables
    double transverse_sigma = 3.45e-7; // sigma of the transverse bump; +inf = uniform
    std::array<std::size_t, 3> dims{40, 36, 168};
    std::array<double, 3> spacing{40e-9, 40e-9, 570e-9 / 8.0};
};

namespace detail {

// Equilateral triangle centered on its centroid, one edge on top (flat side
// at y = h/3, apex at y = -2h/3).
inline bool inside_triangle(double x, double y, double side) {
    const double h = side * std::numbers::sqrt3 / 2.0;
    const double ax = -side / 2.0, ay = h / 3.0;
    const double bx = side / 2.0, by = h / 3.0;
    const double cx = 0.0, cy = -2.0 * h / 3.0;
    auto cross = [](double ux, double uy, double vx, double vy) {
        return ux * vy - uy * vx;
    };
    const double d1 = cross(bx - ax, by - ay, x - ax, y - ay);
    const double d2 = cross(cx - bx, cy - by, x - bx, y - by);
    const double d3 = cross(ax - cx, ay - cy, x - cx, y - cy);
    const bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    const bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

}  // namespace detail

inline FieldGrid surrogate_mode(const SurrogateModeParams& p = {}) {
    if (!(p.beam_side > 0) || !(p.period > 0) || !(p.envelope_sigma > 0) ||
        !(p.transverse_sigma > 0))
        throw std::domain_error("surrogate mode lengths must be positive");
    if (!(p.n_mat >= 1.0))
        throw std::domain_error("material index must be >= 1");
    for (int a = 0; a < 3; ++a)
        if (p.dims[a] < 2 || !(p.spacing[a] > 0))
            throw std::domain_error("surrogate grid dims/spacing invalid");
    if (p.period / p.spacing[2] < 8.0 - 1e-9)
        throw config_error("grid too coarse to resolve the standing wave: fewer than 8 cells per period");
    const double height = p.beam_side * std::numbers::sqrt3 / 2.0;
    if (static_cast<double>(p.dims[0]) * p.spacing[0] < p.beam_side ||
        static_cast<double>(p.dims[1]) * p.spacing[1] < height)
        throw config_error("grid cross-section does not cover the beam");

    FieldGrid g;
    g.dims = p.dims;
    g.spacing = p.spacing;
    g.field.assign(g.cell_count(), {0.0, 0.0, 0.0});
    g.eps.assign(g.cell_count(), 1.0);

    const double eps_mat = p.n_mat * p.n_mat;
    for (std::size_t iz = 0; iz < p.dims[2]; ++iz) {
        const double z = (static_cast<double>(iz) + 0.5 - 0.5 * static_cast<double>(p.dims[2])) * p.spacing[2];
        double axial = std::cos(std::numbers::pi * z / p.period);
        if (std::isfinite(p.envelope_sigma))
            axial *= std::exp(-z * z / (2.0 * p.envelope_sigma * p.envelope_sigma));
        for (std::size_t iy = 0; iy < p.dims[1]; ++iy) {
            const double y = (static_cast<double>(iy) + 0.5 - 0.5 * static_cast<double>(p.dims[1])) * p.spacing[1];
            for (std::size_t ix = 0; ix < p.dims[0]; ++ix) {
                const double x = (static_cast<double>(ix) + 0.5 - 0.5 * static_cast<double>(p.dims[0])) * p.spacing[0];
                if (!detail::inside_triangle(x, y, p.beam_side))
                    continue;
                const std::size_t i = g.index(ix, iy, iz);
                g.eps[i] = eps_mat;
                double transverse = 1.0;
                if (std::isfinite(p.transverse_sigma))
                    transverse = std::exp(-(x * x + y * y) /
                                          (2.0 * p.transverse_sigma * p.transverse_sigma));
                g.field[i][0] = axial * transverse;
            }
        }
    }
    g.validate();
    return g;
}

// --- FIELDGRID v1 text format ------------------------------------------------
//
//   FIELDGRID v1
//   nx ny nz
//   dx dy dz                      (meters)
//   Ex Ey Ez eps                  (one record per line, x-fastest order)
//
// Writers emit 17 significant digits so finite values round-trip bit-exactly.

inline void write_field_grid(const FieldGrid& grid, std::ostream& out) {
    grid.validate();
    out << "FIELDGRID v1\n";
    out << grid.dims[0] << ' ' << grid.dims[1] << ' ' << grid.dims[2] << '\n';
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g\n", grid.spacing[0], grid.spacing[1],
                  grid.spacing[2]);
    out << buf;
    for (std::size_t i = 0; i < grid.cell_count(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g %.17g %.17g %.17g\n", grid.field[i][0],
                      grid.field[i][1], grid.field[i][2], grid.eps[i]);
        out << buf;
    }
}

inline void write_field_grid(const FieldGrid& grid, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw usage_error("cannot open '" + path + "' for writing");
    write_field_grid(grid, out);
    if (!out)
        throw std::runtime_error("write failed for '" + path + "'");
}

namespace detail {

inline bool next_line(std::istream& in, std::string& line, std::size_t& lineno) {
    if (!std::getline(in, line))
        return false;
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    ++lineno;
    return true;
}

inline std::vector<double> parse_doubles(const std::string& line, std::size_t expected,
                                         std::size_t lineno) {
    std::vector<double> out;
    const char* p = line.c_str();
    const char* end = p + line.size();
    while (p < end) {
        while (p < end && (*p == ' ' || *p == '\t'))
            ++p;
        if (p >= end)
            break;
        char* after = nullptr;
        const double v = std::strtod(p, &after);
        if (after == p)
            throw parse_error("expected a decimal float, got '" + std::string(p) + "'", lineno);
        if (!std::isfinite(v))
            throw parse_error("non-finite value rejected", lineno);
        out.push_back(v);
        p = after;
    }
    if (out.size() != expected)
        throw parse_error("expected " + std::to_string(expected) + " values, got " +
                              std::to_string(out.size()),
                          lineno);
    return out;
}

}  // namespace detail

inline FieldGrid load_field_grid(std::istream& in) {
    std::string line;
    std::size_t lineno = 0;
    if (!detail::next_line(in, line, lineno))
        throw parse_error("empty file: missing 'FIELDGRID v1' header", 1);
    if (line != "FIELDGRID v1")
        throw parse_error("bad header: expected 'FIELDGRID v1'", lineno);

    if (!detail::next_line(in, line, lineno))
        throw parse_error("missing grid dimensions line", lineno + 1);
    FieldGrid g;
    {
        const auto d = detail::parse_doubles(line, 3, lineno);
        for (int a = 0; a < 3; ++a) {
            if (!(d[a] >= 2) || d[a] != std::floor(d[a]) || d[a] > 1e9)
                throw parse_error("grid dimensions must be integers >= 2", lineno);
            g.dims[a] = static_cast<std::size_t>(d[a]);
        }
    }
    if (!detail::next_line(in, line, lineno))
        throw parse_error("missing grid spacing line", lineno + 1);
    {
        const auto s = detail::parse_doubles(line, 3, lineno);
        for (int a = 0; a < 3; ++a)
            g.spacing[a] = s[a];
    }

    const std::size_t n = g.dims[0] * g.dims[1] * g.dims[2];
    g.field.reserve(n);
    g.eps.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!detail::next_line(in, line, lineno))
            throw parse_error("unexpected end of file in field records: expected " +
                                  std::to_string(n) + " records, got " + std::to_string(i),
                              lineno + 1);
        const auto v = detail::parse_doubles(line, 4, lineno);
        g.field.push_back({v[0], v[1], v[2]});
        g.eps.push_back(v[3]);
    }
    g.validate();
    return g;
}

inline FieldGrid load_field_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw usage_error("cannot open '" + path + "'");
    return load_field_grid(in);
}

}  // namespace ercav
