#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "ercav/errors.hpp"
#include "ercav/field_grid.hpp"
#include "ercav/random.hpp"

namespace ercav {

/// Discrete distribution of per-ion Purcell factors. bin_edges[i] is the
/// volume-weighted mean enhancement of occupied histogram bin i (strictly
/// increasing), weights[i] the fraction of all ions in that bin. Ions outside
/// the coupled region are carried separately in uncoupled_fraction, so
/// uncoupled_fraction + sum(weights) == 1.
struct EnhancementDistribution {
    std::vector<double> bin_edges;
    std::vector<double> weights;
    double uncoupled_fraction = 0.0;

    void validate() const {
        if (bin_edges.size() != weights.size())
            throw std::domain_error("bin_edges and weights must have equal length");
        if (!(uncoupled_fraction >= 0.0) || !(uncoupled_fraction <= 1.0))
            throw std::domain_error("uncoupled_fraction must lie in [0, 1]");
        double total = uncoupled_fraction;
        double prev = -1.0;
        for (std::size_t i = 0; i < bin_edges.size(); ++i) {
            if (!(bin_edges[i] >= 0.0) || !std::isfinite(bin_edges[i]))
                throw std::domain_error("enhancement values must be finite and >= 0");
            if (!(bin_edges[i] > prev))
                throw std::domain_error("enhancement values must be strictly increasing");
            prev = bin_edges[i];
            if (!(weights[i] >= 0.0))
                throw std::domain_error("weights must be nonnegative");
            total += weights[i];
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::domain_error("uncoupled_fraction + sum(weights) must equal 1");
    }
};

/// Histogram of F(r) = f_max * |E(r).d|^2 / max|E|^2 over the coupled cells of
/// the material, weighted by cell volume. Cells of the material outside
/// `coupled_region` (empty mask = every material cell is coupled) feed
/// uncoupled_fraction. Bins are linear in [0, f_max]; empty bins are dropped
/// and each kept bin is represented by its weighted mean, so averages over the
/// distribution are binning-independent.
inline EnhancementDistribution enhancement_distribution(
    const FieldGrid& grid, const std::array<double, 3>& dipole_axis, double f_max,
    const std::vector<std::uint8_t>& coupled_region = {}, std::size_t n_bins = 64) {
    grid.validate();
    if (!(f_max > 0.0))
        throw std::domain_error("f_max must be positive");
    if (n_bins == 0)
        throw std::domain_error("n_bins must be positive");
    const double d2 = dipole_axis[0] * dipole_axis[0] + dipole_axis[1] * dipole_axis[1] +
                      dipole_axis[2] * dipole_axis[2];
    if (std::abs(d2 - 1.0) > 1e-9)
        throw std::domain_error("dipole axis must be a unit vector");
    const std::size_t n = grid.cell_count();
    if (!coupled_region.empty() && coupled_region.size() != n)
        throw std::domain_error("coupled_region mask size does not match the grid");

    double max_e2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& e = grid.field[i];
        max_e2 = std::max(max_e2, e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
    }

    std::vector<double> bin_weight(n_bins, 0.0);
    std::vector<double> bin_moment(n_bins, 0.0);
    std::size_t material_cells = 0;
    std::size_t coupled_cells = 0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(grid.eps[i] > 1.0))
            continue; // vacuum holds no ions
        ++material_cells;
        if (!coupled_region.empty() && !coupled_region[i])
            continue;
        ++coupled_cells;
        const auto& e = grid.field[i];
        const double proj = e[0] * dipole_axis[0] + e[1] * dipole_axis[1] + e[2] * dipole_axis[2];
        const double f = f_max * proj * proj / max_e2;
        std::size_t b = static_cast<std::size_t>(std::floor(f / f_max * static_cast<double>(n_bins)));
        if (b >= n_bins)
            b = n_bins - 1;
        bin_weight[b] += 1.0;
        bin_moment[b] += f;
    }
    if (material_cells == 0)
        throw std::domain_error("grid has no material cells (eps > 1 nowhere)");

    EnhancementDistribution dist;
    dist.uncoupled_fraction =
        static_cast<double>(material_cells - coupled_cells) / static_cast<double>(material_cells);
    for (std::size_t b = 0; b < n_bins; ++b) {
        if (bin_weight[b] == 0.0)
            continue;
        dist.bin_edges.push_back(bin_moment[b] / bin_weight[b]);
        dist.weights.push_back(bin_weight[b] / static_cast<double>(material_cells));
    }
    dist.validate();
    return dist;
}

/// Weighted mean enhancement of the coupled ions only; the uncoupled fraction
/// is reported separately by the distribution itself.
inline double average_enhancement(const EnhancementDistribution& dist) {
    dist.validate();
    double wsum = 0.0;
    double moment = 0.0;
    for (std::size_t i = 0; i < dist.bin_edges.size(); ++i) {
        wsum += dist.weights[i];
        moment += dist.weights[i] * dist.bin_edges[i];
    }
    if (!(wsum > 0.0))
        throw std::domain_error("no coupled ions: average enhancement undefined");
    return moment / wsum;
}

/// Pulsed photon-counting setup for decay traces.
struct DetectorConfig {
    double pulse_duration = 20e-3;    // s
    double repetition_period = 75e-3; // s
    double dark_rate = 0.0;           // counts/s
    double collection_scale = 1e3;    // expected counts at t = 0 per pulse
    std::uint64_t rng_seed = 0;

    void validate() const {
        if (!(pulse_duration > 0) || !(repetition_period > 0) ||
            !(pulse_duration < repetition_period))
            throw std::domain_error("pulse duration must be positive and shorter than the repetition period");
        if (!(dark_rate >= 0) || !(collection_scale >= 0))
            throw std::domain_error("rates and scales must be nonnegative");
    }
};

/// Time-binned photon counts. Times are measured from the start of the decay
/// window (end of the excitation pulse). Counts are integer-valued whenever
/// Poisson sampling is on; the noise-free expectation keeps full precision.
struct DecayTrace {
    double bin_width = 0.0;
    double t0 = 0.0;
    std::vector<double> counts;

    void validate() const {
        if (!(bin_width > 0))
            throw std::domain_error("bin width must be positive");
        for (double c : counts)
            if (!(c >= 0) || !std::isfinite(c))
                throw std::domain_error("counts must be finite and nonnegative");
    }
};

/// Forward model of the photoluminescence decay: each sub-population with
/// enhancement F decays at Gamma(F) = (1 + beta F) / tau_bulk, uncoupled ions
/// at 1/tau_bulk. The expected count in bin [t1, t2) is
///   collection_scale * sum_F w_F (exp(-Gamma t1) - exp(-Gamma t2)) / (Gamma dt)
/// plus dark counts, accumulated over n_pulses and Poisson-sampled with the
/// detector seed unless poisson_noise is false.
inline DecayTrace synthesize_decay(const EnhancementDistribution& dist, double beta,
                                   double tau_bulk, const DetectorConfig& det,
                                   std::size_t n_pulses, double bin_width, std::size_t n_bins,
                                   bool poisson_noise = true) {
    dist.validate();
    det.validate();
    if (!(beta > 0.0) || !(beta <= 1.0))
        throw std::domain_error("branching ratio must lie in (0, 1]");
    if (!(tau_bulk > 0.0))
        throw std::domain_error("bulk lifetime must be positive");
    if (!(bin_width > 0.0) || n_bins == 0 || n_pulses == 0)
        throw std::domain_error("trace binning and pulse count must be positive");
    const double window = det.repetition_period - det.pulse_duration;
    if (static_cast<double>(n_bins) * bin_width > window * (1.0 + 1e-12))
        throw config_error("requested trace is longer than the decay window between pulses");

    std::vector<double> rates;
    std::vector<double> pops;
    for (std::size_t i = 0; i < dist.bin_edges.size(); ++i) {
        rates.push_back((1.0 + beta * dist.bin_edges[i]) / tau_bulk);
        pops.push_back(dist.weights[i]);
    }
    if (dist.uncoupled_fraction > 0.0) {
        rates.push_back(1.0 / tau_bulk);
        pops.push_back(dist.uncoupled_fraction);
    }

    DecayTrace trace;
    trace.bin_width = bin_width;
    trace.t0 = 0.0;
    trace.counts.resize(n_bins);
    std::mt19937_64 rng(det.rng_seed);
    for (std::size_t b = 0; b < n_bins; ++b) {
        const double t1 = static_cast<double>(b) * bin_width;
        double signal = 0.0;
        for (std::size_t j = 0; j < rates.size(); ++j) {
            const double g = rates[j];
            // exp(-g t1) - exp(-g t2) = exp(-g t1) * (1 - exp(-g dt)), stable for small g dt
            signal += pops[j] * std::exp(-g * t1) * (-std::expm1(-g * bin_width)) / (g * bin_width);
        }
        const double expected =
            static_cast<double>(n_pulses) * (det.collection_scale * signal + det.dark_rate * bin_width);
        trace.counts[b] = poisson_noise
                              ? static_cast<double>(poisson_sample(rng, expected))
                              : expected;
    }
    return trace;
}

}  // namespace ercav
