// ercav command-line tool: forward models and fitters for cavity-coupled
// erbium ensembles. Every subcommand resolves its parameters as
// flags > config file > built-in defaults, echoes the resolved set in its
// JSON report, and exits 0 (success), 2 (usage), or 3 (domain/data error);
// `reproduce-paper` exits 1 when a reference criterion fails.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ercav/cavity.hpp"
#include "ercav/config.hpp"
#include "ercav/core.hpp"
#include "ercav/ensemble.hpp"
#include "ercav/errors.hpp"
#include "ercav/fitting.hpp"
#include "ercav/io.hpp"
#include "ercav/pumping.hpp"
#include "ercav/spectroscopy.hpp"
#include "ercav/units.hpp"
#include "ercav/verification.hpp"
#include "ercav/version.hpp"

namespace {

using nlohmann::json;

std::set<std::string>& known_config_keys() {
    static std::set<std::string> keys;
    return keys;
}

// One unit-aware parameter: a CLI flag backed by config and a default.
class ParamSet {
public:
    explicit ParamSet(CLI::App* cmd) : cmd_(cmd) {}

    void add(const std::string& key, ercav::UnitKind kind, std::optional<std::string> def,
             const std::string& help) {
        auto storage = std::make_unique<std::string>();
        std::string flag = "--" + key;
        for (auto& c : flag)
            if (c == '_')
                c = '-';
        cmd_->add_option(flag, *storage, help);
        defs_.push_back({key, kind, std::move(def), std::move(storage)});
        known_config_keys().insert(key);
    }

    void load_config(const std::string& path) {
        if (!path.empty())
            config_ = ercav::load_config(path, known_config_keys());
    }

    bool provided(const std::string& key) const {
        const auto& d = find(key);
        return !d.cli_value->empty() || config_.contains(key) || d.def.has_value();
    }

    double get(const std::string& key) const {
        const auto& d = find(key);
        if (!d.cli_value->empty())
            return ercav::parse_quantity(*d.cli_value, d.kind);
        if (auto it = config_.find(key); it != config_.end())
            return ercav::parse_quantity(it->second, d.kind);
        if (d.def)
            return ercav::parse_quantity(*d.def, d.kind);
        throw ercav::usage_error("missing required parameter --" + key);
    }

    json echo() const {
        json j = json::object();
        for (const auto& d : defs_)
            if (provided(d.key))
                j[d.key] = get(d.key);
        return j;
    }

private:
    struct Def {
        std::string key;
        ercav::UnitKind kind;
        std::optional<std::string> def;
        std::unique_ptr<std::string> cli_value;
    };

    const Def& find(const std::string& key) const {
        for (const auto& d : defs_)
            if (d.key == key)
                return d;
        throw std::logic_error("unregistered parameter " + key);
    }

    CLI::App* cmd_;
    std::vector<Def> defs_;
    std::map<std::string, std::string> config_;
};

struct CommandIo {
    std::string config_path;
    std::string out_path;
};

void add_common(CLI::App* cmd, CommandIo& io) {
    cmd->add_option("--config", io.config_path, "key=value config file merged under the flags");
    cmd->add_option("--out", io.out_path, "write the JSON report here instead of stdout");
}

void emit(const CommandIo& io, const json& report) {
    if (io.out_path.empty()) {
        std::cout << report.dump(2) << '\n';
        return;
    }
    std::ofstream out(io.out_path);
    if (!out)
        throw ercav::usage_error("cannot open '" + io.out_path + "' for writing");
    out << report.dump(2) << '\n';
}

json base_report(const std::string& command, const ParamSet& params) {
    return json{{"command", command}, {"version", ercav::kVersion}, {"inputs", params.echo()}};
}

void require_readable(const std::string& path) {
    if (!std::filesystem::exists(path))
        throw ercav::usage_error("file not found: '" + path + "'");
}

ercav::RadRateConvention convention_from(const std::string& name) {
    try {
        return ercav::convention_by_name(name);
    } catch (const std::domain_error& e) {
        throw ercav::usage_error(e.what());
    }
}

std::array<double, 3> dipole_from(const std::string& axis) {
    if (axis == "x")
        return {1, 0, 0};
    if (axis == "y")
        return {0, 1, 0};
    if (axis == "z")
        return {0, 0, 1};
    throw ercav::usage_error("dipole axis must be one of x, y, z");
}

// ---------------------------------------------------------------------------

void setup_purcell(CLI::App& app) {
    auto* cmd = app.add_subcommand("purcell", "Purcell factor of a cavity mode");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    params->add("q", ercav::UnitKind::dimensionless, "11400", "quality factor");
    params->add("vnorm", ercav::UnitKind::dimensionless, "1.65", "mode volume in (lambda/n)^3");
    params->add("overlap", ercav::UnitKind::dimensionless, "1.0", "|E_ion.d|^2/|E_max|^2 in [0,1]");
    params->add("lambda0", ercav::UnitKind::length, "1536nm", "resonance wavelength");
    params->add("n", ercav::UnitKind::dimensionless, "1.785", "refractive index at the maximum");
    cmd->callback([io, params] {
        params->load_config(io->config_path);
        const ercav::CavityMode mode{params->get("lambda0"), params->get("q"),
                                     params->get("vnorm"), params->get("n")};
        json report = base_report("purcell", *params);
        report["value"] = ercav::purcell_factor(mode, params->get("overlap"));
        report["units"] = "dimensionless";
        emit(*io, report);
    });
}

void setup_modevolume(CLI::App& app) {
    auto* cmd = app.add_subcommand("modevolume",
                                   "mode volume of a field grid (file or surrogate mode)");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto in_path = std::make_shared<std::string>();
    auto write_path = std::make_shared<std::string>();
    auto use_surrogate = std::make_shared<bool>(false);
    cmd->add_option("--in", *in_path, "FIELDGRID v1 file");
    cmd->add_flag("--surrogate", *use_surrogate, "generate the analytic nanobeam stand-in");
    cmd->add_option("--write-grid", *write_path, "also write the grid to this file");
    params->add("lambda0", ercav::UnitKind::length, "1536nm", "wavelength for (lambda/n)^3 units");
    params->add("side", ercav::UnitKind::length, "1.38um", "triangle edge (surrogate)");
    params->add("period", ercav::UnitKind::length, "570nm", "standing-wave period (surrogate)");
    params->add("n_mat", ercav::UnitKind::dimensionless, "1.785", "material index (surrogate)");
    params->add("envelope_sigma", ercav::UnitKind::length, "2um", "axial envelope (surrogate)");
    params->add("transverse_sigma", ercav::UnitKind::length, "345nm",
                "transverse bump width (surrogate)");
    cmd->callback([io, params, in_path, write_path, use_surrogate] {
        params->load_config(io->config_path);
        ercav::FieldGrid grid;
        if (*use_surrogate == !in_path->empty())
            throw ercav::usage_error("modevolume needs exactly one of --in or --surrogate");
        if (!in_path->empty()) {
            require_readable(*in_path);
            grid = ercav::load_field_grid(*in_path);
        } else {
            ercav::SurrogateModeParams sp;
            sp.beam_side = params->get("side");
            sp.period = params->get("period");
            sp.n_mat = params->get("n_mat");
            sp.envelope_sigma = params->get("envelope_sigma");
            sp.transverse_sigma = params->get("transverse_sigma");
            sp.spacing[2] = sp.period / 8.0;
            grid = ercav::surrogate_mode(sp);
        }
        if (!write_path->empty())
            ercav::write_field_grid(grid, *write_path);
        const auto mv = ercav::mode_volume(grid, params->get("lambda0"));
        json report = base_report("modevolume", *params);
        report["value"] = mv.v_norm;
        report["units"] = "(lambda/n)^3";
        report["results"] = {{"v_physical_m3", mv.v_physical},
                             {"v_norm", mv.v_norm},
                             {"n_at_max", mv.n_at_max}};
        emit(*io, report);
    });
}

void setup_average_enhancement(CLI::App& app) {
    auto* cmd = app.add_subcommand("average-enhancement",
                                   "effective enhancement of an ion ensemble in a mode");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto dist_path = std::make_shared<std::string>();
    auto grid_path = std::make_shared<std::string>();
    auto dipole = std::make_shared<std::string>("x");
    auto out_dist = std::make_shared<std::string>();
    cmd->add_option("--dist", *dist_path, "enhancement distribution JSON");
    cmd->add_option("--in", *grid_path, "FIELDGRID v1 file to histogram");
    cmd->add_option("--dipole", *dipole, "dipole axis: x, y, or z");
    cmd->add_option("--out-dist", *out_dist, "write the histogram as distribution JSON");
    params->add("f_max", ercav::UnitKind::dimensionless, "517",
                "enhancement at the field maximum");
    params->add("bins", ercav::UnitKind::dimensionless, "64", "histogram bins");
    cmd->callback([io, params, dist_path, grid_path, dipole, out_dist] {
        params->load_config(io->config_path);
        ercav::EnhancementDistribution dist;
        if (dist_path->empty() == grid_path->empty())
            throw ercav::usage_error("average-enhancement needs exactly one of --dist or --in");
        if (!dist_path->empty()) {
            require_readable(*dist_path);
            dist = ercav::load_distribution_json(*dist_path);
        } else {
            require_readable(*grid_path);
            const auto grid = ercav::load_field_grid(*grid_path);
            dist = ercav::enhancement_distribution(
                grid, dipole_from(*dipole), params->get("f_max"), {},
                static_cast<std::size_t>(params->get("bins")));
        }
        if (!out_dist->empty())
            ercav::save_distribution_json(dist, *out_dist);
        json report = base_report("average-enhancement", *params);
        report["value"] = ercav::average_enhancement(dist);
        report["units"] = "dimensionless";
        report["results"] = {{"uncoupled_fraction", dist.uncoupled_fraction},
                             {"bins_occupied", dist.bin_edges.size()}};
        emit(*io, report);
    });
}

void setup_lifetime(CLI::App& app) {
    auto* cmd = app.add_subcommand("lifetime", "cavity-modified excited-state lifetime");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    params->add("tau_bulk", ercav::UnitKind::time, "11.4ms", "bulk lifetime");
    params->add("f_eff", ercav::UnitKind::dimensionless, "116", "effective enhancement");
    params->add("beta", ercav::UnitKind::dimensionless, "0.114", "branching ratio");
    cmd->callback([io, params] {
        params->load_config(io->config_path);
        const double tau =
            ercav::purcell_lifetime(params->get("tau_bulk"), params->get("f_eff"),
                                    params->get("beta"));
        json report = base_report("lifetime", *params);
        report["value"] = tau;
        report["units"] = "s";
        report["results"] = {{"reduction_factor", params->get("tau_bulk") / tau}};
        emit(*io, report);
    });
}

void setup_invert_purcell(CLI::App& app) {
    auto* cmd = app.add_subcommand("invert-purcell",
                                   "effective enhancement from a measured lifetime pair");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    params->add("tau_ref", ercav::UnitKind::time, "11.4ms", "reference (uncoupled) lifetime");
    params->add("tau_cav", ercav::UnitKind::time, std::nullopt, "measured cavity lifetime");
    params->add("beta", ercav::UnitKind::dimensionless, "0.114", "branching ratio");
    cmd->callback([io, params] {
        params->load_config(io->config_path);
        json report = base_report("invert-purcell", *params);
        report["value"] = ercav::effective_purcell_from_lifetimes(
            params->get("tau_ref"), params->get("tau_cav"), params->get("beta"));
        report["units"] = "dimensionless";
        emit(*io, report);
    });
}

void setup_transmission(CLI::App& app) {
    auto* cmd = app.add_subcommand("transmission",
                                   "cavity(+ensemble) transmission spectrum");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto csv_path = std::make_shared<std::string>();
    cmd->add_option("--csv", *csv_path, "write the sampled spectrum here");
    params->add("lambda0", ercav::UnitKind::length, "1536nm", "cavity resonance wavelength");
    params->add("q", ercav::UnitKind::dimensionless, "11400", "quality factor");
    params->add("vnorm", ercav::UnitKind::dimensionless, "1.65", "mode volume in (lambda/n)^3");
    params->add("n", ercav::UnitKind::dimensionless, "1.785", "refractive index");
    params->add("span", ercav::UnitKind::frequency, "100ghz", "scan width around resonance");
    params->add("points", ercav::UnitKind::dimensionless, "1001", "samples across the scan");
    params->add("cooperativity", ercav::UnitKind::dimensionless, std::nullopt,
                "ensemble cooperativity (enables the ensemble line)");
    params->add("gamma_a", ercav::UnitKind::frequency, "0.5ghz", "ensemble linewidth FWHM");
    params->add("nu_a", ercav::UnitKind::frequency, std::nullopt,
                "ensemble line center (default: cavity resonance)");
    cmd->callback([io, params, csv_path] {
        params->load_config(io->config_path);
        const ercav::CavityMode mode{params->get("lambda0"), params->get("q"),
                                     params->get("vnorm"), params->get("n")};
        const double nu_c = mode.frequency().hz;
        std::optional<ercav::EnsembleLine> line;
        if (params->provided("cooperativity")) {
            const double nu_a = params->provided("nu_a") ? params->get("nu_a") : nu_c;
            line = ercav::EnsembleLine{nu_a, params->get("gamma_a"),
                                       params->get("cooperativity")};
        }
        const double span = params->get("span");
        const auto points = static_cast<std::size_t>(params->get("points"));
        if (points < 5)
            throw ercav::usage_error("--points must be at least 5");
        ercav::Spectrum spec;
        for (std::size_t i = 0; i < points; ++i) {
            const double f =
                -0.5 + static_cast<double>(i) / static_cast<double>(points - 1);
            const double nu = nu_c + f * span;
            spec.nu.push_back(nu);
            spec.transmission.push_back(
                ercav::cavity_transmission(ercav::OpticalFrequency{nu}, mode, line));
        }
        if (!csv_path->empty())
            ercav::write_spectrum_csv(spec, *csv_path);
        const double on_res =
            ercav::cavity_transmission(ercav::OpticalFrequency{nu_c}, mode, line);
        json report = base_report("transmission", *params);
        report["value"] = on_res;
        report["units"] = "relative transmission";
        json results{{"on_resonance", on_res}, {"linewidth_hz", mode.linewidth()}};
        if (line)
            results["dip"] = 1.0 - on_res;
        report["results"] = results;
        emit(*io, report);
    });
}

void setup_dip(CLI::App& app) {
    auto* cmd = app.add_subcommand("dip",
                                   "convert between transmission dip and cooperativity");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    params->add("dip", ercav::UnitKind::dimensionless, std::nullopt, "dip depth in [0,1)");
    params->add("cooperativity", ercav::UnitKind::dimensionless, std::nullopt,
                "ensemble cooperativity");
    params->add("saturation", ercav::UnitKind::dimensionless, std::nullopt,
                "saturation parameter I/I_sat applied to the cooperativity");
    cmd->callback([io, params] {
        params->load_config(io->config_path);
        const bool have_dip = params->provided("dip");
        const bool have_coop = params->provided("cooperativity");
        if (have_dip == have_coop)
            throw ercav::usage_error("dip needs exactly one of --dip or --cooperativity");
        json report = base_report("dip", *params);
        double coop = have_coop ? params->get("cooperativity")
                                : ercav::dip_to_cooperativity(params->get("dip"));
        json results{{"cooperativity", coop}, {"dip", ercav::cooperativity_to_dip(coop)}};
        if (params->provided("saturation")) {
            const double saturated =
                ercav::saturated_cooperativity(coop, params->get("saturation"));
            results["saturated_cooperativity"] = saturated;
            results["saturated_dip"] = ercav::cooperativity_to_dip(saturated);
        }
        report["value"] = have_dip ? results["cooperativity"] : results["dip"];
        report["units"] = "dimensionless";
        report["results"] = results;
        emit(*io, report);
    });
}

void setup_attenuation(CLI::App& app) {
    auto* cmd = app.add_subcommand("attenuation", "Beer-Lambert absorbed fraction");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    params->add("alpha", ercav::UnitKind::inverse_length, "24.5/cm", "absorption coefficient");
    params->add("length", ercav::UnitKind::length, "26um", "propagation length");
    params->add("confinement", ercav::UnitKind::dimensionless, "1.0", "mode overlap in (0,1]");
    params->add("solve_confinement", ercav::UnitKind::dimensionless, std::nullopt,
                "target absorbed fraction to invert for the confinement");
    cmd->callback([io, params] {
        params->load_config(io->config_path);
        json report = base_report("attenuation", *params);
        if (params->provided("solve_confinement")) {
            report["value"] = ercav::confinement_for_attenuation(
                params->get("alpha"), params->get("length"), params->get("solve_confinement"));
            report["units"] = "dimensionless confinement";
        } else {
            report["value"] = ercav::beer_lambert(params->get("alpha"), params->get("length"),
                                                  params->get("confinement"));
            report["units"] = "absorbed fraction";
        }
        emit(*io, report);
    });
}

void setup_oscillator_strength(CLI::App& app) {
    auto* cmd = app.add_subcommand("oscillator-strength",
                                   "oscillator strength from the absorption line");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto conv = std::make_shared<std::string>("index-lorentz");
    cmd->add_option("--convention", *conv,
                    "local-field convention: none, index-only, index-lorentz, virtual-cavity");
    params->add("alpha_max", ercav::UnitKind::inverse_length, "24.5/cm",
                "peak absorption coefficient");
    params->add("fwhm", ercav::UnitKind::frequency, "0.51ghz", "absorption FWHM");
    params->add("density", ercav::UnitKind::dimensionless, "3.74e24",
                "active ion density per m^3 (default: 0.02% of the Y site density)");
    params->add("n", ercav::UnitKind::dimensionless, "1.785", "refractive index");
    cmd->callback([io, params, conv] {
        params->load_config(io->config_path);
        const auto convention = convention_from(*conv);
        json report = base_report("oscillator-strength", *params);
        report["convention"] = std::string(convention.name);
        report["value"] =
            ercav::oscillator_strength(params->get("alpha_max"), params->get("fwhm"),
                                       params->get("density"), params->get("n"), convention);
        report["units"] = "dimensionless";
        emit(*io, report);
    });
}

void setup_radrate(CLI::App& app) {
    auto* cmd = app.add_subcommand("radrate", "radiative rate from the oscillator strength");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto conv = std::make_shared<std::string>("index-lorentz");
    cmd->add_option("--convention", *conv,
                    "local-field convention: none, index-only, index-lorentz, virtual-cavity");
    params->add("f", ercav::UnitKind::dimensionless, "1.095e-7", "oscillator strength");
    params->add("lambda0", ercav::UnitKind::length, "1536nm", "transition wavelength");
    params->add("n", ercav::UnitKind::dimensionless, "1.785", "refractive index");
    cmd->callback([io, params, conv] {
        params->load_config(io->config_path);
        const auto convention = convention_from(*conv);
        json report = base_report("radrate", *params);
        report["convention"] = std::string(convention.name);
        report["value"] = ercav::radiative_rate(params->get("f"), params->get("lambda0"),
                                                params->get("n"), convention);
        report["units"] = "Hz";
        emit(*io, report);
    });
}

void setup_branching(CLI::App& app) {
    auto* cmd = app.add_subcommand("branching", "branching ratio of the radiative path");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    params->add("gamma_rad", ercav::UnitKind::frequency, "10.03hz", "radiative rate");
    params->add("tau", ercav::UnitKind::time, "11.4ms", "total excited-state lifetime");
    cmd->callback([io, params] {
        params->load_config(io->config_path);
        json report = base_report("branching", *params);
        report["value"] = ercav::branching_ratio(params->get("gamma_rad"), params->get("tau"));
        report["units"] = "dimensionless";
        emit(*io, report);
    });
}

void setup_spin_init(CLI::App& app) {
    auto* cmd = app.add_subcommand("spin-init",
                                   "Zeeman spin-initialization efficiency under optical pumping");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto reductions = std::make_shared<std::vector<double>>();
    auto csv_path = std::make_shared<std::string>();
    cmd->add_option("--reduction", *reductions,
                    "lifetime reduction factor(s) >= 1 to evaluate (repeatable)");
    cmd->add_option("--csv", *csv_path, "write `reduction_factor,eta` rows here");
    params->add("gamma_opt", ercav::UnitKind::frequency, "90.909hz",
                "excited-state decay rate (1/11 ms by default)");
    params->add("tz", ercav::UnitKind::time, "100ms", "Zeeman population lifetime");
    params->add("p_return", ercav::UnitKind::dimensionless, std::nullopt,
                "branching back to the pumped level");
    params->add("calibrate_eta", ercav::UnitKind::dimensionless, std::nullopt,
                "calibrate p_return so the strong-pump efficiency hits this value");
    cmd->callback([io, params, reductions, csv_path] {
        params->load_config(io->config_path);
        const double gamma = params->get("gamma_opt");
        const double tz = params->get("tz");
        double p_return;
        if (params->provided("calibrate_eta"))
            p_return = ercav::calibrate_return_branching(params->get("calibrate_eta"), gamma, tz);
        else if (params->provided("p_return"))
            p_return = params->get("p_return");
        else
            throw ercav::usage_error("spin-init needs --p-return or --calibrate-eta");

        ercav::PumpModel model{};
        model.gamma_opt = gamma;
        model.t_zeeman = tz;
        model.p_return = p_return;
        model.pump_rate = ercav::kStrongPumpRatio * gamma;

        std::vector<double> ks = *reductions;
        if (ks.empty())
            ks.push_back(1.0);
        const auto etas = ercav::efficiency_vs_purcell(model, ks);

        if (!csv_path->empty()) {
            std::ofstream out(*csv_path);
            if (!out)
                throw ercav::usage_error("cannot open '" + *csv_path + "' for writing");
            out << "reduction_factor,eta\n";
            for (std::size_t i = 0; i < ks.size(); ++i) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", ks[i], etas[i]);
                out << buf;
            }
        }

        json report = base_report("spin-init", *params);
        report["value"] = etas.size() == 1 ? json(etas.front()) : json(etas);
        report["units"] = "dimensionless";
        report["results"] = {{"p_return", p_return},
                             {"reduction_factors", ks},
                             {"eta", etas}};
        emit(*io, report);
    });
}

ercav::EnhancementDistribution distribution_from_cli(const std::string& dist_path,
                                                     const std::vector<std::string>& points,
                                                     double uncoupled) {
    if (!dist_path.empty() && !points.empty())
        throw ercav::usage_error("give either --dist or --point, not both");
    if (!dist_path.empty()) {
        require_readable(dist_path);
        return ercav::load_distribution_json(dist_path);
    }
    if (points.empty())
        throw ercav::usage_error("a distribution is required: --dist file or --point F:W ...");
    ercav::EnhancementDistribution dist;
    dist.uncoupled_fraction = uncoupled;
    std::vector<std::pair<double, double>> parsed;
    for (const auto& p : points) {
        const auto colon = p.find(':');
        if (colon == std::string::npos)
            throw ercav::usage_error("--point expects F:WEIGHT, got '" + p + "'");
        parsed.emplace_back(ercav::parse_quantity(p.substr(0, colon), ercav::UnitKind::dimensionless),
                            ercav::parse_quantity(p.substr(colon + 1), ercav::UnitKind::dimensionless));
    }
    std::sort(parsed.begin(), parsed.end());
    for (const auto& [f, w] : parsed) {
        dist.bin_edges.push_back(f);
        dist.weights.push_back(w);
    }
    dist.validate();
    return dist;
}

void setup_synth_decay(CLI::App& app) {
    auto* cmd = app.add_subcommand("synth-decay",
                                   "synthesize a photon-counting decay trace");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto dist_path = std::make_shared<std::string>();
    auto points = std::make_shared<std::vector<std::string>>();
    auto trace_path = std::make_shared<std::string>();
    auto seed = std::make_shared<std::uint64_t>(0);
    auto no_noise = std::make_shared<bool>(false);
    auto* seed_opt = cmd->add_option("--seed", *seed, "RNG seed (required unless --no-noise)");
    cmd->add_option("--dist", *dist_path, "enhancement distribution JSON");
    cmd->add_option("--point", *points, "point mass F:WEIGHT (repeatable)");
    cmd->add_option("--out-trace", *trace_path, "trace CSV destination")->required();
    cmd->add_flag("--no-noise", *no_noise, "emit the noise-free expectation");
    params->add("uncoupled", ercav::UnitKind::dimensionless, "0.0",
                "fraction of ions outside the cavity mode");
    params->add("beta", ercav::UnitKind::dimensionless, "0.114", "branching ratio");
    params->add("tau_bulk", ercav::UnitKind::time, "10.8ms", "bulk lifetime");
    params->add("pulse", ercav::UnitKind::time, "20ms", "excitation pulse duration");
    params->add("period", ercav::UnitKind::time, "75ms", "pulse repetition period");
    params->add("dark_rate", ercav::UnitKind::frequency, "0hz", "detector dark count rate");
    params->add("collection_scale", ercav::UnitKind::dimensionless, "1000",
                "expected counts at t = 0 per pulse");
    params->add("pulses", ercav::UnitKind::dimensionless, "1", "number of accumulated pulses");
    params->add("bin_width", ercav::UnitKind::time, "0.2ms", "histogram bin width");
    params->add("bins", ercav::UnitKind::dimensionless, "250", "number of bins");
    cmd->callback([io, params, dist_path, points, trace_path, seed, no_noise, seed_opt] {
        params->load_config(io->config_path);
        if (!*no_noise && seed_opt->count() == 0)
            throw ercav::usage_error("synth-decay is randomized: an explicit --seed is required");
        const auto dist =
            distribution_from_cli(*dist_path, *points, params->get("uncoupled"));
        ercav::DetectorConfig det;
        det.pulse_duration = params->get("pulse");
        det.repetition_period = params->get("period");
        det.dark_rate = params->get("dark_rate");
        det.collection_scale = params->get("collection_scale");
        det.rng_seed = *seed;
        const auto trace = ercav::synthesize_decay(
            dist, params->get("beta"), params->get("tau_bulk"), det,
            static_cast<std::size_t>(params->get("pulses")), params->get("bin_width"),
            static_cast<std::size_t>(params->get("bins")), !*no_noise);
        ercav::write_decay_csv(trace, *trace_path);
        double total = 0;
        for (double c : trace.counts)
            total += c;
        json report = base_report("synth-decay", *params);
        report["inputs"]["seed"] = *seed;
        report["value"] = total;
        report["units"] = "counts";
        report["results"] = {{"trace", *trace_path},
                             {"bins", trace.counts.size()},
                             {"noise", !*no_noise}};
        emit(*io, report);
    });
}

void setup_fit_decay(CLI::App& app) {
    auto* cmd = app.add_subcommand("fit-decay", "multi-exponential fit of a decay trace");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto in_path = std::make_shared<std::string>();
    auto fix_tau1 = std::make_shared<std::string>();
    auto freeze_bg = std::make_shared<bool>(false);
    auto normalize = std::make_shared<bool>(false);
    cmd->add_option("--in", *in_path, "decay trace CSV")->required();
    cmd->add_option("--fix-tau1", *fix_tau1, "freeze the slow time constant, e.g. 10.8ms");
    cmd->add_flag("--freeze-background", *freeze_bg, "pin the background to zero");
    cmd->add_flag("--normalize", *normalize,
                  "also report amplitudes normalized to the slow component");
    params->add("components", ercav::UnitKind::dimensionless, "2", "1 or 2 exponentials");
    cmd->callback([io, params, in_path, fix_tau1, freeze_bg, normalize] {
        params->load_config(io->config_path);
        require_readable(*in_path);
        const auto trace = ercav::load_decay_csv(*in_path);
        std::optional<double> fixed;
        if (!fix_tau1->empty())
            fixed = ercav::parse_quantity(*fix_tau1, ercav::UnitKind::time);
        const auto fit = ercav::fit_decay(
            trace, static_cast<int>(params->get("components")), fixed, *freeze_bg);
        json report = base_report("fit-decay", *params);
        report["fit"] = ercav::fit_report_json("multi-exponential decay", fit);
        if (*normalize && fit.param_names.size() >= 4) {
            const double a1 = fit.param("A1");
            report["fit"]["normalized_amplitudes"] = {{"A1", 1.0},
                                                      {"A2", fit.param("A2") / a1}};
        }
        report["value"] = fit.param("tau1");
        report["units"] = "s";
        emit(*io, report);
    });
}

void setup_fit_lorentzian(CLI::App& app) {
    auto* cmd = app.add_subcommand("fit-lorentzian",
                                   "Lorentzian fit of a transmission spectrum");
    auto io = std::make_shared<CommandIo>();
    auto params = std::make_shared<ParamSet>(cmd);
    add_common(cmd, *io);
    auto in_path = std::make_shared<std::string>();
    cmd->add_option("--in", *in_path, "spectrum CSV")->required();
    cmd->callback([io, params, in_path] {
        params->load_config(io->config_path);
        require_readable(*in_path);
        const auto spec = ercav::load_spectrum_csv(*in_path);
        const auto fit = ercav::fit_lorentzian(spec);
        json report = base_report("fit-lorentzian", *params);
        report["fit"] = ercav::fit_report_json("lorentzian", fit);
        report["value"] = ercav::lorentzian_q(fit);
        report["units"] = "quality factor";
        emit(*io, report);
    });
}

void setup_reproduce_paper(CLI::App& app) {
    auto* cmd = app.add_subcommand(
        "reproduce-paper", "run the built-in reference scenario suite and report pass/fail");
    cmd->callback([] {
        const auto results = ercav::run_verification_suite();
        int failures = 0;
        for (const auto& r : results) {
            std::printf("[%2d/%zu] %s  %s\n        %s\n", r.id, results.size(),
                        r.pass ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
            if (!r.pass)
                ++failures;
        }
        if (failures > 0) {
            std::printf("%d of %zu criteria failed\n", failures, results.size());
            std::exit(1);
        }
        std::printf("all %zu criteria passed\n", results.size());
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"ercav: forward models and fitters for cavity-coupled erbium ensembles"};
    app.require_subcommand(1);

    setup_purcell(app);
    setup_modevolume(app);
    setup_average_enhancement(app);
    setup_lifetime(app);
    setup_invert_purcell(app);
    setup_transmission(app);
    setup_dip(app);
    setup_attenuation(app);
    setup_oscillator_strength(app);
    setup_radrate(app);
    setup_branching(app);
    setup_spin_init(app);
    setup_synth_decay(app);
    setup_fit_decay(app);
    setup_fit_lorentzian(app);
    setup_reproduce_paper(app);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const ercav::usage_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
    return 0;
}
