#pragma once

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "qcr/calibration.hpp"
#include "qcr/cavity.hpp"
#include "qcr/engine.hpp"
#include "qcr/io.hpp"
#include "qcr/parallel.hpp"
#include "qcr/physics.hpp"
#include "qcr/spectroscopy.hpp"

/// The qcrsim command set. Each command writes a CSV table (or a key/value
/// report for fits) whose first line stamps the full parameter set.
namespace qcr::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_config = 2;
inline constexpr int exit_numeric = 3;

struct Invocation {
    std::string command;
    std::string config_path;
    std::string preset;
    std::string out_path;
    std::string data_path;
    unsigned long long seed = 0;
    ScenarioConfig config;
};

inline std::vector<std::pair<std::string, std::string>> stamp(const Invocation& inv) {
    auto s = parameter_stamp(inv.config);
    s.emplace_back("seed", std::to_string(inv.seed));
    if (!inv.data_path.empty()) s.emplace_back("data", inv.data_path);
    return s;
}

inline std::vector<double> voltage_grid(const SweepSpec& s) {
    std::vector<double> v(static_cast<std::size_t>(s.v_points));
    // Symmetric sweeps hit V = 0 exactly.
    for (int k = 0; k < s.v_points; ++k) {
        v[static_cast<std::size_t>(k)] = s.v_start + (s.v_stop - s.v_start) * k / (s.v_points - 1);
    }
    return v;
}

/// QCR bath at bias V under the configured drive mode.
inline QcrRates operating_point(double voltage, const ScenarioConfig& c) {
    switch (c.drive.mode) {
        case DriveMode::rf: return rf_effective_rates(voltage, c.drive.rf, c.circuit);
        case DriveMode::pulsed: {
            PulseProfile p = c.drive.pulse;
            p.on_bias = voltage;
            if (c.drive.rf.amplitude > 0.0) p.on_rf = c.drive.rf;
            const auto avg = pulse_averaged_rates(p, c.circuit);
            QcrRates r;
            r.gamma = avg.gamma;
            r.occupation = avg.occupation();
            r.rate_ratio = 1.0 + 1.0 / r.occupation;
            if (r.occupation > 0.0) r.temperature = temperature_from_occupation(r.occupation, c.circuit.resonator_frequency);
            return r;
        }
        case DriveMode::dc:
        case DriveMode::noise: break;
    }
    return qcr_rates(voltage, c.circuit);
}

/// Drive-line coupling; falls back to power balance when only a power is given.
inline double drive_coupling(const ScenarioConfig& c) {
    if (c.drive.gamma_drive > 0.0 || !c.drive.power_dBm) return c.drive.gamma_drive;
    return coherent_drive_decay_rate(watts_from_dBm(*c.drive.power_dBm), c.circuit.resonator_frequency, c.drive.n_drive);
}

inline std::vector<Bath> external_baths(const ScenarioConfig& c) {
    const double g = drive_coupling(c);
    if (g > 0.0) return {Bath{c.drive.n_drive, g, BathLabel::drive_line}};
    return {};
}

// ---------------------------------------------------------------------------
// commands

inline void cmd_iv(const Invocation& inv, std::ostream& out) {
    const auto& c = inv.config;
    const auto v = voltage_grid(c.sweep);
    struct Row {
        double current, conductance;
    };
    const auto rows = parallel_map(v, [&](double x) {
        return Row{nis_current(x, c.circuit.junction), nis_conductance(x, c.circuit.junction)};
    });
    std::vector<double> current(rows.size());
    for (std::size_t k = 0; k < rows.size(); ++k) current[k] = rows[k].current;
    if (c.sweep.noise > 0.0) current = multiplicative_noise(current, c.sweep.noise, inv.seed);

    CsvWriter csv(out, "iv", stamp(inv), {"V_uV", "I_nA", "dIdV_Ohm_inv"});
    for (std::size_t k = 0; k < v.size(); ++k) {
        csv.row({in_units(v[k], units::micro_volt), current[k] / units::nano_ampere, rows[k].conductance});
    }
}

inline void cmd_rates(const Invocation& inv, std::ostream& out) {
    const auto& c = inv.config;
    const auto v = voltage_grid(c.sweep);
    const auto rates = parallel_map(v, [&](double x) { return operating_point(x, c); });
    CsvWriter csv(out, "rates", stamp(inv), {"V_uV", "gamma_qcr_Hz", "gamma_total_Hz", "T_qcr_mK", "n_qcr"});
    for (std::size_t k = 0; k < v.size(); ++k) {
        const auto& r = rates[k];
        const double t = r.temperature ? *r.temperature / units::milli_kelvin : std::nan("");
        csv.row({in_units(v[k], units::micro_volt), r.gamma, r.gamma + c.drive.gamma_background, t, r.occupation});
    }
}

inline void cmd_cool(const Invocation& inv, std::ostream& out) {
    const auto& c = inv.config;
    const auto v = voltage_grid(c.sweep);
    const auto extra = external_baths(c);
    auto nbar = parallel_map(v, [&](double x) {
        auto baths = extra;
        baths.push_back(operating_point(x, c).bath());
        return steady_state_mean(baths);
    });
    if (c.sweep.noise > 0.0) nbar = multiplicative_noise(nbar, c.sweep.noise, inv.seed);
    CsvWriter csv(out, "cool", stamp(inv), {"V_uV", "nbar", "T_eff_mK"});
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double t = temperature_from_occupation(nbar[k], c.circuit.resonator_frequency);
        csv.row({in_units(v[k], units::micro_volt), nbar[k], t / units::milli_kelvin});
    }
}

inline void cmd_pulse(const Invocation& inv, std::ostream& out) {
    const auto& c = inv.config;
    PulseProfile p = c.drive.pulse;
    if (c.drive.rf.amplitude > 0.0 && (c.drive.mode == DriveMode::pulsed || c.drive.mode == DriveMode::rf)) {
        p.on_rf = c.drive.rf;
    }
    const auto avg = pulse_averaged_rates(p, c.circuit);
    const auto extra = external_baths(c);

    auto off_baths = extra;
    off_baths.push_back(avg.off.bath());
    const auto p0 = steady_state_distribution(off_baths, c.dynamics.cutoff);

    MasterEquationOptions opt;
    opt.stepper = c.dynamics.stepper;
    opt.record_stride = c.dynamics.record_stride;
    opt.cutoff = c.dynamics.cutoff;
    const auto traj = evolve_master_equation(p0, pulse_schedule(p, avg.on, avg.off, extra), c.dynamics.t_stop,
                                             c.dynamics.dt, opt);

    auto continuous = extra;
    continuous.push_back(Bath{avg.occupation(), avg.gamma, BathLabel::qcr});
    const double reference = steady_state_mean(continuous);
    const double pulsed = time_averaged_mean(traj, 0.5 * c.dynamics.t_stop);

    CsvWriter csv(out, "pulse", stamp(inv), {"t_ns", "nbar"});
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        csv.row({in_units(traj.times[k], units::nano_second), mean_photon(traj.states[k])});
    }
    csv.comment("summary pulsed_time_average=" + format_number(pulsed) +
                " continuous_equivalent=" + format_number(reference) +
                " relative_difference=" + format_number((pulsed - reference) / reference) +
                " averaged_from_ns=" + format_number(in_units(0.5 * c.dynamics.t_stop, units::nano_second)));
}

inline FockDistribution configured_distribution(const SpectrumSpec& s) {
    return s.distribution == DistributionKind::poisson ? poisson_distribution(s.nbar) : gibbs_distribution(s.nbar);
}

inline void cmd_spectrum(const Invocation& inv, std::ostream& out) {
    const auto& c = inv.config;
    if (inv.data_path.empty()) {
        const auto p = configured_distribution(c.spectrum);
        std::vector<double> grid;
        if (c.spectrum.f_points > 0) {
            grid = linear_grid(c.spectrum.f_start, c.spectrum.f_stop, static_cast<std::size_t>(c.spectrum.f_points));
        } else {
            const int n = significant_cutoff(p);
            const auto& q = c.qubit;
            const double span = std::abs(2.0 * q.dispersive_shift) * n + 20.0 * q.qubit_linewidth;
            grid = spectrum_grid(q, n, static_cast<std::size_t>(200.0 * span / q.qubit_linewidth));
        }
        auto s = synthesize_spectrum(p, c.qubit, grid);
        if (c.spectrum.snr_dB) s = add_noise(std::move(s), *c.spectrum.snr_dB, inv.seed);
        CsvWriter csv(out, "spectrum", stamp(inv), {"f_GHz", "response"});
        if (!c.qubit.resolvable()) csv.comment("warning: lines are not resolvable (|2chi| <= linewidth)");
        for (std::size_t k = 0; k < s.frequency.size(); ++k) csv.row({in_units(s.frequency[k], 1e9), s.response[k]});
        return;
    }

    auto [f, r] = read_two_column_file(inv.data_path);
    for (double& x : f) x *= 1e9;
    const Spectrum s{std::move(f), std::move(r)};
    try {
        s.validate();
    } catch (const DomainError& e) {
        throw InputError(inv.data_path + ": " + e.what());
    }
    const auto fit = extract_population_fit(s, c.qubit, c.spectrum.nmax);
    const auto cls = classify_state(fit.populations);
    CsvWriter csv(out, "spectrum", stamp(inv), {"n", "P_n"});
    for (std::size_t n = 0; n < fit.populations.size(); ++n) csv.row({static_cast<double>(n), fit.populations[n]});
    csv.comment("class=" + std::string(to_string(cls.state)) + " nbar=" + format_number(cls.nbar) +
                " nbar_mean=" + format_number(mean_photon(fit.populations)) +
                " residual_poisson=" + format_number(cls.residual_poisson) +
                " residual_gibbs=" + format_number(cls.residual_gibbs) +
                " linewidth_MHz=" + format_number(fit.linewidth / (2.0 * constants::pi * 1e6)) +
                " spectrum_residual_rms=" + format_number(fit.residual_rms));
}

namespace detail {

class Report {
public:
    Report(std::ostream& out, const std::string& title, const std::vector<std::pair<std::string, std::string>>& stamp)
        : out_(out) {
        out_ << "# qcrsim " << title;
        for (const auto& [k, v] : stamp) out_ << ' ' << k << '=' << v;
        out_ << '\n';
    }
    void line(const std::string& key, double value) { out_ << key << " = " << format_number(value) << '\n'; }
    void line(const std::string& key, const std::string& value) { out_ << key << " = " << value << '\n'; }

private:
    std::ostream& out_;
};

}  // namespace detail

inline void cmd_fit_iv(const Invocation& inv, std::ostream& out) {
    if (inv.data_path.empty()) throw ConfigError("fit iv: --data <path> is required");
    auto [v, i] = read_two_column_file(inv.data_path);
    IvData iv{std::move(v), std::move(i)};
    for (double& x : iv.voltage) x *= units::micro_volt;
    for (double& x : iv.current) x *= units::nano_ampere;

    const auto fit = extract_rt_gammad(iv, inv.config.circuit.junction);
    detail::Report rep(out, "fit iv", stamp(inv));
    rep.line("points", static_cast<double>(fit.points));
    rep.line("stage1.r_t_kOhm", fit.stage1.tunneling_resistance / units::kilo_ohm);
    rep.line("stage1.dynes", fit.stage1.dynes);
    rep.line("stage2.r_t_kOhm", fit.stage2.tunneling_resistance / units::kilo_ohm);
    rep.line("stage2.dynes", fit.stage2.dynes);
    // Parameters are fitted in logs, so the standard errors are relative.
    rep.line("stage2.r_t_rel_stderr", fit.report.standard_error(0));
    rep.line("stage2.dynes_rel_stderr", fit.report.standard_error(1));
    rep.line("residual_rms", fit.residual_rms);
    rep.line("iterations", static_cast<double>(fit.report.iterations));
    rep.line("converged", fit.report.converged ? "true" : "false");
    rep.line("stop_reason", fit.report.stop_reason);
}

inline void cmd_fit_cooling(const Invocation& inv, std::ostream& out) {
    if (inv.data_path.empty()) throw ConfigError("fit cooling: --data <path> is required");
    auto [v, n] = read_two_column_file(inv.data_path);
    CoolingCurve curve{std::move(v), std::move(n)};
    for (double& x : curve.voltage) x *= units::micro_volt;

    CoolingFitOptions opt;
    opt.voltage_cutoff = inv.config.fit.v_cutoff;
    const auto fit = fit_cooling_curve(curve, inv.config.circuit, opt);
    const double mhz = 2.0 * constants::pi * 1e6;
    detail::Report rep(out, "fit cooling", stamp(inv));
    rep.line("points_used", static_cast<double>(fit.points_used));
    rep.line("points_excluded", static_cast<double>(fit.points_excluded));
    rep.line("stage1.t_n_mK", fit.stage1.t_normal / units::milli_kelvin);
    rep.line("stage1.gamma_dr_MHz", fit.stage1.gamma_drive / mhz);
    rep.line("stage1.n_dr", fit.stage1.n_drive);
    rep.line("stage2.t_n_mK", fit.stage2.t_normal / units::milli_kelvin);
    rep.line("stage2.gamma_dr_MHz", fit.stage2.gamma_drive / mhz);
    rep.line("stage2.n_dr", fit.stage2.n_drive);
    rep.line("stage2.t_n_stderr_mK", fit.report.standard_error(0) / units::milli_kelvin);
    rep.line("stage2.gamma_dr_rel_stderr", fit.report.standard_error(1));
    rep.line("stage2.n_dr_stderr", fit.report.standard_error(2));
    rep.line("residual_rms", fit.residual_rms);
    rep.line("iterations", static_cast<double>(fit.report.iterations));
    rep.line("converged", fit.report.converged ? "true" : "false");
    rep.line("stop_reason", fit.report.stop_reason);
}

// ---------------------------------------------------------------------------
// entry point

inline void dispatch(const Invocation& inv, std::ostream& out) {
    if (inv.command == "iv") cmd_iv(inv, out);
    else if (inv.command == "rates") cmd_rates(inv, out);
    else if (inv.command == "cool") cmd_cool(inv, out);
    else if (inv.command == "pulse") cmd_pulse(inv, out);
    else if (inv.command == "spectrum") cmd_spectrum(inv, out);
    else if (inv.command == "fit iv") cmd_fit_iv(inv, out);
    else if (inv.command == "fit cooling") cmd_fit_cooling(inv, out);
    else throw ConfigError("unknown command '" + inv.command + "'");
}

/// Runs qcrsim with `args` (program name excluded) and returns the exit code.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum-circuit refrigerator simulator and calibration toolkit", "qcrsim"};
    app.require_subcommand(1);
    Invocation inv;

    auto common = [&](CLI::App* sub, bool takes_data) {
        sub->add_option("--config", inv.config_path, "Scenario config file");
        std::string names;
        for (const auto& p : presets()) names += names.empty() ? p.name : std::string(", ") + p.name;
        sub->add_option("--preset", inv.preset, "Built-in scenario: " + names);
        sub->add_option("--out", inv.out_path, "Output file (default: stdout)");
        sub->add_option("--seed", inv.seed, "Seed for synthetic noise");
        if (takes_data) sub->add_option("--data", inv.data_path, "Input data table");
    };
    std::vector<std::pair<CLI::App*, std::string>> leaves;
    for (const char* name : {"iv", "rates", "cool", "pulse", "spectrum"}) {
        auto* sub = app.add_subcommand(name);
        common(sub, std::string(name) == "spectrum");
        leaves.emplace_back(sub, name);
    }
    app.get_subcommand("iv")->description("IV characteristic: V_uV, I_nA, dIdV_Ohm_inv");
    app.get_subcommand("rates")->description("QCR rates: V_uV, gamma_qcr_Hz, gamma_total_Hz, T_qcr_mK, n_qcr");
    app.get_subcommand("cool")->description("Steady cooling curve: V_uV, nbar, T_eff_mK");
    app.get_subcommand("pulse")->description("Master-equation transient under pulsed QCR: t_ns, nbar");
    app.get_subcommand("spectrum")->description("Synthesize a number-splitting spectrum, or extract populations with --data");
    auto* fit = app.add_subcommand("fit", "Fit device parameters to data");
    fit->require_subcommand(1);
    for (const char* name : {"iv", "cooling"}) {
        auto* sub = fit->add_subcommand(name);
        common(sub, true);
        leaves.emplace_back(sub, std::string("fit ") + name);
    }

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return exit_ok;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return exit_ok;
    } catch (const CLI::ParseError& e) {
        err << "qcrsim: " << e.what() << '\n';
        return exit_config;
    }
    for (const auto& [sub, name] : leaves) {
        if (sub->parsed()) inv.command = name;
    }

    try {
        if (inv.config_path.empty() && inv.preset.empty()) throw ConfigError("give --config <path> and/or --preset <name>");
        std::vector<std::pair<std::string, std::string>> texts;
        if (!inv.config_path.empty()) texts.emplace_back(inv.config_path, read_text_file(inv.config_path));
        inv.config = load_config(inv.preset, texts);

        std::ostringstream buffer;
        dispatch(inv, buffer);
        if (inv.out_path.empty()) {
            out << buffer.str();
        } else {
            std::ofstream file(inv.out_path, std::ios::binary);
            if (!file || !(file << buffer.str())) throw ConfigError("cannot write output file '" + inv.out_path + "'");
        }
        return exit_ok;
    } catch (const ConfigError& e) {
        err << "qcrsim: config error: " << e.what() << '\n';
        return exit_config;
    } catch (const InputError& e) {
        err << "qcrsim: input error: " << e.what() << '\n';
        return exit_config;
    } catch (const FitError& e) {
        err << "qcrsim: numeric failure: " << e.what();
        if (!e.last_iterate().empty()) {
            err << " (last iterate:";
            for (double x : e.last_iterate()) err << ' ' << format_number(x);
            err << ')';
        }
        err << '\n';
        return exit_numeric;
    } catch (const NumericError& e) {
        err << "qcrsim: numeric failure: " << e.what() << " (error estimate " << format_number(e.error_estimate())
            << ")\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        err << "qcrsim: numeric failure: " << e.what() << '\n';
        return exit_numeric;
    }
}

}  // namespace qcr::cli
