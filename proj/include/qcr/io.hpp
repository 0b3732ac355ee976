#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qcr/cavity.hpp"
#include "qcr/engine.hpp"
#include "qcr/spectroscopy.hpp"

/// Scenario configuration, presets, data readers and the CSV writer.
///
/// Config files are sectioned key/value text. Every key carries its unit in its
/// name; frequencies are ordinary (divided by 2π) and rates are given as γ/2π.
///
///   [junction]
///   gap_ueV = 220
///   t_n_mK  = 150   # inline comments are fine
namespace qcr {

/// Malformed or inconsistent configuration, reported at field level.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Unreadable or malformed input data file.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DriveMode { dc, rf, pulsed, noise };

inline const char* to_string(DriveMode m) {
    switch (m) {
        case DriveMode::dc: return "dc";
        case DriveMode::rf: return "rf";
        case DriveMode::pulsed: return "pulsed";
        case DriveMode::noise: return "noise";
    }
    return "unknown";
}

struct SweepSpec {
    double v_start = 0.0;   // V
    double v_stop = 400e-6;  // V
    int v_points = 201;
    /// Multiplicative noise on synthesized output (iv current, cool nbar).
    double noise = 0.0;
};

struct DriveSpec {
    DriveMode mode = DriveMode::dc;
    double gamma_drive = 0.0;  // 1/s
    double n_drive = 0.0;
    /// Constant background rate added in the rates table (γ at V = 0 from other channels).
    double gamma_background = 0.0;  // 1/s
    /// Coherent drive power; when set and gamma_dr is zero, γ_dr follows from power balance.
    std::optional<double> power_dBm;
    RfDrive rf{};
    PulseProfile pulse{};
};

struct DynamicsSpec {
    double t_stop = 2e-6;  // s
    double dt = 1e-10;     // s
    int record_stride = 10;
    Stepper stepper = Stepper::crank_nicolson;
    int cutoff = default_fock_cutoff;
};

enum class DistributionKind { poisson, gibbs };

struct SpectrumSpec {
    DistributionKind distribution = DistributionKind::poisson;
    double nbar = 1.21;
    int nmax = 9;
    /// Empty range means an automatic grid (200 samples per qubit linewidth).
    double f_start = 0.0;  // Hz
    double f_stop = 0.0;   // Hz
    int f_points = 0;
    std::optional<double> snr_dB;
};

struct FitSpec {
    double v_cutoff = 0.0;  // V, 0 means Δ/e
};

struct ScenarioConfig {
    std::string preset;
    QcrCircuit circuit{};
    QubitParams qubit{};
    SweepSpec sweep{};
    DriveSpec drive{};
    DynamicsSpec dynamics{};
    SpectrumSpec spectrum{};
    FitSpec fit{};
    bool t_super_given = false;
};

// ---------------------------------------------------------------------------
// number formatting

/// Shortest round-trip decimal text; fixed across runs and platforms.
inline std::string format_number(double x) {
    if (x == 0.0) return "0";
    char buf[40];
    for (int precision = 6; precision <= 17; ++precision) {
        std::snprintf(buf, sizeof buf, "%.*g", precision, x);
        if (std::strtod(buf, nullptr) == x) break;
    }
    return buf;
}

/// SI value expressed in display units, with unit-conversion round-off removed.
inline double in_units(double x, double scale) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x / scale);
    return std::strtod(buf, nullptr);
}

namespace detail {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_number(const std::string& field, const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        throw ConfigError(field + ": expected a number, got '" + text + "'");
    }
    if (used != text.size() || !std::isfinite(v)) throw ConfigError(field + ": expected a number, got '" + text + "'");
    return v;
}

inline int parse_int(const std::string& field, const std::string& text) {
    const double v = parse_number(field, text);
    if (v != std::floor(v) || std::abs(v) > 1e9) throw ConfigError(field + ": expected an integer, got '" + text + "'");
    return static_cast<int>(v);
}

template <class E>
E parse_choice(const std::string& field, const std::string& text, std::initializer_list<std::pair<const char*, E>> options) {
    std::string allowed;
    for (const auto& [name, value] : options) {
        if (text == name) return value;
        allowed += allowed.empty() ? name : std::string("|") + name;
    }
    throw ConfigError(field + ": expected one of " + allowed + ", got '" + text + "'");
}

/// One configuration key: its parser and its canonical printer.
struct Field {
    std::string section;
    std::string key;
    std::function<void(ScenarioConfig&, const std::string& name, const std::string& value)> set;
    std::function<std::string(const ScenarioConfig&)> get;
};

inline constexpr double two_pi = 2.0 * constants::pi;

/// Numeric field stored as SI value = text * scale.
template <class Member>
Field scaled(std::string section, std::string key, double scale, Member member) {
    return Field{std::move(section), std::move(key),
                 [scale, member](ScenarioConfig& c, const std::string& name, const std::string& v) {
                     member(c) = parse_number(name, v) * scale;
                 },
                 [scale, member](const ScenarioConfig& c) {
                     return format_number(in_units(member(c), scale));
                 }};
}

template <class Member>
Field integer(std::string section, std::string key, Member member) {
    return Field{std::move(section), std::move(key),
                 [member](ScenarioConfig& c, const std::string& name, const std::string& v) { member(c) = parse_int(name, v); },
                 [member](const ScenarioConfig& c) { return std::to_string(member(c)); }};
}

template <class Member>
Field optional_number(std::string section, std::string key, Member member) {
    return Field{std::move(section), std::move(key),
                 [member](ScenarioConfig& c, const std::string& name, const std::string& v) {
                     if (v == "none") member(c).reset();
                     else member(c) = parse_number(name, v);
                 },
                 [member](const ScenarioConfig& c) {
                     const auto& o = member(c);
                     return o ? format_number(*o) : std::string("none");
                 }};
}

inline const std::vector<Field>& fields() {
    using C = ScenarioConfig;
    const double ueV = units::micro_eV;
    const double uV = units::micro_volt;
    const double mK = units::milli_kelvin;
    const double GHz = two_pi * 1e9;
    const double MHz = two_pi * 1e6;
    const double ns = units::nano_second;
    static const std::vector<Field> table = {
        scaled("junction", "gap_ueV", ueV, [](auto& c) -> auto& { return c.circuit.junction.gap; }),
        scaled("junction", "dynes", 1.0, [](auto& c) -> auto& { return c.circuit.junction.dynes; }),
        scaled("junction", "r_t_kOhm", units::kilo_ohm, [](auto& c) -> auto& { return c.circuit.junction.tunneling_resistance; }),
        scaled("junction", "t_n_mK", mK, [](auto& c) -> auto& { return c.circuit.junction.t_normal; }),
        Field{"junction", "t_s_mK",
              [mK](C& c, const std::string& name, const std::string& v) {
                  c.circuit.junction.t_super = parse_number(name, v) * mK;
                  c.t_super_given = true;
              },
              [mK](const C& c) { return format_number(c.circuit.junction.t_super / mK); }},
        scaled("junction", "c_nis_fF", units::femto_farad, [](auto& c) -> auto& { return c.circuit.junction.junction_capacitance; }),

        scaled("resonator", "f_r_GHz", GHz, [](auto& c) -> auto& { return c.circuit.resonator_frequency; }),
        scaled("resonator", "z_r_Ohm", 1.0, [](auto& c) -> auto& { return c.circuit.impedance; }),
        scaled("resonator", "cc_over_cn", 1.0, [](auto& c) -> auto& { return c.circuit.capacitance_ratio; }),
        scaled("resonator", "e_n_ueV", ueV, [](auto& c) -> auto& { return c.circuit.charging_energy; }),

        scaled("qubit", "f_q_GHz", GHz, [](auto& c) -> auto& { return c.qubit.qubit_frequency; }),
        scaled("qubit", "alpha_MHz", MHz, [](auto& c) -> auto& { return c.qubit.anharmonicity; }),
        scaled("qubit", "g_MHz", MHz, [](auto& c) -> auto& { return c.qubit.coupling; }),
        scaled("qubit", "chi_MHz", MHz, [](auto& c) -> auto& { return c.qubit.dispersive_shift; }),
        scaled("qubit", "kappa_MHz", MHz, [](auto& c) -> auto& { return c.qubit.qubit_linewidth; }),
        scaled("qubit", "gamma_MHz", MHz, [](auto& c) -> auto& { return c.qubit.resonator_linewidth; }),
        scaled("qubit", "f_ro_GHz", GHz, [](auto& c) -> auto& { return c.qubit.readout_frequency; }),

        scaled("sweep", "v_start_uV", uV, [](auto& c) -> auto& { return c.sweep.v_start; }),
        scaled("sweep", "v_stop_uV", uV, [](auto& c) -> auto& { return c.sweep.v_stop; }),
        integer("sweep", "v_points", [](auto& c) -> auto& { return c.sweep.v_points; }),
        scaled("sweep", "noise_rel", 1.0, [](auto& c) -> auto& { return c.sweep.noise; }),

        Field{"drive", "mode",
              [](C& c, const std::string& name, const std::string& v) {
                  c.drive.mode = parse_choice<DriveMode>(name, v,
                                                         {{"dc", DriveMode::dc},
                                                          {"rf", DriveMode::rf},
                                                          {"pulsed", DriveMode::pulsed},
                                                          {"noise", DriveMode::noise}});
              },
              [](const C& c) { return std::string(to_string(c.drive.mode)); }},
        scaled("drive", "gamma_dr_MHz", MHz, [](auto& c) -> auto& { return c.drive.gamma_drive; }),
        scaled("drive", "n_dr", 1.0, [](auto& c) -> auto& { return c.drive.n_drive; }),
        scaled("drive", "gamma_v0_MHz", MHz, [](auto& c) -> auto& { return c.drive.gamma_background; }),
        optional_number("drive", "power_dBm", [](auto& c) -> auto& { return c.drive.power_dBm; }),
        scaled("drive", "f_rf_GHz", 1e9, [](auto& c) -> auto& { return c.drive.rf.carrier_frequency; }),
        scaled("drive", "rf_amplitude", 1.0, [](auto& c) -> auto& { return c.drive.rf.amplitude; }),
        integer("drive", "sideband_cutoff", [](auto& c) -> auto& { return c.drive.rf.sideband_cutoff; }),
        Field{"drive", "sideband_model",
              [](C& c, const std::string& name, const std::string& v) {
                  c.drive.rf.model = parse_choice<SidebandModel>(
                      name, v, {{"single_photon", SidebandModel::single_photon}, {"tien_gordon", SidebandModel::tien_gordon}});
              },
              [](const C& c) {
                  return std::string(c.drive.rf.model == SidebandModel::single_photon ? "single_photon" : "tien_gordon");
              }},
        scaled("drive", "pulse_period_ns", ns, [](auto& c) -> auto& { return c.drive.pulse.period; }),
        scaled("drive", "pulse_duty", 1.0, [](auto& c) -> auto& { return c.drive.pulse.duty_cycle; }),
        scaled("drive", "pulse_on_uV", uV, [](auto& c) -> auto& { return c.drive.pulse.on_bias; }),
        scaled("drive", "pulse_off_uV", uV, [](auto& c) -> auto& { return c.drive.pulse.off_bias; }),

        scaled("dynamics", "t_stop_ns", ns, [](auto& c) -> auto& { return c.dynamics.t_stop; }),
        scaled("dynamics", "dt_ns", ns, [](auto& c) -> auto& { return c.dynamics.dt; }),
        integer("dynamics", "record_stride", [](auto& c) -> auto& { return c.dynamics.record_stride; }),
        Field{"dynamics", "stepper",
              [](C& c, const std::string& name, const std::string& v) {
                  c.dynamics.stepper =
                      parse_choice<Stepper>(name, v, {{"rk4", Stepper::rk4}, {"crank_nicolson", Stepper::crank_nicolson}});
              },
              [](const C& c) { return std::string(c.dynamics.stepper == Stepper::rk4 ? "rk4" : "crank_nicolson"); }},
        integer("dynamics", "cutoff", [](auto& c) -> auto& { return c.dynamics.cutoff; }),

        Field{"spectrum", "distribution",
              [](C& c, const std::string& name, const std::string& v) {
                  c.spectrum.distribution = parse_choice<DistributionKind>(
                      name, v, {{"poisson", DistributionKind::poisson}, {"gibbs", DistributionKind::gibbs}});
              },
              [](const C& c) {
                  return std::string(c.spectrum.distribution == DistributionKind::poisson ? "poisson" : "gibbs");
              }},
        scaled("spectrum", "nbar", 1.0, [](auto& c) -> auto& { return c.spectrum.nbar; }),
        integer("spectrum", "nmax", [](auto& c) -> auto& { return c.spectrum.nmax; }),
        scaled("spectrum", "f_start_GHz", 1e9, [](auto& c) -> auto& { return c.spectrum.f_start; }),
        scaled("spectrum", "f_stop_GHz", 1e9, [](auto& c) -> auto& { return c.spectrum.f_stop; }),
        integer("spectrum", "f_points", [](auto& c) -> auto& { return c.spectrum.f_points; }),
        optional_number("spectrum", "snr_dB", [](auto& c) -> auto& { return c.spectrum.snr_dB; }),

        scaled("fit", "v_cutoff_uV", uV, [](auto& c) -> auto& { return c.fit.v_cutoff; }),
    };
    return table;
}

inline const Field* find_field(const std::string& section, const std::string& key) {
    for (const auto& f : fields()) {
        if (f.section == section && f.key == key) return &f;
    }
    return nullptr;
}

}  // namespace detail

/// Applies one config text on top of `config`. Later texts override earlier
/// ones; a key repeated within one text is an error.
inline void apply_config_text(ScenarioConfig& config, std::string_view text, const std::string& source) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::string section;
    std::map<std::string, int> seen;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto where = source + ":" + std::to_string(number);
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto body = detail::trim(line);
        if (body.empty()) continue;
        if (body.front() == '[') {
            if (body.back() != ']') throw ConfigError(where + ": unterminated section header");
            section = detail::trim(std::string_view(body).substr(1, body.size() - 2));
            continue;
        }
        const auto eq = body.find('=');
        if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
        const auto key = detail::trim(std::string_view(body).substr(0, eq));
        const auto value = detail::trim(std::string_view(body).substr(eq + 1));
        if (section.empty()) throw ConfigError(where + ": key '" + key + "' outside any section");
        const auto name = section + "." + key;
        const auto* field = detail::find_field(section, key);
        if (!field) throw ConfigError(where + ": unknown key '" + name + "'");
        if (value.empty()) throw ConfigError(where + ": " + name + ": missing value");
        if (auto [it, fresh] = seen.emplace(name, number); !fresh) {
            throw ConfigError(where + ": " + name + " already set on line " + std::to_string(it->second));
        }
        try {
            field->set(config, name, value);
        } catch (const ConfigError& e) {
            throw ConfigError(where + ": " + e.what());
        }
    }
}

/// Fail-fast validation of every physical field.
inline void validate_config(ScenarioConfig& config) {
    if (!config.t_super_given) config.circuit.junction.t_super = config.circuit.junction.t_normal;
    auto check = [](const char* scope, auto&& fn) {
        try {
            fn();
        } catch (const DomainError& e) {
            throw ConfigError(std::string(scope) + ": " + e.what());
        }
    };
    check("junction/resonator", [&] { config.circuit.validate(); });
    check("qubit", [&] { config.qubit.validate(); });
    check("drive", [&] {
        config.drive.rf.validate();
        config.drive.pulse.validate();
    });
    const auto& s = config.sweep;
    if (s.v_points < 2) throw ConfigError("sweep.v_points: need at least 2 points");
    if (!(s.v_stop > s.v_start)) throw ConfigError("sweep.v_stop_uV: must exceed sweep.v_start_uV");
    if (!(s.noise >= 0.0 && s.noise < 1.0)) throw ConfigError("sweep.noise_rel: must lie in [0, 1)");
    const auto& d = config.drive;
    if (!(d.gamma_drive >= 0.0)) throw ConfigError("drive.gamma_dr_MHz: must be non-negative");
    if (!(d.n_drive >= 0.0)) throw ConfigError("drive.n_dr: must be non-negative");
    if (!(d.gamma_background >= 0.0)) throw ConfigError("drive.gamma_v0_MHz: must be non-negative");
    const auto& m = config.dynamics;
    if (!(m.t_stop > 0.0)) throw ConfigError("dynamics.t_stop_ns: must be positive");
    if (!(m.dt > 0.0 && m.dt < m.t_stop)) throw ConfigError("dynamics.dt_ns: must lie in (0, t_stop)");
    if (m.record_stride < 1) throw ConfigError("dynamics.record_stride: must be at least 1");
    if (m.cutoff < 1) throw ConfigError("dynamics.cutoff: must be at least 1");
    const auto& sp = config.spectrum;
    if (!(sp.nbar >= 0.0)) throw ConfigError("spectrum.nbar: must be non-negative");
    if (sp.nmax < 0) throw ConfigError("spectrum.nmax: must be non-negative");
    if (sp.f_points != 0 || sp.f_start != 0.0 || sp.f_stop != 0.0) {
        if (sp.f_points < 2 || !(sp.f_stop > sp.f_start)) {
            throw ConfigError("spectrum.f_*: need f_stop_GHz > f_start_GHz and f_points >= 2");
        }
    }
    if (!(config.fit.v_cutoff >= 0.0)) throw ConfigError("fit.v_cutoff_uV: must be non-negative");
}

/// Canonical (key, value) list of every parameter, in table order.
inline std::vector<std::pair<std::string, std::string>> parameter_stamp(const ScenarioConfig& config) {
    std::vector<std::pair<std::string, std::string>> out;
    if (!config.preset.empty()) out.emplace_back("preset", config.preset);
    for (const auto& f : detail::fields()) out.emplace_back(f.section + "." + f.key, f.get(config));
    return out;
}

// ---------------------------------------------------------------------------
// presets

struct Preset {
    const char* name;
    const char* command;  // the command the preset is meant for
    const char* text;
};

namespace detail {

inline constexpr const char* table1_text = R"(
[junction]
gap_ueV = 220
dynes = 9.25e-3
r_t_kOhm = 14.7
t_n_mK = 150
c_nis_fF = 0.54

[resonator]
f_r_GHz = 4.6704
z_r_Ohm = 63.7
cc_over_cn = 1
e_n_ueV = 0

[qubit]
f_q_GHz = 4.1024
f_ro_GHz = 7.4386
g_MHz = 80.7
alpha_MHz = -273
chi_MHz = -3.725
kappa_MHz = 0.5
gamma_MHz = 2
)";

}  // namespace detail

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> list = {
        {"table1", "rates", ""},
        {"fig1c", "iv", R"(
[sweep]
v_start_uV = -600
v_stop_uV = 600
v_points = 241
)"},
        {"fig2c", "rates", R"(
[sweep]
v_start_uV = -400
v_stop_uV = 400
v_points = 201
)"},
        {"fig3b_pulse", "pulse", R"(
[drive]
mode = pulsed
gamma_dr_MHz = 2
n_dr = 1.21
f_rf_GHz = 2.9
rf_amplitude = 20
sideband_cutoff = 40
sideband_model = tien_gordon
pulse_period_ns = 20
pulse_duty = 0.5
pulse_on_uV = 0
pulse_off_uV = 0

[dynamics]
t_stop_ns = 2000
dt_ns = 0.1
record_stride = 10
stepper = crank_nicolson
)"},
        {"fig3d", "cool", R"(
[junction]
t_n_mK = 150

[sweep]
v_start_uV = 0
v_stop_uV = 220
v_points = 111

[drive]
mode = noise
gamma_dr_MHz = 2
n_dr = 1
)"},
        {"fig4c", "cool", R"(
[junction]
t_n_mK = 280

[sweep]
v_start_uV = 0
v_stop_uV = 220
v_points = 111

[drive]
mode = noise
gamma_dr_MHz = 2
n_dr = 4
)"},
    };
    return list;
}

inline const Preset* find_preset(const std::string& name) {
    for (const auto& p : presets()) {
        if (name == p.name) return &p;
    }
    return nullptr;
}

/// Table I base, then the named preset, then each override text in order.
inline ScenarioConfig load_config(const std::string& preset, const std::vector<std::pair<std::string, std::string>>& texts) {
    ScenarioConfig config;
    apply_config_text(config, detail::table1_text, "preset:table1");
    if (!preset.empty()) {
        const auto* p = find_preset(preset);
        if (!p) {
            std::string names;
            for (const auto& q : presets()) names += names.empty() ? q.name : std::string(", ") + q.name;
            throw ConfigError("unknown preset '" + preset + "' (available: " + names + ")");
        }
        config.preset = preset;
        apply_config_text(config, p->text, "preset:" + preset);
    }
    for (const auto& [source, text] : texts) apply_config_text(config, text, source);
    validate_config(config);
    return config;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// ---------------------------------------------------------------------------
// data files

/// First two numeric columns of a text table. '#' starts a comment, columns are
/// separated by commas and/or whitespace, and one leading non-numeric line (a
/// CSV header) is skipped.
inline std::pair<std::vector<double>, std::vector<double>> read_two_column(std::istream& in, const std::string& source) {
    std::pair<std::vector<double>, std::vector<double>> out;
    std::string line;
    int number = 0;
    bool header_allowed = true;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        for (char& ch : line) {
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        }
        std::istringstream row(line);
        std::string a, b;
        if (!(row >> a)) continue;
        const auto where = source + ":" + std::to_string(number);
        if (!(row >> b)) throw InputError(where + ": expected two columns");
        char* end = nullptr;
        const double x = std::strtod(a.c_str(), &end);
        const bool x_ok = *end == '\0';
        const double y = std::strtod(b.c_str(), &end);
        const bool y_ok = *end == '\0';
        if (!x_ok || !y_ok) {
            if (header_allowed) {
                header_allowed = false;
                continue;
            }
            throw InputError(where + ": non-numeric value");
        }
        if (!std::isfinite(x) || !std::isfinite(y)) throw InputError(where + ": non-finite value");
        header_allowed = false;
        out.first.push_back(x);
        out.second.push_back(y);
    }
    if (out.first.empty()) throw InputError(source + ": no data rows");
    return out;
}

inline std::pair<std::vector<double>, std::vector<double>> read_two_column_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot read data file '" + path + "'");
    return read_two_column(in, path);
}

// ---------------------------------------------------------------------------
// CSV output

/// CSV table whose first line records the command and the full parameter set.
class CsvWriter {
public:
    CsvWriter(std::ostream& out, const std::string& command,
              const std::vector<std::pair<std::string, std::string>>& stamp, const std::vector<std::string>& columns)
        : out_(out), columns_(columns.size()) {
        out_ << "# qcrsim " << command;
        for (const auto& [k, v] : stamp) out_ << ' ' << k << '=' << v;
        out_ << '\n';
        for (std::size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << '\n';
    }

    void row(std::initializer_list<double> values) {
        if (values.size() != columns_) throw std::logic_error("CSV row width does not match the header");
        bool first = true;
        for (double v : values) {
            out_ << (first ? "" : ",") << format_number(v);
            first = false;
        }
        out_ << '\n';
    }

    void comment(const std::string& text) { out_ << "# " << text << '\n'; }

private:
    std::ostream& out_;
    std::size_t columns_;
};

}  // namespace qcr
