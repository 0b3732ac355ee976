#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "qcr/cavity.hpp"
#include "qcr/physics.hpp"

/// QCR-induced coupling rate and effective bath of the resonator mode under
/// dc, rf and pulsed operation.
namespace qcr {

/// Junction plus the resonator mode it dissipates.
struct QcrCircuit {
    JunctionParams junction{};
    double resonator_frequency = units::angular_from_GHz(4.6704);  // rad/s
    double impedance = 63.7;                                        // Ohm
    /// C_c/C_N; 1 for a junction attached directly to the resonator.
    double capacitance_ratio = 1.0;
    double charging_energy = 0.0;                                   // J

    void validate() const {
        junction.validate();
        if (!(resonator_frequency > 0.0)) throw DomainError("resonator frequency must be positive");
        if (!(impedance > 0.0)) throw DomainError("resonator impedance must be positive");
        if (!(capacitance_ratio > 0.0 && capacitance_ratio <= 1.0)) {
            throw DomainError("capacitance ratio must lie in (0, 1]");
        }
        if (!(charging_energy >= 0.0)) throw DomainError("island charging energy must be non-negative");
    }

    double photon_energy() const { return constants::hbar * resonator_frequency; }
};

/// Lumped impedance of the lowest quarter-wave mode, Z_r = (4/pi) Z_0.
inline double lumped_impedance(double line_impedance) {
    if (!(line_impedance >= 0.0)) throw DomainError("line impedance must be non-negative");
    return 4.0 / constants::pi * line_impedance;
}

/// Everything the QCR bath contributes at one operating point.
struct QcrRates {
    double gamma = 0.0;       // energy decay rate, 1/s
    double rate_ratio = 0.0;  // F(eV + hw - E_N) / F(eV - hw - E_N)
    /// Bath occupation 1/(ratio - 1); only meaningful while ratio > 1.
    double occupation = 0.0;
    /// Effective temperature; empty when the ratio does not exceed 1 (no
    /// finite positive temperature describes the bath).
    std::optional<double> temperature;

    bool heating_regime() const { return !temperature.has_value(); }

    Bath bath(BathLabel label = BathLabel::qcr) const { return Bath{occupation, gamma, label}; }
};

namespace detail {

/// Shared evaluation of gamma and the bath from any forward-rate function.
template <class RateFn>
QcrRates qcr_rates_from(double voltage, const QcrCircuit& c, const RateFn& rate) {
    c.validate();
    const double ev = constants::elementary_charge * voltage;
    const double hw = c.photon_energy();
    const double en = c.charging_energy;
    const double up_plus = rate(ev + hw - en);
    const double up_minus = rate(ev - hw - en);
    const double down_plus = rate(-ev + hw - en);
    const double down_minus = rate(-ev - hw - en);

    const double ratio_c = c.capacitance_ratio;
    const double prefactor = constants::pi * ratio_c * ratio_c * c.impedance / c.junction.tunneling_resistance;

    QcrRates out;
    // Pairing by tau keeps gamma(V) and gamma(-V) bit-identical.
    out.gamma = prefactor * ((up_plus - up_minus) + (down_plus - down_minus));
    out.rate_ratio = up_plus / up_minus;
    out.occupation = 1.0 / (out.rate_ratio - 1.0);
    if (out.rate_ratio > 1.0) {
        out.temperature = hw / constants::boltzmann / std::log(out.rate_ratio);
    }
    return out;
}

}  // namespace detail

/// Coupling rate, occupation and temperature of the dc-biased QCR bath.
inline QcrRates qcr_rates(double voltage, const QcrCircuit& c, const QuadratureSpec& q = {}) {
    return detail::qcr_rates_from(voltage, c, [&](double e) { return forward_rate(e, c.junction, q); });
}

/// gamma_QCR = pi (C_c/C_N)^2 (Z_r/R_T) sum_{l,tau} l F(tau eV + l hw - E_N).
inline double gamma_qcr(double voltage, const QcrCircuit& c, const QuadratureSpec& q = {}) {
    return qcr_rates(voltage, c, q).gamma;
}

/// Effective QCR temperature; the returned rates carry the raw ratio when no
/// positive temperature exists.
inline QcrRates t_qcr(double voltage, const QcrCircuit& c, const QuadratureSpec& q = {}) {
    return qcr_rates(voltage, c, q);
}

enum class TunnelDirection { forward, backward };

/// Transition rate between |q m> and |q+1 m'> for a caller-supplied matrix element.
inline double general_transition_rate(int charge_state, int m, int m_prime, double matrix_element, double voltage,
                                      const QcrCircuit& c, TunnelDirection direction, const QuadratureSpec& q = {}) {
    c.validate();
    if (m < 0 || m_prime < 0) throw DomainError("Fock indices must be non-negative");
    const double sign = direction == TunnelDirection::forward ? 1.0 : -1.0;
    const int photons = m - m_prime;
    const double charging = c.charging_energy * (1.0 + sign * 2.0 * charge_state);
    const double energy = sign * constants::elementary_charge * voltage + photons * c.photon_energy() - charging;
    const double prefactor = matrix_element * matrix_element * constants::von_klitzing /
                             c.junction.tunneling_resistance;
    if (prefactor == 0.0) return 0.0;
    return prefactor * forward_rate(energy, c.junction, q);
}

/// Resonator transition rate m -> m' summed over both tunneling directions.
inline double resonator_transition_rate(int m, int m_prime, double matrix_element, double voltage,
                                        const QcrCircuit& c, const QuadratureSpec& q = {}) {
    c.validate();
    if (m < 0 || m_prime < 0) throw DomainError("Fock indices must be non-negative");
    const int photons = m - m_prime;
    const double prefactor = matrix_element * matrix_element * constants::von_klitzing /
                             c.junction.tunneling_resistance;
    if (prefactor == 0.0) return 0.0;
    const double ev = constants::elementary_charge * voltage;
    const double shift = photons * c.photon_energy() - c.charging_energy;
    return prefactor * (forward_rate(ev + shift, c.junction, q) + forward_rate(-ev + shift, c.junction, q));
}

// ---------------------------------------------------------------------------
// rf operation

enum class SidebandModel {
    single_photon,  // every tunneling event absorbs one extra rf photon
    tien_gordon,    // w_k = J_k(alpha)^2 for a harmonic junction voltage
};

struct RfDrive {
    double carrier_frequency = 9.25e9;  // Hz
    /// Junction-voltage amplitude in units of h f_rf / e. Zero disables the drive.
    double amplitude = 1.0;
    int sideband_cutoff = 1;
    SidebandModel model = SidebandModel::single_photon;

    void validate() const {
        if (!(carrier_frequency > 0.0)) throw DomainError("rf carrier frequency must be positive");
        if (!(amplitude >= 0.0)) throw DomainError("rf amplitude must be non-negative");
        if (sideband_cutoff < 1) throw DomainError("rf sideband cutoff must be at least 1");
    }

    double photon_energy() const { return constants::planck * carrier_frequency; }
};

struct Sideband {
    int order = 0;
    double weight = 0.0;
};

inline constexpr double sideband_normalization_tolerance = 1e-6;

/// Photon-number weights of the rf drive. An undriven junction has the single
/// weight w_0 = 1.
inline std::vector<Sideband> sideband_weights(const RfDrive& rf) {
    rf.validate();
    if (rf.amplitude == 0.0) return {{0, 1.0}};
    std::vector<Sideband> out;
    if (rf.model == SidebandModel::single_photon) {
        out.push_back({1, 1.0});
    } else {
        for (int k = -rf.sideband_cutoff; k <= rf.sideband_cutoff; ++k) {
            const double jk = std::cyl_bessel_j(static_cast<double>(std::abs(k)), rf.amplitude);
            out.push_back({k, jk * jk});
        }
    }
    double total = 0.0;
    for (const auto& s : out) {
        if (!(s.weight >= 0.0)) throw DomainError("negative sideband weight");
        total += s.weight;
    }
    if (std::abs(total - 1.0) > sideband_normalization_tolerance) {
        throw DomainError("sideband weights sum to " + std::to_string(total) +
                          "; raise the sideband cutoff for this amplitude");
    }
    return out;
}

/// QCR bath with F(E) replaced by sum_k w_k F(E + k h f_rf).
inline QcrRates rf_effective_rates(double voltage, const RfDrive& rf, const QcrCircuit& c,
                                   const QuadratureSpec& q = {}) {
    const auto weights = sideband_weights(rf);
    const double photon = rf.photon_energy();
    return detail::qcr_rates_from(voltage, c, [&](double e) {
        double sum = 0.0;
        for (const auto& s : weights) sum += s.weight * forward_rate(e + s.order * photon, c.junction, q);
        return sum;
    });
}

/// Smallest bias in [v_lo, v_hi] where rate(V) reaches threshold, by a grid
/// scan followed by bisection. Returns empty when the threshold is never hit.
template <class RateOfVoltage>
std::optional<double> threshold_crossing(const RateOfVoltage& rate, double threshold, double v_lo, double v_hi,
                                         int scan_points = 200, double voltage_tolerance = 1e-9) {
    double previous_v = v_lo;
    if (rate(v_lo) >= threshold) return v_lo;
    for (int i = 1; i <= scan_points; ++i) {
        const double v = v_lo + (v_hi - v_lo) * i / scan_points;
        if (rate(v) >= threshold) {
            double lo = previous_v;
            double hi = v;
            while (hi - lo > voltage_tolerance) {
                const double mid = 0.5 * (lo + hi);
                (rate(mid) >= threshold ? hi : lo) = mid;
            }
            return 0.5 * (lo + hi);
        }
        previous_v = v;
    }
    return std::nullopt;
}

/// Onset voltage of the QCR: the bias where gamma first reaches
/// factor * gamma_QCR(0) of the undriven junction. With an rf drive the driven
/// rate is compared against that same undriven threshold.
inline std::optional<double> onset_voltage(const QcrCircuit& c, const std::optional<RfDrive>& rf = std::nullopt,
                                           double factor = 10.0, const QuadratureSpec& q = {}) {
    const double threshold = factor * gamma_qcr(0.0, c, q);
    const double v_max = 2.0 * c.junction.gap / constants::elementary_charge;
    auto rate = [&](double v) { return rf ? rf_effective_rates(v, *rf, c, q).gamma : gamma_qcr(v, c, q); };
    return threshold_crossing(rate, threshold, 0.0, v_max);
}

// ---------------------------------------------------------------------------
// pulsed operation

/// Periodic square-wave modulation of the QCR bias and rf drive.
struct PulseProfile {
    double period = 20e-9;  // s
    double duty_cycle = 0.5;
    double on_bias = 0.0;   // V
    double off_bias = 0.0;  // V
    std::optional<RfDrive> on_rf;

    void validate() const {
        if (!(period > 0.0)) throw DomainError("pulse period must be positive");
        if (!(duty_cycle >= 0.0 && duty_cycle <= 1.0)) throw DomainError("duty cycle must lie in [0, 1]");
        if (on_rf) on_rf->validate();
    }

    bool is_on(double t) const {
        const double phase = t / period - std::floor(t / period);
        return phase < duty_cycle;
    }
};

struct PulseAverage {
    double gamma = 0.0;             // duty-weighted coupling rate
    double occupation_rate = 0.0;   // duty-weighted n * gamma
    QcrRates on;
    QcrRates off;

    double occupation() const { return occupation_rate / gamma; }
};

inline QcrRates pulse_on_rates(const PulseProfile& p, const QcrCircuit& c, const QuadratureSpec& q = {}) {
    return p.on_rf ? rf_effective_rates(p.on_bias, *p.on_rf, c, q) : qcr_rates(p.on_bias, c, q);
}

inline QcrRates pulse_off_rates(const PulseProfile& p, const QcrCircuit& c, const QuadratureSpec& q = {}) {
    return qcr_rates(p.off_bias, c, q);
}

/// Time-averaged QCR rates, valid when the period is short compared to the
/// inverse total coupling.
inline PulseAverage pulse_averaged_rates(const PulseProfile& p, const QcrCircuit& c, const QuadratureSpec& q = {}) {
    p.validate();
    PulseAverage avg;
    if (p.duty_cycle > 0.0) avg.on = pulse_on_rates(p, c, q);
    if (p.duty_cycle < 1.0) avg.off = pulse_off_rates(p, c, q);
    if (p.duty_cycle == 1.0) {
        avg.gamma = avg.on.gamma;
        avg.occupation_rate = avg.on.occupation * avg.on.gamma;
        avg.off = avg.on;
        return avg;
    }
    if (p.duty_cycle == 0.0) {
        avg.gamma = avg.off.gamma;
        avg.occupation_rate = avg.off.occupation * avg.off.gamma;
        avg.on = avg.off;
        return avg;
    }
    const double d = p.duty_cycle;
    avg.gamma = d * avg.on.gamma + (1.0 - d) * avg.off.gamma;
    avg.occupation_rate = d * avg.on.occupation * avg.on.gamma + (1.0 - d) * avg.off.occupation * avg.off.gamma;
    return avg;
}

/// Square-wave bath schedule for the master equation: the QCR bath switches
/// between its on and off values while the extra baths stay constant.
inline BathSchedule pulse_schedule(const PulseProfile& p, const QcrRates& on, const QcrRates& off,
                                   std::vector<Bath> constant_baths = {}) {
    p.validate();
    auto on_baths = constant_baths;
    on_baths.push_back(on.bath());
    auto off_baths = std::move(constant_baths);
    off_baths.push_back(off.bath());
    return square_wave_schedule(std::move(on_baths), std::move(off_baths), p.period, p.duty_cycle);
}

}  // namespace qcr
