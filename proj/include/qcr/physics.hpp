#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>

#include "qcr/constants.hpp"
#include "qcr/error.hpp"
#include "qcr/quadrature.hpp"

/// Tunneling kernel of a normal-metal/insulator/superconductor junction:
/// occupation factors, the Dynes density of states, the normalized forward
/// tunneling rate F(E) and the junction IV characteristic.
///
/// Everything here works in SI units. Energies are joules, rates are 1/s.
namespace qcr {

/// Physical identity of the NIS junction.
struct JunctionParams {
    double gap = 220.0 * units::micro_eV;                      // J
    double dynes = 9.25e-3;                                    // dimensionless
    double tunneling_resistance = 14.7 * units::kilo_ohm;      // Ohm
    double t_normal = 150.0 * units::milli_kelvin;             // K
    double t_super = 150.0 * units::milli_kelvin;              // K
    /// Stored for completeness; it does not enter the tunneling rates.
    double junction_capacitance = 0.54 * units::femto_farad;   // F

    void validate() const {
        if (!(gap > 0.0)) throw DomainError("junction gap must be positive");
        if (!(dynes > 0.0 && dynes < 1.0)) throw DomainError("Dynes parameter must lie in (0, 1)");
        if (!(tunneling_resistance > 0.0)) throw DomainError("tunneling resistance must be positive");
        if (!(t_normal > 0.0)) throw DomainError("normal-metal temperature must be positive");
        if (!(t_super > 0.0)) throw DomainError("superconductor temperature must be positive");
        if (!(junction_capacitance >= 0.0)) throw DomainError("junction capacitance must be non-negative");
    }
};

inline constexpr double exponent_clamp = 700.0;

/// Fermi-Dirac occupation 1/(exp(energy/kT) + 1).
inline double fermi_occupation(double energy, double temperature) {
    if (!(temperature > 0.0)) throw DomainError("fermi_occupation: temperature must be positive");
    const double x = std::clamp(energy / (constants::boltzmann * temperature), -exponent_clamp, exponent_clamp);
    return 1.0 / (std::exp(x) + 1.0);
}

/// Normalized quasiparticle density of states with Dynes broadening,
/// |Re[(e + i g D) / sqrt((e + i g D)^2 - D^2)]|.
inline double dynes_dos(double energy, double gap, double dynes) {
    if (!(gap > 0.0)) throw DomainError("dynes_dos: gap must be positive");
    if (!(dynes > 0.0)) throw DomainError("dynes_dos: Dynes parameter must be positive");
    // Work in units of the gap so that the complex arithmetic stays O(1).
    const std::complex<double> z(energy / gap, dynes);
    return std::abs((z / std::sqrt(z * z - 1.0)).real());
}

namespace detail {

enum class TunnelKernel {
    forward_rate,  // n_S (1 - f_S) f_N(e - E)
    derivative,    // d/dE of the above
};

// Largest value the DOS can take; bounds the truncated tails.
inline double dos_upper_bound(const JunctionParams& j) {
    return 2.0 * dynes_dos(j.gap, j.gap, j.dynes) + 2.0;
}

/// Integral over energy of the chosen tunneling kernel, in units of
/// energy^1 (forward_rate) or energy^0 (derivative), divided by h.
inline double tunneling_integral(TunnelKernel kernel, double bias_energy, const JunctionParams& j,
                                 const QuadratureSpec& q) {
    j.validate();
    q.validate();
    const double gap = j.gap;
    const double kt_n = constants::boltzmann * j.t_normal;
    const double kt_s = constants::boltzmann * j.t_super;
    // Everything below is in units of the gap.
    const double e = bias_energy / gap;
    const double tn = kt_n / gap;
    const double ts = kt_s / gap;

    auto occupation = [](double x) {
        return 1.0 / (std::exp(std::clamp(x, -exponent_clamp, exponent_clamp)) + 1.0);
    };
    auto integrand = [&](double x) {
        const double dos = dynes_dos(x, 1.0, j.dynes);
        const double empty_s = occupation(-x / ts);
        const double fn = occupation((x - e) / tn);
        if (kernel == TunnelKernel::forward_rate) return dos * empty_s * fn;
        return dos * empty_s * fn * occupation(-(x - e) / tn) / tn;
    };

    // Tail bounds from 1 - f_S(x) <= exp(x/ts) and f_N(x - e) <= exp(-(x - e)/tn).
    const double dos_max = dos_upper_bound(j);
    auto lower_tail = [&](double lo) {
        const double base = dos_max * ts * std::exp(lo / ts);
        return kernel == TunnelKernel::forward_rate ? base : base / (4.0 * tn);
    };
    auto upper_tail = [&](double hi) {
        const double base = dos_max * std::exp(-(hi - e) / tn);
        return kernel == TunnelKernel::forward_rate ? base * tn : base;
    };

    const double scale = gap / constants::planck;  // converts the dimensionless integral to 1/s
    const double floor = q.absolute_floor / scale;
    const std::array<double, 4> breakpoints{-1.0, 0.0, 1.0, e};

    double lo = std::min(0.0, e) - 40.0 * ts;
    double hi = std::max(0.0, e) + 40.0 * tn;
    double total = integrate_adaptive(integrand, lo, hi, breakpoints, q.relative_tolerance, floor,
                                      q.max_subdivisions)
                       .value;
    // Extend the window until the analytic tail bounds are negligible.
    const double tail_share = 1e-2 * q.relative_tolerance;
    for (int guard = 0; guard < 200; ++guard) {
        const bool lo_ok = lower_tail(lo) <= std::max(tail_share * std::abs(total), floor);
        const bool hi_ok = upper_tail(hi) <= std::max(tail_share * std::abs(total), floor);
        if (lo_ok && hi_ok) return total * scale;
        if (!lo_ok) {
            const double next = lo - std::max(20.0 * ts, 0.5);
            total += integrate_adaptive(integrand, next, lo, breakpoints, q.relative_tolerance, floor,
                                        q.max_subdivisions)
                         .value;
            lo = next;
        }
        if (!hi_ok) {
            const double next = hi + std::max(20.0 * tn, 0.5);
            total += integrate_adaptive(integrand, hi, next, breakpoints, q.relative_tolerance, floor,
                                        q.max_subdivisions)
                         .value;
            hi = next;
        }
    }
    throw NumericError("tunneling integral tails did not decay", std::abs(total) * scale);
}

}  // namespace detail

/// Normalized forward quasiparticle tunneling rate
/// F(E) = (1/h) Int de n_S(e) [1 - f_S(e)] f_N(e - E), in 1/s.
inline double forward_rate(double energy, const JunctionParams& j, const QuadratureSpec& q = {}) {
    return detail::tunneling_integral(detail::TunnelKernel::forward_rate, energy, j, q);
}

/// dF/dE in 1/(J s), evaluated as its own integral rather than by differencing.
inline double forward_rate_derivative(double energy, const JunctionParams& j, const QuadratureSpec& q = {}) {
    return detail::tunneling_integral(detail::TunnelKernel::derivative, energy, j, q) / j.gap;
}

/// Default accuracy for IV curves.
inline QuadratureSpec iv_quadrature() { return QuadratureSpec{1e-7, 0.0, 2000}; }

/// NIS junction current I(V) = e (R_K/R_T) [F(eV) - F(-eV)].
inline double nis_current(double voltage, const JunctionParams& j, const QuadratureSpec& q = iv_quadrature()) {
    const double energy = constants::elementary_charge * voltage;
    const double prefactor = constants::elementary_charge * constants::von_klitzing / j.tunneling_resistance;
    return prefactor * (forward_rate(energy, j, q) - forward_rate(-energy, j, q));
}

/// Differential conductance dI/dV in siemens.
inline double nis_conductance(double voltage, const JunctionParams& j, const QuadratureSpec& q = iv_quadrature()) {
    const double e = constants::elementary_charge;
    const double energy = e * voltage;
    const double prefactor = e * e * constants::von_klitzing / j.tunneling_resistance;
    return prefactor * (forward_rate_derivative(energy, j, q) + forward_rate_derivative(-energy, j, q));
}

}  // namespace qcr
