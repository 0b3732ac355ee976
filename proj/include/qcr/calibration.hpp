#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "qcr/cavity.hpp"
#include "qcr/engine.hpp"
#include "qcr/least_squares.hpp"
#include "qcr/parallel.hpp"
#include "qcr/physics.hpp"

/// Device-parameter recovery: (R_T, γ_D) from an IV curve and (T_N, γ_dr, n_dr)
/// from a cooling curve. Both fits seed with closed-form estimates and then
/// refine against the forward model.
namespace qcr {

/// Samples of (V, I). Volts and amperes.
struct IvData {
    std::vector<double> voltage;
    std::vector<double> current;
};

/// Samples of (V, n̄). Volts.
struct CoolingCurve {
    std::vector<double> voltage;
    std::vector<double> nbar;
};

/// Multiplies every value by (1 + rel·N(0,1)) with a seeded generator.
inline std::vector<double> multiplicative_noise(std::vector<double> values, double relative, unsigned long long seed) {
    if (!(relative >= 0.0)) throw DomainError("noise level must be non-negative");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (double& v : values) v *= 1.0 + relative * noise(rng);
    return values;
}

namespace detail {

/// Sorts (x, y) pairs by x; rejects repeated or non-finite abscissae.
inline void sort_samples(std::vector<double>& x, std::vector<double>& y, const char* what) {
    if (x.size() != y.size()) throw DomainError(std::string(what) + ": columns differ in length");
    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    std::vector<double> xs(x.size()), ys(y.size());
    for (std::size_t i = 0; i < order.size(); ++i) {
        xs[i] = x[order[i]];
        ys[i] = y[order[i]];
        if (!std::isfinite(xs[i]) || !std::isfinite(ys[i])) throw DomainError(std::string(what) + ": non-finite sample");
        if (i > 0 && !(xs[i] > xs[i - 1])) throw DomainError(std::string(what) + ": voltages must be distinct");
    }
    x = std::move(xs);
    y = std::move(ys);
}

/// Least-squares slope of y against x; needs two distinct abscissae.
inline double regression_slope(std::span<const double> x, std::span<const double> y) {
    const double n = static_cast<double>(x.size());
    const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
    const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

}  // namespace detail

/// Solver settings for model fits: a wider difference step than the default
/// keeps the Jacobian clear of quadrature error.
inline LeastSquaresOptions fit_solver() {
    LeastSquaresOptions o;
    o.difference_step = 1e-5;
    return o;
}

// ---------------------------------------------------------------------------
// IV fit

struct IvFitParams {
    double tunneling_resistance = 0.0;  // Ohm
    double dynes = 0.0;
};

struct IvFitOptions {
    /// Below-gap window |V| <= subgap_fraction·Δ/e.
    double subgap_fraction = 0.5;
    /// Above-gap window |V| >= above_gap_fraction·Δ/e.
    double above_gap_fraction = 2.0;
    /// Relative weight floor, as a fraction of max |I|.
    double weight_floor = 1e-6;
    unsigned workers = 0;
    /// Tight enough that forward differences of the model are not quadrature noise.
    QuadratureSpec quadrature{1e-10, 0.0, 4000};
    LeastSquaresOptions solver = fit_solver();
};

struct IvFitResult {
    IvFitParams stage1;
    IvFitParams stage2;
    LeastSquaresResult report;
    double residual_rms = 0.0;  // rms of the weighted residuals
    std::size_t points = 0;
};

/// Sorted copy of the data, checked for count and span.
inline IvData validated_iv(IvData iv, const JunctionParams& seed) {
    detail::sort_samples(iv.voltage, iv.current, "IV data");
    if (iv.voltage.size() < 20) throw DomainError("IV data needs at least 20 points");
    const double vg = seed.gap / constants::elementary_charge;
    if (!(iv.voltage.front() < -vg && iv.voltage.back() > vg)) {
        throw DomainError("insufficient V span: IV data must extend beyond +-Delta/e");
    }
    return iv;
}

inline IvFitResult extract_rt_gammad(const IvData& data, const JunctionParams& seed, const IvFitOptions& opt = {}) {
    seed.validate();
    const IvData iv = validated_iv(data, seed);
    const double vg = seed.gap / constants::elementary_charge;

    std::vector<double> neg_v, neg_i, pos_v, pos_i, sub_v, sub_i;
    for (std::size_t k = 0; k < iv.voltage.size(); ++k) {
        const double v = iv.voltage[k];
        if (v <= -opt.above_gap_fraction * vg) {
            neg_v.push_back(v);
            neg_i.push_back(iv.current[k]);
        } else if (v >= opt.above_gap_fraction * vg) {
            pos_v.push_back(v);
            pos_i.push_back(iv.current[k]);
        }
        if (std::abs(v) <= opt.subgap_fraction * vg) {
            sub_v.push_back(v);
            sub_i.push_back(iv.current[k]);
        }
    }
    if (neg_v.size() + pos_v.size() < 3 || sub_v.size() < 3) {
        throw DomainError("insufficient V span: need >= 3 points above 2Delta/e and >= 3 within Delta/2e");
    }

    // Stage 1: mean differential resistances of the two windows.
    double g_above = 0.0;
    double weight = 0.0;
    for (auto [v, i] : {std::pair{&neg_v, &neg_i}, std::pair{&pos_v, &pos_i}}) {
        if (v->size() < 2) continue;
        g_above += detail::regression_slope(*v, *i) * static_cast<double>(v->size());
        weight += static_cast<double>(v->size());
    }
    g_above /= weight;
    const double g_sub = detail::regression_slope(sub_v, sub_i);
    if (!(g_above > 0.0) || !std::isfinite(g_above)) {
        throw DomainError("IV data show no above-gap conductance (flat or inverted curve)");
    }

    IvFitResult out;
    out.points = iv.voltage.size();
    out.stage1.tunneling_resistance = 1.0 / g_above;
    out.stage1.dynes = std::clamp(g_sub / g_above, 1e-6, 0.5);

    // Stage 2: full-curve refinement in log parameters with relative weights.
    double imax = 0.0;
    for (double i : iv.current) imax = std::max(imax, std::abs(i));
    std::vector<double> sigma(iv.current.size());
    for (std::size_t k = 0; k < sigma.size(); ++k) sigma[k] = std::abs(iv.current[k]) + opt.weight_floor * imax;

    std::vector<std::size_t> index(iv.voltage.size());
    std::iota(index.begin(), index.end(), 0);
    auto residuals = [&](std::span<const double> p) {
        JunctionParams j = seed;
        j.tunneling_resistance = std::exp(p[0]);
        j.dynes = std::exp(p[1]);
        const auto model = parallel_map(
            index, [&](std::size_t k) { return nis_current(iv.voltage[k], j, opt.quadrature); }, opt.workers);
        std::vector<double> r(model.size());
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = (model[k] - iv.current[k]) / sigma[k];
        return r;
    };
    const std::vector<double> p0{std::log(out.stage1.tunneling_resistance), std::log(out.stage1.dynes)};
    const Bounds bounds{{p0[0] - std::log(10.0), std::log(1e-7)}, {p0[0] + std::log(10.0), std::log(0.5)}};
    out.report = least_squares(residuals, p0, bounds, opt.solver);
    out.stage2.tunneling_resistance = std::exp(out.report.params[0]);
    out.stage2.dynes = std::exp(out.report.params[1]);
    out.residual_rms = std::sqrt(out.report.cost / static_cast<double>(out.points));
    if (!out.report.converged) {
        throw FitError("IV fit did not converge: " + out.report.stop_reason,
                       {out.stage2.tunneling_resistance, out.stage2.dynes}, out.report.cost);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Cooling-curve fit

/// Steady mean photon number with the QCR and one drive-line bath.
inline double cooling_curve_mean(double voltage, const QcrCircuit& c, double gamma_drive, double n_drive,
                                 const QuadratureSpec& q = {}) {
    const auto rates = qcr_rates(voltage, c, q);
    return steady_state_mean({rates.bath(), Bath{n_drive, gamma_drive, BathLabel::drive_line}});
}

struct CoolingFitParams {
    double t_normal = 0.0;     // K
    double gamma_drive = 0.0;  // 1/s
    double n_drive = 0.0;
};

struct CoolingFitOptions {
    /// Points with |V| above this are excluded; 0 means Δ/e of the circuit.
    double voltage_cutoff = 0.0;
    /// QCR-off plateau: |V| <= plateau_fraction·Δ/e.
    double plateau_fraction = 0.25;
    /// Largest relative spread (max - min over mean) accepted as a plateau.
    double plateau_spread = 0.5;
    /// The curve must reach |V| >= on_fraction·Δ/e.
    double on_fraction = 0.7;
    /// Move T_S with T_N during the fit.
    bool tie_superconductor_temperature = true;
    unsigned workers = 0;
    QuadratureSpec quadrature{1e-10, 0.0, 4000};
    LeastSquaresOptions solver = fit_solver();
};

struct CoolingFitResult {
    CoolingFitParams stage1;
    CoolingFitParams stage2;
    LeastSquaresResult report;
    double residual_rms = 0.0;  // rms relative residual
    std::size_t points_used = 0;
    std::size_t points_excluded = 0;
};

inline CoolingFitResult fit_cooling_curve(const CoolingCurve& data, const QcrCircuit& fixed,
                                          const CoolingFitOptions& opt = {}) {
    fixed.validate();
    CoolingCurve curve = data;
    detail::sort_samples(curve.voltage, curve.nbar, "cooling curve");
    if (curve.voltage.size() < 3) throw DomainError("cooling curve needs at least 3 points");
    for (double n : curve.nbar) {
        if (!(n > 0.0)) throw DomainError("cooling curve photon numbers must be positive");
    }

    const double vg = fixed.junction.gap / constants::elementary_charge;
    const double cutoff = opt.voltage_cutoff > 0.0 ? opt.voltage_cutoff : vg;
    CoolingCurve used;
    for (std::size_t k = 0; k < curve.voltage.size(); ++k) {
        if (std::abs(curve.voltage[k]) <= cutoff) {
            used.voltage.push_back(curve.voltage[k]);
            used.nbar.push_back(curve.nbar[k]);
        }
    }
    CoolingFitResult out;
    out.points_used = used.voltage.size();
    out.points_excluded = curve.voltage.size() - used.voltage.size();
    if (out.points_used < 3) throw DomainError("fewer than 3 points below the voltage cutoff");

    std::vector<double> plateau;
    double v_reach = 0.0;
    for (std::size_t k = 0; k < used.voltage.size(); ++k) {
        if (std::abs(used.voltage[k]) <= opt.plateau_fraction * vg) plateau.push_back(used.nbar[k]);
        v_reach = std::max(v_reach, std::abs(used.voltage[k]));
    }
    if (v_reach < opt.on_fraction * vg) throw DomainError("cooling curve does not reach the QCR-on region");
    const double plateau_mean = plateau.empty()
                                    ? 0.0
                                    : std::accumulate(plateau.begin(), plateau.end(), 0.0) / static_cast<double>(plateau.size());
    if (plateau.size() < 2 ||
        (*std::max_element(plateau.begin(), plateau.end()) - *std::min_element(plateau.begin(), plateau.end())) >
            opt.plateau_spread * plateau_mean) {
        throw FitError("no QCR-off plateau detected near V = 0", {}, 0.0);
    }

    auto circuit_at = [&](double t_normal) {
        QcrCircuit c = fixed;
        c.junction.t_normal = t_normal;
        if (opt.tie_superconductor_temperature) c.junction.t_super = t_normal;
        return c;
    };

    // Stage 1: plateau mean, coldest point and the mixing relation at that point.
    const auto kmin = static_cast<std::size_t>(std::min_element(used.nbar.begin(), used.nbar.end()) - used.nbar.begin());
    const double n_min = used.nbar[kmin];
    out.stage1.n_drive = plateau_mean;
    out.stage1.t_normal = std::clamp(temperature_from_occupation(n_min, fixed.resonator_frequency), 0.02, 2.0);
    {
        const auto r = qcr_rates(used.voltage[kmin], circuit_at(out.stage1.t_normal), opt.quadrature);
        const double g = r.gamma * (r.occupation - n_min) / (n_min - plateau_mean);
        out.stage1.gamma_drive = (std::isfinite(g) && g > 0.0) ? g : r.gamma;
    }

    // Stage 2: all three parameters against relative residuals.
    std::vector<std::size_t> index(used.voltage.size());
    std::iota(index.begin(), index.end(), 0);
    auto residuals = [&](std::span<const double> p) {
        const QcrCircuit c = circuit_at(p[0]);
        const double gamma_dr = std::exp(p[1]);
        const auto model = parallel_map(
            index, [&](std::size_t k) { return cooling_curve_mean(used.voltage[k], c, gamma_dr, p[2], opt.quadrature); }, opt.workers);
        std::vector<double> r(model.size());
        for (std::size_t k = 0; k < r.size(); ++k) r[k] = (model[k] - used.nbar[k]) / used.nbar[k];
        return r;
    };
    const std::vector<double> p0{out.stage1.t_normal, std::log(out.stage1.gamma_drive), out.stage1.n_drive};
    const Bounds bounds{{0.02, std::log(1e2), 1e-4}, {2.0, std::log(1e11), 1e3}};
    out.report = least_squares(residuals, p0, bounds, opt.solver);
    out.stage2 = {out.report.params[0], std::exp(out.report.params[1]), out.report.params[2]};
    out.residual_rms = std::sqrt(out.report.cost / static_cast<double>(out.points_used));
    if (!out.report.converged) {
        throw FitError("cooling fit did not converge: " + out.report.stop_reason,
                       {out.stage2.t_normal, out.stage2.gamma_drive, out.stage2.n_drive}, out.report.cost);
    }
    return out;
}

}  // namespace qcr
