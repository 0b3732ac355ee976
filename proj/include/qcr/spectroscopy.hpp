#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "qcr/cavity.hpp"
#include "qcr/constants.hpp"
#include "qcr/error.hpp"
#include "qcr/least_squares.hpp"
#include "qcr/parallel.hpp"

/// Number-splitting spectroscopy of a transmon dispersively coupled to the
/// resonator: synthesis, population extraction and state classification.
namespace qcr {

/// All rates and frequencies are angular (rad/s).
struct QubitParams {
    double qubit_frequency = units::angular_from_GHz(4.1024);
    double anharmonicity = -units::angular_from_MHz(273.0);
    double coupling = units::angular_from_MHz(80.7);
    /// Signed; negative so that the photon-number lines step down in frequency.
    double dispersive_shift = -units::angular_from_MHz(3.725);
    double qubit_linewidth = units::angular_from_MHz(0.5);
    double resonator_linewidth = units::angular_from_MHz(2.0);
    double readout_frequency = units::angular_from_GHz(7.4386);

    void validate() const {
        if (!(qubit_frequency > 0.0)) throw DomainError("qubit_frequency must be positive");
        if (!(anharmonicity < 0.0)) throw DomainError("anharmonicity must be negative");
        if (!(coupling > 0.0)) throw DomainError("coupling must be positive");
        if (!std::isfinite(dispersive_shift) || dispersive_shift == 0.0)
            throw DomainError("dispersive_shift must be finite and nonzero");
        if (!(qubit_linewidth > 0.0)) throw DomainError("qubit_linewidth must be positive");
        if (!(resonator_linewidth > 0.0)) throw DomainError("resonator_linewidth must be positive");
        if (!(readout_frequency > 0.0)) throw DomainError("readout_frequency must be positive");
    }

    /// Strong-dispersive regime: |2 chi| exceeds both linewidths.
    bool resolvable() const {
        const double split = std::abs(2.0 * dispersive_shift);
        return split > qubit_linewidth && split > resonator_linewidth;
    }

    /// Centre of the n-photon line in Hz.
    double line_center_Hz(int n) const {
        return (qubit_frequency + 2.0 * dispersive_shift * n) / (2.0 * constants::pi);
    }
};

inline double critical_photon_number(const QubitParams& q, double resonator_frequency) {
    const double r = (q.qubit_frequency - resonator_frequency) / (2.0 * q.coupling);
    return r * r;
}

class ExtractionError : public NumericError {
public:
    ExtractionError(const std::string& what, double residual_rms) : NumericError(what, residual_rms) {}
    double residual_rms() const noexcept { return error_estimate(); }
};

struct Spectrum {
    std::vector<double> frequency;  // Hz
    std::vector<double> response;

    void validate() const {
        if (frequency.size() != response.size()) throw DomainError("spectrum: grid and response differ in length");
        if (frequency.size() < 2) throw DomainError("spectrum: need at least two samples");
        for (std::size_t i = 1; i < frequency.size(); ++i) {
            if (!(frequency[i] > frequency[i - 1])) throw DomainError("spectrum: grid must be strictly increasing");
        }
        for (double r : response) {
            if (!std::isfinite(r)) throw DomainError("spectrum: non-finite response");
        }
    }
};

inline std::vector<double> linear_grid(double start, double stop, std::size_t points) {
    if (points < 2 || !(stop > start)) throw DomainError("linear_grid: need stop > start and >= 2 points");
    std::vector<double> g(points);
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (std::size_t i = 0; i < points; ++i) g[i] = start + step * static_cast<double>(i);
    g.back() = stop;
    return g;
}

/// Grid in Hz covering lines 0..nmax with `margin_linewidths` qubit FWHM on each side.
inline std::vector<double> spectrum_grid(const QubitParams& q, int nmax, std::size_t points,
                                         double margin_linewidths = 10.0) {
    const double a = q.line_center_Hz(0);
    const double b = q.line_center_Hz(nmax);
    const double pad = margin_linewidths * q.qubit_linewidth / (2.0 * constants::pi);
    return linear_grid(std::min(a, b) - pad, std::max(a, b) + pad, points);
}

/// Unit-height Lorentzian with full width at half maximum `fwhm`.
inline double lorentzian(double f, double center, double fwhm) {
    const double x = 2.0 * (f - center) / fwhm;
    return 1.0 / (1.0 + x * x);
}

namespace detail {

inline void require_coverage(std::span<const double> grid, const QubitParams& q, int nmax) {
    const double lo = grid.front();
    const double hi = grid.back();
    for (int n : {0, nmax}) {
        const double c = q.line_center_Hz(n);
        if (c < lo || c > hi) {
            throw DomainError("spectrum grid does not cover the line of photon number " + std::to_string(n));
        }
    }
}

inline Eigen::MatrixXd line_basis(std::span<const double> grid, const QubitParams& q, int nmax, double fwhm_Hz) {
    Eigen::MatrixXd b(static_cast<Eigen::Index>(grid.size()), nmax + 1);
    for (int n = 0; n <= nmax; ++n) {
        const double c = q.line_center_Hz(n);
        for (std::size_t i = 0; i < grid.size(); ++i) b(static_cast<Eigen::Index>(i), n) = lorentzian(grid[i], c, fwhm_Hz);
    }
    return b;
}

}  // namespace detail

/// Highest photon number whose population exceeds the truncation tail.
inline int significant_cutoff(const FockDistribution& p) {
    int n = p.cutoff();
    while (n > 0 && p[static_cast<std::size_t>(n)] <= truncation_tail) --n;
    return n;
}

/// Sum of unit-height Lorentzians weighted by P_n, centred on the n-photon lines
/// with FWHM equal to the qubit linewidth. The grid must cover every line with
/// P_n above the truncation tail.
inline Spectrum synthesize_spectrum(const FockDistribution& p, const QubitParams& q, std::span<const double> grid_Hz) {
    q.validate();
    Spectrum s{std::vector<double>(grid_Hz.begin(), grid_Hz.end()), std::vector<double>(grid_Hz.size(), 0.0)};
    s.validate();
    detail::require_coverage(grid_Hz, q, significant_cutoff(p));
    const int nmax = p.cutoff();
    const double fwhm = q.qubit_linewidth / (2.0 * constants::pi);
    for (int n = 0; n <= nmax; ++n) {
        const double pn = p[static_cast<std::size_t>(n)];
        if (pn == 0.0) continue;
        const double c = q.line_center_Hz(n);
        for (std::size_t i = 0; i < grid_Hz.size(); ++i) s.response[i] += pn * lorentzian(grid_Hz[i], c, fwhm);
    }
    return s;
}

/// Adds Gaussian noise whose standard deviation is the peak response divided by
/// the amplitude ratio 10^(snr_dB/20).
inline Spectrum add_noise(Spectrum s, double snr_dB, unsigned long long seed) {
    double peak = 0.0;
    for (double r : s.response) peak = std::max(peak, std::abs(r));
    const double sigma = peak / std::pow(10.0, snr_dB / 20.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);
    for (double& r : s.response) r += noise(rng);
    return s;
}

struct PopulationFit {
    FockDistribution populations;
    std::vector<double> heights;  // raw fitted heights before normalization
    double linewidth = 0.0;       // fitted FWHM, angular
    double residual_rms = 0.0;
    double relative_residual = 0.0;  // residual_rms / peak response
    int iterations = 0;
};

struct ExtractionOptions {
    /// Heights more negative than this fraction of the largest are rejected.
    double negative_height_tolerance = 0.05;
    /// The shared width is searched within [κ/w, κ·w].
    double width_range = 20.0;
};

/// Fits lines 0..nmax with fixed centres and one shared width. Heights enter
/// linearly and are eliminated for each trial width, so the nonlinear search is
/// one-dimensional in log(width).
inline PopulationFit extract_population_fit(const Spectrum& s, const QubitParams& q, int nmax,
                                            const ExtractionOptions& opt = {}) {
    q.validate();
    s.validate();
    if (nmax < 0) throw DomainError("nmax must be non-negative");
    detail::require_coverage(s.frequency, q, nmax);

    double peak = 0.0;
    for (double r : s.response) peak = std::max(peak, std::abs(r));
    if (peak == 0.0) throw ExtractionError("no signal: spectrum response is identically zero", 0.0);

    const Eigen::Map<const Eigen::VectorXd> y(s.response.data(), static_cast<Eigen::Index>(s.response.size()));
    auto heights_for = [&](double fwhm_Hz) {
        const Eigen::MatrixXd b = detail::line_basis(s.frequency, q, nmax, fwhm_Hz);
        Eigen::VectorXd h = b.colPivHouseholderQr().solve(y);
        Eigen::VectorXd r = b * h - y;
        return std::pair{h, r};
    };
    auto residuals = [&](std::span<const double> p) {
        const auto [h, r] = heights_for(std::exp(p[0]));
        return std::vector<double>(r.data(), r.data() + r.size());
    };

    const double kappa_Hz = q.qubit_linewidth / (2.0 * constants::pi);
    const double log_k = std::log(kappa_Hz);
    const double spread = std::log(opt.width_range);
    const auto fit = least_squares(residuals, {log_k}, Bounds{{log_k - spread}, {log_k + spread}});
    const double fwhm_Hz = std::exp(fit.params[0]);
    const auto [h, r] = heights_for(fwhm_Hz);

    PopulationFit out;
    out.linewidth = 2.0 * constants::pi * fwhm_Hz;
    out.residual_rms = std::sqrt(r.squaredNorm() / static_cast<double>(r.size()));
    out.relative_residual = out.residual_rms / peak;
    out.iterations = fit.iterations;
    if (!fit.converged) {
        throw ExtractionError("line-width fit did not converge (" + fit.stop_reason + "), residual rms " +
                                  std::to_string(out.residual_rms),
                              out.residual_rms);
    }

    const double hmax = h.maxCoeff();
    if (!(hmax > 0.0)) {
        throw ExtractionError("no positive line heights, residual rms " + std::to_string(out.residual_rms),
                              out.residual_rms);
    }
    out.heights.assign(h.data(), h.data() + h.size());
    std::vector<double> w(out.heights);
    for (std::size_t n = 0; n < w.size(); ++n) {
        if (w[n] < -opt.negative_height_tolerance * hmax) {
            throw ExtractionError("negative height " + std::to_string(w[n]) + " for line " + std::to_string(n) +
                                      ", residual rms " + std::to_string(out.residual_rms),
                                  out.residual_rms);
        }
        w[n] = std::max(w[n], 0.0);
    }
    out.populations = FockDistribution::normalized(std::move(w));
    return out;
}

inline FockDistribution extract_populations(const Spectrum& s, const QubitParams& q, int nmax) {
    return extract_population_fit(s, q, nmax).populations;
}

/// Independent fits over a batch of spectra, results in input order.
inline std::vector<PopulationFit> extract_population_batch(const std::vector<Spectrum>& spectra,
                                                           const QubitParams& q, int nmax, unsigned workers = 0) {
    return parallel_map(spectra, [&](const Spectrum& s) { return extract_population_fit(s, q, nmax); }, workers);
}

enum class StateClass { coherent, thermal, ambiguous };

inline const char* to_string(StateClass c) {
    switch (c) {
        case StateClass::coherent: return "coherent";
        case StateClass::thermal: return "thermal";
        case StateClass::ambiguous: return "ambiguous";
    }
    return "unknown";
}

struct StateClassification {
    StateClass state = StateClass::ambiguous;
    /// n̄ of the lower-residual model.
    double nbar = 0.0;
    double nbar_poisson = 0.0;
    double nbar_gibbs = 0.0;
    /// L2 norms of P_n minus the fitted model over the stored Fock range.
    double residual_poisson = 0.0;
    double residual_gibbs = 0.0;
};

struct ClassificationOptions {
    /// Residuals closer than this relative difference are ambiguous.
    double relative_margin = 0.2;
    /// Both residuals below this L2 value are ambiguous: the two models are
    /// then closer than a percent-level population measurement can resolve.
    double distinguishability_floor = 1e-2;
};

namespace detail {

inline double poisson_term(double nbar, int n) {
    if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(-nbar + n * std::log(nbar) - std::lgamma(n + 1.0));
}

inline double gibbs_term(double nbar, int n) {
    if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(nbar) - (n + 1.0) * std::log1p(nbar));
}

template <class Term>
std::pair<double, double> fit_occupation(const FockDistribution& p, const Term& term) {
    const int cutoff = p.cutoff();
    auto residuals = [&](std::span<const double> x) {
        std::vector<double> r(static_cast<std::size_t>(cutoff) + 1);
        for (int n = 0; n <= cutoff; ++n) r[static_cast<std::size_t>(n)] = term(x[0], n) - p[static_cast<std::size_t>(n)];
        return r;
    };
    const double seed = mean_photon(p);
    const double upper = std::max(4.0 * seed + 10.0, 2.0 * cutoff);
    const auto fit = least_squares(residuals, {seed}, Bounds{{0.0}, {upper}});
    return {fit.params[0], std::sqrt(fit.cost)};
}

}  // namespace detail

inline StateClassification classify_state(const FockDistribution& p, const ClassificationOptions& opt = {}) {
    StateClassification out;
    std::tie(out.nbar_poisson, out.residual_poisson) = detail::fit_occupation(p, detail::poisson_term);
    std::tie(out.nbar_gibbs, out.residual_gibbs) = detail::fit_occupation(p, detail::gibbs_term);

    const bool poisson_wins = out.residual_poisson <= out.residual_gibbs;
    out.nbar = poisson_wins ? out.nbar_poisson : out.nbar_gibbs;
    const double worse = std::max(out.residual_poisson, out.residual_gibbs);
    const double gap = std::abs(out.residual_poisson - out.residual_gibbs);
    if (worse < opt.distinguishability_floor || gap < opt.relative_margin * worse) {
        out.state = StateClass::ambiguous;
    } else {
        out.state = poisson_wins ? StateClass::coherent : StateClass::thermal;
    }
    return out;
}

}  // namespace qcr
