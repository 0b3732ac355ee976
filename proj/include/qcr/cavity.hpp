#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "qcr/constants.hpp"
#include "qcr/error.hpp"

/// Photon statistics of the resonator mode: thermal and coherent Fock
/// distributions, bath mixing, and a birth-death master equation.
namespace qcr {

inline constexpr double normalization_tolerance = 1e-9;
inline constexpr double truncation_tail = 1e-6;
inline constexpr int default_fock_cutoff = 60;

/// Normalized populations P_0..P_nmax of the resonator Fock states.
class FockDistribution {
public:
    FockDistribution() : p_{1.0} {}

    /// Takes populations that already sum to one.
    explicit FockDistribution(std::vector<double> probabilities) : p_(std::move(probabilities)) {
        check_nonnegative();
        const double total = std::accumulate(p_.begin(), p_.end(), 0.0);
        if (std::abs(total - 1.0) > normalization_tolerance) {
            throw DomainError("Fock populations sum to " + std::to_string(total) + ", not 1");
        }
    }

    /// Rescales non-negative weights to unit sum.
    static FockDistribution normalized(std::vector<double> weights) {
        FockDistribution out;
        out.p_ = std::move(weights);
        out.check_nonnegative();
        const double total = std::accumulate(out.p_.begin(), out.p_.end(), 0.0);
        if (!(total > 0.0)) throw DomainError("Fock weights have zero total");
        for (double& x : out.p_) x /= total;
        return out;
    }

    static FockDistribution vacuum(int cutoff = 0) {
        std::vector<double> p(static_cast<std::size_t>(cutoff) + 1, 0.0);
        p[0] = 1.0;
        return FockDistribution(std::move(p));
    }

    int cutoff() const { return static_cast<int>(p_.size()) - 1; }
    std::size_t size() const { return p_.size(); }
    double operator[](std::size_t n) const { return n < p_.size() ? p_[n] : 0.0; }
    std::span<const double> probabilities() const { return p_; }

    /// Zero-padded copy with a larger cutoff.
    FockDistribution extended(int cutoff) const {
        FockDistribution out = *this;
        if (cutoff > this->cutoff()) out.p_.resize(static_cast<std::size_t>(cutoff) + 1, 0.0);
        return out;
    }

private:
    void check_nonnegative() const {
        if (p_.empty()) throw DomainError("Fock distribution needs at least one state");
        for (double x : p_) {
            if (!(x >= 0.0)) throw DomainError("Fock populations must be non-negative");
        }
    }

    std::vector<double> p_;
};

inline double mean_photon(const FockDistribution& p) {
    double sum = 0.0;
    const auto probs = p.probabilities();
    for (std::size_t n = 0; n < probs.size(); ++n) sum += static_cast<double>(n) * probs[n];
    return sum;
}

inline double total_variation(const FockDistribution& a, const FockDistribution& b) {
    const std::size_t n = std::max(a.size(), b.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) sum += std::abs(a[k] - b[k]);
    return 0.5 * sum;
}

/// Bose occupation 1/(exp(hbar w / kT) - 1).
inline double bose_occupation(double temperature, double angular_frequency) {
    if (!(temperature > 0.0)) throw DomainError("bose_occupation: temperature must be positive");
    if (!(angular_frequency > 0.0)) throw DomainError("bose_occupation: frequency must be positive");
    return 1.0 / std::expm1(constants::hbar * angular_frequency / (constants::boltzmann * temperature));
}

/// Inverse of bose_occupation.
inline double temperature_from_occupation(double occupation, double angular_frequency) {
    if (!(occupation > 0.0)) throw DomainError("temperature_from_occupation: occupation must be positive");
    if (!(angular_frequency > 0.0)) throw DomainError("temperature_from_occupation: frequency must be positive");
    return constants::hbar * angular_frequency / constants::boltzmann / std::log1p(1.0 / occupation);
}

enum class BathLabel { qcr, drive_line, intrinsic };

inline const char* to_string(BathLabel label) {
    switch (label) {
        case BathLabel::qcr: return "qcr";
        case BathLabel::drive_line: return "drive_line";
        case BathLabel::intrinsic: return "intrinsic";
    }
    return "unknown";
}

/// One dissipative channel of the resonator.
struct Bath {
    double occupation = 0.0;  // n_b
    double coupling = 0.0;    // gamma_b, 1/s
    BathLabel label = BathLabel::intrinsic;

    void validate() const {
        if (!(occupation >= 0.0)) throw DomainError(std::string(to_string(label)) + " bath occupation must be >= 0");
        if (!(coupling >= 0.0)) throw DomainError(std::string(to_string(label)) + " bath coupling must be >= 0");
    }
};

/// Coupling-weighted mean of bath occupations.
inline double steady_state_mean(std::span<const Bath> baths) {
    double weighted = 0.0;
    double total = 0.0;
    for (const auto& b : baths) {
        b.validate();
        weighted += b.occupation * b.coupling;
        total += b.coupling;
    }
    if (!(total > 0.0)) throw DomainError("steady_state_mean: total coupling must be positive");
    return weighted / total;
}

inline double steady_state_mean(std::initializer_list<Bath> baths) {
    return steady_state_mean(std::span<const Bath>(baths.begin(), baths.size()));
}

namespace detail {

template <class Term>
FockDistribution truncated_distribution(double nbar, int cutoff, const Term& term) {
    if (!(nbar >= 0.0)) throw DomainError("mean photon number must be non-negative");
    if (cutoff < 0) throw DomainError("Fock cutoff must be non-negative");
    std::vector<double> p;
    for (int n = 0;; ++n) {
        p.push_back(term(n));
        if (n >= cutoff && n >= nbar && p.back() < truncation_tail) break;
    }
    return FockDistribution::normalized(std::move(p));
}

}  // namespace detail

/// Coherent-state statistics e^{-n} n^k / k!.
inline FockDistribution poisson_distribution(double nbar, int cutoff = default_fock_cutoff) {
    return detail::truncated_distribution(nbar, cutoff, [nbar](int n) {
        if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
        return std::exp(-nbar + n * std::log(nbar) - std::lgamma(n + 1.0));
    });
}

/// Thermal statistics n^k / (n + 1)^{k+1}.
inline FockDistribution gibbs_distribution(double nbar, int cutoff = default_fock_cutoff) {
    return detail::truncated_distribution(nbar, cutoff, [nbar](int n) {
        if (nbar == 0.0) return n == 0 ? 1.0 : 0.0;
        return std::exp(n * std::log(nbar) - (n + 1.0) * std::log1p(nbar));
    });
}

/// Energy decay rate from the power balance P = gamma hbar w n.
inline double coherent_drive_decay_rate(double power, double angular_frequency, double nbar) {
    if (!(power > 0.0)) throw DomainError("drive power must be positive");
    if (!(nbar > 0.0)) throw DomainError("mean photon number must be positive");
    if (!(angular_frequency > 0.0)) throw DomainError("angular frequency must be positive");
    return power / (constants::hbar * angular_frequency * nbar);
}

/// dBm to watts.
inline double watts_from_dBm(double dBm) { return std::pow(10.0, (dBm - 30.0) / 10.0); }

// ---------------------------------------------------------------------------
// birth-death master equation

/// Tridiagonal generator of the thermal birth-death chain
/// dP_n/dt = sum_b g_b [(n_b + 1)((n + 1)P_{n+1} - n P_n) + n_b (n P_{n-1} - (n + 1)P_n)],
/// truncated with no upward transition out of the top state.
struct BirthDeathGenerator {
    std::vector<double> lower;  // coefficient of P_{n-1} in row n
    std::vector<double> diag;
    std::vector<double> upper;  // coefficient of P_{n+1} in row n

    BirthDeathGenerator(std::span<const Bath> baths, int cutoff) {
        double emission = 0.0;    // sum g_b (n_b + 1)
        double absorption = 0.0;  // sum g_b n_b
        for (const auto& b : baths) {
            b.validate();
            emission += b.coupling * (b.occupation + 1.0);
            absorption += b.coupling * b.occupation;
        }
        const std::size_t size = static_cast<std::size_t>(cutoff) + 1;
        lower.assign(size, 0.0);
        diag.assign(size, 0.0);
        upper.assign(size, 0.0);
        for (std::size_t n = 0; n < size; ++n) {
            const double down = emission * static_cast<double>(n);
            const double up = n + 1 < size ? absorption * static_cast<double>(n + 1) : 0.0;
            diag[n] = -(down + up);
            if (n > 0) upper[n - 1] = down;
            if (n + 1 < size) lower[n + 1] = up;
        }
    }

    std::size_t size() const { return diag.size(); }

    void apply(std::span<const double> p, std::span<double> out) const {
        const std::size_t size = diag.size();
        for (std::size_t n = 0; n < size; ++n) {
            double v = diag[n] * p[n];
            if (n > 0) v += lower[n] * p[n - 1];
            if (n + 1 < size) v += upper[n] * p[n + 1];
            out[n] = v;
        }
    }

    /// Largest |diagonal| entry, the fastest decay out of a single state.
    double fastest_rate() const {
        double m = 0.0;
        for (double d : diag) m = std::max(m, -d);
        return m;
    }
};

/// Stationary state of constant baths, from detailed balance of the chain.
inline FockDistribution steady_state_distribution(std::span<const Bath> baths, int cutoff = default_fock_cutoff) {
    const double nbar = steady_state_mean(baths);
    return gibbs_distribution(nbar, cutoff);
}

/// Bath list as a function of time.
using BathSchedule = std::function<std::vector<Bath>(double)>;

inline BathSchedule constant_schedule(std::vector<Bath> baths) {
    return [baths = std::move(baths)](double) { return baths; };
}

/// Baths switching between two sets with the given period and duty cycle;
/// "on" occupies the first duty*period of every period.
inline BathSchedule square_wave_schedule(std::vector<Bath> on, std::vector<Bath> off, double period,
                                         double duty_cycle) {
    if (!(period > 0.0)) throw DomainError("square wave period must be positive");
    if (!(duty_cycle >= 0.0 && duty_cycle <= 1.0)) throw DomainError("duty cycle must lie in [0, 1]");
    return [on = std::move(on), off = std::move(off), period, duty_cycle](double t) {
        const double cycles = t / period;
        double phase = cycles - std::floor(cycles);
        // Snap phase boundaries hit by accumulated step times.
        if (std::abs(phase - duty_cycle) < 1e-9) phase = duty_cycle;
        if (1.0 - phase < 1e-9) phase = 0.0;
        return phase < duty_cycle ? on : off;
    };
}

enum class Stepper {
    rk4,              // explicit fourth order, rejects stiff steps
    crank_nicolson,   // implicit trapezoid, unconditionally stable
};

struct MasterEquationOptions {
    Stepper stepper = Stepper::rk4;
    /// Keep every n-th state in the trajectory (the final state is always kept).
    int record_stride = 1;
    /// Explicit steps require dt * sum_b g_b (n_b + 1) * (cutoff + 1) below this.
    double stiffness_limit = 0.1;
    /// Minimum cutoff of the evolved chain; the initial state is zero-padded.
    int cutoff = 0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<FockDistribution> states;
    /// Mean photon number after every step, at step_times.
    std::vector<double> step_times;
    std::vector<double> step_means;
    /// Largest |sum P - 1| observed before renormalizing a step.
    double max_step_drift = 0.0;
    double accumulated_drift = 0.0;

    const FockDistribution& final_state() const { return states.back(); }
};

/// Time average of the mean photon number over [from, end] by the trapezoid rule.
inline double time_averaged_mean(const Trajectory& traj, double from) {
    double area = 0.0;
    double span = 0.0;
    for (std::size_t i = 1; i < traj.step_times.size(); ++i) {
        const double t0 = traj.step_times[i - 1];
        const double t1 = traj.step_times[i];
        if (t1 <= from) continue;
        const double dt = t1 - t0;
        area += 0.5 * (traj.step_means[i - 1] + traj.step_means[i]) * dt;
        span += dt;
    }
    if (!(span > 0.0)) throw DomainError("time_averaged_mean: empty averaging window");
    return area / span;
}

namespace detail {

inline double emission_scale(std::span<const Bath> baths) {
    double s = 0.0;
    for (const auto& b : baths) s += b.coupling * (b.occupation + 1.0);
    return s;
}

// Solves the tridiagonal system (I - h L) x = rhs in place (Thomas algorithm).
inline void solve_shifted(const BirthDeathGenerator& gen, double h, std::vector<double>& rhs) {
    const std::size_t size = gen.size();
    std::vector<double> c(size, 0.0);
    double denom = 1.0 - h * gen.diag[0];
    c[0] = size > 1 ? -h * gen.upper[0] / denom : 0.0;
    rhs[0] /= denom;
    for (std::size_t n = 1; n < size; ++n) {
        const double a = -h * gen.lower[n];
        denom = (1.0 - h * gen.diag[n]) - a * c[n - 1];
        c[n] = n + 1 < size ? -h * gen.upper[n] / denom : 0.0;
        rhs[n] = (rhs[n] - a * rhs[n - 1]) / denom;
    }
    for (std::size_t n = size - 1; n-- > 0;) rhs[n] -= c[n] * rhs[n + 1];
}

}  // namespace detail

/// Integrates the birth-death master equation from p0 over [0, duration].
inline Trajectory evolve_master_equation(const FockDistribution& p0, const BathSchedule& baths, double duration,
                                         double dt, const MasterEquationOptions& options = {}) {
    if (!(dt > 0.0)) throw DomainError("time step must be positive");
    if (!(duration >= 0.0)) throw DomainError("duration must be non-negative");
    if (options.record_stride < 1) throw DomainError("record stride must be at least 1");

    std::vector<double> p(p0.probabilities().begin(), p0.probabilities().end());
    if (static_cast<int>(p.size()) < options.cutoff + 1) p.resize(static_cast<std::size_t>(options.cutoff) + 1, 0.0);

    const long steps = std::lround(std::ceil(duration / dt - 1e-9));
    Trajectory traj;
    auto mean_of = [](const std::vector<double>& v) {
        double m = 0.0;
        for (std::size_t n = 0; n < v.size(); ++n) m += static_cast<double>(n) * v[n];
        return m;
    };
    traj.times.push_back(0.0);
    traj.states.push_back(FockDistribution::normalized(p));
    traj.step_times.push_back(0.0);
    traj.step_means.push_back(mean_of(p));

    std::vector<double> k1, k2, k3, k4, tmp;
    for (long step = 0; step < steps; ++step) {
        const double t = step * dt;
        const int cutoff = static_cast<int>(p.size()) - 1;
        const auto baths_start = baths(t);
        const auto baths_end = baths(t + dt);

        if (options.stepper == Stepper::rk4) {
            const auto baths_mid = baths(t + 0.5 * dt);
            for (const auto* set : {&baths_start, &baths_mid, &baths_end}) {
                const double stiffness = dt * detail::emission_scale(*set) * (cutoff + 1);
                if (stiffness >= options.stiffness_limit) {
                    throw StiffnessError("explicit step too stiff (dt * rate * states = " + std::to_string(stiffness) +
                                             "); reduce dt or use the implicit stepper",
                                         stiffness);
                }
            }
            const BirthDeathGenerator g0(baths_start, cutoff);
            const BirthDeathGenerator gm(baths_mid, cutoff);
            const BirthDeathGenerator g1(baths_end, cutoff);
            const std::size_t size = p.size();
            k1.resize(size);
            k2.resize(size);
            k3.resize(size);
            k4.resize(size);
            tmp.resize(size);
            g0.apply(p, k1);
            for (std::size_t n = 0; n < size; ++n) tmp[n] = p[n] + 0.5 * dt * k1[n];
            gm.apply(tmp, k2);
            for (std::size_t n = 0; n < size; ++n) tmp[n] = p[n] + 0.5 * dt * k2[n];
            gm.apply(tmp, k3);
            for (std::size_t n = 0; n < size; ++n) tmp[n] = p[n] + dt * k3[n];
            g1.apply(tmp, k4);
            for (std::size_t n = 0; n < size; ++n) {
                p[n] += dt / 6.0 * (k1[n] + 2.0 * k2[n] + 2.0 * k3[n] + k4[n]);
            }
        } else {
            const BirthDeathGenerator g0(baths_start, cutoff);
            const BirthDeathGenerator g1(baths_end, cutoff);
            tmp.resize(p.size());
            g0.apply(p, tmp);
            for (std::size_t n = 0; n < p.size(); ++n) tmp[n] = p[n] + 0.5 * dt * tmp[n];
            detail::solve_shifted(g1, 0.5 * dt, tmp);
            p.swap(tmp);
        }

        double total = 0.0;
        for (double& x : p) {
            x = std::max(x, 0.0);
            total += x;
        }
        const double drift = std::abs(total - 1.0);
        traj.max_step_drift = std::max(traj.max_step_drift, drift);
        traj.accumulated_drift += drift;
        for (double& x : p) x /= total;

        // Keep the truncated tail negligible.
        if (p.back() > truncation_tail) p.resize(p.size() + 10, 0.0);

        const double t_next = (step + 1) * dt;
        traj.step_times.push_back(t_next);
        traj.step_means.push_back(mean_of(p));
        if ((step + 1) % options.record_stride == 0 || step + 1 == steps) {
            traj.times.push_back(t_next);
            traj.states.push_back(FockDistribution::normalized(p));
        }
    }
    return traj;
}

}  // namespace qcr
