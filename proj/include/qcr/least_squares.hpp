#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "qcr/error.hpp"

/// Box-constrained damped least squares (Levenberg-Marquardt with Nielsen
/// damping updates and a forward-difference Jacobian).
namespace qcr {

/// A fit that stopped without converging; carries the last accepted iterate.
class FitError : public NumericError {
public:
    FitError(const std::string& what, std::vector<double> last_iterate, double cost)
        : NumericError(what, cost), last_iterate_(std::move(last_iterate)) {}

    const std::vector<double>& last_iterate() const noexcept { return last_iterate_; }

private:
    std::vector<double> last_iterate_;
};

struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    static Bounds unbounded(std::size_t n) {
        return {std::vector<double>(n, -std::numeric_limits<double>::infinity()),
                std::vector<double>(n, std::numeric_limits<double>::infinity())};
    }
};

struct LeastSquaresOptions {
    int max_iterations = 200;
    /// Stop once an accepted step lowers the cost by less than this fraction.
    double relative_tolerance = 1e-10;
    /// Initial damping, relative to diag(J^T J) (Marquardt scaling).
    double initial_damping = 1e-6;
    double difference_step = 1e-7;
};

struct LeastSquaresResult {
    std::vector<double> params;
    /// s^2 (J^T J)^{-1} at the solution with s^2 = cost / (m - n).
    Eigen::MatrixXd covariance;
    /// Cost (sum of squared residuals) of the seed and of every accepted step.
    std::vector<double> cost_history;
    std::vector<double> residuals;
    double cost = 0.0;
    int iterations = 0;
    bool converged = false;
    std::string stop_reason;

    double standard_error(std::size_t i) const { return std::sqrt(std::max(covariance(i, i), 0.0)); }
};

namespace detail {

inline double sum_of_squares(const std::vector<double>& r) {
    double s = 0.0;
    for (double x : r) s += x * x;
    return s;
}

template <class ResidualFn>
std::vector<double> evaluate(const ResidualFn& fn, const std::vector<double>& p) {
    std::vector<double> r = fn(std::span<const double>(p));
    for (double x : r) {
        if (!std::isfinite(x)) throw NumericError("model produced a non-finite residual");
    }
    return r;
}

template <class ResidualFn>
Eigen::MatrixXd forward_jacobian(const ResidualFn& fn, const std::vector<double>& p, const std::vector<double>& r0,
                                 const Bounds& bounds, double rel_step) {
    const auto m = static_cast<Eigen::Index>(r0.size());
    const auto n = static_cast<Eigen::Index>(p.size());
    Eigen::MatrixXd jac(m, n);
    std::vector<double> q = p;
    for (Eigen::Index j = 0; j < n; ++j) {
        const auto uj = static_cast<std::size_t>(j);
        double h = rel_step * std::max(std::abs(p[uj]), 1e-3);
        if (p[uj] + h > bounds.upper[uj]) h = -h;
        q[uj] = p[uj] + h;
        const auto r1 = evaluate(fn, q);
        if (r1.size() != r0.size()) throw DomainError("residual length changed between evaluations");
        for (Eigen::Index i = 0; i < m; ++i) jac(i, j) = (r1[static_cast<std::size_t>(i)] - r0[static_cast<std::size_t>(i)]) / h;
        q[uj] = p[uj];
    }
    return jac;
}

}  // namespace detail

/// Minimizes sum_i r_i(p)^2 subject to lower <= p <= upper.
/// The residual function maps std::span<const double> to std::vector<double>.
template <class ResidualFn>
LeastSquaresResult least_squares(const ResidualFn& residuals, std::vector<double> params0, Bounds bounds = {},
                                 const LeastSquaresOptions& options = {}) {
    const std::size_t n = params0.size();
    if (n == 0) throw DomainError("least_squares needs at least one parameter");
    if (bounds.lower.empty() && bounds.upper.empty()) bounds = Bounds::unbounded(n);
    if (bounds.lower.size() != n || bounds.upper.size() != n) throw DomainError("bounds do not match parameter count");
    for (std::size_t j = 0; j < n; ++j) {
        if (!(bounds.lower[j] <= bounds.upper[j])) throw DomainError("invalid bounds: lower exceeds upper");
    }
    auto project = [&](std::vector<double>& p) {
        for (std::size_t j = 0; j < n; ++j) p[j] = std::clamp(p[j], bounds.lower[j], bounds.upper[j]);
    };

    LeastSquaresResult out;
    std::vector<double> p = std::move(params0);
    project(p);
    auto r = detail::evaluate(residuals, p);
    if (r.size() < n) throw DomainError("fewer residuals than parameters");
    double cost = detail::sum_of_squares(r);
    out.cost_history.push_back(cost);

    Eigen::MatrixXd jac = detail::forward_jacobian(residuals, p, r, bounds, options.difference_step);
    auto to_vec = [](const std::vector<double>& v) {
        return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    };
    Eigen::MatrixXd a = jac.transpose() * jac;
    Eigen::VectorXd g = jac.transpose() * to_vec(r);
    double mu = options.initial_damping;
    double nu = 2.0;

    out.stop_reason = "iteration limit";
    while (out.iterations < options.max_iterations) {
        if (cost == 0.0) {
            out.converged = true;
            out.stop_reason = "zero residual";
            break;
        }
        ++out.iterations;
        Eigen::VectorXd scale = a.diagonal().cwiseMax(1e-12 * std::max(a.diagonal().maxCoeff(), 1e-300));
        Eigen::MatrixXd damped = a;
        damped.diagonal() += mu * scale;
        const Eigen::VectorXd step = damped.ldlt().solve(-g);

        std::vector<double> trial = p;
        for (std::size_t j = 0; j < n; ++j) trial[j] += step(static_cast<Eigen::Index>(j));
        project(trial);
        double step_norm = 0.0;
        double p_norm = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            step_norm += (trial[j] - p[j]) * (trial[j] - p[j]);
            p_norm += p[j] * p[j];
        }
        if (std::sqrt(step_norm) <= 1e-15 * (std::sqrt(p_norm) + 1e-15)) {
            out.converged = true;
            out.stop_reason = "step below resolution";
            break;
        }

        const auto r_trial = detail::evaluate(residuals, trial);
        const double cost_trial = detail::sum_of_squares(r_trial);
        const double predicted = step.dot(mu * scale.cwiseProduct(step) - g);
        if (cost_trial < cost) {
            const double decrease = cost - cost_trial;
            const double rho = predicted > 0.0 ? decrease / predicted : 1.0;
            p = trial;
            r = r_trial;
            const double previous = cost;
            cost = cost_trial;
            out.cost_history.push_back(cost);
            mu *= std::max(1.0 / 3.0, 1.0 - std::pow(2.0 * rho - 1.0, 3));
            nu = 2.0;
            if (decrease <= options.relative_tolerance * previous) {
                out.converged = true;
                out.stop_reason = "relative cost change below tolerance";
                break;
            }
            jac = detail::forward_jacobian(residuals, p, r, bounds, options.difference_step);
            a = jac.transpose() * jac;
            g = jac.transpose() * to_vec(r);
        } else {
            mu *= nu;
            nu *= 2.0;
            if (!std::isfinite(mu) || mu > 1e300) {
                out.stop_reason = "damping diverged";
                break;
            }
        }
    }

    out.params = p;
    out.residuals = r;
    out.cost = cost;
    const auto m = r.size();
    jac = detail::forward_jacobian(residuals, p, r, bounds, options.difference_step);
    const Eigen::MatrixXd normal = jac.transpose() * jac;
    const double s2 = m > n ? cost / static_cast<double>(m - n) : 0.0;
    out.covariance = normal.completeOrthogonalDecomposition().pseudoInverse() * s2;
    return out;
}

/// Weighted curve fit of y_i ~ model(x_i, params). Empty sigma means unit weights.
template <class Model>
LeastSquaresResult curve_fit(const Model& model, std::span<const double> x, std::span<const double> y,
                             std::span<const double> sigma, std::vector<double> params0, Bounds bounds = {},
                             const LeastSquaresOptions& options = {}) {
    if (x.size() != y.size()) throw DomainError("curve_fit: x and y differ in length");
    if (!sigma.empty() && sigma.size() != y.size()) throw DomainError("curve_fit: sigma length mismatch");
    auto residuals = [&](std::span<const double> p) {
        std::vector<double> r(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            const double w = sigma.empty() ? 1.0 : sigma[i];
            r[i] = (model(x[i], p) - y[i]) / w;
        }
        return r;
    };
    return least_squares(residuals, std::move(params0), std::move(bounds), options);
}

}  // namespace qcr
