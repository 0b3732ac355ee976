#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "qcr/error.hpp"

namespace qcr {

/// Accuracy controls shared by every tunneling integral.
struct QuadratureSpec {
    double relative_tolerance = 1e-9;
    /// Absolute error floor in units of the integral (1/s for rates).
    double absolute_floor = 0.0;
    int max_subdivisions = 2000;

    void validate() const {
        if (!(relative_tolerance > 0.0 && relative_tolerance <= 1e-3)) {
            throw DomainError("quadrature relative_tolerance must lie in (0, 1e-3]");
        }
        if (!(absolute_floor >= 0.0)) {
            throw DomainError("quadrature absolute_floor must be non-negative");
        }
        if (max_subdivisions < 16) {
            throw DomainError("quadrature max_subdivisions must be at least 16");
        }
    }
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    int subdivisions = 0;
};

namespace detail {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1].
inline constexpr std::array<double, 8> kronrod_nodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kronrod_weights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> gauss_weights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
    double a;
    double b;
    double value;
    double error;
    bool operator<(const Segment& other) const { return error < other.error; }
};

template <class Fn>
Segment gauss_kronrod_15(const Fn& f, double a, double b) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double f_center = f(center);
    double kronrod = f_center * kronrod_weights[7];
    double gauss = f_center * gauss_weights[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kronrod_nodes[j];
        const double pair = f(center - dx) + f(center + dx);
        kronrod += kronrod_weights[j] * pair;
        if (j % 2 == 1) gauss += gauss_weights[j / 2] * pair;
    }
    return {a, b, kronrod * half, std::abs((kronrod - gauss) * half)};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod integration of f over [a, b], split at
/// the given interior breakpoints. Throws NumericError carrying the achieved
/// error estimate when the subdivision budget runs out.
template <class Fn>
QuadratureResult integrate_adaptive(const Fn& f, double a, double b, std::span<const double> breakpoints,
                                    double relative_tolerance, double absolute_floor, int max_subdivisions) {
    std::vector<double> edges{a};
    for (double p : breakpoints) {
        if (p > a && p < b) edges.push_back(p);
    }
    edges.push_back(b);
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());

    std::priority_queue<detail::Segment> queue;
    double total = 0.0;
    double error = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        auto seg = detail::gauss_kronrod_15(f, edges[i], edges[i + 1]);
        total += seg.value;
        error += seg.error;
        queue.push(seg);
    }

    int subdivisions = 0;
    auto target = [&] { return std::max(relative_tolerance * std::abs(total), absolute_floor); };
    while (error > target()) {
        if (subdivisions >= max_subdivisions) {
            throw NumericError("adaptive quadrature did not converge within " + std::to_string(max_subdivisions) +
                                   " subdivisions",
                               error);
        }
        const auto worst = queue.top();
        queue.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            // Interval cannot be split further in floating point.
            throw NumericError("adaptive quadrature reached floating-point resolution", error);
        }
        const auto left = detail::gauss_kronrod_15(f, worst.a, mid);
        const auto right = detail::gauss_kronrod_15(f, mid, worst.b);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        queue.push(left);
        queue.push(right);
        ++subdivisions;
    }

    // Re-sum to shed accumulated cancellation from the running updates.
    double value = 0.0;
    double err = 0.0;
    while (!queue.empty()) {
        value += queue.top().value;
        err += queue.top().error;
        queue.pop();
    }
    return {value, err, subdivisions};
}

}  // namespace qcr
