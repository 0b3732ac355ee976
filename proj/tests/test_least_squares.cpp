#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "qcr/least_squares.hpp"

using namespace qcr;

namespace {

std::vector<double> line_x() {
    std::vector<double> x(25);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] = -1.0 + 0.1 * static_cast<double>(i);
    return x;
}

double line_model(double x, std::span<const double> p) { return p[0] + p[1] * x; }

}  // namespace

TEST(LeastSquares, LinearModelExactWithinTwoIterations) {
    const auto x = line_x();
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 2.0 - 3.5 * x[i];

    LeastSquaresOptions two;
    two.max_iterations = 2;
    const auto fit = curve_fit(line_model, x, y, {}, {0.0, 0.0}, {}, two);
    EXPECT_LE(fit.iterations, 2);
    EXPECT_NEAR(fit.params[0], 2.0, 1e-9);
    EXPECT_NEAR(fit.params[1], -3.5, 1e-9);

    const auto full = curve_fit(line_model, x, y, {}, {0.0, 0.0});
    EXPECT_TRUE(full.converged) << full.stop_reason;
}

TEST(LeastSquares, QuadraticBowlFromRandomSeeds) {
    const std::vector<double> center{0.3, -1.7, 4.2};
    auto residuals = [&](std::span<const double> p) {
        return std::vector<double>{3.0 * (p[0] - center[0]), 0.5 * (p[1] - center[1]) + (p[0] - center[0]),
                                   10.0 * (p[2] - center[2]), 0.1 * (p[1] - center[1])};
    };
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> seed(-50.0, 50.0);
    for (int trial = 0; trial < 10; ++trial) {
        const auto fit = least_squares(residuals, {seed(rng), seed(rng), seed(rng)});
        ASSERT_TRUE(fit.converged) << fit.stop_reason;
        for (std::size_t j = 0; j < center.size(); ++j) EXPECT_NEAR(fit.params[j], center[j], 1e-8);
    }
}

TEST(LeastSquares, RosenbrockFromStandardSeed) {
    auto residuals = [](std::span<const double> p) {
        return std::vector<double>{10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]};
    };
    const auto fit = least_squares(residuals, {-1.2, 1.0});
    EXPECT_TRUE(fit.converged) << fit.stop_reason;
    EXPECT_LE(fit.iterations, 200);
    EXPECT_NEAR(fit.params[0], 1.0, 1e-6);
    EXPECT_NEAR(fit.params[1], 1.0, 1e-6);
}

TEST(LeastSquares, AcceptedCostsNeverIncrease) {
    auto residuals = [](std::span<const double> p) {
        std::vector<double> r;
        for (double t = 0.0; t <= 4.0; t += 0.25) r.push_back(p[0] * std::exp(-p[1] * t) - 2.5 * std::exp(-1.3 * t));
        return r;
    };
    const auto fit = least_squares(residuals, {1.0, 0.1});
    ASSERT_GE(fit.cost_history.size(), 2u);
    for (std::size_t i = 1; i < fit.cost_history.size(); ++i) {
        EXPECT_LE(fit.cost_history[i], fit.cost_history[i - 1]);
    }
    EXPECT_NEAR(fit.params[0], 2.5, 1e-6);
    EXPECT_NEAR(fit.params[1], 1.3, 1e-6);
}

TEST(LeastSquares, RespectsBoxBounds) {
    auto residuals = [](std::span<const double> p) { return std::vector<double>{p[0] - 5.0, p[1] + 2.0}; };
    const auto fit = least_squares(residuals, {0.0, 0.0}, Bounds{{-1.0, -1.0}, {3.0, 1.0}});
    EXPECT_DOUBLE_EQ(fit.params[0], 3.0);
    EXPECT_DOUBLE_EQ(fit.params[1], -1.0);

    // A seed outside the box is projected before the first evaluation.
    bool saw_outside = false;
    auto watch = [&](std::span<const double> p) {
        if (p[0] < 1.0 || p[0] > 2.0) saw_outside = true;
        return std::vector<double>{p[0] - 1.5};
    };
    least_squares(watch, {10.0}, Bounds{{1.0}, {2.0}});
    EXPECT_FALSE(saw_outside);
}

TEST(LeastSquares, InvalidInputsAreRejected) {
    auto residuals = [](std::span<const double> p) { return std::vector<double>{p[0]}; };
    EXPECT_THROW(least_squares(residuals, {0.0}, Bounds{{1.0}, {0.0}}), DomainError);
    EXPECT_THROW(least_squares(residuals, {0.0}, Bounds{{0.0, 0.0}, {1.0, 1.0}}), DomainError);
    EXPECT_THROW(least_squares(residuals, std::vector<double>{}), DomainError);
    auto short_residuals = [](std::span<const double>) { return std::vector<double>{1.0}; };
    EXPECT_THROW(least_squares(short_residuals, {0.0, 0.0}), DomainError);
}

TEST(LeastSquares, ModelFailurePropagates) {
    auto throwing = [](std::span<const double> p) -> std::vector<double> {
        if (p[0] > 0.5) throw std::runtime_error("model blew up");
        return {p[0] - 1.0};
    };
    EXPECT_THROW(least_squares(throwing, {0.0}), std::runtime_error);

    auto nan_model = [](std::span<const double>) { return std::vector<double>{std::nan("")}; };
    EXPECT_THROW(least_squares(nan_model, {0.0}), NumericError);
}

TEST(LeastSquares, CovarianceMatchesLinearRegression) {
    const auto x = line_x();
    std::mt19937_64 rng(11);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = 1.0 + 0.5 * x[i] + noise(rng);
    const auto fit = curve_fit(line_model, x, y, {}, {0.0, 0.0});

    const double n = static_cast<double>(x.size());
    const double sx = std::accumulate(x.begin(), x.end(), 0.0);
    double sxx = 0.0;
    for (double v : x) sxx += v * v;
    const double det = n * sxx - sx * sx;
    const double s2 = fit.cost / (n - 2.0);
    EXPECT_NEAR(fit.covariance(0, 0), s2 * sxx / det, 1e-6 * s2 * sxx / det);
    EXPECT_NEAR(fit.covariance(1, 1), s2 * n / det, 1e-6 * s2 * n / det);
    EXPECT_NEAR(fit.covariance(0, 1), -s2 * sx / det, 1e-5 * s2 * std::abs(sx) / det + 1e-14);
}

TEST(LeastSquares, InvariantUnderDataReordering) {
    std::vector<double> x, y;
    for (int i = 0; i < 30; ++i) {
        x.push_back(0.2 * i);
        y.push_back(3.0 * std::exp(-0.7 * 0.2 * i) + 0.01 * std::sin(7.0 * i));
    }
    auto model = [](double t, std::span<const double> p) { return p[0] * std::exp(-p[1] * t); };
    const auto a = curve_fit(model, x, y, {}, {1.0, 1.0});

    std::vector<std::size_t> order(x.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(3));
    std::vector<double> xs, ys;
    for (auto i : order) {
        xs.push_back(x[i]);
        ys.push_back(y[i]);
    }
    const auto b = curve_fit(model, xs, ys, {}, {1.0, 1.0});
    EXPECT_NEAR(a.params[0], b.params[0], 1e-9);
    EXPECT_NEAR(a.params[1], b.params[1], 1e-9);
}

TEST(LeastSquares, IterationLimitIsReported) {
    auto residuals = [](std::span<const double> p) {
        return std::vector<double>{10.0 * (p[1] - p[0] * p[0]), 1.0 - p[0]};
    };
    LeastSquaresOptions opt;
    opt.max_iterations = 3;
    const auto fit = least_squares(residuals, {-1.2, 1.0}, {}, opt);
    EXPECT_FALSE(fit.converged);
    EXPECT_EQ(fit.stop_reason, "iteration limit");
    EXPECT_EQ(fit.iterations, 3);
}
