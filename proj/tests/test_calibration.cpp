#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "qcr/calibration.hpp"

using namespace qcr;

namespace {

const JunctionParams table1{};

IvData synthetic_iv(const JunctionParams& j, double noise, unsigned long long seed, int points = 121) {
    const double vmax = 3.0 * j.gap / constants::elementary_charge;
    IvData iv;
    for (int k = 0; k < points; ++k) {
        const double v = -vmax + 2.0 * vmax * k / (points - 1);
        iv.voltage.push_back(v);
        iv.current.push_back(nis_current(v, j));
    }
    iv.current = multiplicative_noise(iv.current, noise, seed);
    return iv;
}

QcrCircuit cooling_circuit(double t_normal) {
    QcrCircuit c;
    c.junction.t_normal = t_normal;
    c.junction.t_super = t_normal;
    return c;
}

CoolingCurve synthetic_cooling(const QcrCircuit& c, double gamma_dr, double n_dr, double noise,
                               unsigned long long seed, int points = 41) {
    const double vg = c.junction.gap / constants::elementary_charge;
    CoolingCurve curve;
    for (int k = 0; k < points; ++k) {
        const double v = -vg + 2.0 * vg * k / (points - 1);
        curve.voltage.push_back(v);
        curve.nbar.push_back(cooling_curve_mean(v, c, gamma_dr, n_dr));
    }
    curve.nbar = multiplicative_noise(curve.nbar, noise, seed);
    return curve;
}

const double two_MHz = units::angular_from_MHz(2.0);

}  // namespace

TEST(IvFit, NoiseFreeRecovery) {
    const auto fit = extract_rt_gammad(synthetic_iv(table1, 0.0, 0), table1);
    EXPECT_NEAR(fit.stage2.tunneling_resistance / table1.tunneling_resistance, 1.0, 0.005);
    EXPECT_NEAR(fit.stage2.dynes / table1.dynes, 1.0, 0.005);
    EXPECT_TRUE(fit.report.converged);
    // The closed-form seed is in the right neighbourhood.
    EXPECT_NEAR(fit.stage1.tunneling_resistance / table1.tunneling_resistance, 1.0, 0.15);
    EXPECT_NEAR(fit.stage1.dynes / table1.dynes, 1.0, 0.5);
}

TEST(IvFit, OnePercentNoise) {
    for (unsigned long long seed : {1ull, 2ull, 3ull}) {
        const auto fit = extract_rt_gammad(synthetic_iv(table1, 0.01, seed), table1);
        EXPECT_NEAR(fit.stage2.tunneling_resistance / table1.tunneling_resistance, 1.0, 0.05) << seed;
        EXPECT_NEAR(fit.stage2.dynes / table1.dynes, 1.0, 0.05) << seed;
    }
}

TEST(IvFit, SeedDoesNotNeedTheAnswer) {
    JunctionParams seed = table1;
    seed.tunneling_resistance = 30.0 * units::kilo_ohm;
    seed.dynes = 1e-3;
    const auto fit = extract_rt_gammad(synthetic_iv(table1, 0.0, 0), seed);
    EXPECT_NEAR(fit.stage2.tunneling_resistance / table1.tunneling_resistance, 1.0, 0.005);
    EXPECT_NEAR(fit.stage2.dynes / table1.dynes, 1.0, 0.005);
}

TEST(IvFit, InvariantUnderReordering) {
    auto iv = synthetic_iv(table1, 0.01, 4, 41);
    const auto a = extract_rt_gammad(iv, table1);
    std::vector<std::size_t> order(iv.voltage.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), std::mt19937_64(8));
    IvData shuffled;
    for (auto i : order) {
        shuffled.voltage.push_back(iv.voltage[i]);
        shuffled.current.push_back(iv.current[i]);
    }
    const auto b = extract_rt_gammad(shuffled, table1);
    EXPECT_EQ(a.stage2.tunneling_resistance, b.stage2.tunneling_resistance);
    EXPECT_EQ(a.stage2.dynes, b.stage2.dynes);
}

TEST(IvFit, InvalidData) {
    auto flat = synthetic_iv(table1, 0.0, 0, 41);
    std::fill(flat.current.begin(), flat.current.end(), 0.0);
    EXPECT_THROW(extract_rt_gammad(flat, table1), DomainError);

    EXPECT_THROW(extract_rt_gammad(synthetic_iv(table1, 0.0, 0, 15), table1), DomainError);

    IvData narrow;
    for (int k = 0; k < 30; ++k) {
        const double v = (-100.0 + 200.0 * k / 29.0) * units::micro_volt;
        narrow.voltage.push_back(v);
        narrow.current.push_back(nis_current(v, table1));
    }
    EXPECT_THROW(extract_rt_gammad(narrow, table1), DomainError);

    auto repeated = synthetic_iv(table1, 0.0, 0, 41);
    repeated.voltage[5] = repeated.voltage[4];
    EXPECT_THROW(extract_rt_gammad(repeated, table1), DomainError);
}

TEST(CoolingFit, HeatedResonatorCurve) {
    const auto truth = cooling_circuit(0.150);
    const auto data = synthetic_cooling(truth, two_MHz, 1.0, 0.05, 21);
    const auto fit = fit_cooling_curve(data, cooling_circuit(0.150));
    EXPECT_NEAR(fit.stage2.t_normal, 0.150, 0.015);
    EXPECT_NEAR(fit.stage2.gamma_drive / two_MHz, 1.0, 0.2);
    EXPECT_NEAR(fit.stage2.n_drive, 1.0, 0.05);
    EXPECT_EQ(fit.points_excluded, 0u);
}

TEST(CoolingFit, NoiseHeatedCurve) {
    const auto truth = cooling_circuit(0.280);
    const auto data = synthetic_cooling(truth, two_MHz, 4.0, 0.05, 22);
    const auto fit = fit_cooling_curve(data, cooling_circuit(0.150));
    EXPECT_NEAR(fit.stage2.t_normal, 0.280, 0.015);
    EXPECT_NEAR(fit.stage2.gamma_drive / two_MHz, 1.0, 0.2);
    EXPECT_NEAR(fit.stage2.n_drive / 4.0, 1.0, 0.05);
}

TEST(CoolingFit, NoiseFreeIsExact) {
    const auto truth = cooling_circuit(0.150);
    const auto fit = fit_cooling_curve(synthetic_cooling(truth, two_MHz, 1.0, 0.0, 0), cooling_circuit(0.2));
    EXPECT_NEAR(fit.stage2.t_normal, 0.150, 1e-4);
    EXPECT_NEAR(fit.stage2.gamma_drive / two_MHz, 1.0, 1e-3);
    EXPECT_NEAR(fit.stage2.n_drive, 1.0, 1e-4);
}

TEST(CoolingFit, ExcludesPointsAboveCutoff) {
    const auto truth = cooling_circuit(0.150);
    const double vg = truth.junction.gap / constants::elementary_charge;
    auto data = synthetic_cooling(truth, two_MHz, 1.0, 0.0, 0);
    // Points beyond the gap carry a Lamb-shift style offset the model does not describe.
    for (double v : {1.2 * vg, 1.5 * vg}) {
        data.voltage.push_back(v);
        data.nbar.push_back(5.0);
    }
    const auto fit = fit_cooling_curve(data, truth);
    EXPECT_EQ(fit.points_excluded, 2u);
    EXPECT_NEAR(fit.stage2.t_normal, 0.150, 1e-4);
}

TEST(CoolingFit, InvariantUnderReordering) {
    const auto truth = cooling_circuit(0.150);
    auto data = synthetic_cooling(truth, two_MHz, 1.0, 0.05, 5, 21);
    const auto a = fit_cooling_curve(data, truth);
    std::reverse(data.voltage.begin(), data.voltage.end());
    std::reverse(data.nbar.begin(), data.nbar.end());
    const auto b = fit_cooling_curve(data, truth);
    EXPECT_EQ(a.stage2.t_normal, b.stage2.t_normal);
    EXPECT_EQ(a.stage2.gamma_drive, b.stage2.gamma_drive);
    EXPECT_EQ(a.stage2.n_drive, b.stage2.n_drive);
}

TEST(CoolingFit, InvalidData) {
    const auto c = cooling_circuit(0.150);
    EXPECT_THROW(fit_cooling_curve(CoolingCurve{{0.0}, {1.0}}, c), DomainError);

    const double vg = c.junction.gap / constants::elementary_charge;
    CoolingCurve low;
    for (int k = 0; k < 10; ++k) {
        low.voltage.push_back(0.05 * vg * k);
        low.nbar.push_back(1.0);
    }
    EXPECT_THROW(fit_cooling_curve(low, c), DomainError);

    // Photon number falling steeply from V = 0: no QCR-off plateau.
    CoolingCurve steep;
    for (int k = 0; k < 11; ++k) {
        steep.voltage.push_back(0.1 * vg * k);
        steep.nbar.push_back(1.0 / (1.0 + 20.0 * k));
    }
    EXPECT_THROW(fit_cooling_curve(steep, c), FitError);

    CoolingCurve negative{{0.0, 0.5 * vg, vg}, {1.0, -0.1, 0.2}};
    EXPECT_THROW(fit_cooling_curve(negative, c), DomainError);
}

TEST(CoolingModel, PlateauMatchesMixing) {
    const auto c = cooling_circuit(0.150);
    const auto r = qcr_rates(0.0, c);
    const double expected = (r.gamma * r.occupation + two_MHz * 1.0) / (r.gamma + two_MHz);
    EXPECT_NEAR(cooling_curve_mean(0.0, c, two_MHz, 1.0), expected, 1e-12);
}
