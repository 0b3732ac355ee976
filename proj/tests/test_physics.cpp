#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "qcr/physics.hpp"

using namespace qcr;

namespace {

JunctionParams table1_junction(double temperature = 0.150) {
    JunctionParams j;
    j.gap = 220.0 * units::micro_eV;
    j.dynes = 9.25e-3;
    j.tunneling_resistance = 14.7e3;
    j.t_normal = temperature;
    j.t_super = temperature;
    return j;
}

const double hbar_omega_r = constants::hbar * units::angular_from_GHz(4.6704);

// Brute-force trapezoid over a fixed window, independent of the adaptive path.
double trapezoid_forward_rate(double energy, const JunctionParams& j, int points) {
    const double lo = -50.0 * j.gap + std::min(energy, 0.0);
    const double hi = 50.0 * j.gap + std::max(energy, 0.0);
    const double step = (hi - lo) / (points - 1);
    const double kt_n = constants::boltzmann * j.t_normal;
    const double kt_s = constants::boltzmann * j.t_super;
    double sum = 0.0;
    for (int i = 0; i < points; ++i) {
        const double eps = lo + i * step;
        const double z_re = eps / j.gap;
        const std::complex<long double> z(z_re, j.dynes);
        const long double dos = std::abs((z / std::sqrt(z * z - 1.0L)).real());
        const long double empty_s = 1.0L / (std::exp(-static_cast<long double>(eps / kt_s)) + 1.0L);
        const long double fn = 1.0L / (std::exp(static_cast<long double>((eps - energy) / kt_n)) + 1.0L);
        const double weight = (i == 0 || i == points - 1) ? 0.5 : 1.0;
        sum += weight * static_cast<double>(dos * empty_s * fn);
    }
    return sum * step / constants::planck;
}

}  // namespace

TEST(FermiOccupation, SymmetryPoint) {
    EXPECT_DOUBLE_EQ(fermi_occupation(0.0, 0.1), 0.5);
    EXPECT_DOUBLE_EQ(fermi_occupation(0.0, 3.0), 0.5);
}

TEST(FermiOccupation, ReflectionIdentity) {
    const double t = 0.150;
    const double e = 3.0 * constants::boltzmann * t;
    EXPECT_NEAR(fermi_occupation(e, t) + fermi_occupation(-e, t), 1.0, 1e-15);
}

TEST(FermiOccupation, TenKT) {
    // 1/(e^10 + 1) evaluated at 40 digits.
    const double t = 0.1;
    EXPECT_NEAR(fermi_occupation(10.0 * constants::boltzmann * t, t), 4.539786870243439e-5, 1e-18);
}

TEST(FermiOccupation, SaturatesWithoutOverflow) {
    const double t = 0.01;
    const double kt = constants::boltzmann * t;
    EXPECT_EQ(fermi_occupation(-1e4 * kt, t), 1.0);
    const double tiny = fermi_occupation(1e4 * kt, t);
    EXPECT_GT(tiny, 0.0);
    EXPECT_TRUE(std::isfinite(tiny));
}

TEST(FermiOccupation, RejectsNonPositiveTemperature) {
    EXPECT_THROW(fermi_occupation(0.0, 0.0), DomainError);
    EXPECT_THROW(fermi_occupation(0.0, -1.0), DomainError);
}

TEST(DynesDos, ZeroEnergyClosedForm) {
    for (double g : {1e-6, 9.25e-3, 0.1, 0.5}) {
        EXPECT_NEAR(dynes_dos(0.0, 1.0, g), g / std::sqrt(1.0 + g * g), 1e-15);
    }
}

TEST(DynesDos, LargeEnergyLimit) {
    const double gap = 220.0 * units::micro_eV;
    EXPECT_NEAR(dynes_dos(100.0 * gap, gap, 1e-2), 1.0, 1e-3);
}

TEST(DynesDos, CoherencePeak) {
    // Extended-precision value; the small-broadening estimate 1/(2 sqrt(g)) = 5.199.
    const double gap = 220.0 * units::micro_eV;
    EXPECT_NEAR(dynes_dos(gap, gap, 9.25e-3), 5.234888071220127, 1e-10);
    EXPECT_NEAR(dynes_dos(gap, gap, 9.25e-3), 1.0 / (2.0 * std::sqrt(9.25e-3)), 0.05);
}

TEST(DynesDos, EvenOnLogGrid) {
    const double gap = 1.0;
    for (double g : {1e-6, 9.25e-3, 0.1}) {
        for (double x = 1e-4; x < 1e3; x *= 1.17) {
            const double plus = dynes_dos(x, gap, g);
            const double minus = dynes_dos(-x, gap, g);
            EXPECT_NEAR(plus, minus, 1e-14 * plus) << "x=" << x << " g=" << g;
            EXPECT_GE(plus, 0.0);
        }
    }
}

TEST(DynesDos, RejectsZeroBroadening) {
    EXPECT_THROW(dynes_dos(0.5, 1.0, 0.0), DomainError);
    EXPECT_THROW(dynes_dos(0.5, 0.0, 0.1), DomainError);
}

TEST(DynesDos, NormalizationTailConverges) {
    // Int_{-W}^{W} [n_S - 1] stays O(gap) and settles as W grows.
    const double gap = 1.0;
    const double g = 9.25e-3;
    auto excess = [&](double w) {
        auto f = [&](double x) { return dynes_dos(x, gap, g) - 1.0; };
        const std::array<double, 3> bp{-1.0, 0.0, 1.0};
        return integrate_adaptive(f, -w, w, bp, 1e-10, 1e-14, 4000).value;
    };
    double previous = excess(10.0);
    EXPECT_LT(std::abs(previous), gap);
    for (double w : {20.0, 40.0, 80.0, 160.0}) {
        const double current = excess(w);
        EXPECT_LT(std::abs(current), gap);
        EXPECT_LT(std::abs(current - previous), 2.0 * gap / w);
        previous = current;
    }
}

TEST(ForwardRate, DetailedBalanceAtResonatorPhoton) {
    for (double g : {1e-4, 9.25e-3}) {
        auto j = table1_junction(0.1);
        j.dynes = g;
        const double kt = constants::boltzmann * j.t_normal;
        const double ratio = forward_rate(hbar_omega_r, j) / forward_rate(-hbar_omega_r, j);
        EXPECT_NEAR(ratio / std::exp(hbar_omega_r / kt), 1.0, 1e-8);
    }
}

TEST(ForwardRate, DetailedBalanceProperty) {
    const double gap = 220.0 * units::micro_eV;
    for (double g : {1e-6, 1e-4, 1e-2, 1e-1}) {
        for (double t : {0.05, 0.15, 0.3}) {
            auto j = table1_junction(t);
            j.dynes = g;
            const double kt = constants::boltzmann * t;
            for (double e : {hbar_omega_r, 0.5 * gap, 2.0 * gap}) {
                for (double sign : {1.0, -1.0}) {
                    const double energy = sign * e;
                    const double forward = forward_rate(energy, j);
                    const double backward = forward_rate(-energy, j);
                    const double balance = forward - std::exp(energy / kt) * backward;
                    EXPECT_LT(std::abs(balance), 1e-8 * forward) << "g=" << g << " T=" << t << " E=" << energy;
                }
            }
        }
    }
}

TEST(ForwardRate, HighBiasAsymptote) {
    const auto j = table1_junction();
    const double energy = 10.0 * j.gap;
    const double oracle = trapezoid_forward_rate(energy, j, 400001);
    const double value = forward_rate(energy, j);
    EXPECT_NEAR(value / oracle, 1.0, 1e-6);
    EXPECT_NEAR(value / (energy / constants::planck), 1.0, 0.05);
}

TEST(ForwardRate, MatchesBruteForceTrapezoid) {
    const auto j = table1_junction();
    for (double energy : {-2.0 * j.gap, -hbar_omega_r, 0.0, hbar_omega_r, j.gap, 3.0 * j.gap}) {
        const double oracle = trapezoid_forward_rate(energy, j, 1000000);
        EXPECT_NEAR(forward_rate(energy, j) / oracle, 1.0, 1e-6) << "E/gap=" << energy / j.gap;
    }
}

TEST(ForwardRate, StrictlyIncreasing) {
    const auto j = table1_junction();
    double previous = forward_rate(-3.0 * j.gap, j);
    for (double e = -3.0; e <= 3.0; e += 0.05) {
        const double current = forward_rate((e + 0.05) * j.gap, j);
        EXPECT_GT(current, previous) << "E/gap=" << e + 0.05;
        EXPECT_GT(current, 0.0);
        previous = current;
    }
}

TEST(ForwardRate, DifferentLeadTemperatures) {
    auto j = table1_junction(0.15);
    j.t_super = 0.05;
    const double oracle = trapezoid_forward_rate(hbar_omega_r, j, 1000000);
    EXPECT_NEAR(forward_rate(hbar_omega_r, j) / oracle, 1.0, 1e-6);
}

TEST(ForwardRate, NonConvergenceCarriesEstimate) {
    const auto j = table1_junction();
    QuadratureSpec q{1e-12, 0.0, 16};
    try {
        forward_rate(j.gap, j, q);
        FAIL() << "expected NumericError";
    } catch (const NumericError& err) {
        EXPECT_GT(err.error_estimate(), 0.0);
    }
}

TEST(ForwardRate, RejectsInvalidInputs) {
    auto j = table1_junction();
    j.dynes = 0.0;
    EXPECT_THROW(forward_rate(0.0, j), DomainError);
    j = table1_junction();
    EXPECT_THROW(forward_rate(0.0, j, QuadratureSpec{1e-2, 0.0, 100}), DomainError);
    EXPECT_THROW(forward_rate(0.0, j, QuadratureSpec{1e-9, 0.0, 8}), DomainError);
}

TEST(NisCurrent, Antisymmetric) {
    const auto j = table1_junction();
    const double v = 150e-6;
    EXPECT_NEAR(nis_current(-v, j), -nis_current(v, j), 1e-12 * std::abs(nis_current(v, j)));
}

TEST(NisCurrent, AboveGapConductance) {
    // Above the gap dI/dV approaches 1/R_T only as 1/sqrt(1 - (gap/eV)^2); at 3 gap/e
    // that is 1.0607. The oracle is a finite difference of trapezoid rates.
    const auto j = table1_junction();
    const double e = constants::elementary_charge;
    const double v = 3.0 * j.gap / e;
    const double dv = 1e-7;
    auto oracle_current = [&](double volts) {
        const double pre = e * constants::von_klitzing / j.tunneling_resistance;
        return pre * (trapezoid_forward_rate(e * volts, j, 400001) - trapezoid_forward_rate(-e * volts, j, 400001));
    };
    const double oracle = (oracle_current(v + dv) - oracle_current(v - dv)) / (2.0 * dv);
    const double numeric = (nis_current(v + dv, j) - nis_current(v - dv, j)) / (2.0 * dv);
    EXPECT_NEAR(numeric / oracle, 1.0, 1e-3);
    EXPECT_NEAR(nis_conductance(v, j) / numeric, 1.0, 1e-4);
    EXPECT_NEAR(numeric * j.tunneling_resistance, 3.0 / std::sqrt(8.0), 0.02);
    EXPECT_NEAR(numeric * j.tunneling_resistance, 1.0, 0.07);
}

TEST(NisCurrent, SubgapLeakageSetByDynes) {
    const auto j = table1_junction(0.010);
    const double dv = 1e-7;
    const double numeric = (nis_current(dv, j) - nis_current(-dv, j)) / (2.0 * dv);
    const double expected = j.dynes / j.tunneling_resistance;
    EXPECT_GT(numeric, 0.5 * expected);
    EXPECT_LT(numeric, 2.0 * expected);
    EXPECT_NEAR(nis_conductance(0.0, j) / numeric, 1.0, 1e-4);
}

TEST(NisCurrent, OhmicFarAboveGap) {
    const auto j = table1_junction();
    const double v = 20.0 * j.gap / constants::elementary_charge;
    EXPECT_NEAR(nis_conductance(v, j) * j.tunneling_resistance, 20.0 / std::sqrt(399.0), 1e-5);
    EXPECT_NEAR(nis_conductance(v, j) * j.tunneling_resistance, 1.0, 2e-3);
}
