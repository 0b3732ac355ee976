// Scans the QCR bias and prints where the resonator gets coldest, with and
// without the fig3d drive line attached.
#include <cstdio>

#include "qcr/cli.hpp"

int main() {
    using namespace qcr;
    const auto config = load_config("fig3d", {});
    const auto& c = config.circuit;
    const auto drive = cli::external_baths(config);

    double best_v = 0.0, best_n = 1e9;
    std::printf("%8s %12s %10s %10s %10s\n", "V_uV", "gamma_1/s", "T_qcr_mK", "nbar", "T_eff_mK");
    for (double v : cli::voltage_grid(config.sweep)) {
        const auto r = qcr_rates(v, c);
        auto baths = drive;
        baths.push_back(r.bath());
        const double n = steady_state_mean(baths);
        if (n < best_n) {
            best_n = n;
            best_v = v;
        }
        const double t_qcr = r.temperature ? *r.temperature * 1e3 : -1.0;
        const double t_eff = temperature_from_occupation(n, c.resonator_frequency) * 1e3;
        std::printf("%8.1f %12.4e %10.1f %10.4f %10.1f\n", v * 1e6, r.gamma, t_qcr, n, t_eff);
    }
    std::printf("# coldest at %.1f uV: nbar = %.4f (%.1f mK)\n", best_v * 1e6, best_n,
                temperature_from_occupation(best_n, c.resonator_frequency) * 1e3);
}
