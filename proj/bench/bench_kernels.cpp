// Kernel benchmark: the OpenMP-parallel paths against their serial reference
// implementations (same math, same batch structure).
//
//   ./bench_kernels [jobs]

#include <chrono>
#include <cstdio>
#include <cstdlib>

#include "hcfsim/constellation.hpp"
#include "hcfsim/link_budget.hpp"
#include "hcfsim/parallel.hpp"
#include "hcfsim/reporting.hpp"

using namespace hcfsim;
using clock_type = std::chrono::steady_clock;

namespace {

template <typename Fn>
double time_s(Fn&& fn, int repeats = 3) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = clock_type::now();
        fn();
        const double dt = std::chrono::duration<double>(clock_type::now() - t0).count();
        best = std::min(best, dt);
    }
    return best;
}

} // namespace

int main(int argc, char** argv) {
    const int jobs = argc > 1 ? std::atoi(argv[1]) : 0;
    set_jobs(jobs);
    std::printf("threads: %d\n\n", max_jobs());

    std::printf("%-40s %10s %10s %8s\n", "kernel", "serial(s)", "parallel", "speedup");

    for (int m : {6, 10}) {
        const Constellation c = Constellation::gray_square_qam(m);
        for (double snr : {8.0, 20.0}) {
            const std::int64_t n = 200000;
            double g_serial = 0, g_par = 0;
            const double ts =
                time_s([&] { g_serial = gmi_monte_carlo_serial(c, snr, n, 1).gmi; });
            const double tp = time_s([&] { g_par = gmi_monte_carlo(c, snr, n, 1).gmi; });
            char name[64];
            std::snprintf(name, sizeof(name), "gmi_monte_carlo m=%d snr=%.0f (2e5)", m, snr);
            std::printf("%-40s %10.3f %10.3f %7.2fx\n", name, ts, tp, ts / tp);
            if (g_serial != g_par)
                std::printf("  !! serial/parallel mismatch: %.12f vs %.12f\n", g_serial, g_par);
        }
    }

    // full-plan link budget evaluation
    {
        std::vector<BandSpec> bands = {
            {"L", 185.10e12, 5.3e12, 159, 21.9, 22.7}, {"C", 191.60e12, 4.5e12, 135, 20.9, 21.7},
            {"S", 196.15e12, 7.5e12, 225, 14.0, 14.9}, {"E", 204.70e12, 8.6e12, 258, 14.8, 15.4},
            {"O", 220.50e12, 16.6e12, 498, 15.1, 15.5}};
        const ChannelPlan plan = build_plan(bands, 1e11 / 3.0, 32e9, 1.33e9, 0.01);
        const FiberProfile fiber(
            60.0, {{1200.0, 0.30}, {1400.0, 0.28}, {1700.0, 0.24}},
            {{"L", {-56, -36}}, {"C", {-56, -36}}, {"S", {-56, -36}}, {"E", {-56, -36}},
             {"O", {-56, -36}}});
        DirectionalScenario fw;
        fw.plan = &plan;
        fw.fiber = &fiber;
        for (const auto& b : bands) {
            fw.link.amplifiers[b.name] = AmplifierSpec{b.name, 5.0, 23.0};
            fw.link.trx_snr_db[b.name] = 20.0;
        }
        DirectionalScenario bw = fw;
        bw.direction = Direction::BW;
        std::vector<ChannelSnr> rows;
        const double ts = time_s([&] {
            for (int r = 0; r < 50; ++r) rows = evaluate_scenario_serial(fw, bw);
        });
        const double tp = time_s([&] {
            for (int r = 0; r < 50; ++r) rows = evaluate_scenario(fw, bw);
        });
        std::printf("%-40s %10.3f %10.3f %7.2fx\n", "evaluate_scenario 2x1275 (x50)", ts, tp,
                    ts / tp);
    }
    return 0;
}
