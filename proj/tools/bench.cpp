// Benchmark: OpenMP Monte Carlo fan-out versus the serial reference, with an
// equality check on the aggregated metrics.
#include "dcbm/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

int main(int argc, char** argv) {
    dcbm::ScenarioConfig cfg = dcbm::scenario_preset("custom");
    cfg.horizon = 200;
    cfg.runs = argc > 1 ? static_cast<std::uint32_t>(std::stoul(argv[1])) : 32;

    using clock = std::chrono::steady_clock;
    auto t0 = clock::now();
    dcbm::MonteCarloSummary serial = dcbm::run_monte_carlo_serial(cfg);
    auto t1 = clock::now();
    dcbm::MonteCarloSummary parallel = dcbm::run_monte_carlo(cfg);
    auto t2 = clock::now();

    double serial_s = std::chrono::duration<double>(t1 - t0).count();
    double parallel_s = std::chrono::duration<double>(t2 - t1).count();
    std::printf("runs=%u horizon=%u\n", cfg.runs, cfg.horizon);
    std::printf("serial:   %.3f s\n", serial_s);
    std::printf("parallel: %.3f s  (speedup %.2fx)\n", parallel_s, serial_s / parallel_s);

    for (const auto& [name, st] : serial.metrics) {
        const auto& pt = parallel.metrics.at(name);
        if (st.mean != pt.mean || st.stddev != pt.stddev) {
            std::printf("MISMATCH in %s: serial mean %.17g vs parallel %.17g\n", name.c_str(),
                        st.mean, pt.mean);
            return 1;
        }
    }
    std::printf("aggregates identical across serial and parallel paths\n");
    return 0;
}
