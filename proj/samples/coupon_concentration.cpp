// Simulates one coupon-collecting run next to its ODE limit and prints the
// fraction of types held in 0, 1 and 2 copies along the way.

#include <wormald/analysis.hpp>

#include <cstdio>

int main()
{
    using namespace wormald;

    CompareConfig config;
    config.n = 100'000;
    config.s_max = 4.0;
    config.seed = 42;
    const CompareResult run = compare_run(config);

    std::printf("%6s %10s %10s %10s %10s %10s %10s\n", "s", "sim z0", "ode z0", "sim z1",
                "ode z1", "sim z2", "ode z2");
    for (std::size_t k = 0; k < run.ode.points.size(); k += 100) {
        const auto& sim = run.simulated.points[k];
        const auto& ode = run.ode.points[k];
        std::printf("%6.2f %10.6f %10.6f %10.6f %10.6f %10.6f %10.6f\n", sim.s, sim.z[0],
                    ode.z[0], sim.z[1], ode.z[1], sim.z[2], ode.z[2]);
    }
    std::printf("sup deviation %.6f at s = %.3f (grid resolution %.4f)\n",
                run.deviation.sup_deviation, run.deviation.argmax_s,
                run.deviation.grid_resolution);
}
