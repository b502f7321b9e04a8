// A user-defined process: exponential decay dz/ds = -z on the box
// (0, 2) x (0, 2). Integrates it, checks the order of RK4 against e^{-s},
// and estimates the Lipschitz constant of the drift.

#include <wormald/ode.hpp>
#include <wormald/process.hpp>

#include <cmath>
#include <cstdio>
#include <vector>

int main()
{
    using namespace wormald;

    const ProcessSpec decay(
        1, [](double, std::span<const double> z, std::span<double> out) { out[0] = -z[0]; },
        1.0, 1.0, DomainBox::uniform(-0.1, 2.1, 1, 0.0, 2.0), 1.0);

    const std::vector<double> z0{1.0};
    const Trajectory traj = integrate(decay, z0, 2.0, {1e-3, 250});
    for (const auto& p : traj.points)
        std::printf("s = %.2f  z = %.10f  exact = %.10f\n", p.s, p.z[0], std::exp(-p.s));

    const auto order = convergence_order(decay, z0, 2.0, 1e-2,
                                         [](double s, std::size_t) { return std::exp(-s); });
    std::printf("observed order %.3f\n", order.order);
    std::printf("Lipschitz estimate %.4f\n", estimate_lipschitz(decay, 100'000, 1));
}
