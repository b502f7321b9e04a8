#pragma once

// Fixed-step classical Runge-Kutta integration of dz/ds = f(s, z) on a
// sampling grid shared with the Monte Carlo engine.

#include <wormald/errors.hpp>
#include <wormald/process.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace wormald {

struct IntegratorConfig {
    double step_size = 1e-3;
    /// Emit every grid_stride-th step.
    std::size_t grid_stride = 1;

    double grid_spacing() const noexcept { return step_size * static_cast<double>(grid_stride); }

    void validate() const
    {
        if (!(step_size > 0.0) || !std::isfinite(step_size))
            throw contract_violation("IntegratorConfig: step size must be positive");
        if (grid_stride < 1)
            throw contract_violation("IntegratorConfig: grid stride must be at least 1");
    }
};

/// Grid times 0, d, 2d, ... strictly below s_max, followed by s_max itself.
///
/// Both the ODE engine and the simulator build their grids here, so grid
/// s-values agree bitwise between the two. A trailing interval shorter than
/// 1e-9 d is merged into the last one rather than emitted.
inline std::vector<double> make_grid(double s_max, double spacing)
{
    if (!(spacing > 0.0) || !std::isfinite(spacing))
        throw contract_violation("make_grid: spacing must be positive");
    if (!(s_max >= 0.0) || !std::isfinite(s_max))
        throw contract_violation("make_grid: s_max must be non-negative");
    std::vector<double> grid{0.0};
    if (s_max == 0.0)
        return grid;
    const double cutoff = s_max - 1e-9 * spacing;
    for (std::size_t k = 1;; ++k) {
        const double s = static_cast<double>(k) * spacing;
        if (!(s < cutoff))
            break;
        grid.push_back(s);
    }
    grid.push_back(s_max);
    return grid;
}

namespace detail {

/// One RK4 step of size h from (s, z), written back into z.
struct Rk4Stepper {
    const ProcessSpec& spec;
    std::vector<double> k1, k2, k3, k4, tmp;

    explicit Rk4Stepper(const ProcessSpec& process)
        : spec(process),
          k1(process.coord_count()),
          k2(process.coord_count()),
          k3(process.coord_count()),
          k4(process.coord_count()),
          tmp(process.coord_count())
    {}

    // Drift values are not checked here: a non-finite slope shows up as a
    // non-finite state, which integrate() reports as divergence.
    void step(double s, double h, std::span<double> z)
    {
        const std::size_t dim = z.size();
        const auto& f = spec.drift();
        f(s, z, k1);
        for (std::size_t l = 0; l < dim; ++l)
            tmp[l] = z[l] + 0.5 * h * k1[l];
        f(s + 0.5 * h, tmp, k2);
        for (std::size_t l = 0; l < dim; ++l)
            tmp[l] = z[l] + 0.5 * h * k2[l];
        f(s + 0.5 * h, tmp, k3);
        for (std::size_t l = 0; l < dim; ++l)
            tmp[l] = z[l] + h * k3[l];
        f(s + h, tmp, k4);
        for (std::size_t l = 0; l < dim; ++l)
            z[l] += h / 6.0 * (k1[l] + 2.0 * k2[l] + 2.0 * k3[l] + k4[l]);
    }
};

} // namespace detail

/// Integrates from s = 0 to s_max with RK4.
///
/// Each interval between consecutive grid times is split into
/// ceil(length / h) equal substeps (exactly grid_stride of them for a full
/// interval), so the final partial interval ends exactly on s_max. The
/// domain is checked at grid points only; the first grid point outside it is
/// stored and recorded as sigma_exit, and integration stops there.
inline Trajectory integrate(const ProcessSpec& spec, std::span<const double> z0, double s_max,
                            const IntegratorConfig& config = {})
{
    config.validate();
    detail::require_dimension(spec, z0.size(), "integrate");
    if (!(s_max >= 0.0) || !std::isfinite(s_max))
        throw contract_violation("integrate: s_max must be finite and non-negative");
    if (s_max > spec.domain().s_high)
        throw contract_violation("integrate: s_max lies beyond the domain");
    if (!in_domain(spec, 0.0, z0))
        throw contract_violation("integrate: initial state lies outside the domain");

    const double h = config.step_size;
    const std::vector<double> grid = make_grid(s_max, config.grid_spacing());

    Trajectory traj;
    traj.points.reserve(grid.size());
    std::vector<double> z(z0.begin(), z0.end());
    traj.points.push_back({0.0, z});

    detail::Rk4Stepper stepper(spec);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double s0 = grid[k - 1];
        const double len = grid[k] - s0;
        const auto substeps =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / h - 1e-9)));
        const double dh = len / static_cast<double>(substeps);
        for (std::size_t j = 0; j < substeps; ++j) {
            const double s = s0 + static_cast<double>(j) * dh;
            stepper.step(s, dh, z);
            if (!std::all_of(z.begin(), z.end(), [](double v) { return std::isfinite(v); })) {
                const double bad = (j + 1 == substeps) ? grid[k] : s + dh;
                throw divergence_error("integrate: state became non-finite at s = " +
                                           std::to_string(bad),
                                       bad);
            }
        }
        traj.points.push_back({grid[k], z});
        if (!in_domain(spec, grid[k], z)) {
            traj.sigma_exit = grid[k];
            break;
        }
    }
    return traj;
}

/// Exact solution used as a reference: (s, coordinate) -> z_l(s).
using SolutionOracle = std::function<double(double s, std::size_t coordinate)>;

struct ConvergenceResult {
    /// log2(err(h) / err(h/2)); +infinity when err(h/2) is zero.
    double order = 0.0;
    bool infinite = false;
    double coarse_error = 0.0;
    double fine_error = 0.0;
};

/// Max over grid points and coordinates of |z - oracle|.
inline double max_error_against(const Trajectory& traj, const SolutionOracle& oracle)
{
    double err = 0.0;
    for (const auto& p : traj.points)
        for (std::size_t l = 0; l < p.z.size(); ++l)
            err = std::max(err, std::abs(p.z[l] - oracle(p.s, l)));
    return err;
}

/// Empirical global order of RK4: integrates at h and h/2 (every step on
/// the grid) and compares the max errors against the exact solution.
inline ConvergenceResult convergence_order(const ProcessSpec& spec, std::span<const double> z0,
                                           double s_max, double h, const SolutionOracle& oracle)
{
    if (!(h > 0.0))
        throw contract_violation("convergence_order: step size must be positive");
    if (!oracle)
        throw contract_violation("convergence_order: oracle is empty");

    ConvergenceResult result;
    result.coarse_error = max_error_against(integrate(spec, z0, s_max, {h, 1}), oracle);
    result.fine_error = max_error_against(integrate(spec, z0, s_max, {h / 2.0, 1}), oracle);
    if (result.fine_error == 0.0) {
        result.infinite = true;
        result.order = std::numeric_limits<double>::infinity();
    } else {
        result.order = std::log2(result.coarse_error / result.fine_error);
    }
    return result;
}

} // namespace wormald
