#pragma once

// Concentration of simulated trajectories around the ODE solution, its
// scaling in n, and the cover-time threshold experiment.

#include <wormald/coupon.hpp>
#include <wormald/errors.hpp>
#include <wormald/monte_carlo.hpp>
#include <wormald/ode.hpp>
#include <wormald/parallel.hpp>
#include <wormald/process.hpp>
#include <wormald/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wormald {

struct DeviationReport {
    std::size_t run_index = 0;
    /// max over compared grid points and coordinates of |z_a - z_b|.
    double sup_deviation = 0.0;
    double argmax_s = 0.0;
    std::vector<double> per_coordinate;
    std::size_t compared_points = 0;
    /// Largest gap between consecutive compared grid times. For a simulated
    /// trajectory this is (draws between grid points) / n, which bounds how
    /// much the between-grid sup can exceed the reported one.
    double grid_resolution = 0.0;
};

/// Sup-norm distance between two trajectories over their common grid prefix.
///
/// Points are compared while their s-values agree bitwise, up to and
/// including the earlier sigma_exit of the two.
inline DeviationReport sup_deviation(const Trajectory& a, const Trajectory& b,
                                     std::size_t run_index = 0)
{
    if (a.points.empty() || b.points.empty())
        throw contract_violation("sup_deviation: empty trajectory");
    const std::size_t dim = a.dimension();
    if (b.dimension() != dim)
        throw contract_violation("sup_deviation: trajectories differ in dimension");

    std::optional<double> cutoff = a.sigma_exit;
    if (b.sigma_exit && (!cutoff || *b.sigma_exit < *cutoff))
        cutoff = b.sigma_exit;

    DeviationReport report;
    report.run_index = run_index;
    report.per_coordinate.assign(dim, 0.0);
    const std::size_t common = std::min(a.points.size(), b.points.size());
    for (std::size_t k = 0; k < common; ++k) {
        const auto& pa = a.points[k];
        const auto& pb = b.points[k];
        if (pa.s != pb.s || (cutoff && pa.s > *cutoff))
            break;
        for (std::size_t l = 0; l < dim; ++l) {
            const double d = std::abs(pa.z[l] - pb.z[l]);
            report.per_coordinate[l] = std::max(report.per_coordinate[l], d);
            if (d > report.sup_deviation) {
                report.sup_deviation = d;
                report.argmax_s = pa.s;
            }
        }
        if (k > 0)
            report.grid_resolution = std::max(report.grid_resolution, pa.s - a.points[k - 1].s);
        ++report.compared_points;
    }
    if (report.compared_points == 0)
        throw contract_violation("sup_deviation: trajectories share no grid point");
    return report;
}

struct CompareConfig {
    std::size_t n = 1000;
    std::size_t truncation = default_truncation;
    double s_max = 4.0;
    std::uint64_t seed = 0;
    double step_size = 1e-3;
    /// 0 picks default_grid_stride(s_max, step_size).
    std::size_t grid_stride = 0;
    std::size_t run_index = 0;
    std::size_t run_count = 1;

    std::size_t effective_grid_stride() const
    {
        return grid_stride ? grid_stride : default_grid_stride(s_max, step_size);
    }

    /// m = ceil(s_max n); simulation and ODE both stop at m / n.
    RunPlan plan() const
    {
        if (n < 1)
            throw contract_violation("compare: n must be positive");
        if (!(s_max > 0.0) || !std::isfinite(s_max))
            throw contract_violation("compare: s_max must be positive");
        RunPlan p;
        p.n = n;
        p.horizon_steps = std::max<std::uint64_t>(
            1, static_cast<std::uint64_t>(std::ceil(s_max * static_cast<double>(n) - 1e-9)));
        p.grid_spacing = step_size * static_cast<double>(effective_grid_stride());
        p.master_seed = seed;
        p.run_count = std::max(run_count, run_index + 1);
        p.truncation = truncation;
        return p;
    }

    IntegratorConfig integrator() const { return {step_size, effective_grid_stride()}; }
};

struct CompareResult {
    Trajectory simulated;
    Trajectory ode;
    DeviationReport deviation;
};

/// RK4 reference trajectory for the coupon process on the plan's grid.
inline Trajectory coupon_reference(const RunPlan& plan, const IntegratorConfig& config)
{
    const double horizon = plan.horizon();
    const ProcessSpec spec = make_coupon_spec(plan.truncation, horizon);
    return integrate(spec, coupon_initial_state(plan.truncation), horizon, config);
}

/// One simulation, one integration and their deviation on the shared grid.
inline CompareResult compare_run(const CompareConfig& config)
{
    const RunPlan plan = config.plan();
    CompareResult result;
    result.ode = coupon_reference(plan, config.integrator());
    result.simulated = simulate(plan, config.run_index);
    result.deviation = sup_deviation(result.simulated, result.ode, config.run_index);
    return result;
}

inline CompareResult compare_run(std::size_t n, std::size_t truncation, double s_max,
                                 std::uint64_t seed, double step_size = 1e-3)
{
    CompareConfig config;
    config.n = n;
    config.truncation = truncation;
    config.s_max = s_max;
    config.seed = seed;
    config.step_size = step_size;
    return compare_run(config);
}

struct ScalingRow {
    std::size_t n = 0;
    std::size_t runs = 0;
    double mean_sup_deviation = 0.0;
    double standard_error = 0.0;
    std::vector<double> sup_deviations;
};

struct ScalingReport {
    std::vector<ScalingRow> rows;
    /// ln(mean sup-deviation) ~ intercept - alpha ln n.
    double alpha = 0.0;
    double intercept = 0.0;
};

struct LineFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Ordinary least squares y = intercept + slope x.
inline LineFit least_squares(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw fit_error("least_squares: need at least two paired points");
    const auto count = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= count;
    my /= count;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (!(sxx > 0.0))
        throw fit_error("least_squares: zero spread in the regressor");
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

struct ScalingOptions {
    double step_size = 1e-3;
    /// 0 picks default_grid_stride(s_max, step_size).
    std::size_t grid_stride = 0;
};

/// Mean sup-deviation against RK4 for each n, and the fitted decay exponent
/// alpha of mean ~ n^{-alpha}. Runs for the i-th n (in sorted order) use
/// master seed derive_seed(master_seed, i).
inline ScalingReport scaling_study(std::vector<std::size_t> ns, std::size_t runs_per_n,
                                   std::uint64_t master_seed,
                                   std::size_t truncation = default_truncation,
                                   double s_max = 4.0, const ScalingOptions& options = {})
{
    if (ns.size() < 2)
        throw contract_violation("scaling_study: need at least two values of n");
    if (runs_per_n < 1)
        throw contract_violation("scaling_study: need at least one run per n");
    for (auto n : ns)
        if (n < 10)
            throw contract_violation("scaling_study: every n must be at least 10");
    std::sort(ns.begin(), ns.end());

    ScalingReport report;
    std::vector<double> log_n, log_mean;
    for (std::size_t i = 0; i < ns.size(); ++i) {
        CompareConfig config;
        config.n = ns[i];
        config.truncation = truncation;
        config.s_max = s_max;
        config.seed = derive_seed(master_seed, i);
        config.step_size = options.step_size;
        config.grid_stride = options.grid_stride;
        config.run_count = runs_per_n;
        const RunPlan plan = config.plan();
        const Trajectory ode = coupon_reference(plan, config.integrator());

        ScalingRow row;
        row.n = ns[i];
        row.runs = runs_per_n;
        row.sup_deviations = map_indexed(runs_per_n, [&](std::size_t r) {
            return sup_deviation(simulate(plan, r), ode, r).sup_deviation;
        });
        double sum = 0.0;
        for (double d : row.sup_deviations)
            sum += d;
        const auto runs = static_cast<double>(runs_per_n);
        row.mean_sup_deviation = sum / runs;
        if (runs_per_n > 1) {
            double ss = 0.0;
            for (double d : row.sup_deviations)
                ss += (d - row.mean_sup_deviation) * (d - row.mean_sup_deviation);
            row.standard_error = std::sqrt(ss / (runs - 1.0) / runs);
        }
        if (!(row.mean_sup_deviation > 0.0))
            throw fit_error("scaling_study: zero mean deviation at n = " + std::to_string(row.n));
        log_n.push_back(std::log(static_cast<double>(row.n)));
        log_mean.push_back(std::log(row.mean_sup_deviation));
        report.rows.push_back(std::move(row));
    }

    const LineFit fit = least_squares(log_n, log_mean);
    report.alpha = -fit.slope;
    report.intercept = fit.intercept;
    return report;
}

/// 1 - exp(-exp(-exp(c))).
inline double gumbel_reference_paper(double c)
{
    return 1.0 - std::exp(-std::exp(-std::exp(c)));
}

/// 1 - exp(-exp(-c)).
inline double gumbel_reference_classical(double c)
{
    return 1.0 - std::exp(-std::exp(-c));
}

/// ceil(n ln n + c n).
inline std::uint64_t cover_threshold(std::size_t n, double c)
{
    const auto nd = static_cast<double>(n);
    const double k = std::ceil(nd * std::log(nd) + c * nd);
    return k <= 0.0 ? 0 : static_cast<std::uint64_t>(k);
}

struct GumbelRow {
    double c = 0.0;
    std::uint64_t threshold = 0;
    double empirical = 0.0;
    double standard_error = 0.0;
    double reference_paper = 0.0;
    double reference_classical = 0.0;
    std::optional<double> exact;
};

struct GumbelReport {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::vector<GumbelRow> rows;
};

/// Largest n for which gumbel_experiment evaluates exact_cover_tail.
inline constexpr std::size_t gumbel_exact_limit = 2000;

/// Empirical P(T >= ceil(n ln n + c n)) from `trials` cover times (trial i
/// uses seed derive_seed(master_seed, i)), next to both closed-form
/// reference curves and, for n <= 2000, the exact tail.
inline GumbelReport gumbel_experiment(std::size_t n, std::size_t trials, std::span<const double> cs,
                                      std::uint64_t master_seed)
{
    if (trials < 100)
        throw contract_violation("gumbel_experiment: need at least 100 trials");
    if (n < 10)
        throw contract_violation("gumbel_experiment: n must be at least 10");

    const auto times = map_indexed(trials, [&](std::size_t i) {
        return cover_time(n, derive_seed(master_seed, i));
    });

    GumbelReport report;
    report.n = n;
    report.trials = trials;
    const auto count = static_cast<double>(trials);
    for (const double c : cs) {
        GumbelRow row;
        row.c = c;
        row.threshold = cover_threshold(n, c);
        const auto hits = std::count_if(times.begin(), times.end(),
                                        [&](std::uint64_t t) { return t >= row.threshold; });
        row.empirical = static_cast<double>(hits) / count;
        row.standard_error = std::sqrt(row.empirical * (1.0 - row.empirical) / count);
        row.reference_paper = gumbel_reference_paper(c);
        row.reference_classical = gumbel_reference_classical(c);
        if (n <= gumbel_exact_limit)
            row.exact = row.threshold == 0 ? 1.0 : exact_cover_tail(n, row.threshold - 1);
        report.rows.push_back(row);
    }
    return report;
}

} // namespace wormald
