#pragma once

// Seeded Monte Carlo runs of the coupon process on the ODE sampling grid,
// and empirical checks of the three hypotheses of the differential-equation
// method (bounded increments, drift, Lipschitz drift).

#include <wormald/coupon.hpp>
#include <wormald/errors.hpp>
#include <wormald/ode.hpp>
#include <wormald/parallel.hpp>
#include <wormald/process.hpp>
#include <wormald/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace wormald {

/// ceil(n ln n), and at least 1.
inline std::uint64_t default_horizon_steps(std::size_t n)
{
    const auto nd = static_cast<double>(n);
    const auto m = static_cast<std::uint64_t>(std::ceil(nd * std::log(nd)));
    return std::max<std::uint64_t>(1, m);
}

/// Grid stride giving about 1000 grid intervals over [0, s_max].
inline std::size_t default_grid_stride(double s_max, double step_size)
{
    const double stride = std::round(s_max / (1000.0 * step_size));
    return stride < 1.0 ? 1 : static_cast<std::size_t>(stride);
}

struct RunPlan {
    std::size_t n = 1000;
    /// m: number of draws per run.
    std::uint64_t horizon_steps = 1;
    /// Scaled time between grid points; equals step_size * grid_stride of
    /// the matching IntegratorConfig.
    double grid_spacing = 1e-2;
    std::uint64_t master_seed = 0;
    std::size_t run_count = 1;
    std::size_t truncation = default_truncation;

    /// Plan with m = ceil(n ln n) and a ~1000-point grid for RK4 step h.
    static RunPlan coupon_default(std::size_t n, std::uint64_t master_seed,
                                  std::size_t run_count = 1, double step_size = 1e-3)
    {
        RunPlan plan;
        plan.n = n;
        plan.horizon_steps = default_horizon_steps(n);
        plan.master_seed = master_seed;
        plan.run_count = run_count;
        plan.grid_spacing = step_size * static_cast<double>(
                                            default_grid_stride(plan.horizon(), step_size));
        return plan;
    }

    /// m / n, the scaled horizon.
    double horizon() const noexcept
    {
        return static_cast<double>(horizon_steps) / static_cast<double>(n);
    }

    std::uint64_t run_seed(std::size_t run_index) const noexcept
    {
        return derive_seed(master_seed, run_index);
    }

    void validate() const
    {
        if (n < 1)
            throw contract_violation("RunPlan: n must be positive");
        if (horizon_steps < 1)
            throw contract_violation("RunPlan: horizon must be at least one step");
        if (run_count < 1)
            throw contract_violation("RunPlan: run count must be positive");
        if (truncation < 1)
            throw contract_violation("RunPlan: truncation level must be at least 1");
        if (!(grid_spacing > 0.0) || !std::isfinite(grid_spacing))
            throw contract_violation("RunPlan: grid spacing must be positive");
    }
};

/// Runs one coupon process for m draws and records (t/n, Y_t/n) at the
/// grid times of make_grid(m/n, grid_spacing).
///
/// Grid time s is sampled after round(s n) draws. When grid_spacing * n is
/// an integer this is exactly step s n; otherwise the sampled step is off
/// by at most half a draw, i.e. 1/(2n) in scaled time.
inline Trajectory simulate(const RunPlan& plan, std::size_t run_index)
{
    plan.validate();
    if (run_index >= plan.run_count)
        throw contract_violation("simulate: run index " + std::to_string(run_index) +
                                 " outside the plan's " + std::to_string(plan.run_count) +
                                 " runs");

    const std::size_t n = plan.n;
    const auto nd = static_cast<double>(n);
    const std::uint64_t m = plan.horizon_steps;
    const double horizon = plan.horizon();
    const DomainBox domain = coupon_domain(plan.truncation, horizon);
    const std::vector<double> grid = make_grid(horizon, plan.grid_spacing);

    Xoshiro256ss rng(plan.run_seed(run_index));
    CouponState state(n, plan.truncation);

    Trajectory traj;
    traj.points.reserve(grid.size());
    for (const double s : grid) {
        const auto target = std::min<std::uint64_t>(m, static_cast<std::uint64_t>(std::llround(s * nd)));
        while (state.t() < target)
            state.step(uniform_below(rng, n));
        traj.points.push_back({s, state.scaled()});
        if (!domain.contains(s, traj.points.back().z)) {
            traj.sigma_exit = s;
            break;
        }
    }
    return traj;
}

/// Replays run `run_index` and returns max over steps and coordinates of
/// |Y_{t+1}^(l) - Y_t^(l)|. Zero when the plan has no steps.
inline std::int64_t max_increment(const RunPlan& plan, std::size_t run_index)
{
    if (plan.n < 1)
        throw contract_violation("max_increment: n must be positive");
    if (plan.truncation < 1)
        throw contract_violation("max_increment: truncation level must be at least 1");

    Xoshiro256ss rng(plan.run_seed(run_index));
    CouponState state(plan.n, plan.truncation);
    std::vector<std::int64_t> before(plan.truncation + 2);
    std::int64_t largest = 0;
    for (std::uint64_t t = 0; t < plan.horizon_steps; ++t) {
        const auto now = state.counts_of_counts();
        std::copy(now.begin(), now.end(), before.begin());
        state.step(uniform_below(rng, plan.n));
        const auto after = state.counts_of_counts();
        for (std::size_t l = 0; l < before.size(); ++l)
            largest = std::max(largest, std::abs(after[l] - before[l]));
    }
    return largest;
}

/// Result of comparing sampled one-step changes against a predicted drift.
struct DriftCheckReport {
    std::size_t n = 0;
    std::uint64_t t = 0;
    std::vector<std::int64_t> counts_of_counts;
    std::size_t sample_count = 0;
    /// Per coordinate, in units of Y (not Y/n).
    std::vector<double> empirical_mean;
    std::vector<double> predicted;
    std::vector<double> standard_error;
    /// (empirical - predicted) / standard_error. A coordinate whose samples
    /// are all identical has standard error 0; its z-score is 0 if the
    /// empirical mean equals the prediction and infinite otherwise.
    std::vector<double> z_score;

    double max_abs_z() const
    {
        double worst = 0.0;
        for (double z : z_score)
            worst = std::max(worst, std::abs(z));
        return worst;
    }

    std::string describe() const
    {
        std::ostringstream out;
        out << "n=" << n << " t=" << t << " y=(";
        for (std::size_t i = 0; i < counts_of_counts.size(); ++i)
            out << (i ? "," : "") << counts_of_counts[i];
        out << ")";
        return out.str();
    }
};

inline constexpr std::size_t min_drift_samples = 100;

/// Samples `sample_count` independent single draws from the frozen `state`
/// (draw j uses seed derive_seed(seed, j)) and compares the mean change of
/// every bucket with the drift `spec` predicts at (t/n, Y/n).
inline DriftCheckReport empirical_drift(const CouponState& state, std::size_t sample_count,
                                        std::uint64_t seed, const ProcessSpec& spec)
{
    if (sample_count < min_drift_samples)
        throw contract_violation("empirical_drift: need at least 100 samples");
    const std::size_t dim = state.counts_of_counts().size();
    detail::require_dimension(spec, dim, "empirical_drift");

    std::vector<std::int64_t> sum(dim, 0), sum_sq(dim, 0);
    for (std::size_t j = 0; j < sample_count; ++j) {
        Xoshiro256ss rng(derive_seed(seed, j));
        const auto [from, to] = state.transition(uniform_below(rng, state.n()));
        if (from == to)
            continue;
        --sum[from];
        ++sum_sq[from];
        ++sum[to];
        ++sum_sq[to];
    }

    DriftCheckReport report;
    report.n = state.n();
    report.t = state.t();
    report.counts_of_counts.assign(state.counts_of_counts().begin(),
                                   state.counts_of_counts().end());
    report.sample_count = sample_count;
    const auto nd = static_cast<double>(state.n());
    report.predicted = evaluate_drift(spec, static_cast<double>(state.t()) / nd, state.scaled());

    const auto count = static_cast<double>(sample_count);
    for (std::size_t l = 0; l < dim; ++l) {
        const auto sd = static_cast<double>(sum[l]);
        const double mean = sd / count;
        const double variance =
            std::max(0.0, (static_cast<double>(sum_sq[l]) - sd * mean) / (count - 1.0));
        const double se = std::sqrt(variance / count);
        const double gap = mean - report.predicted[l];
        double z = 0.0;
        if (se > 0.0)
            z = gap / se;
        else if (std::abs(gap) > 1e-12)
            z = std::copysign(std::numeric_limits<double>::infinity(), gap);
        report.empirical_mean.push_back(mean);
        report.standard_error.push_back(se);
        report.z_score.push_back(z);
    }
    return report;
}

/// empirical_drift against the exact coupon drift.
inline DriftCheckReport empirical_drift(const CouponState& state, std::size_t sample_count,
                                        std::uint64_t seed)
{
    const double s = static_cast<double>(state.t()) / static_cast<double>(state.n());
    return empirical_drift(state, sample_count, seed,
                           make_coupon_spec(state.truncation(), std::max(1.0, s)));
}

struct HypothesisCheckOptions {
    std::size_t drift_samples = 10'000;
    double z_threshold = 5.0;
    std::size_t lipschitz_samples = 100'000;
    double lipschitz_tolerance = 1e-9;
};

struct ConditionCheck {
    std::string name;
    bool passed = false;
    /// Observed value (max increment, max |z|, Lipschitz estimate).
    double statistic = 0.0;
    /// What it was compared against; NaN when there is no bound.
    double threshold = 0.0;
    std::string evidence;
};

struct HypothesisReport {
    ConditionCheck increments;
    ConditionCheck drift;
    ConditionCheck lipschitz;
    HypothesisCheckOptions options;
    std::vector<DriftCheckReport> drift_reports;

    bool all_passed() const { return increments.passed && drift.passed && lipschitz.passed; }
};

/// Pilot snapshots of one extra coupon run (seed derive_seed(master, run_count)),
/// taken at `count` evenly spaced steps in [0, m).
inline std::vector<CouponState> pilot_states(const RunPlan& plan, std::size_t count)
{
    plan.validate();
    Xoshiro256ss rng(derive_seed(plan.master_seed, plan.run_count));
    CouponState state(plan.n, plan.truncation);
    std::vector<CouponState> snapshots;
    snapshots.reserve(count);
    for (std::size_t j = 0; j < count; ++j) {
        const std::uint64_t target = j * plan.horizon_steps / count;
        while (state.t() < target)
            state.step(uniform_below(rng, plan.n));
        snapshots.push_back(state);
    }
    return snapshots;
}

/// Checks the hypotheses that `spec` claims for the coupon process run
/// under `plan`:
///  1. max_increment <= increment bound on every run of the plan;
///  2. empirical_drift at `state_samples` pilot states has every |z| within
///     options.z_threshold of the process drift;
///  3. estimate_lipschitz does not exceed the declared Lipschitz hint.
///
/// The coupon drift is exact (no o(1) term), so condition 2 is a plain
/// statistical equality test here.
inline HypothesisReport check_hypotheses(const ProcessSpec& spec, const RunPlan& plan,
                                         std::size_t state_samples,
                                         const HypothesisCheckOptions& options = {})
{
    plan.validate();
    if (state_samples < 1)
        throw contract_violation("check_hypotheses: need at least one state sample");
    detail::require_dimension(spec, plan.truncation + 2, "check_hypotheses");

    HypothesisReport report;
    report.options = options;

    {
        const auto increments =
            map_indexed(plan.run_count, [&](std::size_t r) { return max_increment(plan, r); });
        const auto largest = static_cast<double>(
            *std::max_element(increments.begin(), increments.end()));
        auto& c = report.increments;
        c.name = "bounded_increments";
        c.statistic = largest;
        c.threshold = spec.increment_bound();
        c.passed = largest <= spec.increment_bound();
        c.evidence = "max |dY| over " + std::to_string(plan.run_count) + " runs of " +
                     std::to_string(plan.horizon_steps) + " steps";
    }

    {
        const auto states = pilot_states(plan, state_samples);
        const std::uint64_t drift_seed = mix64(plan.master_seed ^ 0xd1f7c0de5eedULL);
        report.drift_reports = map_indexed(states.size(), [&](std::size_t j) {
            return empirical_drift(states[j], options.drift_samples,
                                   derive_seed(drift_seed, j), spec);
        });
        double worst = 0.0;
        std::size_t worst_state = 0;
        for (std::size_t j = 0; j < report.drift_reports.size(); ++j) {
            const double z = report.drift_reports[j].max_abs_z();
            if (z > worst) {
                worst = z;
                worst_state = j;
            }
        }
        auto& c = report.drift;
        c.name = "drift";
        c.statistic = worst;
        c.threshold = options.z_threshold;
        c.passed = worst <= options.z_threshold;
        c.evidence = "max |z| over " + std::to_string(states.size()) + " pilot states x " +
                     std::to_string(options.drift_samples) + " draws; worst at " +
                     report.drift_reports[worst_state].describe() +
                     "; drift is exact, so this is an equality test";
    }

    {
        const double estimate = estimate_lipschitz(spec, options.lipschitz_samples,
                                                   mix64(plan.master_seed ^ 0x11b5c417ULL));
        auto& c = report.lipschitz;
        c.name = "lipschitz";
        c.statistic = estimate;
        if (const auto hint = spec.lipschitz_hint()) {
            c.threshold = *hint;
            c.passed = estimate <= *hint + options.lipschitz_tolerance * std::max(1.0, *hint);
            c.evidence = "sampled estimate vs declared constant over " +
                         std::to_string(options.lipschitz_samples) + " pairs";
        } else {
            c.threshold = std::numeric_limits<double>::quiet_NaN();
            c.passed = std::isfinite(estimate);
            c.evidence = "no declared constant; estimate is finite over " +
                         std::to_string(options.lipschitz_samples) + " pairs";
        }
    }
    return report;
}

} // namespace wormald
