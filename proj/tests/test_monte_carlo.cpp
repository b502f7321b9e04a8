#include <wormald/coupon.hpp>
#include <wormald/monte_carlo.hpp>
#include <wormald/ode.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <vector>

using namespace wormald;

namespace {

RunPlan small_plan(std::size_t n, std::uint64_t m, std::uint64_t seed = 1, std::size_t runs = 1)
{
    RunPlan plan;
    plan.n = n;
    plan.horizon_steps = m;
    plan.grid_spacing = 1.0 / static_cast<double>(n);
    plan.master_seed = seed;
    plan.run_count = runs;
    plan.truncation = 10;
    return plan;
}

ProcessSpec flipped_coupon_spec(std::size_t l, double s_max)
{
    return make_coupon_spec(l, s_max).with_drift(
        [l](double, std::span<const double> z, std::span<double> out) {
            coupon_drift(l, z, out);
            for (auto& v : out)
                v = -v;
        });
}

} // namespace

TEST(DefaultHorizon, IsCeilNLogN)
{
    EXPECT_EQ(default_horizon_steps(1), 1u);
    EXPECT_EQ(default_horizon_steps(1000), 6908u);
    EXPECT_EQ(default_horizon_steps(100'000), 1'151'293u);
}

TEST(Simulate, SingleTypeSingleStep)
{
    const auto traj = simulate(small_plan(1, 1), 0);
    ASSERT_EQ(traj.points.size(), 2u);
    EXPECT_EQ(traj.points[0].s, 0.0);
    EXPECT_EQ(traj.points[0].z[0], 1.0);
    EXPECT_EQ(traj.points[1].s, 1.0);
    EXPECT_EQ(traj.points[1].z[0], 0.0);
    EXPECT_EQ(traj.points[1].z[1], 1.0);
}

TEST(Simulate, LargeRunStartsAtInitialConditionAndTracksDecay)
{
    const auto plan = RunPlan::coupon_default(100'000, 17);
    const auto traj = simulate(plan, 0);
    EXPECT_EQ(traj.points.front().s, 0.0);
    EXPECT_EQ(traj.points.front().z, coupon_initial_state(10));
    const auto& last = traj.points.back();
    EXPECT_EQ(last.s, plan.horizon());
    EXPECT_NEAR(last.z[0], std::exp(-last.s), 0.02);
    EXPECT_FALSE(traj.sigma_exit);
}

TEST(Simulate, GridAlignsWithOdeGrid)
{
    const double h = 1e-3;
    const auto plan = RunPlan::coupon_default(20'000, 3, 1, h);
    const auto traj = simulate(plan, 0);
    const std::size_t stride = default_grid_stride(plan.horizon(), h);
    const auto ode = integrate(make_coupon_spec(10, plan.horizon()), coupon_initial_state(10),
                               plan.horizon(), {h, stride});
    ASSERT_EQ(traj.points.size(), ode.points.size());
    for (std::size_t k = 0; k < traj.points.size(); ++k)
        ASSERT_EQ(traj.points[k].s, ode.points[k].s) << k;
}

TEST(Simulate, IsReproducibleAndRunsDiffer)
{
    const auto plan = small_plan(200, 1000, 77, 3);
    EXPECT_EQ(simulate(plan, 1), simulate(plan, 1));
    EXPECT_NE(simulate(plan, 0), simulate(plan, 1));
    EXPECT_NE(plan.run_seed(0), plan.run_seed(1));
}

TEST(Simulate, ScaledCountsStayInUnitInterval)
{
    const auto plan = small_plan(37, 500, 4, 5);
    for (std::size_t r = 0; r < plan.run_count; ++r) {
        const auto traj = simulate(plan, r);
        for (const auto& p : traj.points) {
            double total = 0.0;
            for (double v : p.z) {
                ASSERT_GE(v, 0.0);
                ASSERT_LE(v, 1.0);
                total += v * 37.0;
            }
            ASSERT_NEAR(total, 37.0, 1e-9);
        }
    }
}

TEST(Simulate, RejectsRunIndexOutsidePlan)
{
    EXPECT_THROW(simulate(small_plan(10, 10, 1, 2), 2), contract_violation);
    RunPlan bad = small_plan(10, 10);
    bad.n = 0;
    EXPECT_THROW(simulate(bad, 0), contract_violation);
}

TEST(MaxIncrement, IsExactlyOneForCouponRuns)
{
    for (std::uint64_t seed = 0; seed < 10; ++seed)
        ASSERT_EQ(max_increment(small_plan(100, 500, seed), 0), 1);
    EXPECT_EQ(max_increment(small_plan(2, 10, 123), 0), 1);
}

TEST(MaxIncrement, ZeroWithoutSteps)
{
    EXPECT_EQ(max_increment(small_plan(5, 0), 0), 0);
}

TEST(EmpiricalDrift, TwoEmptyTwoSingles)
{
    const auto state = CouponState::from_per_type_counts({0, 0, 1, 1}, 10);
    const auto report = empirical_drift(state, 10'000, 42);
    EXPECT_DOUBLE_EQ(report.predicted[2], 0.5);
    EXPECT_DOUBLE_EQ(report.predicted[1], 0.0);
    EXPECT_LE(std::abs(report.empirical_mean[2] - 0.5), 3.0 * report.standard_error[2]);
    EXPECT_LE(std::abs(report.z_score[1]), 3.0);
    EXPECT_GT(report.standard_error[2], 0.0);
}

TEST(EmpiricalDrift, FreshStateIsForced)
{
    CouponState fresh(50, 10);
    const auto report = empirical_drift(fresh, 1000, 3);
    EXPECT_EQ(report.predicted[0], -1.0);
    EXPECT_EQ(report.empirical_mean[0], -1.0);
    EXPECT_EQ(report.empirical_mean[1], 1.0);
    EXPECT_EQ(report.standard_error[0], 0.0);
    EXPECT_EQ(report.z_score[0], 0.0);
    EXPECT_EQ(report.max_abs_z(), 0.0);
}

TEST(EmpiricalDrift, WrongPredictionWithZeroVarianceIsInfinite)
{
    CouponState fresh(50, 10);
    const auto report = empirical_drift(fresh, 1000, 3, flipped_coupon_spec(10, 5.0));
    EXPECT_TRUE(std::isinf(report.max_abs_z()));
}

TEST(EmpiricalDrift, NeedsEnoughSamples)
{
    CouponState fresh(5, 10);
    EXPECT_THROW(empirical_drift(fresh, 99, 1), contract_violation);
}

TEST(PilotStates, AreEvenlySpacedSnapshots)
{
    const auto plan = small_plan(100, 1000, 5);
    const auto states = pilot_states(plan, 10);
    ASSERT_EQ(states.size(), 10u);
    for (std::size_t j = 0; j < states.size(); ++j)
        EXPECT_EQ(states[j].t(), j * 100);
}

TEST(CheckHypotheses, CouponProcessPasses)
{
    const auto plan = RunPlan::coupon_default(1000, 11, 20);
    const auto spec = make_coupon_spec(10, plan.horizon());
    HypothesisCheckOptions options;
    options.lipschitz_samples = 20'000;
    const auto report = check_hypotheses(spec, plan, 20, options);
    EXPECT_TRUE(report.increments.passed);
    EXPECT_EQ(report.increments.statistic, 1.0);
    EXPECT_TRUE(report.drift.passed) << report.drift.evidence;
    EXPECT_TRUE(report.lipschitz.passed);
    EXPECT_TRUE(report.all_passed());
    EXPECT_EQ(report.drift_reports.size(), 20u);
}

TEST(CheckHypotheses, TooSmallIncrementBoundFails)
{
    const auto plan = RunPlan::coupon_default(1000, 11, 5);
    const auto spec = make_coupon_spec(10, plan.horizon()).with_increment_bound(0.5);
    HypothesisCheckOptions options;
    options.lipschitz_samples = 1000;
    const auto report = check_hypotheses(spec, plan, 5, options);
    EXPECT_FALSE(report.increments.passed);
    EXPECT_FALSE(report.all_passed());
}

TEST(CheckHypotheses, SignFlippedDriftFails)
{
    const auto plan = RunPlan::coupon_default(1000, 11, 5);
    HypothesisCheckOptions options;
    options.lipschitz_samples = 1000;
    const auto report = check_hypotheses(flipped_coupon_spec(10, plan.horizon()), plan, 20, options);
    EXPECT_FALSE(report.drift.passed);
    EXPECT_GT(report.drift.statistic, 5.0);
    EXPECT_TRUE(report.increments.passed);
}

TEST(CheckHypotheses, DeclaredLipschitzBelowTruthFails)
{
    const auto plan = RunPlan::coupon_default(1000, 11, 2);
    const auto base = make_coupon_spec(10, plan.horizon());
    const ProcessSpec tight(base.coord_count(), base.drift(), 1.0, 1.0, base.domain(), 0.05);
    const auto report = check_hypotheses(tight, plan, 2);
    EXPECT_FALSE(report.lipschitz.passed);
}

TEST(CheckHypotheses, DimensionMustMatchPlan)
{
    const auto plan = RunPlan::coupon_default(100, 1);
    EXPECT_THROW(check_hypotheses(make_coupon_spec(4, 5.0), plan, 2), contract_violation);
}
