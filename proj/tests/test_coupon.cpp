#include <wormald/coupon.hpp>
#include <wormald/rng.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <vector>

using namespace wormald;

namespace {

// P(T > k) by enumerating all n^k draw sequences.
double brute_force_tail(std::size_t n, std::size_t k)
{
    std::size_t total = 1;
    for (std::size_t i = 0; i < k; ++i)
        total *= n;
    std::size_t not_covered = 0;
    std::vector<std::size_t> draws(k, 0);
    for (std::size_t code = 0; code < total; ++code) {
        std::size_t c = code;
        std::vector<bool> seen(n, false);
        for (std::size_t i = 0; i < k; ++i) {
            seen[c % n] = true;
            c /= n;
        }
        if (std::find(seen.begin(), seen.end(), false) != seen.end())
            ++not_covered;
    }
    return static_cast<double>(not_covered) / static_cast<double>(total);
}

} // namespace

TEST(MakeCouponSpec, DriftExamples)
{
    const auto spec = make_coupon_spec(2, 3.0);
    EXPECT_EQ(spec.coord_count(), 4u);
    EXPECT_EQ(evaluate_drift(spec, 0.0, std::vector<double>{1, 0, 0, 0}),
              (std::vector<double>{-1, 1, 0, 0}));
    EXPECT_EQ(evaluate_drift(spec, 1.0, std::vector<double>{0, 0, 1, 0}),
              (std::vector<double>{0, 0, -1, 1}));
}

TEST(MakeCouponSpec, Constants)
{
    const auto spec = make_coupon_spec(10, 4.0);
    EXPECT_EQ(spec.coord_count(), 12u);
    EXPECT_EQ(spec.increment_bound(), 1.0);
    EXPECT_EQ(spec.magnitude_bound(), 1.0);
    EXPECT_EQ(spec.lipschitz_hint(), 1.0);
    EXPECT_DOUBLE_EQ(spec.domain().s_low, -0.1);
    EXPECT_DOUBLE_EQ(spec.domain().s_high, 4.1);
    EXPECT_DOUBLE_EQ(spec.domain().z_low[11], -0.1);
    EXPECT_DOUBLE_EQ(spec.domain().z_high[0], 1.1);
    EXPECT_THROW(make_coupon_spec(0, 4.0), contract_violation);
    EXPECT_THROW(make_coupon_spec(3, 0.0), contract_violation);
}

TEST(MakeCouponSpec, DriftEntriesSumToZero)
{
    Xoshiro256ss rng(12);
    for (std::size_t l : {1, 2, 7, 10, 25}) {
        const auto spec = make_coupon_spec(l, 5.0);
        std::vector<double> z(l + 2);
        for (int trial = 0; trial < 200; ++trial) {
            for (auto& v : z)
                v = uniform_open01(rng);
            const auto f = evaluate_drift(spec, 1.0, z);
            ASSERT_NEAR(std::accumulate(f.begin(), f.end(), 0.0), 0.0, 1e-14);
        }
    }
}

TEST(ClosedForm, InitialConditionsAndValues)
{
    EXPECT_EQ(closed_form(0.0, 0), 1.0);
    EXPECT_EQ(closed_form(0.0, 3), 0.0);
    EXPECT_NEAR(closed_form(1.0, 1), 0.36787944117144233, 1e-15);
    EXPECT_NEAR(closed_form(1.0, 2), 0.18393972058572117, 1e-15);
    EXPECT_THROW(closed_form(-1.0, 0), contract_violation);
}

TEST(ClosedForm, StableForLargeIndex)
{
    // Poisson(100) mass at 100 is about 0.03986; naive s^i/i! overflows.
    const double v = closed_form(100.0, 100);
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(v, 0.039860996809147135, 1e-12);
}

// Central differences against dz_i/ds = z_{i-1} - z_i, independent of RK4.
TEST(ClosedForm, SolvesTheCouponSystem)
{
    const double delta = 1e-5;
    for (std::size_t i = 0; i <= 20; ++i) {
        for (double s = 0.05; s <= 10.0; s += 0.05) {
            const double derivative =
                (closed_form(s + delta, i) - closed_form(s - delta, i)) / (2.0 * delta);
            const double previous = i == 0 ? 0.0 : closed_form(s, i - 1);
            ASSERT_NEAR(derivative, previous - closed_form(s, i), 1e-8) << "i=" << i << " s=" << s;
        }
    }
}

TEST(CouponStep, SingleType)
{
    CouponState state(1, 3);
    state = coupon_step(state, 0);
    EXPECT_EQ(std::vector<std::int64_t>(state.counts_of_counts().begin(), state.counts_of_counts().end()),
              (std::vector<std::int64_t>{0, 1, 0, 0, 0}));
    ASSERT_TRUE(state.cover_time());
    EXPECT_EQ(*state.cover_time(), 1u);
}

TEST(CouponStep, RepeatedDrawOfOneType)
{
    CouponState state(4, 3);
    state.step(0);
    state.step(0);
    EXPECT_EQ(std::vector<std::int64_t>(state.counts_of_counts().begin(), state.counts_of_counts().end()),
              (std::vector<std::int64_t>{3, 0, 1, 0, 0}));
    EXPECT_EQ(state.t(), 2u);
    EXPECT_FALSE(state.cover_time());
}

TEST(CouponStep, OverflowBucketAbsorbsHighCounts)
{
    CouponState state(2, 1);
    for (int i = 0; i < 5; ++i)
        state.step(1);
    EXPECT_EQ(std::vector<std::int64_t>(state.counts_of_counts().begin(), state.counts_of_counts().end()),
              (std::vector<std::int64_t>{1, 0, 1}));
    EXPECT_EQ(state.transition(1), (std::pair<std::size_t, std::size_t>{2, 2}));
}

TEST(CouponStep, DrawOutOfRange)
{
    CouponState state(4);
    EXPECT_THROW(state.step(4), contract_violation);
    EXPECT_THROW(coupon_step(state, 100), contract_violation);
}

// Exact one-step expectation by enumerating the n equally likely draws.
TEST(CouponStep, ExpectedChangeMatchesDrift)
{
    const auto state = CouponState::from_per_type_counts({0, 0, 1, 1}, 3);
    EXPECT_EQ(state.counts_of_counts()[0], 2);
    EXPECT_EQ(state.counts_of_counts()[1], 2);
    std::vector<double> expected(5, 0.0);
    for (std::uint64_t d = 0; d < state.n(); ++d) {
        const auto [from, to] = state.transition(d);
        expected[from] -= 0.25;
        expected[to] += 0.25;
    }
    EXPECT_DOUBLE_EQ(expected[1], 0.0);
    EXPECT_DOUBLE_EQ(expected[2], 0.5);
    std::vector<double> drift(5);
    coupon_drift(3, state.scaled(), drift);
    for (std::size_t i = 0; i < 5; ++i)
        EXPECT_DOUBLE_EQ(expected[i], drift[i]) << i;
}

TEST(CouponState, InvariantsHoldAlongARun)
{
    const std::size_t n = 500;
    CouponState state(n, 4);
    Xoshiro256ss rng(2718);
    std::int64_t previous_empty = static_cast<std::int64_t>(n);
    for (int step = 0; step < 10'000; ++step) {
        const std::vector<std::int64_t> before(state.counts_of_counts().begin(),
                                               state.counts_of_counts().end());
        state.step(uniform_below(rng, n));
        const auto buckets = state.counts_of_counts();
        ASSERT_EQ(std::accumulate(buckets.begin(), buckets.end(), std::int64_t{0}),
                  static_cast<std::int64_t>(n));
        const auto per_type = state.per_type_counts();
        ASSERT_EQ(std::accumulate(per_type.begin(), per_type.end(), std::uint64_t{0}), state.t());
        ASSERT_EQ(state.recount_buckets(),
                  std::vector<std::int64_t>(buckets.begin(), buckets.end()));
        for (std::size_t l = 0; l < buckets.size(); ++l)
            ASSERT_LE(std::abs(buckets[l] - before[l]), 1);
        ASSERT_LE(buckets[0], previous_empty);
        previous_empty = buckets[0];
        if (state.cover_time())
            ASSERT_EQ(buckets[0], 0);
        else
            ASSERT_GT(buckets[0], 0);
    }
    ASSERT_TRUE(state.cover_time());
}

TEST(CoverTime, SingleTypeCoversImmediately)
{
    for (std::uint64_t seed = 0; seed < 50; ++seed)
        ASSERT_EQ(cover_time(1, seed), 1u);
}

TEST(CoverTime, MatchesItsOwnStateMachine)
{
    const std::size_t n = 50;
    const std::uint64_t seed = 9;
    Xoshiro256ss rng(seed);
    CouponState state(n, 1);
    while (!state.covered())
        state.step(uniform_below(rng, n));
    EXPECT_EQ(cover_time(n, seed), *state.cover_time());
    EXPECT_EQ(cover_time(n, seed), cover_time(n, seed));
}

TEST(CoverTime, RejectsZeroTypes)
{
    EXPECT_THROW(cover_time(0, 1), contract_violation);
}

TEST(ExactCoverTail, Examples)
{
    EXPECT_EQ(exact_cover_tail(1, 0), 1.0);
    EXPECT_NEAR(exact_cover_tail(2, 2), 0.5, 1e-15);
    EXPECT_NEAR(exact_cover_tail(3, 3), 21.0 / 27.0, 1e-15);
    EXPECT_EQ(exact_cover_tail(1, 5), 0.0);
    EXPECT_EQ(exact_cover_tail(10, 9), 1.0);
}

TEST(ExactCoverTail, AgreesWithEnumeration)
{
    for (std::size_t n = 1; n <= 4; ++n)
        for (std::size_t k = 0; k <= 8; ++k)
            ASSERT_NEAR(exact_cover_tail(n, k), brute_force_tail(n, k), 1e-13)
                << "n=" << n << " k=" << k;
}

TEST(ExactCoverTail, AgreesWithMonteCarlo)
{
    const std::size_t n = 10;
    const std::uint64_t k = 40;
    const std::size_t trials = 100'000;
    std::size_t above = 0;
    for (std::size_t i = 0; i < trials; ++i)
        above += cover_time(n, derive_seed(555, i)) > k;
    const double p = static_cast<double>(above) / trials;
    const double exact = exact_cover_tail(n, k);
    const double se = std::sqrt(exact * (1.0 - exact) / trials);
    EXPECT_LE(std::abs(p - exact), 4.0 * se);
}

TEST(ExactCoverTail, NonIncreasingInK)
{
    double previous = 1.0;
    for (std::uint64_t k = 5000; k <= 12'000; k += 250) {
        const double p = exact_cover_tail(1000, k);
        ASSERT_LE(p, previous + 1e-15);
        previous = p;
    }
}

TEST(ExactCoverTail, CancellationIsDetected)
{
    // n e^{-k/n} is about 223 here, so the alternating terms reach ~e^{223}.
    EXPECT_THROW(exact_cover_tail(1000, 1500), precision_loss_error);
}
