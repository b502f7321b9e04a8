#pragma once

// The coupon-collecting process: n coupon types, one uniformly random draw
// per step. Y_t^i is the number of types held in exactly i copies; types
// with more than l copies share an overflow bucket l+1 so the tracked
// system conserves mass.

#include <wormald/errors.hpp>
#include <wormald/process.hpp>
#include <wormald/rng.hpp>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wormald {

inline constexpr std::size_t default_truncation = 10;

/// Hard cap on the number of draws in cover_time.
inline constexpr std::uint64_t cover_time_step_cap = 1'000'000'000ULL;

/// Full state of one coupon-collecting run.
class CouponState {
public:
    /// Fresh state: nothing drawn yet, all n types in bucket 0.
    CouponState(std::size_t n, std::size_t truncation = default_truncation)
        : per_type_(n, 0), buckets_(truncation + 2, 0), truncation_(truncation)
    {
        if (n == 0)
            throw contract_violation("CouponState: n must be positive");
        if (truncation == 0)
            throw contract_violation("CouponState: truncation level must be at least 1");
        buckets_[0] = static_cast<std::int64_t>(n);
    }

    /// State holding the given copies per type. The history is unknown, so
    /// cover_time() stays unset even if every type is already held.
    static CouponState from_per_type_counts(std::vector<std::uint32_t> counts,
                                            std::size_t truncation = default_truncation)
    {
        CouponState state(counts.size(), truncation);
        state.buckets_.assign(truncation + 2, 0);
        for (auto c : counts) {
            ++state.buckets_[state.bucket_of(c)];
            state.t_ += c;
        }
        state.per_type_ = std::move(counts);
        return state;
    }

    std::size_t n() const noexcept { return per_type_.size(); }
    std::uint64_t t() const noexcept { return t_; }
    std::size_t truncation() const noexcept { return truncation_; }
    std::span<const std::uint32_t> per_type_counts() const noexcept { return per_type_; }
    /// Entry i <= l: types with exactly i copies; entry l+1: more than l.
    std::span<const std::int64_t> counts_of_counts() const noexcept { return buckets_; }
    std::optional<std::uint64_t> cover_time() const noexcept { return cover_time_; }
    bool covered() const noexcept { return buckets_[0] == 0; }

    std::size_t bucket_of(std::uint64_t copies) const noexcept
    {
        return copies > truncation_ ? truncation_ + 1 : static_cast<std::size_t>(copies);
    }

    /// Buckets (from, to) that drawing type `draw` would move one unit
    /// between. from == to only inside the overflow bucket.
    std::pair<std::size_t, std::size_t> transition(std::uint64_t draw) const
    {
        check_draw(draw);
        const std::uint64_t copies = per_type_[draw];
        return {bucket_of(copies), bucket_of(copies + 1)};
    }

    /// Applies one draw in O(1).
    void step(std::uint64_t draw)
    {
        const auto [from, to] = transition(draw);
        ++per_type_[draw];
        --buckets_[from];
        ++buckets_[to];
        ++t_;
        if (!cover_time_ && buckets_[0] == 0)
            cover_time_ = t_;
    }

    /// Bucket counts recomputed from per-type counts; used to audit the
    /// incremental bookkeeping.
    std::vector<std::int64_t> recount_buckets() const
    {
        std::vector<std::int64_t> fresh(truncation_ + 2, 0);
        for (auto c : per_type_)
            ++fresh[bucket_of(c)];
        return fresh;
    }

    /// Y / n.
    std::vector<double> scaled() const
    {
        std::vector<double> z(buckets_.size());
        scaled_into(z);
        return z;
    }

    void scaled_into(std::span<double> z) const
    {
        const auto nd = static_cast<double>(n());
        for (std::size_t i = 0; i < buckets_.size(); ++i)
            z[i] = static_cast<double>(buckets_[i]) / nd;
    }

private:
    void check_draw(std::uint64_t draw) const
    {
        if (draw >= per_type_.size())
            throw contract_violation("coupon_step: draw " + std::to_string(draw) +
                                     " outside [0, " + std::to_string(per_type_.size()) + ")");
    }

    std::vector<std::uint32_t> per_type_;
    std::vector<std::int64_t> buckets_;
    std::size_t truncation_;
    std::uint64_t t_ = 0;
    std::optional<std::uint64_t> cover_time_;
};

/// Value-semantics form of CouponState::step.
inline CouponState coupon_step(CouponState state, std::uint64_t draw)
{
    state.step(draw);
    return state;
}

/// Drift of the truncated coupon system, coordinates 0..l+1:
///   f_0 = -z_0,  f_i = z_{i-1} - z_i (1 <= i <= l),  f_{l+1} = z_l.
/// The entries telescope to zero.
inline void coupon_drift(std::size_t truncation, std::span<const double> z, std::span<double> out)
{
    out[0] = -z[0];
    for (std::size_t i = 1; i <= truncation; ++i)
        out[i] = z[i - 1] - z[i];
    out[truncation + 1] = z[truncation];
}

/// Domain box used for coupon runs up to scaled time s_max.
inline DomainBox coupon_domain(std::size_t truncation, double s_max)
{
    return DomainBox::uniform(-0.1, s_max + 0.1, truncation + 2, -0.1, 1.1);
}

/// ProcessSpec of the coupon process truncated at level l. The Lipschitz
/// hint is 1: |f_i(u) - f_i(v)| <= |u_{i-1} - v_{i-1}| + |u_i - v_i|.
inline ProcessSpec make_coupon_spec(std::size_t truncation = default_truncation,
                                    double s_max = 10.0)
{
    if (truncation < 1)
        throw contract_violation("make_coupon_spec: truncation level must be at least 1");
    if (!(s_max > 0.0) || !std::isfinite(s_max))
        throw contract_violation("make_coupon_spec: s_max must be positive");
    DriftFunction drift = [truncation](double, std::span<const double> z, std::span<double> out) {
        coupon_drift(truncation, z, out);
    };
    return ProcessSpec(truncation + 2, std::move(drift), 1.0, 1.0,
                       coupon_domain(truncation, s_max), 1.0);
}

/// z(0) = (1, 0, ..., 0): every type starts with zero copies.
inline std::vector<double> coupon_initial_state(std::size_t truncation = default_truncation)
{
    std::vector<double> z(truncation + 2, 0.0);
    z[0] = 1.0;
    return z;
}

/// Exact solution of the untruncated system, z_i(s) = s^i e^{-s} / i!
/// (the Poisson(s) mass at i), evaluated in the log domain.
inline double closed_form(double s, std::size_t i)
{
    if (!(s >= 0.0))
        throw contract_violation("closed_form: s must be non-negative");
    if (s == 0.0)
        return i == 0 ? 1.0 : 0.0;
    const auto di = static_cast<double>(i);
    return std::exp(di * std::log(s) - s - std::lgamma(di + 1.0));
}

/// Draws until every type is held and returns the cover time T.
inline std::uint64_t cover_time(std::size_t n, std::uint64_t seed)
{
    if (n == 0)
        throw contract_violation("cover_time: n must be positive");
    Xoshiro256ss rng(seed);
    // Truncation 1 is enough: only bucket 0 matters for T.
    CouponState state(n, 1);
    while (!state.covered()) {
        if (state.t() >= cover_time_step_cap)
            throw cap_exceeded_error("cover_time: exceeded " +
                                     std::to_string(cover_time_step_cap) + " draws");
        state.step(uniform_below(rng, n));
    }
    return *state.cover_time();
}

/// P(T > k) by inclusion-exclusion,
///   sum_{j=1..n} (-1)^{j+1} C(n, j) (1 - j/n)^k,
/// with terms formed in the log domain and summed with Neumaier
/// compensation. The series stops once terms past their peak fall below
/// 1e-30 of the largest term. Throws precision_loss_error when cancellation
/// leaves a result no larger than its rounding-error bound.
inline double exact_cover_tail(std::size_t n, std::uint64_t k)
{
    if (n == 0)
        throw contract_violation("exact_cover_tail: n must be positive");
    // Fewer than n draws cannot cover n types.
    if (k < n)
        return 1.0;

    const auto nd = static_cast<double>(n);
    const auto kd = static_cast<double>(k);
    const double eps = std::numeric_limits<double>::epsilon();
    const double log_n_fact = std::lgamma(nd + 1.0);

    double sum = 0.0;
    double compensation = 0.0;
    double abs_sum = 0.0;
    double error_bound = 0.0;
    double largest = 0.0;
    double previous = 0.0;

    // j = n contributes 0^k = 0 because k >= n >= 1.
    for (std::size_t j = 1; j < n; ++j) {
        const auto jd = static_cast<double>(j);
        const double log_binom = log_n_fact - std::lgamma(jd + 1.0) - std::lgamma(nd - jd + 1.0);
        const double log_pow = kd * std::log1p(-jd / nd);
        const double log_term = log_binom + log_pow;
        const double magnitude = std::exp(log_term);
        const double term = (j % 2 == 1) ? magnitude : -magnitude;

        const double next = sum + term;
        if (std::abs(sum) >= std::abs(term))
            compensation += (sum - next) + term;
        else
            compensation += (term - next) + sum;
        sum = next;

        abs_sum += magnitude;
        // exp() of a log computed with absolute error ~eps*(|pieces|).
        const double log_scale = log_n_fact + std::abs(log_pow) + std::abs(log_term) + 8.0;
        error_bound += magnitude * eps * log_scale;

        largest = std::max(largest, magnitude);
        if (magnitude < previous && magnitude < 1e-30 * largest)
            break;
        previous = magnitude;
    }
    const double result = sum + compensation;
    if (abs_sum == 0.0)
        return 0.0;
    error_bound += 4.0 * eps * abs_sum;
    if (!(std::abs(result) > error_bound))
        throw precision_loss_error("exact_cover_tail: cancellation at n = " + std::to_string(n) +
                                   ", k = " + std::to_string(k) + " leaves no significant digits");
    return std::min(1.0, std::max(0.0, result));
}

} // namespace wormald
