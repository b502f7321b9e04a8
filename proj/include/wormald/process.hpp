#pragma once

// Process abstraction for the differential-equation method: a family of
// discrete processes described by its drift functions f_l(s, z), increment
// bound, magnitude bound and an open domain on which the drift is Lipschitz.

#include <wormald/errors.hpp>
#include <wormald/rng.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace wormald {

/// Drift callback: writes f(s, z) into `out`. Both spans have the process's
/// coordinate count. Must be pure.
using DriftFunction =
    std::function<void(double s, std::span<const double> z, std::span<double> out)>;

/// Open axis-aligned box (s_low, s_high) x prod_l (z_low[l], z_high[l]).
struct DomainBox {
    double s_low = 0.0;
    double s_high = 0.0;
    std::vector<double> z_low;
    std::vector<double> z_high;

    /// Uniform box with the same z interval on every coordinate.
    static DomainBox uniform(double s_low, double s_high, std::size_t coord_count,
                             double z_low, double z_high)
    {
        return DomainBox{s_low, s_high, std::vector<double>(coord_count, z_low),
                         std::vector<double>(coord_count, z_high)};
    }

    std::size_t dimension() const noexcept { return z_low.size(); }

    /// Strict containment; the boundary is excluded.
    bool contains(double s, std::span<const double> z) const
    {
        if (z.size() != dimension())
            throw contract_violation("DomainBox::contains: expected " +
                                     std::to_string(dimension()) + " coordinates, got " +
                                     std::to_string(z.size()));
        if (!(s_low < s && s < s_high))
            return false;
        for (std::size_t l = 0; l < z.size(); ++l)
            if (!(z_low[l] < z[l] && z[l] < z_high[l]))
                return false;
        return true;
    }

    void validate() const
    {
        if (!(s_low < s_high))
            throw contract_violation("DomainBox: s_low must be below s_high");
        if (z_low.size() != z_high.size())
            throw contract_violation("DomainBox: z_low and z_high differ in length");
        for (std::size_t l = 0; l < z_low.size(); ++l)
            if (!(z_low[l] < z_high[l]))
                throw contract_violation("DomainBox: empty interval on coordinate " +
                                         std::to_string(l));
    }
};

/// Everything the differential-equation method needs to know about a
/// process family. Immutable once constructed.
class ProcessSpec {
public:
    ProcessSpec(std::size_t coord_count, DriftFunction drift, double increment_bound,
                double magnitude_bound, DomainBox domain,
                std::optional<double> lipschitz_hint = std::nullopt)
        : coord_count_(coord_count),
          drift_(std::move(drift)),
          increment_bound_(increment_bound),
          magnitude_bound_(magnitude_bound),
          domain_(std::move(domain)),
          lipschitz_hint_(lipschitz_hint)
    {
        if (coord_count_ == 0)
            throw contract_violation("ProcessSpec: coordinate count must be positive");
        if (!drift_)
            throw contract_violation("ProcessSpec: drift function is empty");
        if (!(increment_bound_ > 0.0))
            throw contract_violation("ProcessSpec: increment bound must be positive");
        if (!(magnitude_bound_ > 0.0))
            throw contract_violation("ProcessSpec: magnitude bound must be positive");
        domain_.validate();
        if (domain_.dimension() != coord_count_)
            throw contract_violation("ProcessSpec: domain dimension differs from coordinate count");
        if (lipschitz_hint_ && !(*lipschitz_hint_ >= 0.0))
            throw contract_violation("ProcessSpec: Lipschitz hint must be non-negative");
    }

    std::size_t coord_count() const noexcept { return coord_count_; }
    const DriftFunction& drift() const noexcept { return drift_; }
    double increment_bound() const noexcept { return increment_bound_; }
    double magnitude_bound() const noexcept { return magnitude_bound_; }
    const DomainBox& domain() const noexcept { return domain_; }
    std::optional<double> lipschitz_hint() const noexcept { return lipschitz_hint_; }

    /// Copy with a different drift; everything else unchanged.
    ProcessSpec with_drift(DriftFunction drift) const
    {
        return ProcessSpec(coord_count_, std::move(drift), increment_bound_, magnitude_bound_,
                           domain_, lipschitz_hint_);
    }

    ProcessSpec with_increment_bound(double bound) const
    {
        return ProcessSpec(coord_count_, drift_, bound, magnitude_bound_, domain_,
                           lipschitz_hint_);
    }

private:
    std::size_t coord_count_;
    DriftFunction drift_;
    double increment_bound_;
    double magnitude_bound_;
    DomainBox domain_;
    std::optional<double> lipschitz_hint_;
};

/// (t/n, Y_t/n).
struct ScaledPoint {
    double s = 0.0;
    std::vector<double> z;

    friend bool operator==(const ScaledPoint&, const ScaledPoint&) = default;
};

/// Scaled trajectory on a grid of strictly increasing s. `sigma_exit` holds
/// the first grid time at which the trajectory was outside the domain; that
/// point is the last one stored.
struct Trajectory {
    std::vector<ScaledPoint> points;
    std::optional<double> sigma_exit;

    std::size_t dimension() const noexcept
    {
        return points.empty() ? 0 : points.front().z.size();
    }

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

namespace detail {

inline void require_dimension(const ProcessSpec& spec, std::size_t got, const char* where)
{
    if (got != spec.coord_count())
        throw contract_violation(std::string(where) + ": expected " +
                                 std::to_string(spec.coord_count()) + " coordinates, got " +
                                 std::to_string(got));
}

} // namespace detail

inline bool in_domain(const ProcessSpec& spec, double s, std::span<const double> z)
{
    detail::require_dimension(spec, z.size(), "in_domain");
    return spec.domain().contains(s, z);
}

/// Writes f(s, z) into `out` without allocating. Throws
/// drift_evaluation_error if the result is non-finite at a point inside the
/// domain.
inline void evaluate_drift_into(const ProcessSpec& spec, double s, std::span<const double> z,
                                std::span<double> out)
{
    detail::require_dimension(spec, z.size(), "evaluate_drift");
    detail::require_dimension(spec, out.size(), "evaluate_drift");
    spec.drift()(s, z, out);
    const bool finite = std::all_of(out.begin(), out.end(),
                                    [](double v) { return std::isfinite(v); });
    if (!finite && spec.domain().contains(s, z))
        throw drift_evaluation_error("drift is not finite at s = " + std::to_string(s) +
                                     " inside the domain");
}

inline std::vector<double> evaluate_drift(const ProcessSpec& spec, double s,
                                          std::span<const double> z)
{
    std::vector<double> out(spec.coord_count());
    evaluate_drift_into(spec, s, z, out);
    return out;
}

/// Empirical Lipschitz constant of the drift on the domain box.
///
/// Draws `sample_count` pairs (u, v) uniformly from the box and returns the
/// largest |f_l(u) - f_l(v)| / ||u - v||_1, where the L1 norm runs over the
/// joint (s, z) point. Pairs at zero distance are skipped. The pairs come
/// from a single xoshiro256** stream, so a longer run with the same seed
/// extends a shorter one and the estimate can only grow.
inline double estimate_lipschitz(const ProcessSpec& spec, std::size_t sample_count,
                                 std::uint64_t seed)
{
    if (sample_count < 2)
        throw contract_violation("estimate_lipschitz: sample count must be at least 2");

    const auto& box = spec.domain();
    const std::size_t dim = spec.coord_count();
    Xoshiro256ss rng(seed);

    std::vector<double> u(dim), v(dim), fu(dim), fv(dim);
    auto draw = [&](std::vector<double>& z) {
        const double s = box.s_low + uniform_open01(rng) * (box.s_high - box.s_low);
        for (std::size_t l = 0; l < dim; ++l)
            z[l] = box.z_low[l] + uniform_open01(rng) * (box.z_high[l] - box.z_low[l]);
        return s;
    };

    double best = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < sample_count; ++k) {
        const double su = draw(u);
        const double sv = draw(v);
        double dist = std::abs(su - sv);
        for (std::size_t l = 0; l < dim; ++l)
            dist += std::abs(u[l] - v[l]);
        if (!(dist > 0.0))
            continue;
        ++used;
        evaluate_drift_into(spec, su, u, fu);
        evaluate_drift_into(spec, sv, v, fv);
        for (std::size_t l = 0; l < dim; ++l)
            best = std::max(best, std::abs(fu[l] - fv[l]) / dist);
    }
    if (used == 0)
        throw estimation_error("estimate_lipschitz: every sampled pair was degenerate");
    return best;
}

} // namespace wormald
