#pragma once

// Byte-stable CSV output: reals with 17 significant digits, ',' separators,
// '\n' line endings, no locale.

#include <wormald/analysis.hpp>
#include <wormald/errors.hpp>
#include <wormald/monte_carlo.hpp>
#include <wormald/process.hpp>

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <span>
#include <string>
#include <system_error>

namespace wormald::io {

/// %.17g without locale dependence.
inline std::string format_real(double value)
{
    char buffer[64];
    const auto [end, ec] =
        std::to_chars(buffer, buffer + sizeof buffer, value, std::chars_format::general, 17);
    if (ec != std::errc{})
        throw error("format_real: conversion failed");
    return std::string(buffer, end);
}

template <class Int>
std::string format_int(Int value)
{
    char buffer[32];
    const auto [end, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
    if (ec != std::errc{})
        throw error("format_int: conversion failed");
    return std::string(buffer, end);
}

/// Header `s,z0,...,z{a-1}` then one row per grid point.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj)
{
    out << 's';
    for (std::size_t l = 0; l < traj.dimension(); ++l)
        out << ",z" << l;
    out << '\n';
    for (const auto& p : traj.points) {
        out << format_real(p.s);
        for (double z : p.z)
            out << ',' << format_real(z);
        out << '\n';
    }
}

/// Header `run,sup_dev,argmax_s,z0_dev,...`.
inline void write_deviation_csv(std::ostream& out, std::span<const DeviationReport> reports)
{
    out << "run,sup_dev,argmax_s";
    const std::size_t dim = reports.empty() ? 0 : reports.front().per_coordinate.size();
    for (std::size_t l = 0; l < dim; ++l)
        out << ",z" << l << "_dev";
    out << '\n';
    for (const auto& r : reports) {
        out << format_int(r.run_index) << ',' << format_real(r.sup_deviation) << ','
            << format_real(r.argmax_s);
        for (double d : r.per_coordinate)
            out << ',' << format_real(d);
        out << '\n';
    }
}

/// Header `n,runs,mean_sup_dev,stderr`.
inline void write_scaling_csv(std::ostream& out, const ScalingReport& report)
{
    out << "n,runs,mean_sup_dev,stderr\n";
    for (const auto& row : report.rows)
        out << format_int(row.n) << ',' << format_int(row.runs) << ','
            << format_real(row.mean_sup_deviation) << ',' << format_real(row.standard_error)
            << '\n';
}

/// Header `c,empirical,stderr,ref_paper,ref_classical,exact`; `exact` is
/// empty when not computed.
inline void write_gumbel_csv(std::ostream& out, const GumbelReport& report)
{
    out << "c,empirical,stderr,ref_paper,ref_classical,exact\n";
    for (const auto& row : report.rows) {
        out << format_real(row.c) << ',' << format_real(row.empirical) << ','
            << format_real(row.standard_error) << ',' << format_real(row.reference_paper) << ','
            << format_real(row.reference_classical) << ',';
        if (row.exact)
            out << format_real(*row.exact);
        out << '\n';
    }
}

/// Header `condition,passed,statistic,threshold,evidence`.
inline void write_hypotheses_csv(std::ostream& out, const HypothesisReport& report)
{
    out << "condition,passed,statistic,threshold,evidence\n";
    for (const ConditionCheck* c : {&report.increments, &report.drift, &report.lipschitz}) {
        std::string evidence = c->evidence;
        for (auto& ch : evidence)
            if (ch == '"')
                ch = '\'';
        out << c->name << ',' << (c->passed ? 1 : 0) << ',' << format_real(c->statistic) << ','
            << format_real(c->threshold) << ",\"" << evidence << "\"\n";
    }
}

/// Opens `path` for binary writing, so '\n' is never translated.
inline std::ofstream open_output(const std::filesystem::path& path)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw error("cannot open " + path.string() + " for writing");
    return out;
}

} // namespace wormald::io
