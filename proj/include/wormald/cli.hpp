#pragma once

// Batch front-end: `wormald <solve|simulate|compare|scaling|gumbel|check>`.
//
// Every subcommand writes its CSV files plus manifest.json into the output
// directory (--out, else $WORMALD_OUTPUT_DIR, else the working directory).
// Flags may also come from a JSON object passed with --config; keys are the
// long flag names without dashes, and command-line flags win.
//
// Exit codes: 0 success, 1 hypothesis check failed or I/O failure,
// 2 invalid configuration, 3 numerical failure.

#include <wormald/analysis.hpp>
#include <wormald/coupon.hpp>
#include <wormald/errors.hpp>
#include <wormald/monte_carlo.hpp>
#include <wormald/ode.hpp>
#include <wormald/report_io.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace wormald::cli {

inline constexpr std::string_view version = "1.0.0";
inline constexpr const char* output_dir_env = "WORMALD_OUTPUT_DIR";

enum exit_code : int {
    exit_ok = 0,
    exit_failed = 1,
    exit_invalid_config = 2,
    exit_numerical = 3,
};

/// Parameters of one CLI invocation. Signed integers so that negative input
/// is caught by validation rather than wrapped.
struct ExperimentConfig {
    std::string subcommand;
    std::int64_t n = 1000;
    std::optional<std::int64_t> runs;
    std::uint64_t seed = 1;
    std::int64_t l = static_cast<std::int64_t>(default_truncation);
    std::optional<double> s_max;
    double h = 1e-3;
    std::int64_t grid_stride = 0;
    std::string cs = "-1,0,1,2";
    std::int64_t trials = 10'000;
    std::string ns = "1000,10000,100000";
    std::int64_t state_samples = 50;
    std::int64_t drift_samples = 10'000;
    std::int64_t lipschitz_samples = 100'000;
    std::string out;
    std::string config_file;
};

namespace detail {

using json = nlohmann::ordered_json;

struct invalid_config : contract_violation {
    using contract_violation::contract_violation;
};

inline std::vector<double> parse_real_list(const std::string& text, const char* what)
{
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(',', start);
        if (end == std::string::npos)
            end = text.size();
        std::string_view item(text.data() + start, end - start);
        while (!item.empty() && item.front() == ' ')
            item.remove_prefix(1);
        while (!item.empty() && item.back() == ' ')
            item.remove_suffix(1);
        if (!item.empty() && item.front() == '+')
            item.remove_prefix(1);
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), value);
        if (item.empty() || ec != std::errc{} || ptr != item.data() + item.size() ||
            !std::isfinite(value))
            throw invalid_config(std::string("--") + what + ": cannot parse '" +
                                 std::string(item) + "' as a number");
        values.push_back(value);
        start = end + 1;
    }
    return values;
}

inline std::vector<std::size_t> parse_count_list(const std::string& text, const char* what)
{
    std::vector<std::size_t> counts;
    for (double v : parse_real_list(text, what)) {
        if (v < 1.0 || v != std::floor(v) || v > 1e15)
            throw invalid_config(std::string("--") + what + ": '" + io::format_real(v) +
                                 "' is not a positive integer");
        counts.push_back(static_cast<std::size_t>(v));
    }
    return counts;
}

/// Flag registry for one subcommand: CLI option plus a JSON setter.
struct Field {
    CLI::Option* option = nullptr;
    std::function<void(const json&)> from_json;
};
using Registry = std::map<std::string, Field>;

template <class T>
void bind_flag(CLI::App& app, Registry& registry, const std::string& name, T& target,
          const std::string& help)
{
    auto* option = app.add_option("--" + name, target, help);
    registry[name] = {option, [&target](const json& value) { target = value.get<T>(); }};
}

inline void bind_optional_real(CLI::App& app, Registry& registry, const std::string& name,
                               std::optional<double>& target, const std::string& help)
{
    auto* option = app.add_option("--" + name, target, help);
    registry[name] = {option, [&target](const json& value) { target = value.get<double>(); }};
}

inline void bind_optional_int(CLI::App& app, Registry& registry, const std::string& name,
                              std::optional<std::int64_t>& target, const std::string& help)
{
    auto* option = app.add_option("--" + name, target, help);
    registry[name] = {option,
                      [&target](const json& value) { target = value.get<std::int64_t>(); }};
}

/// List flags accept "a,b,c" on the command line and either that string or
/// a JSON array in a config file.
inline void bind_list(CLI::App& app, Registry& registry, const std::string& name,
                      std::string& target, const std::string& help)
{
    auto* option = app.add_option("--" + name, target, help)->allow_extra_args(false);
    registry[name] = {option, [&target](const json& value) {
                          if (value.is_string()) {
                              target = value.get<std::string>();
                              return;
                          }
                          std::string joined;
                          for (const auto& item : value) {
                              if (!joined.empty())
                                  joined += ',';
                              joined += io::format_real(item.get<double>());
                          }
                          target = joined;
                      }};
}

inline void apply_config_file(const std::string& path, Registry& registry)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw invalid_config("cannot read config file " + path);
    json document;
    try {
        document = json::parse(in);
    } catch (const json::exception& e) {
        throw invalid_config("config file " + path + ": " + e.what());
    }
    if (!document.is_object())
        throw invalid_config("config file " + path + ": top level must be an object");
    for (const auto& [key, value] : document.items()) {
        const auto found = registry.find(key);
        if (found == registry.end() || key == "config")
            throw invalid_config("config file " + path + ": unknown key '" + key + "'");
        if (found->second.option->count() > 0)
            continue;
        try {
            found->second.from_json(value);
        } catch (const json::exception& e) {
            throw invalid_config("config file " + path + ": key '" + key + "': " + e.what());
        }
    }
}

inline void require(bool ok, const std::string& message)
{
    if (!ok)
        throw invalid_config(message);
}

inline std::size_t positive(std::int64_t value, const char* name)
{
    require(value >= 1, std::string("--") + name + " must be a positive integer");
    return static_cast<std::size_t>(value);
}

inline std::filesystem::path output_directory(const ExperimentConfig& config)
{
    if (!config.out.empty())
        return config.out;
    if (const char* env = std::getenv(output_dir_env); env && *env)
        return env;
    return ".";
}

/// Resolved numeric parameters shared by solve/simulate/compare.
struct GridParams {
    std::size_t n = 0;
    std::size_t truncation = 0;
    double s_max = 0.0;
    double h = 0.0;
    std::size_t grid_stride = 0;
};

inline GridParams grid_params(const ExperimentConfig& config)
{
    GridParams p;
    p.n = positive(config.n, "n");
    p.truncation = positive(config.l, "l");
    require(std::isfinite(config.h) && config.h > 0.0, "--h must be positive");
    p.h = config.h;
    // Default horizon: ln n, i.e. m = ceil(n ln n) draws.
    p.s_max = config.s_max ? *config.s_max
                           : static_cast<double>(default_horizon_steps(p.n)) /
                                 static_cast<double>(p.n);
    require(std::isfinite(p.s_max) && p.s_max > 0.0, "--s-max must be positive");
    require(config.grid_stride >= 0, "--grid-stride must be non-negative");
    p.grid_stride = config.grid_stride > 0 ? static_cast<std::size_t>(config.grid_stride)
                                           : default_grid_stride(p.s_max, p.h);
    return p;
}

inline CompareConfig compare_config(const GridParams& p, std::uint64_t seed, std::size_t runs)
{
    CompareConfig c;
    c.n = p.n;
    c.truncation = p.truncation;
    c.s_max = p.s_max;
    c.seed = seed;
    c.step_size = p.h;
    c.grid_stride = p.grid_stride;
    c.run_count = runs;
    return c;
}

class Session {
public:
    Session(const ExperimentConfig& config, std::ostream& log)
        : log_(log), dir_(output_directory(config))
    {
        manifest_["tool"] = "wormald";
        manifest_["version"] = std::string(version);
        manifest_["subcommand"] = config.subcommand;
        manifest_["config"] = json::object();
        manifest_["rng"] = {
            {"generator", "xoshiro256**"},
            {"seed_expansion", "splitmix64"},
            {"integer_draw", "lemire multiply-shift rejection"},
            {"run_seed", "mix64(master ^ 0x9e3779b97f4a7c15 * (index + 1))"},
        };
        manifest_["seeds"] = json::object();
        manifest_["outputs"] = json::array();
        manifest_["results"] = json::object();
    }

    json& config() { return manifest_["config"]; }
    json& seeds() { return manifest_["seeds"]; }
    json& results() { return manifest_["results"]; }

    template <class Writer>
    void write(const std::string& name, Writer&& writer)
    {
        std::filesystem::create_directories(dir_);
        auto out = io::open_output(dir_ / name);
        writer(out);
        if (!out)
            throw error("failed writing " + (dir_ / name).string());
        manifest_["outputs"].push_back(name);
    }

    void finish()
    {
        write("manifest.json", [&](std::ostream& out) { out << manifest_.dump(2) << '\n'; });
        log_ << "wrote " << manifest_["outputs"].size() << " files to " << dir_.string() << '\n';
    }

private:
    std::ostream& log_;
    std::filesystem::path dir_;
    json manifest_;
};

inline void echo_grid(Session& session, const GridParams& p)
{
    session.config()["n"] = p.n;
    session.config()["l"] = p.truncation;
    session.config()["s-max"] = p.s_max;
    session.config()["h"] = p.h;
    session.config()["grid-stride"] = p.grid_stride;
}

inline void record_exit(Session& session, const Trajectory& traj, const char* key)
{
    session.results()[std::string(key) + "_domain_exited"] = traj.sigma_exit.has_value();
    if (traj.sigma_exit)
        session.results()[std::string(key) + "_sigma_exit"] = *traj.sigma_exit;
}

inline int run_solve(const ExperimentConfig& config, std::ostream& log)
{
    const GridParams p = grid_params(config);
    const ProcessSpec spec = make_coupon_spec(p.truncation, p.s_max);
    const Trajectory ode =
        integrate(spec, coupon_initial_state(p.truncation), p.s_max, {p.h, p.grid_stride});

    Session session(config, log);
    echo_grid(session, p);
    session.write("ode.csv", [&](std::ostream& out) { io::write_trajectory_csv(out, ode); });
    session.results()["domain_exited"] = ode.sigma_exit.has_value();
    if (ode.sigma_exit)
        session.results()["sigma_exit"] = *ode.sigma_exit;
    session.results()["points"] = ode.points.size();
    session.finish();
    return exit_ok;
}

inline int run_simulate(const ExperimentConfig& config, std::ostream& log)
{
    const GridParams p = grid_params(config);
    const std::size_t runs = positive(config.runs.value_or(1), "runs");
    const RunPlan plan = compare_config(p, config.seed, runs).plan();
    const auto trajectories =
        map_indexed(runs, [&](std::size_t r) { return simulate(plan, r); });

    Session session(config, log);
    echo_grid(session, p);
    session.config()["runs"] = runs;
    session.config()["seed"] = config.seed;
    session.config()["horizon-steps"] = plan.horizon_steps;
    session.seeds()["master"] = config.seed;
    session.seeds()["runs"] = json::array();
    bool exited = false;
    for (std::size_t r = 0; r < runs; ++r) {
        session.seeds()["runs"].push_back(plan.run_seed(r));
        const std::string name =
            runs == 1 ? "trajectory.csv" : "trajectory_" + io::format_int(r) + ".csv";
        session.write(name,
                      [&](std::ostream& out) { io::write_trajectory_csv(out, trajectories[r]); });
        exited = exited || trajectories[r].sigma_exit.has_value();
    }
    session.results()["domain_exited"] = exited;
    session.finish();
    return exit_ok;
}

inline int run_compare(const ExperimentConfig& config, std::ostream& log)
{
    const GridParams p = grid_params(config);
    const std::size_t runs = positive(config.runs.value_or(1), "runs");
    const CompareConfig base = compare_config(p, config.seed, runs);
    const RunPlan plan = base.plan();
    const Trajectory ode = coupon_reference(plan, base.integrator());
    const auto simulated = map_indexed(runs, [&](std::size_t r) { return simulate(plan, r); });
    std::vector<DeviationReport> deviations;
    for (std::size_t r = 0; r < runs; ++r)
        deviations.push_back(sup_deviation(simulated[r], ode, r));

    Session session(config, log);
    echo_grid(session, p);
    session.config()["runs"] = runs;
    session.config()["seed"] = config.seed;
    session.config()["horizon-steps"] = plan.horizon_steps;
    session.seeds()["master"] = config.seed;
    session.seeds()["runs"] = json::array();
    for (std::size_t r = 0; r < runs; ++r)
        session.seeds()["runs"].push_back(plan.run_seed(r));
    session.write("trajectory.csv",
                  [&](std::ostream& out) { io::write_trajectory_csv(out, simulated.front()); });
    session.write("ode.csv", [&](std::ostream& out) { io::write_trajectory_csv(out, ode); });
    session.write("deviation.csv",
                  [&](std::ostream& out) { io::write_deviation_csv(out, deviations); });

    double worst = 0.0;
    bool exited = ode.sigma_exit.has_value();
    for (std::size_t r = 0; r < runs; ++r) {
        worst = std::max(worst, deviations[r].sup_deviation);
        exited = exited || simulated[r].sigma_exit.has_value();
    }
    session.results()["max_sup_dev"] = worst;
    session.results()["grid_resolution"] = deviations.front().grid_resolution;
    session.results()["domain_exited"] = exited;
    if (ode.sigma_exit)
        session.results()["sigma_exit"] = *ode.sigma_exit;
    session.finish();
    return exit_ok;
}

inline int run_scaling(const ExperimentConfig& config, std::ostream& log)
{
    auto ns = parse_count_list(config.ns, "ns");
    require(ns.size() >= 2, "--ns needs at least two values");
    for (auto n : ns)
        require(n >= 10, "--ns values must be at least 10");
    auto sorted = ns;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "--ns values must be distinct");
    const std::size_t runs = positive(config.runs.value_or(20), "runs");
    const std::size_t truncation = positive(config.l, "l");
    const double s_max = config.s_max.value_or(4.0);
    require(std::isfinite(s_max) && s_max > 0.0, "--s-max must be positive");
    require(std::isfinite(config.h) && config.h > 0.0, "--h must be positive");
    require(config.grid_stride >= 0, "--grid-stride must be non-negative");
    ScalingOptions options{config.h, static_cast<std::size_t>(config.grid_stride)};
    const ScalingReport report = scaling_study(ns, runs, config.seed, truncation, s_max, options);

    Session session(config, log);
    json ns_echo = json::array();
    for (auto n : sorted)
        ns_echo.push_back(n);
    session.config()["ns"] = ns_echo;
    session.config()["runs"] = runs;
    session.config()["seed"] = config.seed;
    session.config()["l"] = truncation;
    session.config()["s-max"] = s_max;
    session.config()["h"] = config.h;
    session.config()["grid-stride"] = config.grid_stride;
    session.seeds()["master"] = config.seed;
    session.seeds()["per_n"] = json::array();
    for (std::size_t i = 0; i < sorted.size(); ++i)
        session.seeds()["per_n"].push_back(derive_seed(config.seed, i));
    session.write("scaling.csv", [&](std::ostream& out) { io::write_scaling_csv(out, report); });
    session.results()["alpha"] = report.alpha;
    session.results()["intercept"] = report.intercept;
    session.finish();
    return exit_ok;
}

inline int run_gumbel(const ExperimentConfig& config, std::ostream& log)
{
    const std::vector<double> cs = parse_real_list(config.cs, "cs");
    const std::size_t n = positive(config.n, "n");
    require(n >= 10, "--n must be at least 10 for the cover-time experiment");
    const std::size_t trials = positive(config.trials, "trials");
    require(trials >= 100, "--trials must be at least 100");
    const GumbelReport report = gumbel_experiment(n, trials, cs, config.seed);

    Session session(config, log);
    session.config()["n"] = n;
    session.config()["trials"] = trials;
    session.config()["cs"] = cs;
    session.config()["seed"] = config.seed;
    session.seeds()["master"] = config.seed;
    session.seeds()["trial_seed"] = "derive_seed(master, trial)";
    session.write("gumbel.csv", [&](std::ostream& out) { io::write_gumbel_csv(out, report); });
    json thresholds = json::array();
    for (const auto& row : report.rows)
        thresholds.push_back(row.threshold);
    session.results()["thresholds"] = thresholds;
    session.results()["exact_computed"] = n <= gumbel_exact_limit;
    session.finish();
    return exit_ok;
}

inline int run_check(const ExperimentConfig& config, std::ostream& log)
{
    const std::size_t n = positive(config.n, "n");
    const std::size_t truncation = positive(config.l, "l");
    const std::size_t runs = positive(config.runs.value_or(10), "runs");
    const std::size_t states = positive(config.state_samples, "state-samples");
    HypothesisCheckOptions options;
    options.drift_samples = positive(config.drift_samples, "drift-samples");
    require(options.drift_samples >= min_drift_samples, "--drift-samples must be at least 100");
    options.lipschitz_samples = positive(config.lipschitz_samples, "lipschitz-samples");
    require(options.lipschitz_samples >= 2, "--lipschitz-samples must be at least 2");

    RunPlan plan = RunPlan::coupon_default(n, config.seed, runs);
    plan.truncation = truncation;
    const ProcessSpec spec = make_coupon_spec(truncation, plan.horizon());
    const HypothesisReport report = check_hypotheses(spec, plan, states, options);

    Session session(config, log);
    session.config()["n"] = n;
    session.config()["l"] = truncation;
    session.config()["runs"] = runs;
    session.config()["seed"] = config.seed;
    session.config()["horizon-steps"] = plan.horizon_steps;
    session.config()["state-samples"] = states;
    session.config()["drift-samples"] = options.drift_samples;
    session.config()["lipschitz-samples"] = options.lipschitz_samples;
    session.config()["z-threshold"] = options.z_threshold;
    session.seeds()["master"] = config.seed;
    session.write("hypotheses.csv",
                  [&](std::ostream& out) { io::write_hypotheses_csv(out, report); });
    session.results()["all_passed"] = report.all_passed();
    session.finish();
    if (!report.all_passed())
        log << "one or more hypotheses failed; see hypotheses.csv\n";
    return report.all_passed() ? exit_ok : exit_failed;
}

} // namespace detail

/// Parses `args` (args[0] is the program name), runs the subcommand and
/// returns the process exit code. Progress goes to `log`, diagnostics to
/// `err`.
inline int run_cli(const std::vector<std::string>& args, std::ostream& log, std::ostream& err)
{
    using namespace detail;

    ExperimentConfig config;
    CLI::App app{"Differential-equation method for the coupon-collecting process", "wormald"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version));
    // "-h" would collide with the RK4 step-size flag "--h".
    app.set_help_flag("--help", "Print this help message and exit");

    struct Command {
        const char* name;
        const char* help;
        CLI::App* app = nullptr;
        Registry registry;
    };
    std::vector<Command> commands{
        {"solve", "Integrate the coupon ODE system with RK4", nullptr, {}},
        {"simulate", "Simulate coupon-collecting runs on the ODE grid", nullptr, {}},
        {"compare", "Simulate, integrate and report sup-norm deviations", nullptr, {}},
        {"scaling", "Mean sup-deviation across several n and its decay exponent", nullptr, {}},
        {"gumbel", "Cover-time tail probabilities against reference curves", nullptr, {}},
        {"check", "Empirically verify the three hypotheses of the method", nullptr, {}},
    };

    for (auto& cmd : commands) {
        cmd.app = app.add_subcommand(cmd.name, cmd.help);
        const std::string name = cmd.name;
        auto& reg = cmd.registry;
        CLI::App& sub = *cmd.app;
        sub.add_option("--config", config.config_file, "JSON file with flag values");
        bind_flag(sub, reg, "out", config.out, "Output directory");
        if (name != "scaling")
            bind_flag(sub, reg, "n", config.n, "Number of coupon types");
        if (name != "solve")
            bind_flag(sub, reg, "seed", config.seed, "Master seed");
        if (name != "gumbel")
            bind_flag(sub, reg, "l", config.l, "Truncation level");
        if (name == "solve" || name == "simulate" || name == "compare" || name == "scaling") {
            bind_optional_real(sub, reg, "s-max", config.s_max, "Scaled time horizon");
            bind_flag(sub, reg, "h", config.h, "RK4 step size");
            bind_flag(sub, reg, "grid-stride", config.grid_stride, "RK4 steps per grid point");
        }
        if (name == "simulate" || name == "compare" || name == "scaling" || name == "check")
            bind_optional_int(sub, reg, "runs", config.runs, "Number of runs");
        if (name == "scaling")
            bind_list(sub, reg, "ns", config.ns, "Comma-separated values of n");
        if (name == "gumbel") {
            bind_list(sub, reg, "cs", config.cs, "Comma-separated threshold offsets c");
            bind_flag(sub, reg, "trials", config.trials, "Number of cover-time trials");
        }
        if (name == "check") {
            bind_flag(sub, reg, "state-samples", config.state_samples, "Pilot states for the drift test");
            bind_flag(sub, reg, "drift-samples", config.drift_samples, "Draws per pilot state");
            bind_flag(sub, reg, "lipschitz-samples", config.lipschitz_samples,
                 "Point pairs for the Lipschitz estimate");
        }
    }

    // Values such as "--cs -1,0,1,2" start with '-' but are not flags.
    std::vector<std::string> argv_copy(args);
    for (std::size_t i = 1; i + 1 < argv_copy.size(); ++i) {
        const std::string& flag = argv_copy[i];
        const std::string& value = argv_copy[i + 1];
        if (flag.rfind("--", 0) == 0 && flag.find('=') == std::string::npos &&
            value.size() > 1 && value[0] == '-' &&
            (std::isdigit(static_cast<unsigned char>(value[1])) || value[1] == '.')) {
            argv_copy[i] = flag + "=" + value;
            argv_copy.erase(argv_copy.begin() + static_cast<std::ptrdiff_t>(i) + 1);
        }
    }
    std::vector<const char*> argv;
    for (const auto& a : argv_copy)
        argv.push_back(a.c_str());

    std::ostringstream help_out, help_err;
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, help_out, help_err);
        log << help_out.str();
        err << help_err.str();
        return code == 0 ? exit_ok : exit_invalid_config;
    }

    try {
        Command* chosen = nullptr;
        for (auto& cmd : commands)
            if (cmd.app->parsed())
                chosen = &cmd;
        config.subcommand = chosen->name;
        if (!config.config_file.empty())
            apply_config_file(config.config_file, chosen->registry);

        const std::string& sub = config.subcommand;
        if (sub == "solve")
            return run_solve(config, log);
        if (sub == "simulate")
            return run_simulate(config, log);
        if (sub == "compare")
            return run_compare(config, log);
        if (sub == "scaling")
            return run_scaling(config, log);
        if (sub == "gumbel")
            return run_gumbel(config, log);
        return run_check(config, log);
    } catch (const contract_violation& e) {
        err << "error: " << e.what() << '\n';
        return exit_invalid_config;
    } catch (const numerical_error& e) {
        err << "numerical failure: " << e.what() << '\n';
        return exit_numerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_failed;
    }
}

} // namespace wormald::cli
