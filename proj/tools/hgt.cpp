// hgt: exponent dynamics toolkit for the transfer-driven trait-ladder model.
// Subcommands: limit, classify, simulate, compare, bpi.
// Exit codes: 0 success, 1 usage or configuration error, 2 out-of-scope
// request, 3 runtime budget exceeded.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hgt/bpi.hpp"
#include "hgt/io.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kOutOfScope = 2;
constexpr int kBudget = 3;

struct Cli {
    std::string scenario_path;
    std::string out_dir = ".";
    int threads = 1;
    bool out_given = false;

    std::optional<hgt::Scenario> scenario;

    void load_scenario() {
        if (!scenario_path.empty()) scenario = hgt::parse_scenario(scenario_path);
    }

    std::filesystem::path out_path(const std::string& name) const {
        std::filesystem::create_directories(out_dir);
        return std::filesystem::path(out_dir) / name;
    }
};

hgt::ModelParams resolve_params(const Cli& cli, const std::string& params_path) {
    if (!params_path.empty())
        return hgt::params_from_json(hgt::read_json_file(params_path));
    if (cli.scenario) return cli.scenario->params;
    throw std::invalid_argument(
        "no model parameters: give --params <file> or --scenario <file>");
}

void write_table(const Cli& cli, const std::string& name, const hgt::CsvTable& tab) {
    std::ostringstream os;
    hgt::write_csv(os, tab);
    hgt::write_text_file(cli.out_path(name).string(), os.str());
}

void write_json_file(const Cli& cli, const std::string& name, const hgt::json& j) {
    hgt::write_text_file(cli.out_path(name).string(), j.dump(2) + "\n");
}

struct LimitArgs {
    std::string params_path;
    double t_max = 10.0;
    bool strict = false;
    int samples = 201;
    CLI::Option *t_max_opt = nullptr, *strict_opt = nullptr, *samples_opt = nullptr;

    void merge_scenario(const Cli& cli) {
        if (!cli.scenario || !cli.scenario->limit) return;
        const hgt::LimitBlock& b = *cli.scenario->limit;
        if (!t_max_opt->count()) t_max = b.t_max;
        if (!strict_opt->count()) strict = b.strict;
        if (!samples_opt->count()) samples = b.samples;
    }
};

int cmd_limit(const Cli& cli, LimitArgs& args) {
    const hgt::ModelParams p = resolve_params(cli, args.params_path);
    hgt::EngineOptions opt;
    opt.t_max = args.t_max;
    opt.strict = args.strict;
    const hgt::LimitTrajectory traj = hgt::run_limit(p, opt);

    write_table(cli, "limit.csv", hgt::limit_table(traj, hgt::uniform_times(args.t_max, args.samples)));
    write_json_file(cli, "limit.json", hgt::limit_to_json(traj));
    std::cout << "wrote limit.csv and limit.json to " << cli.out_dir << " (termination: "
              << hgt::termination_kind_name(traj.termination.kind) << " at t="
              << hgt::format_g17(traj.termination.time) << ")\n";
    return kOk;
}

int cmd_classify(const Cli& cli, const std::string& params_path) {
    const hgt::ModelParams p = resolve_params(cli, params_path);
    const hgt::OutcomeReport rep = hgt::classify(p);
    const hgt::json j = hgt::outcome_to_json(rep);
    std::cout << j.dump(2) << "\n";
    if (cli.out_given) write_json_file(cli, "classify.json", j);
    return rep.classification == hgt::OutcomeClass::OutOfScope ? kOutOfScope : kOk;
}

struct SimArgs {
    std::string params_path;
    std::int64_t K = 1000;
    std::uint64_t seed = 1;
    double horizon = 1.0;
    double grid_step = 0.01;
    int replicas = 1;
    std::uint64_t budget = 10'000'000'000ull;
    bool aggregate_only = false;
    CLI::Option *K_opt = nullptr, *seed_opt = nullptr, *horizon_opt = nullptr,
                *step_opt = nullptr, *replicas_opt = nullptr;

    void merge_scenario(const Cli& cli) {
        if (!cli.scenario || !cli.scenario->simulate) return;
        const hgt::SimulateBlock& b = *cli.scenario->simulate;
        if (!K_opt->count()) K = b.K;
        if (!seed_opt->count()) seed = b.seed;
        if (!horizon_opt->count()) horizon = b.horizon_logk;
        if (!step_opt->count()) grid_step = b.grid_step;
        if (!replicas_opt->count()) replicas = b.replicas;
    }

    hgt::SimConfig config(const hgt::ModelParams& p) const {
        hgt::SimConfig cfg(p);
        cfg.K = K;
        cfg.seed = seed;
        cfg.horizon_logk = horizon;
        cfg.record_grid = hgt::step_grid(horizon, grid_step);
        cfg.replicas = replicas;
        cfg.event_budget = budget;
        return cfg;
    }
};

std::string replica_name(int r) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "trace_%03d.csv", r);
    return buf;
}

int cmd_simulate(const Cli& cli, SimArgs& args) {
    const hgt::ModelParams p = resolve_params(cli, args.params_path);
    const hgt::SimConfig cfg = args.config(p);

    if (args.replicas == 1) {
        const hgt::SimTrace tr = hgt::run(cfg);
        write_table(cli, "trace.csv", hgt::trace_table(tr));
        std::cout << "wrote trace.csv to " << cli.out_dir << " ("
                  << tr.events_executed << " events)\n";
        if (tr.truncated) {
            std::cerr << "event budget exceeded; trace is truncated\n";
            return kBudget;
        }
        return kOk;
    }

    const hgt::EnsembleSummary ens = hgt::ensemble(cfg, nullptr, cli.threads);
    if (!args.aggregate_only)
        for (int r = 0; r < args.replicas; ++r)
            write_table(cli, replica_name(r),
                        hgt::trace_table(ens.traces[static_cast<std::size_t>(r)]));
    write_table(cli, "aggregate.csv", hgt::ensemble_table(ens));
    std::cout << "wrote " << (args.aggregate_only ? 1 : args.replicas + 1)
              << " csv file(s) to " << cli.out_dir << "\n";
    return kOk;
}

int cmd_compare(const Cli& cli, SimArgs& args, const std::string& sidecar_path,
                double tolerance) {
    const hgt::LimitTrajectory traj =
        hgt::limit_from_json(hgt::read_json_file(sidecar_path));
    if (!args.horizon_opt->count() &&
        !(cli.scenario && cli.scenario->simulate))
        args.horizon = traj.segments.back().t_end;

    const hgt::SimConfig cfg = args.config(traj.params);
    const hgt::EnsembleSummary ens = hgt::ensemble(cfg, &traj, cli.threads);
    const hgt::CompareReport rep = hgt::compare(ens, traj, tolerance);
    const hgt::json j = hgt::compare_to_json(rep);
    std::cout << j.dump(2) << "\n";
    if (cli.out_given) write_json_file(cli, "compare.json", j);
    return kOk;
}

struct BpiArgs {
    std::string mode;
    hgt::BPIParams params;
    bool no_immigration = false;
    double t = 1.0;
    std::int64_t ancestors = 1;
    std::uint64_t seed = 1;
    double grid_step = 0.0;
    std::uint64_t budget = 10'000'000'000ull;
};

int cmd_bpi(const Cli& cli, BpiArgs& args) {
    args.params.immigration = !args.no_immigration;
    hgt::json j{{"mode", args.mode}, {"t", args.t}};
    j["params"] = hgt::json{{"b", args.params.b},   {"d", args.params.d},
                            {"a", args.params.a},   {"c", args.params.c},
                            {"beta", args.params.beta}, {"K", args.params.K},
                            {"immigration", args.params.immigration}};
    int code = kOk;
    if (args.mode == "mean") {
        j["value"] = hgt::bpi_mean(args.params, args.t);
    } else if (args.mode == "variance") {
        j["value"] = hgt::bpi_variance(args.params, args.t);
    } else if (args.mode == "limit") {
        j["value"] = hgt::bpi_limit_exponent(args.params, args.t);
    } else if (args.mode == "survival") {
        j["ancestors"] = args.ancestors;
        j["value"] = hgt::bp_survival(args.params.b, args.params.d, args.t, args.ancestors);
    } else {  // simulate
        std::vector<double> grid;
        if (args.grid_step > 0.0) grid = hgt::step_grid(args.t, args.grid_step);
        const hgt::BPIPath path =
            hgt::bpi_simulate(args.params, args.t, args.seed, grid, args.budget);
        j["seed"] = args.seed;
        j["terminal"] = path.terminal;
        j["events_executed"] = path.events_executed;
        j["truncated"] = path.truncated;
        j["grid"] = path.grid;
        j["counts"] = path.counts_at;
        if (path.truncated) code = kBudget;
    }
    std::cout << j.dump(2) << "\n";
    if (cli.out_given) write_json_file(cli, "bpi.json", j);
    return code;
}

}  // namespace

int main(int argc, char** argv) {
    Cli cli;
    CLI::App app{"exponent dynamics toolkit: trait-ladder transfer model"};
    app.require_subcommand(1);
    app.add_option("--scenario", cli.scenario_path,
                   "scenario JSON supplying params and per-subcommand defaults");
    CLI::Option* out_opt =
        app.add_option("--out", cli.out_dir, "output directory (default: .)");
    app.add_option("--threads", cli.threads, "worker threads for replica ensembles")
        ->envname("HGT_THREADS")
        ->check(CLI::PositiveNumber);

    LimitArgs largs;
    CLI::App* limit_cmd =
        app.add_subcommand("limit", "piecewise-affine exponent trajectory");
    limit_cmd->fallthrough();
    limit_cmd->add_option("--params", largs.params_path, "model params JSON file");
    largs.t_max_opt = limit_cmd->add_option("--t-max", largs.t_max, "horizon, log-K units");
    largs.strict_opt =
        limit_cmd->add_flag("--strict", largs.strict, "reject non-generic parameters");
    largs.samples_opt =
        limit_cmd->add_option("--samples", largs.samples, "rows in limit.csv");

    std::string classify_params;
    CLI::App* classify_cmd =
        app.add_subcommand("classify", "long-run outcome of the trait ladder");
    classify_cmd->fallthrough();
    classify_cmd->add_option("--params", classify_params, "model params JSON file");

    SimArgs sargs;
    CLI::App* simulate_cmd =
        app.add_subcommand("simulate", "exact finite-K jump-chain simulation");
    simulate_cmd->fallthrough();
    simulate_cmd->add_option("--params", sargs.params_path, "model params JSON file");
    sargs.K_opt = simulate_cmd->add_option("--K", sargs.K, "carrying capacity scale")
                      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 62));
    sargs.seed_opt = simulate_cmd->add_option("--seed", sargs.seed, "RNG seed");
    sargs.horizon_opt =
        simulate_cmd->add_option("--horizon", sargs.horizon, "horizon, log-K units");
    sargs.step_opt = simulate_cmd->add_option("--grid-step", sargs.grid_step,
                                              "recording step, log-K units");
    sargs.replicas_opt =
        simulate_cmd->add_option("--replicas", sargs.replicas, "independent replicas")
            ->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--budget", sargs.budget, "max events per replica");
    simulate_cmd->add_flag("--aggregate", sargs.aggregate_only,
                           "write only the median table, not per-replica traces");

    SimArgs cargs;
    std::string sidecar_path;
    double tolerance = 0.2;
    CLI::App* compare_cmd = app.add_subcommand(
        "compare", "simulate against a limit.json sidecar and report errors");
    compare_cmd->fallthrough();
    compare_cmd->add_option("--sidecar", sidecar_path, "limit.json from the limit subcommand")
        ->required();
    cargs.K_opt = compare_cmd->add_option("--K", cargs.K, "carrying capacity scale")
                      ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 62));
    cargs.seed_opt = compare_cmd->add_option("--seed", cargs.seed, "RNG seed");
    cargs.horizon_opt = compare_cmd->add_option(
        "--horizon", cargs.horizon, "horizon, log-K units (default: sidecar window)");
    cargs.step_opt = compare_cmd->add_option("--grid-step", cargs.grid_step,
                                             "recording step, log-K units");
    cargs.replicas_opt =
        compare_cmd->add_option("--replicas", cargs.replicas, "independent replicas")
            ->check(CLI::PositiveNumber);
    compare_cmd->add_option("--budget", cargs.budget, "max events per replica");
    compare_cmd->add_option("--tolerance", tolerance, "pass threshold for the sup error");

    BpiArgs bargs;
    CLI::App* bpi_cmd = app.add_subcommand(
        "bpi", "branching process with immigration: moments, limit, survival, paths");
    bpi_cmd->fallthrough();
    bpi_cmd->add_option("mode", bargs.mode, "mean | variance | limit | survival | simulate")
        ->required()
        ->check(CLI::IsMember({"mean", "variance", "limit", "survival", "simulate"}));
    bpi_cmd->add_option("--b", bargs.params.b, "birth rate")->required();
    bpi_cmd->add_option("--d", bargs.params.d, "death rate")->required();
    bpi_cmd->add_option("--a", bargs.params.a, "immigration growth exponent");
    bpi_cmd->add_option("--c", bargs.params.c, "immigration scale exponent");
    bpi_cmd->add_option("--beta", bargs.params.beta, "initial-block exponent");
    bpi_cmd->add_option("--K", bargs.params.K, "scale parameter")
        ->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 62));
    bpi_cmd->add_flag("--no-immigration", bargs.no_immigration, "drop the immigration term");
    bpi_cmd->add_option(
        "--t", bargs.t,
        "time: absolute for mean/variance/survival, log-K for limit/simulate");
    bpi_cmd->add_option("--ancestors", bargs.ancestors, "initial individuals (survival)")
        ->check(CLI::NonNegativeNumber);
    bpi_cmd->add_option("--seed", bargs.seed, "RNG seed (simulate)");
    bpi_cmd->add_option("--grid-step", bargs.grid_step, "recording step (simulate)");
    bpi_cmd->add_option("--budget", bargs.budget, "max events (simulate)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }
    cli.out_given = out_opt->count() > 0;

    try {
        cli.load_scenario();
        if (*limit_cmd) {
            largs.merge_scenario(cli);
            return cmd_limit(cli, largs);
        }
        if (*classify_cmd) return cmd_classify(cli, classify_params);
        if (*simulate_cmd) {
            sargs.merge_scenario(cli);
            return cmd_simulate(cli, sargs);
        }
        if (*compare_cmd) {
            cargs.merge_scenario(cli);
            return cmd_compare(cli, cargs, sidecar_path, tolerance);
        }
        if (*bpi_cmd) return cmd_bpi(cli, bargs);
    } catch (const std::domain_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kOutOfScope;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kBudget;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsage;
    }
    return kUsage;
}
