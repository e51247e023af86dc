#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "snmc/allocation.hpp"
#include "snmc/bench.hpp"
#include "snmc/external_model.hpp"
#include "snmc/groups.hpp"
#include "snmc/model.hpp"
#include "snmc/pipeline.hpp"
#include "snmc/report_io.hpp"
#include "snmc/table.hpp"
#include "snmc/version.hpp"

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitBudget = 3;
constexpr int kExitProtocol = 4;

int env_workers(int fallback) {
    const char* env = std::getenv("SNMC_WORKERS");
    if (!env || !*env) return fallback;
    try {
        return std::stoi(env);
    } catch (const std::exception&) {
        throw snmc::ValidationError("SNMC_WORKERS is not an integer");
    }
}

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw snmc::ValidationError("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw snmc::ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

snmc::InputSpec parse_inputs(const json& arr) {
    std::vector<snmc::CoordinateDist> coords;
    for (const auto& item : arr) {
        const std::string dist = item.at("dist").get<std::string>();
        if (dist == "normal") {
            coords.push_back(snmc::StandardNormalDist{});
        } else if (dist == "uniform") {
            coords.push_back(snmc::UniformDist{item.at("a").get<double>(),
                                               item.at("b").get<double>()});
        } else {
            throw snmc::ValidationError("unknown input distribution '" + dist + "'");
        }
    }
    return snmc::InputSpec(std::move(coords));
}

struct ModelChoice {
    std::optional<snmc::BuiltinModel> builtin;
    std::optional<snmc::ExternalModelConfig> external;

    snmc::StochasticModel build() const {
        if (builtin) return snmc::make_builtin(*builtin);
        return snmc::make_external_model(*external);
    }
    std::string label() const {
        if (builtin) return snmc::builtin_label(*builtin);
        std::string s = "external(";
        for (std::size_t i = 0; i < external->command.size(); ++i) {
            if (i > 0) s += ' ';
            s += external->command[i];
        }
        return s + ")";
    }
};

ModelChoice parse_model_json(const json& m) {
    ModelChoice choice;
    if (m.contains("builtin")) {
        const std::string name = m.at("builtin").get<std::string>();
        if (name == "linear") {
            choice.builtin = snmc::LinearModelParams{m.value("sigma", 1.0)};
        } else if (name == "ishigami") {
            choice.builtin = snmc::IshigamiModelParams{m.value("a", 7.0), m.value("b", 0.05)};
        } else {
            throw snmc::ValidationError("unknown builtin model '" + name + "'");
        }
        return choice;
    }
    if (m.contains("command")) {
        snmc::ExternalModelConfig ext{
            m.at("command").get<std::vector<std::string>>(),
            parse_inputs(m.at("inputs")),
            m.value("timeout_s", 60.0),
        };
        choice.external = std::move(ext);
        return choice;
    }
    throw snmc::ValidationError("model must specify either 'builtin' or 'command'");
}

ModelChoice model_from_flags(const std::string& name, double sigma, double a, double b) {
    ModelChoice choice;
    if (name == "linear") {
        choice.builtin = snmc::LinearModelParams{sigma};
    } else if (name == "ishigami") {
        choice.builtin = snmc::IshigamiModelParams{a, b};
    } else {
        throw snmc::ValidationError("unknown builtin model '" + name + "' (linear or ishigami)");
    }
    return choice;
}

std::vector<std::vector<int>> groups_from_json(const json& arr) {
    std::vector<std::vector<int>> groups;
    for (const auto& g : arr) groups.push_back(g.get<std::vector<int>>());
    return groups;
}

ordered_json groups_to_json(const snmc::GroupSpec& groups) {
    ordered_json arr = ordered_json::array();
    for (int j = 0; j < groups.count(); ++j) arr.push_back(groups.group(j));
    return arr;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw snmc::ValidationError("cannot open output file '" + path + "'");
    out << content;
    if (!out) throw snmc::ValidationError("write to '" + path + "' failed");
}

// ---------------------------------------------------------------------------
// allocate
// ---------------------------------------------------------------------------

struct AllocateArgs {
    double rho = -1.0;
    std::string rho_from;
    std::string rho_mode = "squared-diff";
    std::int64_t budget = 0;
};

int cmd_allocate(const AllocateArgs& args) {
    double rho = args.rho;
    if (!args.rho_from.empty()) {
        std::ifstream in(args.rho_from);
        if (!in) throw snmc::ValidationError("cannot open '" + args.rho_from + "'");
        std::vector<std::array<double, 2>> pairs;
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            double a = 0.0, b = 0.0;
            if (!(ls >> a >> b)) {
                throw snmc::ValidationError("'" + args.rho_from + "': expected two values per line");
            }
            pairs.push_back({a, b});
        }
        rho = snmc::estimate_rho(pairs, snmc::parse_rho_mode(args.rho_mode)).value();
    } else if (rho < 0.0) {
        throw snmc::ValidationError("allocate needs --rho or --rho-from");
    }
    const auto plan = snmc::make_plan(args.budget, snmc::Strategy::opt(), rho);
    std::cout << "m=" << plan.m << " n=" << plan.n << "\n";
    std::cout << "m_real=" << snmc::format_double(snmc::optimal_repetitions_real(rho, args.budget))
              << " rho=" << snmc::format_double(rho) << "\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateArgs {
    std::string config_path;
    std::string model = "linear";
    double sigma = 1.0;
    double a = 7.0;
    double b = 0.05;
    std::string groups;
    std::int64_t budget = 10000;
    std::int64_t r0 = 10;
    double h = 1e-2;
    std::uint64_t seed = 0;
    std::string strategy = "opt";
    std::string rho_mode = "squared-diff";
    double rho_override = -1.0;
    int workers = 1;
    bool totals_from_raw = false;
    std::string out_report;
    std::string out_csv;
    std::string out_table;
};

int cmd_estimate(EstimateArgs args) {
    ModelChoice model_choice;
    if (!args.config_path.empty()) {
        const json cfg = load_json(args.config_path);
        model_choice = parse_model_json(cfg.at("model"));
        args.budget = cfg.value("T", args.budget);
        args.r0 = cfg.value("r0", args.r0);
        args.h = cfg.value("h", args.h);
        args.seed = cfg.value("seed", args.seed);
        args.strategy = cfg.value("strategy", args.strategy);
        args.rho_mode = cfg.value("rho_mode", args.rho_mode);
        if (cfg.contains("rho_override")) args.rho_override = cfg.at("rho_override").get<double>();
        args.workers = cfg.value("workers", args.workers);
        args.totals_from_raw = cfg.value("totals_from_raw", args.totals_from_raw);
        if (cfg.contains("groups")) {
            ordered_json g = cfg.at("groups");
            std::string flat;
            for (const auto& grp : g) {
                if (!flat.empty()) flat += ';';
                std::string part;
                for (const auto& c : grp) {
                    if (!part.empty()) part += ',';
                    part += std::to_string(c.get<int>());
                }
                flat += part;
            }
            args.groups = flat;
        }
        if (cfg.contains("outputs")) {
            const json& o = cfg.at("outputs");
            args.out_report = o.value("report", args.out_report);
            args.out_csv = o.value("csv", args.out_csv);
            args.out_table = o.value("table", args.out_table);
        }
    } else {
        model_choice = model_from_flags(args.model, args.sigma, args.a, args.b);
    }

    const snmc::StochasticModel model = model_choice.build();
    if (args.groups.empty()) throw snmc::ValidationError("estimate needs --groups (e.g. \"1;2\")");
    const snmc::GroupSpec groups = snmc::GroupSpec::parse(args.groups, model.inputs.dimension());

    snmc::RunSettings settings;
    settings.budget = args.budget;
    settings.r0 = args.r0;
    settings.h = args.h;
    settings.seed = args.seed;
    settings.strategy = snmc::Strategy::parse(args.strategy);
    settings.rho_mode = snmc::parse_rho_mode(args.rho_mode);
    if (args.rho_override >= 0.0) settings.rho_override = args.rho_override;
    settings.workers = env_workers(args.workers);
    settings.totals_from_raw = args.totals_from_raw;

    const snmc::EstimationResult result =
        snmc::run_estimation(model, snmc::QoITransform::identity(), groups, settings);

    ordered_json prov;
    prov["model"] = model_choice.label();
    prov["groups"] = groups_to_json(groups);
    prov["T"] = settings.budget;
    prov["r0"] = settings.r0;
    prov["h"] = settings.h;
    prov["seed"] = settings.seed;
    prov["strategy"] = settings.strategy.label();
    prov["rho_mode"] = snmc::rho_mode_label(settings.rho_mode);
    if (settings.rho_override) prov["rho_override"] = *settings.rho_override;
    const std::string provenance = snmc::provenance_line(prov.dump());

    const std::string report_json = snmc::report_to_json(result.report);
    if (!args.out_report.empty()) {
        write_file(args.out_report, report_json);
    }
    std::ostringstream csv;
    snmc::write_report_csv(csv, result.report, provenance);
    if (!args.out_csv.empty()) {
        write_file(args.out_csv, csv.str());
    }
    if (!args.out_table.empty()) {
        snmc::save_table(result.table, args.out_table);
    }
    std::cout << report_json;
    if (args.out_csv.empty()) std::cout << csv.str();
    std::cerr << "wall clock: " << result.report.wall_clock_s << " s\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// bench
// ---------------------------------------------------------------------------

struct BenchArgs {
    std::string config_path;
    std::string model = "linear";
    double sigma = 1.0;
    double a = 7.0;
    double b = 0.05;
    std::string groups;
    std::string grid = "1000,10000,100000";
    std::string strategies = "fixed(5),sqrt,opt";
    std::int64_t replications = 30;
    std::int64_t r0 = 10;
    double h = 1e-2;
    std::uint64_t seed = 0;
    std::string rho_mode = "squared-diff";
    int fill_workers = 1;
    int replication_workers = 0;
    std::string summary_on = "reg";
    std::string out_records;
    std::string out_summary;
    std::string out_svg;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (!item.empty()) parts.push_back(item);
    }
    return parts;
}

int cmd_bench(BenchArgs args) {
    snmc::ExperimentConfig config;
    if (!args.config_path.empty()) {
        const json cfg = load_json(args.config_path);
        const ModelChoice choice = parse_model_json(cfg.at("model"));
        if (!choice.builtin) {
            throw snmc::ValidationError("bench needs a builtin model (analytic truths required)");
        }
        config.model = *choice.builtin;
        config.groups = groups_from_json(cfg.at("groups"));
        if (cfg.contains("T_grid")) config.budget_grid = cfg.at("T_grid").get<std::vector<std::int64_t>>();
        if (cfg.contains("strategies")) {
            config.strategies.clear();
            for (const auto& s : cfg.at("strategies")) {
                config.strategies.push_back(snmc::Strategy::parse(s.get<std::string>()));
            }
        }
        config.replications = cfg.value("N", config.replications);
        config.r0 = cfg.value("r0", config.r0);
        config.h = cfg.value("h", config.h);
        config.master_seed = cfg.value("seed", config.master_seed);
        config.rho_mode = snmc::parse_rho_mode(cfg.value("rho_mode", std::string("squared-diff")));
        if (cfg.contains("workers")) {
            config.fill_workers = cfg.at("workers").value("fill", config.fill_workers);
            config.replication_workers =
                cfg.at("workers").value("replications", config.replication_workers);
        }
        args.summary_on = cfg.value("summary_on", args.summary_on);
        if (cfg.contains("outputs")) {
            const json& o = cfg.at("outputs");
            args.out_records = o.value("records", args.out_records);
            args.out_summary = o.value("summary", args.out_summary);
            args.out_svg = o.value("svg", args.out_svg);
        }
    } else {
        const ModelChoice choice = model_from_flags(args.model, args.sigma, args.a, args.b);
        config.model = *choice.builtin;
        const snmc::StochasticModel probe = snmc::make_builtin(config.model);
        if (args.groups.empty()) throw snmc::ValidationError("bench needs --groups");
        const snmc::GroupSpec gs = snmc::GroupSpec::parse(args.groups, probe.inputs.dimension());
        for (int j = 0; j < gs.count(); ++j) config.groups.push_back(gs.group(j));
        config.budget_grid.clear();
        for (const std::string& t : split(args.grid, ',')) config.budget_grid.push_back(std::stoll(t));
        config.strategies.clear();
        for (const std::string& s : split(args.strategies, ';')) {
            config.strategies.push_back(snmc::Strategy::parse(s));
        }
        config.replications = args.replications;
        config.r0 = args.r0;
        config.h = args.h;
        config.master_seed = args.seed;
        config.rho_mode = snmc::parse_rho_mode(args.rho_mode);
        config.fill_workers = args.fill_workers;
        config.replication_workers = args.replication_workers;
    }
    config.fill_workers = env_workers(config.fill_workers);
    if (args.summary_on != "reg" && args.summary_on != "raw") {
        throw snmc::ValidationError("summary_on must be 'reg' or 'raw'");
    }

    // Analytic truths for every group; bench refuses models without them.
    std::map<std::string, double> truths;
    for (const auto& g : config.groups) {
        const auto truth = snmc::analytic_first_order(config.model, [&] {
            auto sorted = g;
            std::sort(sorted.begin(), sorted.end());
            return sorted;
        }());
        if (!truth) {
            throw snmc::ValidationError("no analytic index for group " + snmc::group_label(g) +
                                        " of model " + snmc::builtin_label(config.model));
        }
        truths[snmc::group_label(g)] = *truth;
    }

    const std::vector<snmc::ReplicationRecord> records = snmc::run_experiment(config);
    const std::vector<snmc::StrategySummary> summaries =
        snmc::summarize(records, truths, args.summary_on == "raw");

    ordered_json prov;
    prov["model"] = snmc::builtin_label(config.model);
    prov["groups"] = config.groups;
    prov["T_grid"] = config.budget_grid;
    {
        ordered_json strat = ordered_json::array();
        for (const auto& s : config.strategies) strat.push_back(s.label());
        prov["strategies"] = strat;
    }
    prov["N"] = config.replications;
    prov["r0"] = config.r0;
    prov["h"] = config.h;
    prov["seed"] = config.master_seed;
    prov["rho_mode"] = snmc::rho_mode_label(config.rho_mode);
    prov["summary_on"] = args.summary_on;
    const std::string provenance = snmc::provenance_line(prov.dump());

    std::ostringstream records_csv;
    snmc::write_records_csv(records_csv, records, provenance);
    std::ostringstream summary_csv;
    snmc::write_summary_csv(summary_csv, summaries, provenance);

    if (!args.out_records.empty()) write_file(args.out_records, records_csv.str());
    if (!args.out_summary.empty()) write_file(args.out_summary, summary_csv.str());
    if (!args.out_svg.empty()) {
        std::ostringstream svg;
        snmc::write_boxplot_svg(svg, records, truths);
        write_file(args.out_svg, svg.str());
    }
    std::cout << summary_csv.str();
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sobol' index estimation for stochastic simulators (nested Monte Carlo)"};
    app.set_version_flag("--version", std::string("snmc ") + snmc::kVersion);
    app.require_subcommand(1);

    AllocateArgs alloc;
    CLI::App* allocate = app.add_subcommand(
        "allocate", "Compute the adaptive repetition/exploration split for a budget");
    allocate->add_option("--rho", alloc.rho, "Intrinsic-noise magnitude");
    allocate->add_option("--rho-from", alloc.rho_from, "CSV of pilot pairs (two values per line)");
    allocate->add_option("--rho-mode", alloc.rho_mode, "squared-diff or corrected");
    allocate->add_option("--T", alloc.budget, "Per-branch evaluation budget")->required();

    EstimateArgs est;
    CLI::App* estimate = app.add_subcommand("estimate", "Estimate Sobol' indices for one model");
    estimate->add_option("--config", est.config_path, "JSON run configuration");
    estimate->add_option("--model", est.model, "Builtin model: linear or ishigami");
    estimate->add_option("--sigma", est.sigma, "Linear model noise scale");
    estimate->add_option("--a", est.a, "Ishigami a");
    estimate->add_option("--b", est.b, "Ishigami b");
    estimate->add_option("--groups", est.groups, "Groups, e.g. \"1;2;1,2\"");
    estimate->add_option("--T", est.budget, "Per-branch evaluation budget");
    estimate->add_option("--r0", est.r0, "Pilot explorations");
    estimate->add_option("--shift", est.h, "Regularization shift h in (0,1)");
    estimate->add_option("--seed", est.seed, "Master seed");
    estimate->add_option("--strategy", est.strategy, "fixed(c), sqrt or opt");
    estimate->add_option("--rho-mode", est.rho_mode, "squared-diff or corrected");
    estimate->add_option("--rho-override", est.rho_override, "Skip the pilot estimate, use this rho");
    estimate->add_option("--workers", est.workers, "Evaluation-fill workers (0 = hardware)");
    estimate->add_flag("--totals-from-raw", est.totals_from_raw, "Derive total indices from raw values");
    estimate->add_option("--report", est.out_report, "Write the JSON report here");
    estimate->add_option("--csv", est.out_csv, "Write per-group CSV rows here");
    estimate->add_option("--table", est.out_table, "Save the evaluation table here");

    BenchArgs bench;
    CLI::App* bench_cmd = app.add_subcommand("bench", "Replication study across budgets and strategies");
    bench_cmd->add_option("--config", bench.config_path, "JSON experiment configuration");
    bench_cmd->add_option("--model", bench.model, "Builtin model: linear or ishigami");
    bench_cmd->add_option("--sigma", bench.sigma, "Linear model noise scale");
    bench_cmd->add_option("--a", bench.a, "Ishigami a");
    bench_cmd->add_option("--b", bench.b, "Ishigami b");
    bench_cmd->add_option("--groups", bench.groups, "Groups, e.g. \"1;2\"");
    bench_cmd->add_option("--grid", bench.grid, "Comma-separated budgets");
    bench_cmd->add_option("--strategies", bench.strategies, "Semicolon-separated strategies");
    bench_cmd->add_option("-N,--replications", bench.replications, "Replications per cell");
    bench_cmd->add_option("--r0", bench.r0, "Pilot explorations");
    bench_cmd->add_option("--shift", bench.h, "Regularization shift h");
    bench_cmd->add_option("--seed", bench.seed, "Master seed");
    bench_cmd->add_option("--rho-mode", bench.rho_mode, "squared-diff or corrected");
    bench_cmd->add_option("--workers", bench.fill_workers, "Fill workers per run");
    bench_cmd->add_option("--replication-workers", bench.replication_workers,
                          "Parallel replication runs (0 = hardware)");
    bench_cmd->add_option("--summary-on", bench.summary_on, "Summarize 'reg' or 'raw' estimates");
    bench_cmd->add_option("--records", bench.out_records, "Records CSV path");
    bench_cmd->add_option("--summary", bench.out_summary, "Summary CSV path");
    bench_cmd->add_option("--svg", bench.out_svg, "Boxplot SVG path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return kExitUsage;
    }

    try {
        if (allocate->parsed()) return cmd_allocate(alloc);
        if (estimate->parsed()) return cmd_estimate(est);
        if (bench_cmd->parsed()) return cmd_bench(bench);
        std::cerr << app.help() << "\n";
        return kExitUsage;
    } catch (const snmc::BudgetExceeded& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const snmc::BudgetAlreadyConsumed& e) {
        std::cerr << "budget error: " << e.what() << "\n";
        return kExitBudget;
    } catch (const snmc::ProtocolError& e) {
        std::cerr << "external model error: " << e.what() << "\n";
        return kExitProtocol;
    } catch (const snmc::ValidationError& e) {
        std::cerr << "configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
