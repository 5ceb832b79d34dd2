#include "cli.hpp"

#include <cstdio>
#include <filesystem>

#include <CLI11.hpp>

#include "hiforead/backtest.hpp"
#include "hiforead/errors.hpp"
#include "hiforead/log.hpp"
#include "hiforead/pipeline.hpp"

namespace hiforead::cli {

namespace {

struct CommonOptions {
    std::string config_path;
    std::string out_dir;
    int workers = 0;       // 0: keep config value
    std::int64_t seed = -1; // -1: keep config value
    std::vector<std::string> stages;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_stages) {
    cmd->add_option("--config", opts.config_path, "pipeline config file (JSON)")
        ->required();
    cmd->add_option("--out", opts.out_dir, "output directory (overrides config)");
    cmd->add_option("--workers", opts.workers, "worker thread count (overrides config)");
    cmd->add_option("--seed", opts.seed, "random seed (overrides config)");
    if (with_stages) {
        cmd->add_option("--stages", opts.stages,
                        "stages to export (BO,TD,HHAFA,MINT,SSWFS,FINAL)")
            ->delimiter(',');
    }
}

PipelineConfig load_and_override(const CommonOptions& opts) {
    PipelineConfig config = parse_config(opts.config_path);
    if (!opts.out_dir.empty()) config.output_dir = opts.out_dir;
    if (opts.workers > 0) config.workers = opts.workers;
    if (opts.seed >= 0) config.seed = static_cast<std::uint64_t>(opts.seed);
    if (!opts.stages.empty()) {
        config.stages.clear();
        for (const auto& s : opts.stages) config.stages.push_back(parse_stage(s));
    }
    return config;
}

int report_violations(const std::vector<std::string>& violations) {
    for (const auto& v : violations) std::fprintf(stderr, "invalid: %s\n", v.c_str());
    return violations.empty() ? 0 : 2;
}

int cmd_validate(const CommonOptions& opts) {
    PipelineConfig config;
    try {
        config = load_and_override(opts);
    } catch (const ConfigError& e) {
        return report_violations({e.what()});
    }
    std::vector<std::string> violations = validate_config(config);
    if (violations.empty()) {
        // Structural checks need the data loaded.
        try {
            load_inputs(config);
        } catch (const DataError& e) {
            violations.push_back(std::string("data: ") + e.what());
        } catch (const Error& e) {
            violations.push_back(std::string("horizon/folds: ") + e.what());
        }
    }
    if (violations.empty()) {
        std::printf("config ok: %s\n", opts.config_path.c_str());
        return 0;
    }
    return report_violations(violations);
}

int cmd_forecast(const CommonOptions& opts) {
    PipelineConfig config = load_and_override(opts);
    if (const auto violations = validate_config(config); !violations.empty()) {
        return report_violations(violations);
    }
    const ForecastRun run = run_forecast(config);
    const bool coherent =
        write_forecast_outputs(run, config.output_dir, config.stages);
    std::printf("forecast written to %s\n", config.output_dir.c_str());
    if (!coherent) {
        std::fprintf(stderr, "FINAL forecast set is not coherent\n");
        return 1;
    }
    return 0;
}

int cmd_backtest(const CommonOptions& opts) {
    PipelineConfig config = load_and_override(opts);
    if (const auto violations = validate_config(config); !violations.empty()) {
        return report_violations(violations);
    }
    const PreparedData data = load_inputs(config);
    const BacktestReport report =
        run_backtest(data.frame, *data.hierarchy, config);

    std::filesystem::create_directories(config.output_dir);
    const auto dir = std::filesystem::path(config.output_dir);
    write_backtest_summary_csv(report, (dir / "backtest_summary.csv").string());
    write_backtest_detail_json(report, (dir / "backtest_detail.json").string());
    std::fputs(format_backtest_table(report).c_str(), stdout);
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"hierarchical forecasting with multistage reconciliation"};
    app.require_subcommand(1);

    CommonOptions validate_opts, forecast_opts, backtest_opts;
    CLI::App* validate = app.add_subcommand("validate", "check a pipeline config");
    add_common(validate, validate_opts, false);
    CLI::App* forecast =
        app.add_subcommand("forecast", "run the pipeline on the full history");
    add_common(forecast, forecast_opts, true);
    CLI::App* backtest =
        app.add_subcommand("backtest", "rolling-origin evaluation of all stages");
    add_common(backtest, backtest_opts, false);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (validate->parsed()) return cmd_validate(validate_opts);
        if (forecast->parsed()) return cmd_forecast(forecast_opts);
        if (backtest->parsed()) return cmd_backtest(backtest_opts);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace hiforead::cli
