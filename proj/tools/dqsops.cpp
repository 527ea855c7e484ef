// dqsops command-line tool: init, run, score, bench, sweep-mutation.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "dqsops/activator.hpp"
#include "dqsops/errors.hpp"
#include "dqsops/harness.hpp"
#include "dqsops/repository.hpp"
#include "dqsops/stream.hpp"

namespace fs = std::filesystem;
using namespace dqsops;

namespace {

enum ExitCode : int {
    kOk = 0,
    kConfigFailure = 1,
    kDataFailure = 2,
    kInitExhausted = 3,
    kAlert = 4,
};

struct CommonOptions {
    std::string config;
    std::string input;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
    bool canonical = false;
};

void setup_logging() {
    auto logger = spdlog::stderr_color_mt("dqsops");
    spdlog::set_default_logger(logger);
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("DQSOPS_LOG");
    spdlog::set_level(env ? spdlog::level::from_str(env) : spdlog::level::warn);
}

std::unique_ptr<WindowSource> open_input(const std::string& input, int window_size) {
    if (input == "-") return std::make_unique<TextWindowSource>(std::cin, window_size);
    return std::make_unique<FileWindowSource>(input, window_size);
}

void write_status(const PipelineConfig& cfg, bool alert) {
    std::ofstream out(cfg.paths.status_file, std::ios::trunc);
    if (!out) throw DataError("cannot write status file '" + cfg.paths.status_file + "'");
    out << "alert = " << (alert ? "true" : "false") << '\n';
}

PipelineConfig load_with_paths(const CommonOptions& o) {
    auto cfg = load_config(o.config);
    if (o.seed) cfg.seed = *o.seed;
    const fs::path dir = o.out.empty() ? fs::path(o.config).parent_path() : fs::path(o.out);
    if (!o.out.empty()) {
        fs::create_directories(dir);
        cfg.paths = {};
    }
    default_artifact_paths(cfg, dir.empty() ? fs::path(".") : dir);
    return cfg;
}

int cmd_init(const CommonOptions& o) {
    auto cfg = load_with_paths(o);
    std::unique_ptr<WindowSource> source;
    if (o.input.empty()) {
        source = std::make_unique<SyntheticWindowSource>(cfg, cfg.seed, std::nullopt);
    } else {
        source = open_input(o.input, cfg.window_size);
    }
    auto result = run_initialization(*source, MutationPlan::from_config(cfg), cfg);

    result.reference.save(cfg.paths.reference_sample);
    result.detector.save(cfg.paths.anomaly_model);
    result.aggregator.save(cfg.paths.aggregator);
    result.model.save(cfg.paths.surrogate_model);
    {
        ScoreRepository repo(cfg.paths.score_repository, true, o.canonical);
        for (const auto& r : result.records()) repo.append(r);
    }
    write_feature_store(cfg.paths.feature_store, result.labeled());
    std::ofstream(cfg.paths.evaluation_log, std::ios::trunc);
    write_status(cfg, false);

    // Only tau goes back; --out and --seed stay command-line overrides.
    auto stored = load_config(o.config);
    stored.tau_mae = result.tau;
    save_config(stored, o.config);

    std::cout << "windows " << result.rows.size() << "\nrounds " << result.rounds << "\nmae "
              << result.validation.mae << "\nr2 ";
    if (result.validation.r2) {
        std::cout << *result.validation.r2;
    } else {
        std::cout << "NA";
    }
    std::cout << "\ntau " << result.tau << '\n';
    return kOk;
}

int cmd_run(const CommonOptions& o, std::int64_t windows) {
    auto cfg = load_with_paths(o);
    if (!cfg.tau_mae) throw ConfigError("tau_mae is unset; run 'dqsops init' first");
    auto detector = AnomalyDetector::load(cfg.paths.anomaly_model);
    auto reference = ReferenceDistribution::load(cfg.paths.reference_sample);
    auto aggregator = Aggregator::load(cfg.paths.aggregator);
    auto model = std::make_shared<const SurrogateModel>(SurrogateModel::load(cfg.paths.surrogate_model));
    auto store = read_feature_store(cfg.paths.feature_store);

    ScoreRepository repo(cfg.paths.score_repository, false, o.canonical);
    std::ofstream eval_log(cfg.paths.evaluation_log, std::ios::app);
    std::ofstream feature_log(cfg.paths.feature_store, std::ios::app);
    if (!eval_log || !feature_log) throw DataError("cannot open run logs for appending");

    ActivatorSinks sinks;
    sinks.record = [&](const ScoreRecord& r) { repo.append(r); };
    sinks.evaluation = [&](const EvaluationEntry& e) {
        eval_log << format_evaluation_entry(e) << '\n';
    };
    sinks.ground_truth = [&](const LabeledExample& e) {
        feature_log << format_labeled_example(e) << '\n';
    };
    sinks.status = [&](bool alert) { write_status(cfg, alert); };

    Activator activator(cfg, make_references(cfg, std::move(detector), std::move(reference)),
                        std::move(aggregator), model, std::move(store), sinks);

    std::unique_ptr<WindowSource> source;
    if (o.input.empty()) {
        const std::uint64_t stream_seed = o.seed ? *o.seed : cfg.seed + 1;
        source = std::make_unique<SyntheticWindowSource>(cfg, stream_seed, windows,
                                                         MutationPlan::from_config(cfg));
    } else {
        source = open_input(o.input, cfg.window_size);
    }
    std::size_t routed = 0;
    while (auto w = source->next()) {
        activator.route_window(*w);
        ++routed;
    }
    repo.flush();
    const auto& st = activator.state();
    if (!st.alert) write_status(cfg, false);
    std::cout << "windows " << routed << "\nchunks " << st.chunk_index << "\nmode "
              << to_string(st.mode) << "\nswaps " << st.swaps << "\nfailed " << st.failed_windows
              << "\nalert " << (st.alert ? "true" : "false") << '\n';
    return st.alert ? kAlert : kOk;
}

int cmd_score(const CommonOptions& o) {
    auto cfg = load_with_paths(o);
    if (o.input.empty()) throw ConfigError("score needs --input");
    auto refs = make_references(cfg, AnomalyDetector::load(cfg.paths.anomaly_model),
                                ReferenceDistribution::load(cfg.paths.reference_sample));
    auto aggregator = Aggregator::load(cfg.paths.aggregator);
    auto source = open_input(o.input, cfg.window_size);
    while (auto w = source->next()) {
        auto scored = score_all_dimensions(*w, refs, cfg);
        ScoreRecord r;
        r.window_id = w->window_id;
        r.wall_clock = std::chrono::system_clock::now();
        r.method = Method::Standard;
        r.consolidated = aggregator.consolidate(scored.scores);
        r.dimension_scores = std::move(scored.scores);
        r.scoring_duration = scored.duration_seconds;
        std::cout << format_score_record(r, o.canonical) << '\n';
    }
    return kOk;
}

template <class Write>
void emit(const std::string& out, Write&& write) {
    if (out.empty() || out == "-") {
        write(std::cout);
        return;
    }
    std::ofstream f(out, std::ios::trunc);
    if (!f) throw DataError("cannot write '" + out + "'");
    write(f);
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();
    CLI::App app{"Streaming data-quality scoring with a learned fast path"};
    app.require_subcommand(1);

    CommonOptions o;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "Configuration file")->required();
        sub->add_option("--seed", o.seed, "Override the configured seed");
        sub->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv"}));
    };

    auto* init = app.add_subcommand("init", "Fit references, aggregator and surrogate");
    add_common(init);
    init->add_option("--input", o.input, "Clean data file, or - for stdin (default: synthetic)");
    init->add_option("--out", o.out, "Artifact directory (default: next to the config)");
    init->add_flag("--canonical", o.canonical, "Write fixed wall-clock and duration columns");

    std::int64_t run_windows = 100;
    auto* run = app.add_subcommand("run", "Score a stream with the method activator");
    add_common(run);
    run->add_option("--input", o.input, "Data file, or - for stdin (default: synthetic)");
    run->add_option("--out", o.out, "Artifact directory (default: next to the config)");
    run->add_option("--windows", run_windows, "Synthetic windows to stream")->check(CLI::PositiveNumber);
    run->add_flag("--canonical", o.canonical, "Write fixed wall-clock and duration columns");

    auto* score = app.add_subcommand("score", "Standard-score every window of a file");
    add_common(score);
    score->add_option("--input", o.input, "Data file, or - for stdin")->required();
    score->add_option("--out", o.out, "Artifact directory (default: next to the config)");
    score->add_flag("--canonical", o.canonical, "Write fixed wall-clock and duration columns");

    BenchOptions bench_opt;
    std::string bench_out;
    auto* bench = app.add_subcommand("bench", "Time standard vs predicted scoring");
    add_common(bench);
    bench->add_option("--out", bench_out, "CSV output file (default: stdout)");
    bench->add_option("--windows", bench_opt.measured_windows, "Measured windows per cell");
    bench->add_option("--warmup", bench_opt.warmup_windows, "Discarded warm-up windows");
    bench->add_option("--training-windows", bench_opt.training_windows, "Surrogate training windows");

    SweepOptions sweep_opt;
    std::string sweep_out;
    std::vector<double> pcts{0, 5, 10, 15, 20, 25, 30, 35, 40, 45, 50};
    auto* sweep = app.add_subcommand("sweep-mutation", "Surrogate quality against mutation intensity");
    add_common(sweep);
    sweep->add_option("--out", sweep_out, "CSV output file (default: stdout)");
    sweep->add_option("--pcts", pcts, "Mutation percentages")->delimiter(',');
    sweep->add_option("--windows", sweep_opt.training_windows, "Training windows per percentage");
    sweep->add_option("--validation-windows", sweep_opt.validation_windows, "Held-out windows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Usage errors count as configuration errors.
        return app.exit(e) == 0 ? kOk : kConfigFailure;
    }

    try {
        if (init->parsed()) return cmd_init(o);
        if (run->parsed()) return cmd_run(o, run_windows);
        if (score->parsed()) return cmd_score(o);
        if (bench->parsed()) {
            auto cfg = load_config(o.config);
            bench_opt.seed = o.seed.value_or(cfg.seed);
            const auto rows = run_bench(cfg, bench_opt);
            emit(bench_out, [&](std::ostream& s) { write_bench_csv(s, rows); });
            return kOk;
        }
        if (sweep->parsed()) {
            auto cfg = load_config(o.config);
            sweep_opt.seed = o.seed.value_or(cfg.seed);
            const auto rows = run_mutation_sweep(cfg, pcts, sweep_opt);
            emit(sweep_out, [&](std::ostream& s) { write_sweep_csv(s, rows); });
            return kOk;
        }
    } catch (const ConfigError& e) {
        spdlog::error("{}", e.what());
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigFailure;
    } catch (const InitializationBudgetExhausted& e) {
        std::cerr << "initialization failed: " << e.what() << " (best mae " << e.best_mae() << ")\n";
        return kInitExhausted;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kDataFailure;
    }
    return kOk;
}
