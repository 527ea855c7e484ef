#include <doctest.h>

#include <cmath>
#include <map>

#include "dqsops/activator.hpp"
#include "dqsops/errors.hpp"

using namespace dqsops;

namespace {

// Small shared fixture: references, aggregator and a trained surrogate on
// 200-sample windows.
struct Fixture {
    PipelineConfig cfg;
    ScoringReferences refs;
    std::optional<Aggregator> aggregator;
    std::optional<SurrogateModel> model;
    std::vector<LabeledExample> store;
    double target_std = 0.0;

    Fixture() {
        cfg.window_size = 200;
        cfg.init.reference_windows = 20;
        cfg.forest.n_trees = 20;
        cfg.seed = 5;
        SyntheticWindowSource clean(cfg, 5, std::nullopt);
        const auto r = fit_references(clean, cfg);
        refs = make_references(cfg, r.detector, r.reference);
        const auto plan = MutationPlan::from_config(cfg);
        std::vector<TrainingRow> rows;
        for (int i = 0; i < 200; ++i) rows.push_back(make_training_row(*clean.next(), plan, refs, cfg));
        auto fit = fit_surrogate(rows, cfg);
        aggregator = fit.aggregator;
        model = fit.model;
        double mean = 0.0;
        for (double t : fit.targets) mean += t;
        mean /= static_cast<double>(fit.targets.size());
        for (double t : fit.targets) target_std += (t - mean) * (t - mean);
        target_std = std::sqrt(target_std / static_cast<double>(fit.targets.size()));
        for (std::size_t i = 0; i < rows.size(); ++i)
            store.push_back({rows[i].window_id, rows[i].features, fit.targets[i]});
    }
};

const Fixture& fixture() {
    static const Fixture f;
    return f;
}

std::shared_ptr<const SurrogateModel> constant_model(double c) {
    std::vector<RegressionTree> trees{RegressionTree({TreeNode{-1, 0.0, -1, -1, c}})};
    ForestParams p;
    p.n_trees = 1;
    return std::make_shared<const SurrogateModel>(trees, p, 0, feature_order_hash(), kFeatureCount);
}

struct Log {
    std::vector<ScoreRecord> records;
    std::vector<EvaluationEntry> evals;
    std::size_t ground_truth = 0;
    int alerts = 0;

    ActivatorSinks sinks() {
        return {[this](const ScoreRecord& r) { records.push_back(r); },
                [this](const EvaluationEntry& e) { evals.push_back(e); },
                [this](const LabeledExample&) { ++ground_truth; },
                [this](bool a) { alerts += a ? 1 : 0; }};
    }
    std::size_t count(Method m) const {
        std::size_t c = 0;
        for (const auto& r : records) c += r.method == m;
        return c;
    }
};

PipelineConfig with_tau(double tau, int beta = 10, int n = 1) {
    auto c = fixture().cfg;
    c.tau_mae = tau;
    c.beta = beta;
    c.n_ground_truth = n;
    return c;
}

}  // namespace

TEST_CASE("constructor preconditions") {
    const auto& f = fixture();
    auto cfg = f.cfg;
    CHECK_THROWS_AS(Activator(cfg, f.refs, *f.aggregator, constant_model(0), {}), ConfigError);
    cfg.tau_mae = 0.1;
    CHECK_THROWS_AS(Activator(cfg, f.refs, *f.aggregator, nullptr, {}), ConfigError);
}

TEST_CASE("serving schedule for beta 10, n 1") {
    const auto& f = fixture();
    Log log;
    Activator act(with_tau(1e6), f.refs, *f.aggregator,
                  std::make_shared<const SurrogateModel>(*f.model), f.store, log.sinks());
    SyntheticWindowSource src(f.cfg, 77, std::nullopt, MutationPlan::from_config(f.cfg));
    for (int i = 0; i < 9; ++i) {
        const auto r = act.route_window(*src.next());
        CHECK(r.scores.size() == 1);
        CHECK(r.scores[0].method == Method::Predicted);
        CHECK_FALSE(r.oracle.has_value());
        CHECK(act.state().windows_in_chunk == i + 1);
    }
    const auto last = act.route_window(*src.next());
    CHECK(last.scores.size() == 2);
    REQUIRE(last.decision.has_value());
    CHECK(*last.decision == OracleDecision::Continue);
    CHECK(act.state().windows_in_chunk == 0);
    CHECK(act.state().mode == ActivatorMode::Serving);
    CHECK(log.count(Method::Predicted) == 10);
    CHECK(log.count(Method::Standard) == 1);
    CHECK(log.evals.size() == 1);
    CHECK(log.evals[0].decision == "continue");
}

TEST_CASE("counts per 10 beta windows in serving mode") {
    const auto& f = fixture();
    for (auto [beta, n] : {std::pair{10, 1}, std::pair{6, 2}, std::pair{4, 3}}) {
        Log log;
        Activator act(with_tau(1e6, beta, n), f.refs, *f.aggregator,
                      std::make_shared<const SurrogateModel>(*f.model), f.store, log.sinks());
        SyntheticWindowSource src(f.cfg, 78, std::nullopt, MutationPlan::from_config(f.cfg));
        std::map<std::int64_t, int> per_window;
        for (int i = 0; i < 10 * beta; ++i) {
            const auto r = act.route_window(*src.next());
            CHECK_FALSE(r.scores.empty());
        }
        for (const auto& r : log.records) ++per_window[r.window_id];
        CHECK(per_window.size() == static_cast<std::size_t>(10 * beta));
        CHECK(log.count(Method::Standard) == static_cast<std::size_t>(10 * n));
        CHECK(log.evals.size() == 10);
        for (const auto& e : log.evals) CHECK(e.n == static_cast<std::size_t>(n));
        CHECK(log.ground_truth == static_cast<std::size_t>(10 * n));
    }
}

TEST_CASE("oracle checkpoint boundaries") {
    const auto& f = fixture();
    const double tau = 0.2;
    Activator act(with_tau(tau, 10, 3), f.refs, *f.aggregator, constant_model(0), {});

    act.buffer_pair({0, 1.0, 1.0});
    act.buffer_pair({1, 1.0, 1.0 + tau});
    act.buffer_pair({2, 1.0, 1.0 - 2 * tau});
    auto [report, decision] = act.run_oracle_checkpoint();
    CHECK(report.mae == doctest::Approx(tau).epsilon(1e-15));
    CHECK(report.mae <= tau);
    CHECK(decision == OracleDecision::Continue);
    CHECK(act.state().pending_eval.empty());

    for (int i = 0; i < 3; ++i) act.buffer_pair({i, 0.5 * i, 0.5 * i + 2 * tau});
    auto [r2, d2] = act.run_oracle_checkpoint();
    CHECK(r2.mae == doctest::Approx(2 * tau));
    CHECK(d2 == OracleDecision::Retrain);
    CHECK(act.state().mode == ActivatorMode::Retraining);
}

TEST_CASE("a poor model triggers dual path scoring and a swap") {
    const auto& f = fixture();
    Log log;
    // tau generous enough for a retrained forest, far too small for a constant.
    const double tau = 0.5 * f.target_std;
    Activator act(with_tau(tau), f.refs, *f.aggregator, constant_model(50.0), f.store,
                  log.sinks());
    SyntheticWindowSource src(f.cfg, 79, std::nullopt, MutationPlan::from_config(f.cfg));
    for (int i = 0; i < 10; ++i) act.route_window(*src.next());
    CHECK(act.state().mode == ActivatorMode::Retraining);
    REQUIRE(log.evals.size() == 1);
    CHECK(log.evals[0].decision == "retrain");

    const auto before = log.records.size();
    const auto r = act.route_window(*src.next());
    CHECK(r.scores.size() == 2);
    CHECK(log.records.size() == before + 2);
    for (int i = 0; i < 9; ++i) act.route_window(*src.next());
    CHECK(act.state().swaps == 1);
    CHECK(act.state().mode == ActivatorMode::Serving);
    CHECK(log.evals.back().decision == "swap");
    CHECK(act.model()->predict(FeatureVector{}) != 50.0);

    for (int i = 0; i < 10; ++i) act.route_window(*src.next());
    CHECK(log.evals.back().decision == "continue");
    CHECK(log.evals.back().mae <= tau);
}

TEST_CASE("retrain failures raise the alert after the configured rounds") {
    const auto& f = fixture();
    Log log;
    auto cfg = with_tau(1e-12);
    cfg.max_retrain_rounds = 3;
    Activator act(cfg, f.refs, *f.aggregator, constant_model(50.0), f.store, log.sinks());
    SyntheticWindowSource src(f.cfg, 80, std::nullopt, MutationPlan::from_config(f.cfg));
    for (int i = 0; i < 10 * 5; ++i) {
        const auto r = act.route_window(*src.next());
        CHECK_FALSE(r.scores.empty());
    }
    CHECK(act.state().alert);
    CHECK(log.alerts == 1);
    int failed = 0;
    for (const auto& e : log.evals) failed += e.decision == "retrain_failed";
    CHECK(failed == 3);
    CHECK(act.state().mode == ActivatorMode::Retraining);
    // Dual path continues after the alert.
    CHECK(act.route_window(*src.next()).scores.size() == 2);
}

TEST_CASE("retrain is deferred with a tiny training store") {
    const auto& f = fixture();
    Log log;
    Activator act(with_tau(1e-12), f.refs, *f.aggregator, constant_model(50.0), {}, log.sinks());
    SyntheticWindowSource src(f.cfg, 81, std::nullopt, MutationPlan::from_config(f.cfg));
    for (int i = 0; i < 10; ++i) act.route_window(*src.next());
    CHECK(act.state().mode == ActivatorMode::Retraining);
    CHECK(act.training_store_size() == 1);
    for (int i = 0; i < 10; ++i) act.route_window(*src.next());
    CHECK(log.evals.back().decision == "deferred");
    CHECK(act.state().mode == ActivatorMode::Retraining);
    CHECK(act.state().retrain_round == 0);
}

TEST_CASE("activator runs are deterministic") {
    const auto& f = fixture();
    auto run = [&] {
        Log log;
        Activator act(with_tau(0.5 * f.target_std), f.refs, *f.aggregator, constant_model(50.0),
                      f.store, log.sinks());
        SyntheticWindowSource src(f.cfg, 82, std::nullopt, MutationPlan::from_config(f.cfg));
        for (int i = 0; i < 60; ++i) act.route_window(*src.next());
        std::vector<std::string> lines;
        for (const auto& r : log.records) lines.push_back(format_score_record(r, true));
        for (const auto& e : log.evals) lines.push_back(format_evaluation_entry(e));
        return lines;
    };
    CHECK(run() == run());
}

TEST_CASE("initialization with an unreachable tolerance") {
    auto cfg = fixture().cfg;
    cfg.tau_mae = 1e-9;
    cfg.init.batch_windows = 50;
    cfg.init.max_windows = 100;
    SyntheticWindowSource clean(cfg, 3, std::nullopt);
    CHECK_THROWS_AS(run_initialization(clean, MutationPlan::from_config(cfg), cfg),
                    InitializationBudgetExhausted);
}

TEST_CASE("initialization produces consistent artifacts") {
    auto cfg = fixture().cfg;
    cfg.tau_fraction = 1.0;
    cfg.init.batch_windows = 100;
    cfg.init.max_windows = 300;
    SyntheticWindowSource clean(cfg, 3, std::nullopt);
    const auto init = run_initialization(clean, MutationPlan::from_config(cfg), cfg);
    CHECK(init.validation.mae <= init.tau);
    CHECK(init.rows.size() == init.targets.size());
    CHECK(init.labeled().size() == init.rows.size());
    for (std::size_t i = 0; i < init.rows.size(); ++i)
        CHECK(init.aggregator.consolidate(init.rows[i].scores) == init.targets[i]);
}
