#include "dqsops/activator.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include <spdlog/spdlog.h>

#include "dqsops/errors.hpp"
#include "dqsops/random.hpp"

namespace dqsops {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

double population_std(std::span<const double> v) {
    if (v.empty()) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

bool is_holdout(std::size_t position) {
    return position % kValidationStride == kValidationStride - 1;
}

ScoreRecord standard_record(std::int64_t id, const DimensionScoreVector& scores, double value,
                            double duration) {
    ScoreRecord r;
    r.window_id = id;
    r.wall_clock = std::chrono::system_clock::now();
    r.method = Method::Standard;
    r.dimension_scores = scores;
    r.consolidated = value;
    r.scoring_duration = duration;
    return r;
}

}  // namespace

ReferenceArtifacts fit_references(WindowSource& clean, const PipelineConfig& cfg) {
    std::vector<double> values;
    values.reserve(static_cast<std::size_t>(cfg.init.reference_windows) *
                   static_cast<std::size_t>(cfg.window_size));
    int taken = 0;
    while (taken < cfg.init.reference_windows) {
        auto w = clean.next();
        if (!w) break;
        auto present = w->present_values();
        values.insert(values.end(), present.begin(), present.end());
        ++taken;
    }
    if (taken < cfg.init.reference_windows) {
        throw InsufficientData("reference fit needs " + std::to_string(cfg.init.reference_windows) +
                               " windows, source gave " + std::to_string(taken));
    }
    auto detector = AnomalyDetector::fit(values, cfg.anomaly_threshold_k);
    auto reference = ReferenceDistribution::from_values(values, cfg.histogram_bins,
                                                        cfg.histogram_lo,
                                                        cfg.histogram_hi);
    return {std::move(detector), std::move(reference)};
}

TrainingRow make_training_row(const DataWindow& clean, const MutationPlan& ceilings,
                              const ScoringReferences& refs, const PipelineConfig& cfg) {
    const auto mutated = mutate_window(clean, window_plan(ceilings, clean)).window;
    auto scored = score_all_dimensions(mutated, refs, cfg);
    TrainingRow row;
    row.window_id = clean.window_id;
    row.scores = std::move(scored.scores);
    row.features = extract_features(mutated, cfg);
    row.duration_seconds = scored.duration_seconds;
    return row;
}

SurrogateFit fit_surrogate(std::span<const TrainingRow> rows, const PipelineConfig& cfg) {
    std::vector<DimensionScoreVector> scores;
    scores.reserve(rows.size());
    for (const auto& r : rows) scores.push_back(r.scores);
    auto aggregator = Aggregator::fit(scores);

    std::vector<double> targets;
    targets.reserve(rows.size());
    for (const auto& s : scores) targets.push_back(aggregator.consolidate(s));
    const double tau = cfg.tau_mae.value_or(cfg.tau_fraction * population_std(targets));

    std::vector<FeatureVector> train_x, val_x;
    std::vector<double> train_y, val_y;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (is_holdout(i)) {
            val_x.push_back(rows[i].features);
            val_y.push_back(targets[i]);
        } else {
            train_x.push_back(rows[i].features);
            train_y.push_back(targets[i]);
        }
    }
    auto model = SurrogateModel::train(train_x, train_y, cfg.forest, cfg.seed);
    std::vector<double> pred;
    pred.reserve(val_x.size());
    for (const auto& f : val_x) pred.push_back(model.predict(f));
    auto report = evaluate_oracle(val_y, pred);
    return {std::move(aggregator), std::move(targets), tau, std::move(model), report};
}

std::vector<LabeledExample> InitializationResult::labeled() const {
    std::vector<LabeledExample> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.push_back({rows[i].window_id, rows[i].features, targets[i]});
    }
    return out;
}

std::vector<ScoreRecord> InitializationResult::records() const {
    std::vector<ScoreRecord> out;
    out.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.push_back(standard_record(rows[i].window_id, rows[i].scores, targets[i],
                                      rows[i].duration_seconds));
    }
    return out;
}

InitializationResult run_initialization(WindowSource& clean, const MutationPlan& plan,
                                        const PipelineConfig& cfg) {
    validate_config(cfg);
    auto refs_fit = fit_references(clean, cfg);
    const auto refs = make_references(cfg, refs_fit.detector, refs_fit.reference);

    std::vector<TrainingRow> rows;
    double best_mae = std::numeric_limits<double>::infinity();
    std::optional<double> best_r2;
    bool exhausted = false;
    int round = 0;
    while (!exhausted) {
        ++round;
        const auto budget_left = static_cast<std::size_t>(cfg.init.max_windows) - rows.size();
        const auto batch = std::min(static_cast<std::size_t>(cfg.init.batch_windows), budget_left);
        for (std::size_t i = 0; i < batch; ++i) {
            auto w = clean.next();
            if (!w) {
                exhausted = true;
                break;
            }
            rows.push_back(make_training_row(*w, plan, refs, cfg));
        }
        if (rows.size() >= static_cast<std::size_t>(cfg.init.max_windows)) exhausted = true;

        std::optional<SurrogateFit> fitted;
        try {
            fitted.emplace(fit_surrogate(rows, cfg));
        } catch (const InsufficientTrainingData&) {
            if (exhausted) throw;
        } catch (const TooFewRows&) {
            if (exhausted) throw;
        }
        if (!fitted) continue;
        auto& fit = *fitted;

        spdlog::info("init round {}: {} windows, mae {:.6g}, tau {:.6g}", round, rows.size(),
                     fit.validation.mae, fit.tau);
        if (fit.validation.mae < best_mae) {
            best_mae = fit.validation.mae;
            best_r2 = fit.validation.r2;
        }
        if (fit.validation.mae <= fit.tau) {
            InitializationResult out{std::move(refs_fit.detector),
                                     std::move(refs_fit.reference),
                                     std::move(fit.aggregator),
                                     std::move(fit.model),
                                     fit.tau,
                                     fit.validation,
                                     std::move(rows),
                                     std::move(fit.targets),
                                     round};
            return out;
        }
    }
    throw InitializationBudgetExhausted(
        "initialization used its window budget without reaching tau", best_mae,
        best_r2.value_or(std::numeric_limits<double>::quiet_NaN()));
}

std::string_view to_string(ActivatorMode m) {
    switch (m) {
        case ActivatorMode::Initializing: return "initializing";
        case ActivatorMode::Serving: return "serving";
        case ActivatorMode::Retraining: return "retraining";
    }
    return "?";
}

Activator::Activator(PipelineConfig cfg, ScoringReferences refs, Aggregator aggregator,
                     std::shared_ptr<const SurrogateModel> model,
                     std::vector<LabeledExample> training_store, ActivatorSinks sinks)
    : cfg_(std::move(cfg)),
      refs_(std::move(refs)),
      aggregator_(std::move(aggregator)),
      slot_(std::move(model)),
      store_(std::move(training_store)),
      sinks_(std::move(sinks)),
      tau_(0.0) {
    validate_config(cfg_);
    if (!cfg_.tau_mae) throw ConfigError("activator needs a resolved tau_mae");
    if (!slot_.get()) throw ConfigError("activator needs a surrogate model");
    tau_ = *cfg_.tau_mae;
}

RouteResult Activator::route_window(const DataWindow& window) {
    RouteResult out;
    const auto model = slot_.get();
    const bool dual = state_.mode == ActivatorMode::Retraining ||
                      state_.windows_in_chunk >= cfg_.beta - cfg_.n_ground_truth;

    std::optional<double> predicted;
    try {
        const auto t0 = Clock::now();
        const double value = model->predict(extract_features(window, cfg_));
        const double duration = seconds_since(t0);
        predicted = value;
        out.scores.push_back({window.window_id, value, Method::Predicted});
        if (sinks_.record) {
            ScoreRecord r;
            r.window_id = window.window_id;
            r.wall_clock = std::chrono::system_clock::now();
            r.method = Method::Predicted;
            r.consolidated = value;
            r.scoring_duration = duration;
            sinks_.record(r);
        }
    } catch (const Error& e) {
        spdlog::warn("window {}: predicted path failed: {}", window.window_id, e.what());
        out.failed = true;
    }

    if (dual) {
        try {
            const auto t0 = Clock::now();
            auto scored = score_all_dimensions(window, refs_, cfg_);
            const double value = aggregator_.consolidate(scored.scores);
            const double duration = seconds_since(t0);
            out.scores.push_back({window.window_id, value, Method::Standard});
            if (sinks_.record) sinks_.record(standard_record(window.window_id, scored.scores, value, duration));

            LabeledExample ex{window.window_id, extract_features(window, cfg_), value};
            store_.push_back(ex);
            if (sinks_.ground_truth) sinks_.ground_truth(ex);
            if (state_.mode == ActivatorMode::Serving && predicted) {
                state_.pending_eval.push_back({window.window_id, value, *predicted});
            }
        } catch (const Error& e) {
            spdlog::warn("window {}: standard path failed: {}", window.window_id, e.what());
            out.failed = true;
        }
    }
    if (out.failed) ++state_.failed_windows;

    ++state_.windows_in_chunk;
    if (state_.windows_in_chunk >= cfg_.beta) {
        state_.windows_in_chunk = 0;
        if (state_.mode == ActivatorMode::Serving) {
            if (!state_.pending_eval.empty()) {
                auto [report, decision] = run_oracle_checkpoint();
                out.oracle = report;
                out.decision = decision;
            } else {
                spdlog::warn("chunk {}: no ground truth to evaluate", state_.chunk_index);
            }
        } else {
            execute_retrain();
        }
        ++state_.chunk_index;
    }
    return out;
}

std::pair<OracleReport, OracleDecision> Activator::run_oracle_checkpoint() {
    std::vector<double> truth, pred;
    for (const auto& p : state_.pending_eval) {
        truth.push_back(p.ground_truth);
        pred.push_back(p.predicted);
    }
    state_.pending_eval.clear();
    const auto report = evaluate_oracle(truth, pred);
    const auto decision = report.mae <= tau_ ? OracleDecision::Continue : OracleDecision::Retrain;
    emit_evaluation(report.n_evaluated, report,
                    decision == OracleDecision::Continue ? "continue" : "retrain");
    if (decision == OracleDecision::Retrain) {
        spdlog::info("chunk {}: mae {:.6g} > tau {:.6g}, retraining", state_.chunk_index,
                     report.mae, tau_);
        state_.mode = ActivatorMode::Retraining;
        state_.retrain_round = 0;
    }
    return {report, decision};
}

void Activator::execute_retrain() {
    if (state_.alert) return;

    std::vector<FeatureVector> train_x, val_x;
    std::vector<double> train_y, val_y;
    for (std::size_t i = 0; i < store_.size(); ++i) {
        auto& x = is_holdout(i) ? val_x : train_x;
        auto& y = is_holdout(i) ? val_y : train_y;
        x.push_back(store_[i].features);
        y.push_back(store_[i].target);
    }

    ++retrain_attempts_;
    std::optional<SurrogateModel> candidate;
    OracleReport report;
    try {
        candidate = SurrogateModel::train(train_x, train_y, cfg_.forest,
                                          mix_seed(cfg_.seed + retrain_attempts_));
        std::vector<double> pred;
        for (const auto& f : val_x) pred.push_back(candidate->predict(f));
        report = evaluate_oracle(val_y, pred);
    } catch (const InsufficientTrainingData& e) {
        spdlog::info("retrain deferred: {}", e.what());
        emit_evaluation(0, OracleReport{}, "deferred");
        return;
    } catch (const DegenerateTarget& e) {
        spdlog::info("retrain deferred: {}", e.what());
        emit_evaluation(0, OracleReport{}, "deferred");
        return;
    } catch (const EmptyEvaluation& e) {
        spdlog::info("retrain deferred: {}", e.what());
        emit_evaluation(0, OracleReport{}, "deferred");
        return;
    }

    if (report.mae <= tau_) {
        slot_.swap_in(std::make_shared<const SurrogateModel>(std::move(*candidate)));
        state_.mode = ActivatorMode::Serving;
        state_.retrain_round = 0;
        ++state_.swaps;
        spdlog::info("retrained model swapped in, validation mae {:.6g}", report.mae);
        emit_evaluation(report.n_evaluated, report, "swap");
        return;
    }
    ++state_.retrain_round;
    emit_evaluation(report.n_evaluated, report, "retrain_failed");
    spdlog::warn("retrain round {} failed, validation mae {:.6g} > tau {:.6g}",
                 state_.retrain_round, report.mae, tau_);
    if (state_.retrain_round >= cfg_.max_retrain_rounds) set_alert();
}

void Activator::emit_evaluation(std::size_t n, const OracleReport& r, std::string_view decision) {
    if (!sinks_.evaluation) return;
    sinks_.evaluation({state_.chunk_index, n, r.mae, r.r2, r.cv_of_errors, std::string(decision)});
}

void Activator::set_alert() {
    state_.alert = true;
    spdlog::error("retraining failed {} rounds in a row, alert raised", state_.retrain_round);
    if (sinks_.status) sinks_.status(true);
}

}  // namespace dqsops
