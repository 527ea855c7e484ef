#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <vector>

#include "dqsops/aggregation.hpp"
#include "dqsops/anomaly.hpp"
#include "dqsops/config.hpp"
#include "dqsops/mutation.hpp"
#include "dqsops/predictor.hpp"
#include "dqsops/repository.hpp"
#include "dqsops/scorers.hpp"
#include "dqsops/stream.hpp"

namespace dqsops {

// ---------------------------------------------------------------------------
// Initialization
// ---------------------------------------------------------------------------

struct ReferenceArtifacts {
    AnomalyDetector detector;
    ReferenceDistribution reference;
};

// Fits the anomaly detector and the reference distribution on the next
// cfg.init.reference_windows clean windows of `clean`.
ReferenceArtifacts fit_references(WindowSource& clean, const PipelineConfig& cfg);

// One standard-scored training window.
struct TrainingRow {
    std::int64_t window_id = 0;
    DimensionScoreVector scores;
    FeatureVector features{};
    double duration_seconds = 0.0;
};

// Mutates `clean` with its per-window plan, then scores and featurizes it.
TrainingRow make_training_row(const DataWindow& clean, const MutationPlan& ceilings,
                              const ScoringReferences& refs, const PipelineConfig& cfg);

// Rows at positions i % kValidationStride == kValidationStride - 1 form the
// held-out split.
inline constexpr std::size_t kValidationStride = 5;

struct SurrogateFit {
    Aggregator aggregator;
    std::vector<double> targets;  // consolidated score per row
    double tau = 0.0;
    SurrogateModel model;
    OracleReport validation;
};

// Fits the aggregator on every row, trains the surrogate on the training
// split and evaluates it on the held-out split. tau is cfg.tau_mae when set,
// else cfg.tau_fraction * std(targets).
SurrogateFit fit_surrogate(std::span<const TrainingRow> rows, const PipelineConfig& cfg);

struct InitializationResult {
    AnomalyDetector detector;
    ReferenceDistribution reference;
    Aggregator aggregator;
    SurrogateModel model;
    double tau = 0.0;
    OracleReport validation;
    std::vector<TrainingRow> rows;
    std::vector<double> targets;
    int rounds = 0;

    std::vector<LabeledExample> labeled() const;
    std::vector<ScoreRecord> records() const;
};

// The warm-start loop: references from clean data, then batches of mutated
// windows until the held-out MAE reaches tau. Throws
// InitializationBudgetExhausted once cfg.init.max_windows training windows
// (or the source) are used up.
InitializationResult run_initialization(WindowSource& clean, const MutationPlan& plan,
                                        const PipelineConfig& cfg);

// ---------------------------------------------------------------------------
// Method activator
// ---------------------------------------------------------------------------

// Holds the serving model; readers take a snapshot, a swap replaces it whole.
class ModelSlot {
public:
    explicit ModelSlot(std::shared_ptr<const SurrogateModel> model) : model_(std::move(model)) {}
    std::shared_ptr<const SurrogateModel> get() const {
        std::lock_guard lock(mutex_);
        return model_;
    }
    void swap_in(std::shared_ptr<const SurrogateModel> model) {
        std::lock_guard lock(mutex_);
        model_ = std::move(model);
    }

private:
    mutable std::mutex mutex_;
    std::shared_ptr<const SurrogateModel> model_;
};

enum class ActivatorMode { Initializing, Serving, Retraining };
enum class OracleDecision { Continue, Retrain };

std::string_view to_string(ActivatorMode m);

struct ActivatorState {
    int windows_in_chunk = 0;
    ActivatorMode mode = ActivatorMode::Serving;
    struct PendingPair {
        std::int64_t window_id;
        double ground_truth;
        double predicted;
    };
    std::vector<PendingPair> pending_eval;
    int retrain_round = 0;
    std::int64_t chunk_index = 0;
    bool alert = false;
    std::size_t failed_windows = 0;
    std::size_t swaps = 0;
};

struct ActivatorSinks {
    std::function<void(const ScoreRecord&)> record;
    std::function<void(const EvaluationEntry&)> evaluation;
    std::function<void(const LabeledExample&)> ground_truth;
    std::function<void(bool alert)> status;
};

struct RouteResult {
    std::vector<ConsolidatedScore> scores;
    std::optional<OracleReport> oracle;
    std::optional<OracleDecision> decision;
    bool failed = false;
};

// Chunked scheduler: the surrogate scores every window, the last
// n_ground_truth windows of each chunk of beta windows are also scored by
// the standard path, and the chunk closes with an oracle check against tau.
// A failed check switches to dual-path scoring until a retrained model passes
// validation. Not thread-safe; one owner advances it.
class Activator {
public:
    // cfg.tau_mae must be resolved. `training_store` seeds the retraining set.
    Activator(PipelineConfig cfg, ScoringReferences refs, Aggregator aggregator,
              std::shared_ptr<const SurrogateModel> model,
              std::vector<LabeledExample> training_store, ActivatorSinks sinks = {});

    RouteResult route_window(const DataWindow& window);

    // Adds a (ground truth, prediction) pair to the pending checkpoint, as
    // route_window does for the trailing windows of a chunk.
    void buffer_pair(const ActivatorState::PendingPair& pair) { state_.pending_eval.push_back(pair); }

    // Evaluates the buffered pairs; Retrain iff MAE > tau. Clears the buffer.
    std::pair<OracleReport, OracleDecision> run_oracle_checkpoint();

    // Trains a candidate on the training store and swaps it in when its
    // held-out MAE is within tau.
    void execute_retrain();

    const ActivatorState& state() const noexcept { return state_; }
    double tau() const noexcept { return tau_; }
    std::shared_ptr<const SurrogateModel> model() const { return slot_.get(); }
    std::size_t training_store_size() const noexcept { return store_.size(); }

private:
    void emit_evaluation(std::size_t n, const OracleReport& r, std::string_view decision);
    void set_alert();

    PipelineConfig cfg_;
    ScoringReferences refs_;
    Aggregator aggregator_;
    ModelSlot slot_;
    std::vector<LabeledExample> store_;
    ActivatorSinks sinks_;
    ActivatorState state_;
    double tau_;
    std::uint64_t retrain_attempts_ = 0;
};

}  // namespace dqsops
