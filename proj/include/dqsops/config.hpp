#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dqsops/types.hpp"

namespace dqsops {

// Mutation intensities in percent. The cell-level classes (accuracy,
// completeness, consistency) are per-window ceilings, see window_plan();
// distribution is the probability that a window is shifted.
struct MutationSettings {
    double accuracy = 20.0;
    double completeness = 20.0;
    double consistency = 20.0;
    double distribution = 20.0;
    double shift_magnitude = 1.0;      // window standard deviations
    double spike_magnitude = 6.0;      // window standard deviations
    double out_of_range_margin = 5.0;  // data units beyond the integrity bound

    bool operator==(const MutationSettings&) const = default;
};

struct ForestParams {
    int n_trees = 50;
    int max_depth = 8;
    int min_samples_leaf = 5;
    int max_features = 0;  // 0 selects ceil(sqrt(feature count))
    bool bootstrap = true;

    bool operator==(const ForestParams&) const = default;
};

struct InitSettings {
    int reference_windows = 50;
    int batch_windows = 400;
    int max_windows = 2000;

    bool operator==(const InitSettings&) const = default;
};

// Synthetic pump-down stream: baseline + amplitude * exp(-t / (decay * N)) plus
// Gaussian noise truncated at 5 sigma, restarted at every window.
struct GeneratorParams {
    double baseline = 20.0;
    double amplitude = 6.0;
    double decay = 0.3;
    double noise_std = 2.0;

    bool operator==(const GeneratorParams&) const = default;
};

struct ArtifactPaths {
    std::string reference_sample;
    std::string anomaly_model;
    std::string aggregator;
    std::string surrogate_model;
    std::string score_repository;
    std::string evaluation_log;
    std::string feature_store;
    std::string status_file;

    bool operator==(const ArtifactPaths&) const = default;
};

struct PipelineConfig {
    int window_size = 1000;
    std::vector<Dimension> enabled_dimensions{kAllDimensions.begin(), kAllDimensions.end()};
    double integrity_min = 0.0;
    double integrity_max = 60.0;
    double anomaly_threshold_k = 3.5;
    int histogram_bins = 32;
    double histogram_lo = 0.0;
    double histogram_hi = 60.0;
    int beta = 10;
    int n_ground_truth = 1;
    // Absolute oracle tolerance. When unset, initialization derives it as
    // tau_fraction * std(initialization consolidated scores).
    std::optional<double> tau_mae;
    double tau_fraction = 0.1;
    int max_retrain_rounds = 3;
    std::uint64_t seed = 42;
    MutationSettings mutation;
    ForestParams forest;
    InitSettings init;
    GeneratorParams generator;
    ArtifactPaths paths;

    bool operator==(const PipelineConfig&) const = default;
};

// Checks every invariant; throws ConfigError naming the first violation.
PipelineConfig validate_config(PipelineConfig raw);

// `key = value` lines, `#` comments, comma-separated lists. Unknown keys and
// malformed values are ConfigErrors. The result is validated.
PipelineConfig parse_config(std::string_view text);
PipelineConfig load_config(const std::filesystem::path& path);

// Writes every key, doubles with round-trip precision.
std::string serialize_config(const PipelineConfig& cfg);
void save_config(const PipelineConfig& cfg, const std::filesystem::path& path);

// Fills empty artifact paths with default file names under `dir`.
void default_artifact_paths(PipelineConfig& cfg, const std::filesystem::path& dir);

}  // namespace dqsops
