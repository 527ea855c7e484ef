#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dqsops/aggregation.hpp"
#include "dqsops/config.hpp"
#include "dqsops/types.hpp"

namespace dqsops {

inline constexpr std::size_t kFeatureCount = 13;

inline constexpr std::array<std::string_view, kFeatureCount> kFeatureNames = {
    "missing_fraction", "count_valid", "mean", "std", "min", "max", "q25", "q50", "q75",
    "third_standardized_moment", "fourth_standardized_moment", "fraction_below_lo",
    "fraction_above_hi"};

// FNV-1a over the comma-joined feature names; stored in model files so a
// model is never fed features in a different order.
std::uint64_t feature_order_hash();

using FeatureVector = std::array<double, kFeatureCount>;

// Cheap window summary for the surrogate. Statistics cover present values
// only; a window with no present values gives missing_fraction = 1 and zeros
// elsewhere. Quantiles interpolate linearly between order statistics. The
// two out-of-range fractions are relative to the full window length.
FeatureVector extract_features(const DataWindow& window, double integrity_min,
                               double integrity_max);
FeatureVector extract_features(const DataWindow& window, const PipelineConfig& cfg);

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;

    bool operator==(const TreeNode&) const = default;
};

class RegressionTree {
public:
    RegressionTree() = default;
    explicit RegressionTree(std::vector<TreeNode> nodes);

    // Goes left when x[feature] <= threshold.
    double predict(std::span<const double> x) const;
    const std::vector<TreeNode>& nodes() const noexcept { return nodes_; }

    bool operator==(const RegressionTree&) const = default;

private:
    std::vector<TreeNode> nodes_;
};

// Random-forest style ensemble of variance-reduction regression trees.
class SurrogateModel {
public:
    static constexpr std::size_t kMinTrainingRecords = 20;

    // Rows of x are feature vectors. Throws InsufficientTrainingData below
    // kMinTrainingRecords rows and DegenerateTarget for constant y.
    static SurrogateModel train(const Matrix& x, std::span<const double> y,
                                const ForestParams& params, std::uint64_t seed,
                                std::uint64_t feature_hash = feature_order_hash());
    static SurrogateModel train(std::span<const FeatureVector> x, std::span<const double> y,
                                const ForestParams& params, std::uint64_t seed);

    SurrogateModel(std::vector<RegressionTree> trees, ForestParams params, std::uint64_t seed,
                   std::uint64_t feature_hash, std::size_t n_features);

    // Mean of the tree outputs. Throws FeatureVersionMismatch when the model
    // was trained on a different feature layout.
    double predict(const FeatureVector& features) const;
    double predict_row(std::span<const double> x) const;

    const std::vector<RegressionTree>& trees() const noexcept { return trees_; }
    const ForestParams& params() const noexcept { return params_; }
    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t feature_hash() const noexcept { return feature_hash_; }
    std::size_t n_features() const noexcept { return n_features_; }

    // Text layout documented in docs/formats.md.
    void save(const std::filesystem::path& path) const;
    static SurrogateModel load(const std::filesystem::path& path);

    bool operator==(const SurrogateModel&) const = default;

private:
    std::vector<RegressionTree> trees_;
    ForestParams params_;
    std::uint64_t seed_ = 0;
    std::uint64_t feature_hash_ = 0;
    std::size_t n_features_ = 0;
};

struct OracleReport {
    double mae = 0.0;
    std::optional<double> r2;  // empty when the true values have no variance
    std::size_t n_evaluated = 0;
    double cv_of_errors = 0.0;  // std / mean of absolute errors, 0 when the mean is 0
};

// MAE and R^2 of predictions against ground truth. Throws EmptyEvaluation
// and LengthMismatch.
OracleReport evaluate_oracle(std::span<const double> y_true, std::span<const double> y_pred);

}  // namespace dqsops
