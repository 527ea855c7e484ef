#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dqsops {

enum class Dimension { Accuracy, Completeness, Consistency, Timeliness, Skewness };

inline constexpr std::array<Dimension, 5> kAllDimensions = {
    Dimension::Accuracy, Dimension::Completeness, Dimension::Consistency,
    Dimension::Timeliness, Dimension::Skewness};

std::string_view to_string(Dimension d);
// Throws ConfigError for unknown names.
Dimension parse_dimension(std::string_view name);

// A sample is either a real value or missing. Missing is a distinct state,
// never encoded as NaN.
using Sample = std::optional<double>;
inline constexpr std::nullopt_t Missing = std::nullopt;

struct DataWindow {
    std::int64_t window_id = 0;
    // Milliseconds since the Unix epoch, one per value; empty when the source
    // carries no timestamps.
    std::vector<std::int64_t> timestamps;
    std::vector<Sample> values;
    // True for a trailing window shorter than the configured size.
    bool partial = false;

    std::size_t size() const noexcept { return values.size(); }
    // Non-missing values in stream order.
    std::vector<double> present_values() const;
    std::size_t missing_count() const noexcept;
};

DataWindow make_window(std::int64_t id, std::span<const double> values);

// Per-dimension scores of one window, in configured dimension order.
class DimensionScoreVector {
public:
    DimensionScoreVector() = default;
    DimensionScoreVector(std::int64_t window_id,
                         std::vector<std::pair<Dimension, double>> scores);

    std::int64_t window_id() const noexcept { return window_id_; }
    const std::vector<std::pair<Dimension, double>>& entries() const noexcept { return scores_; }
    std::vector<Dimension> dimensions() const;
    std::vector<double> values() const;
    std::optional<double> get(Dimension d) const;
    std::size_t size() const noexcept { return scores_.size(); }

    bool operator==(const DimensionScoreVector&) const = default;

private:
    std::int64_t window_id_ = 0;
    std::vector<std::pair<Dimension, double>> scores_;
};

enum class Method { Standard, Predicted };

std::string_view to_string(Method m);
Method parse_method(std::string_view s);

struct ConsolidatedScore {
    std::int64_t window_id = 0;
    double value = 0.0;
    Method method = Method::Standard;
};

struct ScoreRecord {
    std::int64_t window_id = 0;
    std::chrono::system_clock::time_point wall_clock{};
    Method method = Method::Standard;
    // Present iff method == Standard.
    std::optional<DimensionScoreVector> dimension_scores;
    double consolidated = 0.0;
    double scoring_duration = 0.0;  // seconds
};

}  // namespace dqsops
