#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dqsops/predictor.hpp"
#include "dqsops/types.hpp"

namespace dqsops {

// ISO-8601 UTC with milliseconds, e.g. 2024-05-01T12:00:00.250Z.
std::string format_iso8601(std::chrono::system_clock::time_point t);
// Accepts YYYY-MM-DDTHH:MM:SS[.fff][Z|+HH:MM|-HH:MM] (a space may replace the
// T). Returns milliseconds since the epoch.
std::optional<std::int64_t> parse_iso8601_ms(std::string_view s);

// Score repository line:
// window_id,wall_clock,method,s_accuracy,s_completeness,s_consistency,
// s_timeliness,s_skewness,consolidated,scoring_duration_seconds
// Dimension columns are empty for predicted records and disabled dimensions.
std::string format_score_record(const ScoreRecord& r, bool canonical = false);
ScoreRecord parse_score_record(std::string_view line, std::size_t line_no = 0);
std::vector<ScoreRecord> read_score_repository(const std::filesystem::path& path);

// Append-only writer. In canonical mode the wall-clock and duration
// columns are written as fixed values so runs can be compared byte for byte.
class ScoreRepository {
public:
    ScoreRepository(const std::filesystem::path& path, bool truncate, bool canonical);
    void append(const ScoreRecord& r);
    void flush();
    std::size_t appended() const noexcept { return appended_; }

private:
    std::ofstream out_;
    bool canonical_;
    std::size_t appended_ = 0;
};

struct EvaluationEntry {
    std::int64_t chunk = 0;
    std::size_t n = 0;
    double mae = 0.0;
    std::optional<double> r2;
    double cv = 0.0;
    std::string decision;

    bool operator==(const EvaluationEntry&) const = default;
};

// chunk,n,mae,r2,cv,decision with r2 written as NA when undefined.
std::string format_evaluation_entry(const EvaluationEntry& e);
EvaluationEntry parse_evaluation_entry(std::string_view line, std::size_t line_no = 0);
std::vector<EvaluationEntry> read_evaluation_log(const std::filesystem::path& path);

// Ground-truth training rows: window_id, 13 features, consolidated score.
struct LabeledExample {
    std::int64_t window_id = 0;
    FeatureVector features{};
    double target = 0.0;

    bool operator==(const LabeledExample&) const = default;
};

std::string format_labeled_example(const LabeledExample& e);
std::vector<LabeledExample> read_feature_store(const std::filesystem::path& path);
void write_feature_store(const std::filesystem::path& path, std::span<const LabeledExample> rows);
void append_feature_store(const std::filesystem::path& path, std::span<const LabeledExample> rows);

}  // namespace dqsops
