#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <memory>
#include <optional>
#include <vector>

#include "dqsops/config.hpp"
#include "dqsops/mutation.hpp"
#include "dqsops/types.hpp"

namespace dqsops {

// Pull-based producer of consecutive, non-overlapping windows.
class WindowSource {
public:
    virtual ~WindowSource() = default;
    // Empty once the source is exhausted.
    virtual std::optional<DataWindow> next() = 0;
};

// Parses `timestamp,value` records (or bare `value` records), one per line.
// Timestamps are integer milliseconds or ISO-8601; values are decimal reals
// or NA. A header line is skipped when the first line is not a record.
// Malformed lines throw ParseError with the line number.
class TextWindowSource : public WindowSource {
public:
    TextWindowSource(std::istream& in, int window_size, std::int64_t first_id = 0);
    std::optional<DataWindow> next() override;

private:
    struct Record {
        std::optional<std::int64_t> timestamp;
        Sample value;
    };
    std::optional<Record> read_record();

    std::istream& in_;
    int window_size_;
    std::int64_t next_id_;
    std::size_t line_no_ = 0;
    bool first_line_ = true;
    std::optional<bool> has_timestamps_;
    std::optional<std::int64_t> last_timestamp_;
};

class FileWindowSource : public WindowSource {
public:
    FileWindowSource(const std::filesystem::path& path, int window_size,
                     std::int64_t first_id = 0);
    std::optional<DataWindow> next() override;

private:
    std::ifstream file_;
    TextWindowSource inner_;
};

// Synthetic stream from the configured generator, optionally mutated with
// per-window plans drawn by window_plan(). Unbounded when limit is empty.
class SyntheticWindowSource : public WindowSource {
public:
    SyntheticWindowSource(const PipelineConfig& cfg, std::uint64_t seed,
                          std::optional<std::int64_t> limit,
                          std::optional<MutationPlan> mutation = std::nullopt,
                          std::int64_t first_id = 0);
    std::optional<DataWindow> next() override;

private:
    int window_size_;
    std::uint64_t seed_;
    GeneratorParams generator_;
    std::optional<std::int64_t> limit_;
    std::optional<MutationPlan> mutation_;
    std::int64_t next_id_;
    std::int64_t produced_ = 0;
};

// Drains a text stream into windows.
std::vector<DataWindow> read_windows(std::istream& in, int window_size);

}  // namespace dqsops
