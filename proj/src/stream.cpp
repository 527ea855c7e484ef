#include "dqsops/stream.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dqsops/errors.hpp"
#include "dqsops/repository.hpp"
#include "text.hpp"

namespace dqsops {
namespace {

std::optional<std::int64_t> parse_timestamp(std::string_view s) {
    s = text::trim(s);
    if (auto ms = text::parse_int<std::int64_t>(s)) return ms;
    return parse_iso8601_ms(s);
}

// nullopt: not a value token. Engaged outer with empty inner: NA.
std::optional<Sample> parse_value(std::string_view s) {
    s = text::trim(s);
    if (s == "NA") return Sample{Missing};
    auto v = text::parse_double(s);
    if (!v || !std::isfinite(*v)) return std::nullopt;
    return Sample{*v};
}

}  // namespace

TextWindowSource::TextWindowSource(std::istream& in, int window_size, std::int64_t first_id)
    : in_(in), window_size_(window_size), next_id_(first_id) {
    if (window_size < 1) throw ConfigError("window size must be >= 1");
}

std::optional<TextWindowSource::Record> TextWindowSource::read_record() {
    std::string line;
    while (std::getline(in_, line)) {
        ++line_no_;
        const auto body = text::trim(line);
        if (body.empty()) continue;
        const bool first = first_line_;
        first_line_ = false;

        const auto fields = text::split(body, ',');
        Record rec;
        bool ok = true;
        if (fields.size() == 2) {
            rec.timestamp = parse_timestamp(fields[0]);
            auto v = parse_value(fields[1]);
            ok = rec.timestamp.has_value() && v.has_value();
            if (v) rec.value = *v;
        } else if (fields.size() == 1) {
            auto v = parse_value(fields[0]);
            ok = v.has_value();
            if (v) rec.value = *v;
        } else {
            ok = false;
        }
        if (!ok) {
            // A header is a first line none of whose fields parse as data.
            const bool header =
                first && std::none_of(fields.begin(), fields.end(), [](std::string_view f) {
                    return parse_timestamp(f).has_value() || parse_value(f).has_value();
                });
            if (header) continue;
            if (fields.size() == 2 && !rec.timestamp) {
                throw ParseError(line_no_, "malformed timestamp '" +
                                               std::string(text::trim(fields[0])) + "'");
            }
            if (fields.size() > 2) throw ParseError(line_no_, "expected 'timestamp,value'");
            throw ParseError(line_no_, "malformed value '" +
                                           std::string(text::trim(fields.back())) + "'");
        }

        const bool stamped = rec.timestamp.has_value();
        if (has_timestamps_ && *has_timestamps_ != stamped) {
            throw ParseError(line_no_, "records mix timestamped and bare values");
        }
        has_timestamps_ = stamped;
        if (stamped) {
            if (last_timestamp_ && *rec.timestamp < *last_timestamp_) {
                throw ParseError(line_no_, "timestamps must be nondecreasing");
            }
            last_timestamp_ = rec.timestamp;
        }
        return rec;
    }
    return std::nullopt;
}

std::optional<DataWindow> TextWindowSource::next() {
    DataWindow w;
    w.window_id = next_id_;
    w.values.reserve(static_cast<std::size_t>(window_size_));
    while (w.values.size() < static_cast<std::size_t>(window_size_)) {
        auto rec = read_record();
        if (!rec) break;
        w.values.push_back(rec->value);
        if (rec->timestamp) w.timestamps.push_back(*rec->timestamp);
    }
    if (w.values.empty()) return std::nullopt;
    w.partial = w.values.size() < static_cast<std::size_t>(window_size_);
    ++next_id_;
    return w;
}

FileWindowSource::FileWindowSource(const std::filesystem::path& path, int window_size,
                                   std::int64_t first_id)
    : file_(path), inner_(file_, window_size, first_id) {
    if (!file_) throw DataError("cannot open input '" + path.string() + "'");
}

std::optional<DataWindow> FileWindowSource::next() { return inner_.next(); }

SyntheticWindowSource::SyntheticWindowSource(const PipelineConfig& cfg, std::uint64_t seed,
                                             std::optional<std::int64_t> limit,
                                             std::optional<MutationPlan> mutation,
                                             std::int64_t first_id)
    : window_size_(cfg.window_size),
      seed_(seed),
      generator_(cfg.generator),
      limit_(limit),
      mutation_(std::move(mutation)),
      next_id_(first_id) {}

std::optional<DataWindow> SyntheticWindowSource::next() {
    if (limit_ && produced_ >= *limit_) return std::nullopt;
    auto w = generate_clean_window(next_id_++, window_size_, seed_, generator_);
    ++produced_;
    if (mutation_) return mutate_window(w, window_plan(*mutation_, w)).window;
    return w;
}

std::vector<DataWindow> read_windows(std::istream& in, int window_size) {
    TextWindowSource src(in, window_size);
    std::vector<DataWindow> out;
    while (auto w = src.next()) out.push_back(std::move(*w));
    return out;
}

}  // namespace dqsops
