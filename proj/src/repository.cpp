#include "dqsops/repository.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>

#include "dqsops/errors.hpp"
#include "text.hpp"

namespace dqsops {
namespace {

constexpr std::size_t kRecordFields = 10;
constexpr std::string_view kCanonicalClock = "1970-01-01T00:00:00.000Z";

std::optional<int> digits(std::string_view s, std::size_t pos, std::size_t count) {
    if (pos + count > s.size()) return std::nullopt;
    int v = 0;
    for (std::size_t i = pos; i < pos + count; ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return std::nullopt;
        v = v * 10 + (s[i] - '0');
    }
    return v;
}

double real_field(std::string_view s, std::size_t line_no, std::string_view name) {
    auto v = text::parse_double(s);
    if (!v) throw ParseError(line_no, "bad " + std::string(name) + " '" + std::string(s) + "'");
    return *v;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!text::trim(line).empty()) lines.push_back(line);
    }
    return lines;
}

}  // namespace

std::string format_iso8601(std::chrono::system_clock::time_point t) {
    using namespace std::chrono;
    const auto ms = floor<milliseconds>(t);
    const auto day = floor<days>(ms);
    const year_month_day ymd{day};
    const hh_mm_ss hms{ms - day};
    char buf[40];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%03dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<int>(hms.hours().count()), static_cast<int>(hms.minutes().count()),
                  static_cast<int>(hms.seconds().count()),
                  static_cast<int>(hms.subseconds().count()));
    return buf;
}

std::optional<std::int64_t> parse_iso8601_ms(std::string_view s) {
    using namespace std::chrono;
    s = text::trim(s);
    if (s.size() < 19 || s[4] != '-' || s[7] != '-' || (s[10] != 'T' && s[10] != ' ') ||
        s[13] != ':' || s[16] != ':') {
        return std::nullopt;
    }
    auto y = digits(s, 0, 4), mo = digits(s, 5, 2), d = digits(s, 8, 2);
    auto h = digits(s, 11, 2), mi = digits(s, 14, 2), se = digits(s, 17, 2);
    if (!y || !mo || !d || !h || !mi || !se) return std::nullopt;
    const year_month_day ymd{year{*y}, month{static_cast<unsigned>(*mo)},
                             day{static_cast<unsigned>(*d)}};
    if (!ymd.ok() || *h > 23 || *mi > 59 || *se > 60) return std::nullopt;

    std::size_t pos = 19;
    std::int64_t millis = 0;
    if (pos < s.size() && s[pos] == '.') {
        ++pos;
        int scale = 100;
        const std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) {
            millis += (s[pos] - '0') * scale;
            scale /= 10;
            ++pos;
        }
        if (pos == start) return std::nullopt;
    }
    std::int64_t offset_min = 0;
    if (pos < s.size()) {
        if (s[pos] == 'Z' && pos + 1 == s.size()) {
            ++pos;
        } else if ((s[pos] == '+' || s[pos] == '-') && pos + 6 == s.size() && s[pos + 3] == ':') {
            auto oh = digits(s, pos + 1, 2), om = digits(s, pos + 4, 2);
            if (!oh || !om) return std::nullopt;
            offset_min = (*oh * 60 + *om) * (s[pos] == '-' ? -1 : 1);
            pos = s.size();
        } else {
            return std::nullopt;
        }
    }
    const auto days_since = sys_days{ymd}.time_since_epoch().count();
    const std::int64_t secs = static_cast<std::int64_t>(days_since) * 86400 + *h * 3600 +
                              *mi * 60 + *se - offset_min * 60;
    return secs * 1000 + millis;
}

std::string format_score_record(const ScoreRecord& r, bool canonical) {
    if (r.method == Method::Standard && !r.dimension_scores) {
        throw DataError("standard score record without dimension scores");
    }
    std::string out = std::to_string(r.window_id);
    out += ',';
    out += canonical ? std::string(kCanonicalClock) : format_iso8601(r.wall_clock);
    out += ',';
    out += to_string(r.method);
    for (auto d : kAllDimensions) {
        out += ',';
        if (r.dimension_scores) {
            if (auto v = r.dimension_scores->get(d)) out += text::format_double(*v);
        }
    }
    out += ',';
    out += text::format_double(r.consolidated);
    out += ',';
    out += canonical ? std::string("0") : text::format_double(r.scoring_duration);
    return out;
}

ScoreRecord parse_score_record(std::string_view line, std::size_t line_no) {
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != kRecordFields) {
        throw ParseError(line_no, "score record needs " + std::to_string(kRecordFields) +
                                      " fields, got " + std::to_string(f.size()));
    }
    ScoreRecord r;
    auto id = text::parse_int<std::int64_t>(f[0]);
    if (!id) throw ParseError(line_no, "bad window_id");
    r.window_id = *id;
    auto ms = parse_iso8601_ms(f[1]);
    if (!ms) throw ParseError(line_no, "bad wall clock '" + std::string(f[1]) + "'");
    r.wall_clock = std::chrono::system_clock::time_point{std::chrono::milliseconds{*ms}};
    try {
        r.method = parse_method(text::trim(f[2]));
    } catch (const DataError& e) {
        throw ParseError(line_no, e.what());
    }
    std::vector<std::pair<Dimension, double>> scores;
    for (std::size_t i = 0; i < kAllDimensions.size(); ++i) {
        const auto cell = text::trim(f[3 + i]);
        if (cell.empty()) continue;
        scores.emplace_back(kAllDimensions[i], real_field(cell, line_no, "dimension score"));
    }
    if (r.method == Method::Standard) {
        if (scores.empty()) throw ParseError(line_no, "standard record without dimension scores");
        r.dimension_scores = DimensionScoreVector(r.window_id, std::move(scores));
    } else if (!scores.empty()) {
        throw ParseError(line_no, "predicted record carries dimension scores");
    }
    r.consolidated = real_field(f[8], line_no, "consolidated score");
    r.scoring_duration = real_field(f[9], line_no, "scoring duration");
    return r;
}

std::vector<ScoreRecord> read_score_repository(const std::filesystem::path& path) {
    std::vector<ScoreRecord> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) out.push_back(parse_score_record(line, ++line_no));
    return out;
}

ScoreRepository::ScoreRepository(const std::filesystem::path& path, bool truncate, bool canonical)
    : out_(path, std::ios::binary | (truncate ? std::ios::trunc : std::ios::app)),
      canonical_(canonical) {
    if (!out_) throw DataError("cannot open score repository '" + path.string() + "'");
}

void ScoreRepository::append(const ScoreRecord& r) {
    out_ << format_score_record(r, canonical_) << '\n';
    ++appended_;
}

void ScoreRepository::flush() { out_.flush(); }

std::string format_evaluation_entry(const EvaluationEntry& e) {
    std::string out = std::to_string(e.chunk) + ',' + std::to_string(e.n) + ',' +
                      text::format_double(e.mae) + ',';
    out += e.r2 ? text::format_double(*e.r2) : std::string("NA");
    out += ',' + text::format_double(e.cv) + ',' + e.decision;
    return out;
}

EvaluationEntry parse_evaluation_entry(std::string_view line, std::size_t line_no) {
    const auto f = text::split(text::trim(line), ',');
    if (f.size() != 6) throw ParseError(line_no, "evaluation entry needs 6 fields");
    EvaluationEntry e;
    auto chunk = text::parse_int<std::int64_t>(f[0]);
    auto n = text::parse_int<std::size_t>(f[1]);
    if (!chunk || !n) throw ParseError(line_no, "bad chunk index or count");
    e.chunk = *chunk;
    e.n = *n;
    e.mae = real_field(f[2], line_no, "mae");
    if (text::trim(f[3]) != "NA") e.r2 = real_field(f[3], line_no, "r2");
    e.cv = real_field(f[4], line_no, "cv");
    e.decision = std::string(text::trim(f[5]));
    return e;
}

std::vector<EvaluationEntry> read_evaluation_log(const std::filesystem::path& path) {
    std::vector<EvaluationEntry> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) out.push_back(parse_evaluation_entry(line, ++line_no));
    return out;
}

std::string format_labeled_example(const LabeledExample& e) {
    std::string out = std::to_string(e.window_id);
    for (double v : e.features) out += ',' + text::format_double(v);
    out += ',' + text::format_double(e.target);
    return out;
}

std::vector<LabeledExample> read_feature_store(const std::filesystem::path& path) {
    std::vector<LabeledExample> out;
    std::size_t line_no = 0;
    for (const auto& line : read_lines(path)) {
        ++line_no;
        const auto f = text::split(text::trim(line), ',');
        if (f.size() != kFeatureCount + 2) {
            throw ParseError(line_no, "feature store row needs " +
                                          std::to_string(kFeatureCount + 2) + " fields");
        }
        LabeledExample e;
        auto id = text::parse_int<std::int64_t>(f[0]);
        if (!id) throw ParseError(line_no, "bad window_id");
        e.window_id = *id;
        for (std::size_t i = 0; i < kFeatureCount; ++i) {
            e.features[i] = real_field(f[1 + i], line_no, "feature");
        }
        e.target = real_field(f[kFeatureCount + 1], line_no, "target");
        out.push_back(e);
    }
    return out;
}

void write_feature_store(const std::filesystem::path& path, std::span<const LabeledExample> rows) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write feature store '" + path.string() + "'");
    for (const auto& r : rows) out << format_labeled_example(r) << '\n';
}

void append_feature_store(const std::filesystem::path& path, std::span<const LabeledExample> rows) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    if (!out) throw DataError("cannot append to feature store '" + path.string() + "'");
    for (const auto& r : rows) out << format_labeled_example(r) << '\n';
}

}  // namespace dqsops
