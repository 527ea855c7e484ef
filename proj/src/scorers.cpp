#include "dqsops/scorers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "dqsops/errors.hpp"
#include "text.hpp"

namespace dqsops {
namespace {

constexpr double kHistogramSumTolerance = 1e-12;
constexpr double kDistributionTolerance = 1e-9;

void check_distribution(std::span<const double> p) {
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0)) throw InvalidDistribution("probability entries must be non-negative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > kDistributionTolerance) {
        throw InvalidDistribution("probabilities sum to " + text::format_double(sum));
    }
}

double entropy_unchecked(std::span<const double> p) {
    double h = 0.0;
    for (double v : p) {
        if (v > 0.0) h -= v * std::log2(v);
    }
    return h;
}

}  // namespace

ReferenceDistribution::ReferenceDistribution(std::vector<double> sorted_sample,
                                             std::vector<double> hist, double lo, double hi)
    : sample_(std::move(sorted_sample)), histogram_(std::move(hist)), lo_(lo), hi_(hi) {
    if (sample_.empty()) throw EmptySample("reference sample is empty");
    if (!std::is_sorted(sample_.begin(), sample_.end())) {
        throw DataError("reference sample must be sorted");
    }
    if (histogram_.size() < 2) throw InvalidDistribution("reference histogram needs >= 2 bins");
    if (!(lo_ < hi_)) throw InvalidDistribution("reference histogram range must satisfy lo < hi");
    double sum = 0.0;
    for (double p : histogram_) {
        if (!(p >= 0.0)) throw InvalidDistribution("reference histogram has a negative entry");
        sum += p;
    }
    if (std::abs(sum - 1.0) > kHistogramSumTolerance) {
        throw InvalidDistribution("reference histogram sums to " + text::format_double(sum));
    }
}

ReferenceDistribution ReferenceDistribution::from_values(std::span<const double> clean, int bins,
                                                         double lo, double hi) {
    std::vector<double> sorted(clean.begin(), clean.end());
    std::sort(sorted.begin(), sorted.end());
    auto hist = dqsops::histogram(clean, bins, lo, hi);
    return ReferenceDistribution(std::move(sorted), std::move(hist), lo, hi);
}

void ReferenceDistribution::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write reference distribution '" + path.string() + "'");
    out << "sample " << sample_.size() << '\n';
    for (double v : sample_) out << text::format_double(v) << '\n';
    out << "histogram " << histogram_.size() << ' ' << text::format_double(lo_) << ' '
        << text::format_double(hi_) << '\n';
    for (double p : histogram_) out << text::format_double(p) << '\n';
}

ReferenceDistribution ReferenceDistribution::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw MissingMetaInformation("cannot open reference distribution '" + path.string() + "'");
    }
    std::size_t line_no = 0;
    std::string line;
    auto next = [&]() -> std::string_view {
        if (!std::getline(in, line)) throw ParseError(line_no + 1, "reference file truncated");
        ++line_no;
        return text::trim(line);
    };
    auto real = [&](std::string_view s) {
        auto v = text::parse_double(s);
        if (!v) throw ParseError(line_no, "expected a real, got '" + std::string(s) + "'");
        return *v;
    };

    auto header = text::split(next(), ' ');
    if (header.size() != 2 || header[0] != "sample") {
        throw ParseError(line_no, "expected 'sample <count>'");
    }
    auto count = text::parse_int<std::size_t>(header[1]);
    if (!count) throw ParseError(line_no, "bad sample count");
    std::vector<double> sample;
    sample.reserve(*count);
    for (std::size_t i = 0; i < *count; ++i) sample.push_back(real(next()));

    auto hist_header = text::split(next(), ' ');
    if (hist_header.size() != 4 || hist_header[0] != "histogram") {
        throw ParseError(line_no, "expected 'histogram <bins> <lo> <hi>'");
    }
    auto bins = text::parse_int<std::size_t>(hist_header[1]);
    if (!bins) throw ParseError(line_no, "bad bin count");
    const double lo = real(hist_header[2]);
    const double hi = real(hist_header[3]);
    std::vector<double> hist;
    hist.reserve(*bins);
    for (std::size_t i = 0; i < *bins; ++i) hist.push_back(real(next()));
    return ReferenceDistribution(std::move(sample), std::move(hist), lo, hi);
}

double ks_statistic_sorted(std::span<const double> x, std::span<const double> y) {
    if (x.empty() || y.empty()) throw EmptySample("KS statistic needs two non-empty samples");
    const double n = static_cast<double>(x.size());
    const double m = static_cast<double>(y.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    // Walk the combined sample in order; after consuming every copy of the
    // current value, i and j count elements <= that value.
    while (i < x.size() && j < y.size()) {
        const double z = std::min(x[i], y[j]);
        while (i < x.size() && x[i] <= z) ++i;
        while (j < y.size() && y[j] <= z) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / n - static_cast<double>(j) / m));
    }
    // Once one sample is exhausted its ECDF is 1 and the other only rises,
    // so the gap can only shrink from here.
    return d;
}

double ks_statistic(std::span<const double> x, std::span<const double> y) {
    std::vector<double> xs(x.begin(), x.end());
    std::vector<double> ys(y.begin(), y.end());
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    return ks_statistic_sorted(xs, ys);
}

std::vector<double> histogram(std::span<const double> values, int bins, double lo, double hi) {
    if (bins < 2) throw InvalidDistribution("histogram needs at least 2 bins");
    if (!(lo < hi)) throw InvalidDistribution("histogram range must satisfy lo < hi");
    if (values.empty()) throw EmptySample("histogram of an empty sample");
    std::vector<double> counts(static_cast<std::size_t>(bins), 0.0);
    const double scale = static_cast<double>(bins) / (hi - lo);
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("histogram input must be finite");
        const double pos = (v - lo) * scale;
        int b = pos <= 0.0 ? 0 : (pos >= bins ? bins - 1 : static_cast<int>(pos));
        counts[static_cast<std::size_t>(b)] += 1.0;
    }
    const double total = static_cast<double>(values.size());
    for (auto& c : counts) c /= total;
    return counts;
}

double shannon_entropy(std::span<const double> p) {
    check_distribution(p);
    return entropy_unchecked(p);
}

double jensen_shannon_divergence(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size()) {
        throw LengthMismatch("JSD inputs have lengths " + std::to_string(p.size()) + " and " +
                             std::to_string(q.size()));
    }
    check_distribution(p);
    check_distribution(q);
    std::vector<double> mid(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) mid[i] = 0.5 * (p[i] + q[i]);
    const double jsd =
        entropy_unchecked(mid) - 0.5 * (entropy_unchecked(p) + entropy_unchecked(q));
    return std::clamp(jsd, 0.0, 1.0);
}

double normalize_minmax(double raw, double lo, double hi) {
    if (!(lo < hi)) throw DataError("min-max normalization needs lo < hi");
    return std::clamp((raw - lo) / (hi - lo), 0.0, 1.0);
}

double score_accuracy(const DataWindow& window, const AnomalyDetector& detector) {
    if (window.values.empty()) throw EmptySample("window is empty");
    std::size_t flagged = 0;
    for (const auto& v : window.values) {
        if (v && detector.is_anomalous(*v)) ++flagged;
    }
    return static_cast<double>(flagged) / static_cast<double>(window.size());
}

double score_completeness(const DataWindow& window) {
    if (window.values.empty()) throw EmptySample("window is empty");
    return static_cast<double>(window.missing_count()) / static_cast<double>(window.size());
}

double score_consistency(const DataWindow& window, double lo, double hi) {
    if (window.values.empty()) throw EmptySample("window is empty");
    if (!(lo < hi)) throw ConfigError("integrity bounds must satisfy lo < hi");
    std::size_t violations = 0;
    for (const auto& v : window.values) {
        if (v && (*v < lo || *v > hi)) ++violations;
    }
    return static_cast<double>(violations) / static_cast<double>(window.size());
}

double score_timeliness(const DataWindow& window, const ReferenceDistribution& ref) {
    auto present = window.present_values();
    if (present.empty()) throw EmptySample("window has no present values");
    std::sort(present.begin(), present.end());
    return ks_statistic_sorted(present, ref.sample());
}

double score_skewness(const DataWindow& window, const ReferenceDistribution& ref) {
    const auto present = window.present_values();
    if (present.empty()) throw EmptySample("window has no present values");
    const auto p = histogram(present, ref.bins(), ref.lo(), ref.hi());
    return jensen_shannon_divergence(p, ref.histogram());
}

ScoringReferences make_references(const PipelineConfig& cfg,
                                  std::optional<AnomalyDetector> detector,
                                  std::optional<ReferenceDistribution> reference) {
    ScoringReferences refs;
    refs.detector = std::move(detector);
    refs.reference = std::move(reference);
    refs.integrity_min = cfg.integrity_min;
    refs.integrity_max = cfg.integrity_max;
    return refs;
}

ScoringResult score_all_dimensions(const DataWindow& window, const ScoringReferences& refs,
                                   std::span<const Dimension> dimensions) {
    const auto start = std::chrono::steady_clock::now();
    if (window.values.empty()) throw EmptySample("window is empty");
    const bool has_values = window.missing_count() < window.size();

    auto require_reference = [&](Dimension d) -> const ReferenceDistribution& {
        if (!refs.reference) {
            throw MissingMetaInformation(std::string(to_string(d)) +
                                         ": reference distribution not loaded");
        }
        return *refs.reference;
    };

    std::vector<std::pair<Dimension, double>> scores;
    scores.reserve(dimensions.size());
    for (Dimension d : dimensions) {
        double raw = 0.0;
        switch (d) {
            case Dimension::Accuracy:
                if (!refs.detector) {
                    throw MissingMetaInformation("accuracy: anomaly model not loaded");
                }
                raw = score_accuracy(window, *refs.detector);
                break;
            case Dimension::Completeness:
                raw = score_completeness(window);
                break;
            case Dimension::Consistency:
                raw = score_consistency(window, refs.integrity_min, refs.integrity_max);
                break;
            case Dimension::Timeliness: {
                const auto& ref = require_reference(d);
                raw = has_values ? score_timeliness(window, ref) : 1.0;
                break;
            }
            case Dimension::Skewness: {
                const auto& ref = require_reference(d);
                raw = has_values ? score_skewness(window, ref) : 1.0;
                break;
            }
        }
        scores.emplace_back(d, normalize_minmax(raw, 0.0, 1.0));
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    return {DimensionScoreVector(window.window_id, std::move(scores)),
            std::chrono::duration<double>(elapsed).count()};
}

ScoringResult score_all_dimensions(const DataWindow& window, const ScoringReferences& refs,
                                   const PipelineConfig& cfg) {
    return score_all_dimensions(window, refs, cfg.enabled_dimensions);
}

}  // namespace dqsops
