#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "dqsops/anomaly.hpp"
#include "dqsops/config.hpp"
#include "dqsops/types.hpp"

namespace dqsops {

// Clean-data reference used by the timeliness (KS) and skewness (JSD) scores.
class ReferenceDistribution {
public:
    // Builds from clean values: sorts them and bins them over [lo, hi].
    static ReferenceDistribution from_values(std::span<const double> clean, int bins, double lo,
                                             double hi);
    // Validates: sample non-empty and sorted, histogram sums to 1 within 1e-12.
    ReferenceDistribution(std::vector<double> sorted_sample, std::vector<double> histogram,
                          double lo, double hi);

    const std::vector<double>& sample() const noexcept { return sample_; }
    const std::vector<double>& histogram() const noexcept { return histogram_; }
    int bins() const noexcept { return static_cast<int>(histogram_.size()); }
    double lo() const noexcept { return lo_; }
    double hi() const noexcept { return hi_; }

    // Two sections, see docs/formats.md:
    //   sample <count>            histogram <bins> <lo> <hi>
    //   <one real per line>       <one probability per line>
    void save(const std::filesystem::path& path) const;
    static ReferenceDistribution load(const std::filesystem::path& path);

    bool operator==(const ReferenceDistribution&) const = default;

private:
    std::vector<double> sample_;
    std::vector<double> histogram_;
    double lo_;
    double hi_;
};

// Two-sample Kolmogorov-Smirnov statistic: the largest gap between the two
// empirical CDFs over the combined sample. Throws EmptySample.
double ks_statistic(std::span<const double> x, std::span<const double> y);
// Same, for inputs already sorted ascending.
double ks_statistic_sorted(std::span<const double> x, std::span<const double> y);

// Equal-width bins over [lo, hi]; out-of-range values land in the edge bins.
std::vector<double> histogram(std::span<const double> values, int bins, double lo, double hi);

// Base-2 entropy; 0 log 0 = 0. Throws InvalidDistribution.
double shannon_entropy(std::span<const double> p);

// H((p+q)/2) - (H(p)+H(q))/2 in bits, so bounded by [0, 1].
double jensen_shannon_divergence(std::span<const double> p, std::span<const double> q);

double normalize_minmax(double raw, double lo, double hi);

// Raw dimension scores. Higher is worse everywhere.
double score_accuracy(const DataWindow& window, const AnomalyDetector& detector);
double score_completeness(const DataWindow& window);
// Fraction of values that violate [lo, hi].
double score_consistency(const DataWindow& window, double lo, double hi);
// Throws EmptySample when the window has no present values.
double score_timeliness(const DataWindow& window, const ReferenceDistribution& ref);
double score_skewness(const DataWindow& window, const ReferenceDistribution& ref);

// Meta-information the standard scorer loads from the configuration.
struct ScoringReferences {
    std::optional<AnomalyDetector> detector;
    std::optional<ReferenceDistribution> reference;
    double integrity_min = 0.0;
    double integrity_max = 1.0;
};

ScoringReferences make_references(const PipelineConfig& cfg,
                                  std::optional<AnomalyDetector> detector,
                                  std::optional<ReferenceDistribution> reference);

struct ScoringResult {
    DimensionScoreVector scores;
    double duration_seconds = 0.0;
};

// Standard scorer: every requested dimension, min-max normalized against
// the theoretical [0, 1] bounds. Windows without present values score 1.0
// on timeliness and skewness. Throws MissingMetaInformation.
ScoringResult score_all_dimensions(const DataWindow& window, const ScoringReferences& refs,
                                   std::span<const Dimension> dimensions);
ScoringResult score_all_dimensions(const DataWindow& window, const ScoringReferences& refs,
                                   const PipelineConfig& cfg);

}  // namespace dqsops
