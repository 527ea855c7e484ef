#pragma once

#include <filesystem>
#include <span>

namespace dqsops {

// Robust z-score detector: a value is anomalous when its distance from the
// median exceeds threshold_k scaled median absolute deviations.
class AnomalyDetector {
public:
    // Normal-consistency constant applied to the raw MAD.
    static constexpr double kMadScale = 1.4826;
    static constexpr std::size_t kMinFitSize = 30;

    // Throws InsufficientData below kMinFitSize values, DegenerateData when
    // the MAD is zero, ConfigError when k <= 0.
    static AnomalyDetector fit(std::span<const double> clean_values, double k);

    // Reassembles a persisted detector. mad_scaled must be > 0.
    static AnomalyDetector from_parameters(double median, double mad_scaled, double k);

    bool is_anomalous(double x) const noexcept;

    double median() const noexcept { return median_; }
    double mad_scaled() const noexcept { return mad_scaled_; }
    double threshold_k() const noexcept { return k_; }

    // Three lines: median, mad_scaled, threshold_k.
    void save(const std::filesystem::path& path) const;
    static AnomalyDetector load(const std::filesystem::path& path);

private:
    AnomalyDetector(double median, double mad_scaled, double k)
        : median_(median), mad_scaled_(mad_scaled), k_(k) {}

    double median_;
    double mad_scaled_;
    double k_;
};

// Median by selection; averages the two middle elements for even sizes.
// Reorders `values`.
double median_inplace(std::span<double> values);

}  // namespace dqsops
