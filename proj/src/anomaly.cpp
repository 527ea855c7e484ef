#include "dqsops/anomaly.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "dqsops/errors.hpp"
#include "text.hpp"

namespace dqsops {

double median_inplace(std::span<double> values) {
    if (values.empty()) throw EmptySample("median of an empty sample");
    const auto n = values.size();
    const auto mid = values.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(values.begin(), mid, values.end());
    double m = *mid;
    if (n % 2 == 0) {
        m = 0.5 * (m + *std::max_element(values.begin(), mid));
    }
    return m;
}

AnomalyDetector AnomalyDetector::fit(std::span<const double> clean_values, double k) {
    if (!(k > 0.0)) throw ConfigError("anomaly threshold k must be > 0");
    if (clean_values.size() < kMinFitSize) {
        throw InsufficientData("anomaly detector needs at least " + std::to_string(kMinFitSize) +
                               " values, got " + std::to_string(clean_values.size()));
    }
    std::vector<double> work(clean_values.begin(), clean_values.end());
    const double med = median_inplace(work);
    for (auto& v : work) v = std::abs(v - med);
    const double mad = median_inplace(work);
    if (mad == 0.0) throw DegenerateData("median absolute deviation is zero");
    return AnomalyDetector(med, kMadScale * mad, k);
}

AnomalyDetector AnomalyDetector::from_parameters(double median, double mad_scaled, double k) {
    if (!std::isfinite(median)) throw DataError("anomaly detector median must be finite");
    if (!(mad_scaled > 0.0) || !std::isfinite(mad_scaled)) {
        throw DegenerateData("anomaly detector scale must be positive");
    }
    if (!(k > 0.0)) throw ConfigError("anomaly threshold k must be > 0");
    return AnomalyDetector(median, mad_scaled, k);
}

bool AnomalyDetector::is_anomalous(double x) const noexcept {
    return std::abs(x - median_) / mad_scaled_ > k_;
}

void AnomalyDetector::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write anomaly model '" + path.string() + "'");
    out << text::format_double(median_) << '\n'
        << text::format_double(mad_scaled_) << '\n'
        << text::format_double(k_) << '\n';
}

AnomalyDetector AnomalyDetector::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingMetaInformation("cannot open anomaly model '" + path.string() + "'");
    double fields[3];
    for (std::size_t i = 0; i < 3; ++i) {
        std::string line;
        if (!std::getline(in, line)) throw ParseError(i + 1, "anomaly model truncated");
        auto v = text::parse_double(line);
        if (!v) throw ParseError(i + 1, "expected a real in anomaly model");
        fields[i] = *v;
    }
    return from_parameters(fields[0], fields[1], fields[2]);
}

}  // namespace dqsops
