#include "dqsops/types.hpp"

#include <algorithm>

#include "dqsops/errors.hpp"

namespace dqsops {

std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::Accuracy: return "accuracy";
        case Dimension::Completeness: return "completeness";
        case Dimension::Consistency: return "consistency";
        case Dimension::Timeliness: return "timeliness";
        case Dimension::Skewness: return "skewness";
    }
    return "unknown";
}

Dimension parse_dimension(std::string_view name) {
    for (auto d : kAllDimensions) {
        if (to_string(d) == name) return d;
    }
    throw ConfigError("unknown quality dimension '" + std::string(name) + "'");
}

std::string_view to_string(Method m) {
    return m == Method::Standard ? "standard" : "predicted";
}

Method parse_method(std::string_view s) {
    if (s == "standard") return Method::Standard;
    if (s == "predicted") return Method::Predicted;
    throw DataError("unknown scoring method '" + std::string(s) + "'");
}

std::vector<double> DataWindow::present_values() const {
    std::vector<double> out;
    out.reserve(values.size());
    for (const auto& v : values) {
        if (v) out.push_back(*v);
    }
    return out;
}

std::size_t DataWindow::missing_count() const noexcept {
    return static_cast<std::size_t>(
        std::count_if(values.begin(), values.end(), [](const Sample& s) { return !s; }));
}

DataWindow make_window(std::int64_t id, std::span<const double> values) {
    DataWindow w;
    w.window_id = id;
    w.values.assign(values.begin(), values.end());
    return w;
}

DimensionScoreVector::DimensionScoreVector(std::int64_t window_id,
                                           std::vector<std::pair<Dimension, double>> scores)
    : window_id_(window_id), scores_(std::move(scores)) {
    for (std::size_t i = 0; i < scores_.size(); ++i) {
        for (std::size_t j = i + 1; j < scores_.size(); ++j) {
            if (scores_[i].first == scores_[j].first) {
                throw DimensionMismatch("duplicate dimension '" +
                                        std::string(to_string(scores_[i].first)) + "'");
            }
        }
    }
}

std::vector<Dimension> DimensionScoreVector::dimensions() const {
    std::vector<Dimension> out;
    out.reserve(scores_.size());
    for (const auto& [d, _] : scores_) out.push_back(d);
    return out;
}

std::vector<double> DimensionScoreVector::values() const {
    std::vector<double> out;
    out.reserve(scores_.size());
    for (const auto& [_, v] : scores_) out.push_back(v);
    return out;
}

std::optional<double> DimensionScoreVector::get(Dimension d) const {
    for (const auto& [dim, v] : scores_) {
        if (dim == d) return v;
    }
    return std::nullopt;
}

}  // namespace dqsops
