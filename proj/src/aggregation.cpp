#include "dqsops/aggregation.hpp"

#include <cmath>
#include <fstream>
#include <numeric>
#include <string>

#include "dqsops/errors.hpp"
#include "text.hpp"

namespace dqsops {
namespace {

constexpr double kPowerTolerance = 1e-10;
constexpr int kPowerMaxIterations = 10'000;

double norm2(std::span<const double> v) {
    return std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
}

std::vector<double> multiply(const Matrix& s, const std::vector<double>& v) {
    std::vector<double> out(s.rows(), 0.0);
    for (std::size_t r = 0; r < s.rows(); ++r) {
        double acc = 0.0;
        for (std::size_t c = 0; c < s.cols(); ++c) acc += s(r, c) * v[c];
        out[r] = acc;
    }
    return out;
}

double rayleigh(const Matrix& s, const std::vector<double>& v) {
    const auto sv = multiply(s, v);
    return std::inner_product(v.begin(), v.end(), sv.begin(), 0.0);
}

struct PowerResult {
    bool converged = false;
    std::vector<double> vec;
    double value = 0.0;
};

PowerResult power_iterate(const Matrix& s, std::vector<double> v) {
    for (int it = 0; it < kPowerMaxIterations; ++it) {
        auto w = multiply(s, v);
        const double n = norm2(w);
        if (n == 0.0) return {true, v, 0.0};  // start vector lies in the null space
        double delta = 0.0;
        for (std::size_t i = 0; i < w.size(); ++i) {
            w[i] /= n;
            delta = std::max(delta, std::abs(w[i] - v[i]));
        }
        v = std::move(w);
        if (delta <= kPowerTolerance) return {true, v, rayleigh(s, v)};
    }
    return {false, v, rayleigh(s, v)};
}

std::vector<double> parse_row(std::string_view line, std::size_t line_no) {
    std::vector<double> out;
    for (auto tok : text::split(line, ',')) {
        auto v = text::parse_double(tok);
        if (!v) throw ParseError(line_no, "expected a real, got '" + std::string(tok) + "'");
        out.push_back(*v);
    }
    return out;
}

}  // namespace

Matrix Matrix::from_rows(const std::vector<std::vector<double>>& rows) {
    if (rows.empty()) return {};
    Matrix m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols()) throw DimensionMismatch("ragged matrix rows");
        for (std::size_t c = 0; c < m.cols(); ++c) m(r, c) = rows[r][c];
    }
    return m;
}

std::vector<double> Matrix::column(std::size_t c) const {
    std::vector<double> out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
}

Standardized standardize_zscore(const Matrix& dq) {
    if (dq.rows() < 2) throw TooFewRows("standardization needs at least 2 rows");
    const std::size_t n = dq.rows();
    const std::size_t m = dq.cols();
    Standardized out{Matrix(n, m), std::vector<double>(m, 0.0), std::vector<double>(m, 0.0)};
    for (std::size_t c = 0; c < m; ++c) {
        double mean = 0.0;
        for (std::size_t r = 0; r < n; ++r) mean += dq(r, c);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
            const double d = dq(r, c) - mean;
            var += d * d;
        }
        const double sd = std::sqrt(var / static_cast<double>(n));
        out.mu[c] = mean;
        out.sigma[c] = sd;
        for (std::size_t r = 0; r < n; ++r) {
            out.z(r, c) = sd > 0.0 ? (dq(r, c) - mean) / sd : 0.0;
        }
    }
    return out;
}

Matrix covariance(const Matrix& z) {
    const std::size_t n = z.rows();
    const std::size_t m = z.cols();
    Matrix s(m, m);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            double acc = 0.0;
            for (std::size_t r = 0; r < n; ++r) acc += z(r, i) * z(r, j);
            s(i, j) = s(j, i) = acc / static_cast<double>(n);
        }
    }
    return s;
}

void fix_sign(std::vector<double>& v) {
    const double sum = std::accumulate(v.begin(), v.end(), 0.0);
    bool flip = sum < 0.0;
    if (sum == 0.0) {
        for (double x : v) {
            if (x != 0.0) {
                flip = x < 0.0;
                break;
            }
        }
    }
    if (flip) {
        for (auto& x : v) x = -x;
    }
}

PrincipalComponent dominant_eigenpair(const Matrix& sym) {
    const std::size_t m = sym.rows();
    if (m == 0 || sym.cols() != m) throw DimensionMismatch("eigenproblem needs a square matrix");

    // The uniform start is the primary one. Basis-vector restarts cover a
    // dominant eigenvector orthogonal to it, which power iteration from the
    // uniform vector alone can never reach.
    std::vector<std::vector<double>> starts;
    starts.emplace_back(m, 1.0 / std::sqrt(static_cast<double>(m)));
    for (std::size_t j = 0; j < m; ++j) {
        std::vector<double> e(m, 0.0);
        e[j] = 1.0;
        starts.push_back(std::move(e));
    }

    std::optional<PowerResult> best;
    for (auto& start : starts) {
        auto r = power_iterate(sym, std::move(start));
        if (!r.converged) continue;
        if (!best || r.value > best->value * (1.0 + 1e-12) + 1e-15) best = std::move(r);
    }
    if (!best) {
        throw ConvergenceFailure("power iteration did not reach tolerance 1e-10 within 10000 "
                                 "iterations");
    }
    fix_sign(best->vec);
    return {std::move(best->vec), std::max(0.0, best->value)};
}

PrincipalComponent first_principal_component(const Matrix& z) {
    if (z.rows() < 2) throw TooFewRows("principal component needs at least 2 rows");
    if (z.cols() < 1) throw DimensionMismatch("principal component needs at least 1 column");
    return dominant_eigenpair(covariance(z));
}

Aggregator::Aggregator(std::vector<Dimension> order, std::vector<double> mu,
                       std::vector<double> sigma, std::vector<double> loadings, double eigenvalue)
    : order_(std::move(order)),
      mu_(std::move(mu)),
      sigma_(std::move(sigma)),
      loadings_(std::move(loadings)),
      eigenvalue_(eigenvalue) {
    const auto m = order_.size();
    if (m == 0 || mu_.size() != m || sigma_.size() != m || loadings_.size() != m) {
        throw DimensionMismatch("aggregator vectors disagree with the dimension order");
    }
    if (std::abs(norm2(loadings_) - 1.0) > kUnitTolerance) {
        throw DataError("aggregator loadings are not unit length");
    }
    if (!(eigenvalue_ >= 0.0)) throw DataError("aggregator eigenvalue must be >= 0");
    for (double s : sigma_) {
        if (!(s >= 0.0)) throw DataError("aggregator sigma entries must be >= 0");
    }
    if (std::accumulate(loadings_.begin(), loadings_.end(), 0.0) < -kUnitTolerance) {
        throw DataError("aggregator loadings violate the sign convention");
    }
}

Aggregator Aggregator::fit(const Matrix& dq, std::vector<Dimension> order) {
    if (dq.cols() != order.size()) {
        throw DimensionMismatch("score matrix width differs from the dimension order");
    }
    if (dq.rows() < 2 * dq.cols()) {
        throw TooFewRows("aggregator needs at least " + std::to_string(2 * dq.cols()) +
                         " rows, got " + std::to_string(dq.rows()));
    }
    auto st = standardize_zscore(dq);
    auto pc = first_principal_component(st.z);
    return Aggregator(std::move(order), std::move(st.mu), std::move(st.sigma),
                      std::move(pc.loadings), pc.eigenvalue);
}

Aggregator Aggregator::fit(std::span<const DimensionScoreVector> rows) {
    if (rows.empty()) throw TooFewRows("aggregator needs score rows");
    auto order = rows.front().dimensions();
    std::vector<std::vector<double>> data;
    data.reserve(rows.size());
    for (const auto& r : rows) {
        if (r.dimensions() != order) throw DimensionMismatch("score rows disagree on dimensions");
        data.push_back(r.values());
    }
    return fit(Matrix::from_rows(data), std::move(order));
}

double Aggregator::consolidate(std::span<const double> values) const {
    if (values.size() != order_.size()) {
        throw DimensionMismatch("expected " + std::to_string(order_.size()) + " scores, got " +
                                std::to_string(values.size()));
    }
    double acc = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (sigma_[j] > 0.0) acc += loadings_[j] * (values[j] - mu_[j]) / sigma_[j];
    }
    return acc;
}

double Aggregator::consolidate(const DimensionScoreVector& v) const {
    const auto& entries = v.entries();
    if (entries.size() != order_.size()) {
        throw DimensionMismatch("score vector has " + std::to_string(entries.size()) +
                                " dimensions, aggregator expects " +
                                std::to_string(order_.size()));
    }
    for (std::size_t j = 0; j < entries.size(); ++j) {
        if (entries[j].first != order_[j]) {
            throw DimensionMismatch("dimension order differs from the aggregator at position " +
                                    std::to_string(j));
        }
    }
    return consolidate(v.values());
}

void Aggregator::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write aggregator '" + path.string() + "'");
    for (std::size_t i = 0; i < order_.size(); ++i) {
        if (i) out << ',';
        out << to_string(order_[i]);
    }
    out << '\n'
        << text::join_doubles(mu_) << '\n'
        << text::join_doubles(sigma_) << '\n'
        << text::join_doubles(loadings_) << '\n'
        << text::format_double(eigenvalue_) << '\n';
}

Aggregator Aggregator::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingMetaInformation("cannot open aggregator '" + path.string() + "'");
    std::string lines[5];
    for (std::size_t i = 0; i < 5; ++i) {
        if (!std::getline(in, lines[i])) throw ParseError(i + 1, "aggregator file truncated");
    }
    std::vector<Dimension> order;
    for (auto tok : text::split(text::trim(lines[0]), ',')) {
        try {
            order.push_back(parse_dimension(text::trim(tok)));
        } catch (const ConfigError& e) {
            throw ParseError(1, e.what());
        }
    }
    auto eig = text::parse_double(lines[4]);
    if (!eig) throw ParseError(5, "expected the eigenvalue");
    return Aggregator(std::move(order), parse_row(text::trim(lines[1]), 2),
                      parse_row(text::trim(lines[2]), 3), parse_row(text::trim(lines[3]), 4), *eig);
}

}  // namespace dqsops
