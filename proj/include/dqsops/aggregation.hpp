#pragma once

#include <filesystem>
#include <span>
#include <vector>

#include "dqsops/types.hpp"

namespace dqsops {

// Dense row-major matrix, just enough for the aggregation code.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
    static Matrix from_rows(const std::vector<std::vector<double>>& rows);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }
    std::vector<double> column(std::size_t c) const;

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

struct Standardized {
    Matrix z;
    std::vector<double> mu;
    std::vector<double> sigma;  // population standard deviation
};

// Column-wise z-scores. Constant columns (sigma == 0) become all zeros.
// Throws TooFewRows for fewer than 2 rows.
Standardized standardize_zscore(const Matrix& dq);

// Population covariance Z^T Z / n.
Matrix covariance(const Matrix& z);

struct PrincipalComponent {
    std::vector<double> loadings;  // unit length, non-negative sum
    double eigenvalue = 0.0;
};

// Dominant eigenpair of the covariance of z by power iteration.
PrincipalComponent first_principal_component(const Matrix& z);
// Same, on an already formed symmetric positive semi-definite matrix.
PrincipalComponent dominant_eigenpair(const Matrix& sym);

// Flips v so its entries sum to >= 0; a zero sum defers to the first nonzero
// entry, which is made positive.
void fix_sign(std::vector<double>& v);

// Frozen whitening + first-PC projection of dimension-score vectors.
class Aggregator {
public:
    static constexpr double kUnitTolerance = 1e-9;

    // Needs at least 2 * (number of dimensions) rows, all with the same
    // dimension order. Throws TooFewRows or DimensionMismatch.
    static Aggregator fit(std::span<const DimensionScoreVector> rows);
    static Aggregator fit(const Matrix& dq, std::vector<Dimension> order);

    Aggregator(std::vector<Dimension> order, std::vector<double> mu, std::vector<double> sigma,
               std::vector<double> loadings, double eigenvalue);

    // Sum of loading_j * z_j with the stored mu and sigma; sigma == 0
    // dimensions contribute nothing. Throws DimensionMismatch.
    double consolidate(const DimensionScoreVector& v) const;
    double consolidate(std::span<const double> values) const;

    const std::vector<Dimension>& dimension_order() const noexcept { return order_; }
    const std::vector<double>& mu() const noexcept { return mu_; }
    const std::vector<double>& sigma() const noexcept { return sigma_; }
    const std::vector<double>& loadings() const noexcept { return loadings_; }
    double eigenvalue() const noexcept { return eigenvalue_; }

    // Five lines: dimension order, mu, sigma, loadings, eigenvalue.
    void save(const std::filesystem::path& path) const;
    static Aggregator load(const std::filesystem::path& path);

    bool operator==(const Aggregator&) const = default;

private:
    std::vector<Dimension> order_;
    std::vector<double> mu_;
    std::vector<double> sigma_;
    std::vector<double> loadings_;
    double eigenvalue_ = 0.0;
};

}  // namespace dqsops
