#include "dqsops/predictor.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "dqsops/errors.hpp"
#include "dqsops/random.hpp"
#include "text.hpp"

namespace dqsops {
namespace {

constexpr std::string_view kModelMagic = "dqsops-surrogate";
constexpr int kModelVersion = 1;

// Linear interpolation between order statistics (h = (n-1) p) of the full
// sample, selected inside [first, last), which must hold exactly the order
// statistics offset .. offset + (last - first) - 1. Reorders the range.
double select_quantile(std::vector<double>::iterator first, std::vector<double>::iterator last,
                       std::size_t offset, std::size_t n, double p) {
    const double h = static_cast<double>(n - 1) * p;
    const auto k = static_cast<std::size_t>(std::floor(h));
    const auto kth = first + static_cast<std::ptrdiff_t>(k - offset);
    std::nth_element(first, kth, last);
    const double a = *kth;
    const double frac = h - static_cast<double>(k);
    if (frac == 0.0 || kth + 1 == last) return a;
    const double b = *std::min_element(kth + 1, last);
    return a + frac * (b - a);
}

// Quartiles of v. The median partition narrows the two outer searches.
std::array<double, 3> quartiles_by_selection(std::vector<double>& v) {
    const std::size_t n = v.size();
    const double q50 = select_quantile(v.begin(), v.end(), 0, n, 0.50);
    const auto k50 = static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * 0.50));
    const auto mid = v.begin() + static_cast<std::ptrdiff_t>(k50);
    const auto k25 = static_cast<std::size_t>(std::floor(static_cast<double>(n - 1) * 0.25));
    // Small samples can need the order statistic right after the median.
    const auto lower_end = k25 + 1 <= k50 ? mid + 1 : v.end();
    const double q25 = select_quantile(v.begin(), lower_end, 0, n, 0.25);
    const double q75 = select_quantile(mid, v.end(), k50, n, 0.75);
    return {q25, q50, q75};
}

struct SplitCandidate {
    int feature = -1;
    double threshold = 0.0;
    double score = 0.0;  // sum_l^2 / n_l + sum_r^2 / n_r, larger is better
    std::size_t left_count = 0;
};

class TreeBuilder {
public:
    TreeBuilder(const Matrix& x, std::span<const double> y, const ForestParams& params,
                std::size_t max_features, std::mt19937_64& rng)
        : x_(x), y_(y), params_(params), max_features_(max_features), rng_(rng) {}

    RegressionTree build(std::vector<std::size_t> rows) {
        nodes_.clear();
        grow(rows, 0);
        return RegressionTree(std::move(nodes_));
    }

private:
    int grow(std::vector<std::size_t>& rows, int depth) {
        const int id = static_cast<int>(nodes_.size());
        nodes_.emplace_back();
        double sum = 0.0;
        for (auto r : rows) sum += y_[r];
        const double n = static_cast<double>(rows.size());
        nodes_[static_cast<std::size_t>(id)].value = sum / n;

        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        if (depth >= params_.max_depth || rows.size() < 2 * min_leaf) return id;
        const auto split = best_split(rows, sum);
        if (split.feature < 0) return id;

        std::vector<std::size_t> left;
        std::vector<std::size_t> right;
        left.reserve(split.left_count);
        right.reserve(rows.size() - split.left_count);
        for (auto r : rows) {
            (x_(r, static_cast<std::size_t>(split.feature)) <= split.threshold ? left : right)
                .push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        const int l = grow(left, depth + 1);
        const int r = grow(right, depth + 1);
        auto& node = nodes_[static_cast<std::size_t>(id)];
        node.feature = split.feature;
        node.threshold = split.threshold;
        node.left = l;
        node.right = r;
        return id;
    }

    SplitCandidate best_split(const std::vector<std::size_t>& rows, double total) {
        const std::size_t p = x_.cols();
        std::vector<std::size_t> features(p);
        std::iota(features.begin(), features.end(), std::size_t{0});
        std::shuffle(features.begin(), features.end(), rng_);

        const double n = static_cast<double>(rows.size());
        const double parent = total * total / n;
        SplitCandidate best;
        best.score = parent + 1e-12 * std::max(1.0, std::abs(parent));

        std::vector<std::pair<double, double>> column(rows.size());
        const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
        // Examine max_features candidates; keep drawing only while nothing
        // splits.
        for (std::size_t fi = 0; fi < p; ++fi) {
            if (fi >= max_features_ && best.feature >= 0) break;
            const auto f = features[fi];
            for (std::size_t i = 0; i < rows.size(); ++i) column[i] = {x_(rows[i], f), y_[rows[i]]};
            std::sort(column.begin(), column.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            if (column.front().first == column.back().first) continue;
            double left_sum = 0.0;
            for (std::size_t i = 0; i + 1 < column.size(); ++i) {
                left_sum += column[i].second;
                const std::size_t nl = i + 1;
                const std::size_t nr = column.size() - nl;
                if (nl < min_leaf) continue;
                if (nr < min_leaf) break;
                if (column[i].first == column[i + 1].first) continue;
                const double right_sum = total - left_sum;
                const double score = left_sum * left_sum / static_cast<double>(nl) +
                                     right_sum * right_sum / static_cast<double>(nr);
                if (score > best.score) {
                    double thr = 0.5 * (column[i].first + column[i + 1].first);
                    if (!(thr < column[i + 1].first)) thr = column[i].first;
                    best = {static_cast<int>(f), thr, score, nl};
                }
            }
        }
        return best;
    }

    const Matrix& x_;
    std::span<const double> y_;
    const ForestParams& params_;
    std::size_t max_features_;
    std::mt19937_64& rng_;
    std::vector<TreeNode> nodes_;
};

std::string hex64(std::uint64_t v) {
    std::ostringstream os;
    os << std::hex;
    os.width(16);
    os.fill('0');
    os << v;
    return os.str();
}

}  // namespace

std::uint64_t feature_order_hash() {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    bool first = true;
    for (auto name : kFeatureNames) {
        if (!first) h = (h ^ static_cast<unsigned char>(',')) * 0x100000001b3ULL;
        first = false;
        for (char c : name) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ULL;
    }
    return h;
}

FeatureVector extract_features(const DataWindow& window, double integrity_min,
                               double integrity_max) {
    FeatureVector f{};
    const std::size_t n = window.size();
    if (n == 0) return f;

    // Bucket index is monotone in the value (edges clamp), so cumulative
    // bucket counts locate every order statistic.
    constexpr std::size_t kBuckets = 256;
    const double width = integrity_max - integrity_min;
    const bool bucketed = width > 0.0 && std::isfinite(width);
    const double scale = bucketed ? static_cast<double>(kBuckets) / width : 0.0;
    auto bucket_of = [&](double x) -> std::uint16_t {
        const double pos = (x - integrity_min) * scale;
        if (!(pos > 0.0)) return 0;
        if (pos >= static_cast<double>(kBuckets - 1)) return kBuckets - 1;
        return static_cast<std::uint16_t>(pos);
    };

    std::vector<double> v;
    std::vector<std::uint16_t> tag;
    v.reserve(n);
    if (bucketed) tag.reserve(n);
    std::array<std::uint32_t, kBuckets + 1> start{};
    double shift = 0.0;
    double sum = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t below = 0;
    std::size_t above = 0;
    for (const auto& s : window.values) {
        if (!s) continue;
        const double x = *s;
        if (v.empty()) {
            // Shift by the first value so a constant window has an exact mean.
            shift = lo = hi = x;
        }
        v.push_back(x);
        sum += x - shift;
        lo = std::min(lo, x);
        hi = std::max(hi, x);
        below += x < integrity_min;
        above += x > integrity_max;
        if (bucketed) {
            const auto b = bucket_of(x);
            tag.push_back(b);
            ++start[b + 1u];
        }
    }
    const double total = static_cast<double>(n);
    f[0] = static_cast<double>(n - v.size()) / total;
    f[1] = static_cast<double>(v.size());
    f[11] = static_cast<double>(below) / total;
    f[12] = static_cast<double>(above) / total;
    if (v.empty()) return f;

    const double count = static_cast<double>(v.size());
    const double mean = shift + sum / count;
    double m2 = 0.0;
    double m3 = 0.0;
    double m4 = 0.0;
    for (double x : v) {
        const double d = x - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= count;
    m3 /= count;
    m4 /= count;
    f[2] = mean;
    f[3] = std::sqrt(m2);
    f[4] = lo;
    f[5] = hi;
    if (m2 > 0.0) {
        f[9] = m3 / std::pow(m2, 1.5);
        f[10] = m4 / (m2 * m2);
    }

    constexpr std::array<double, 3> kProbs = {0.25, 0.50, 0.75};
    if (!bucketed || v.size() < 64) {
        const auto q = quartiles_by_selection(v);
        std::copy(q.begin(), q.end(), f.begin() + 6);
        return f;
    }
    for (std::size_t b = 1; b <= kBuckets; ++b) start[b] += start[b - 1];
    auto bucket_of_rank = [&](std::size_t r) {
        const auto it = std::upper_bound(start.begin(), start.end(), static_cast<std::uint32_t>(r));
        return static_cast<std::size_t>(it - start.begin()) - 1;
    };
    const std::size_t m = v.size();
    std::array<std::size_t, 3> first{}, last{};
    for (std::size_t i = 0; i < kProbs.size(); ++i) {
        const double h = static_cast<double>(m - 1) * kProbs[i];
        const auto k = static_cast<std::size_t>(std::floor(h));
        first[i] = bucket_of_rank(k);
        last[i] = bucket_of_rank(std::min(k + 1, m - 1));
    }
    std::array<std::uint8_t, kBuckets> wanted{};
    for (std::size_t i = 0; i < kProbs.size(); ++i) {
        for (std::size_t b = first[i]; b <= last[i]; ++b) wanted[b] |= std::uint8_t(1u << i);
    }
    std::array<std::vector<double>, 3> members;
    for (std::size_t j = 0; j < m; ++j) {
        const unsigned mask = wanted[tag[j]];
        if (mask == 0) continue;
        for (std::size_t i = 0; i < kProbs.size(); ++i) {
            if (mask & (1u << i)) members[i].push_back(v[j]);
        }
    }
    for (std::size_t i = 0; i < kProbs.size(); ++i) {
        f[6 + i] = select_quantile(members[i].begin(), members[i].end(), start[first[i]], m,
                                   kProbs[i]);
    }
    return f;
}

FeatureVector extract_features(const DataWindow& window, const PipelineConfig& cfg) {
    return extract_features(window, cfg.integrity_min, cfg.integrity_max);
}

RegressionTree::RegressionTree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {
    if (nodes_.empty()) throw DataError("regression tree has no nodes");
    const int count = static_cast<int>(nodes_.size());
    for (const auto& node : nodes_) {
        if (node.feature >= 0 &&
            (node.left <= 0 || node.right <= 0 || node.left >= count || node.right >= count)) {
            throw DataError("regression tree has a dangling child index");
        }
    }
}

double RegressionTree::predict(std::span<const double> x) const {
    std::size_t i = 0;
    while (nodes_[i].feature >= 0) {
        const auto& node = nodes_[i];
        i = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold
                                         ? node.left
                                         : node.right);
    }
    return nodes_[i].value;
}

SurrogateModel::SurrogateModel(std::vector<RegressionTree> trees, ForestParams params,
                               std::uint64_t seed, std::uint64_t feature_hash,
                               std::size_t n_features)
    : trees_(std::move(trees)),
      params_(params),
      seed_(seed),
      feature_hash_(feature_hash),
      n_features_(n_features) {
    if (trees_.empty()) throw DataError("surrogate model has no trees");
    for (const auto& t : trees_) {
        for (const auto& node : t.nodes()) {
            if (node.feature >= static_cast<int>(n_features_)) {
                throw DataError("tree splits on a feature outside the model width");
            }
        }
    }
}

SurrogateModel SurrogateModel::train(const Matrix& x, std::span<const double> y,
                                     const ForestParams& params, std::uint64_t seed,
                                     std::uint64_t feature_hash) {
    if (x.rows() != y.size()) throw LengthMismatch("feature rows and targets differ in count");
    if (y.size() < kMinTrainingRecords) {
        throw InsufficientTrainingData("surrogate needs at least " +
                                       std::to_string(kMinTrainingRecords) + " records, got " +
                                       std::to_string(y.size()));
    }
    if (x.cols() == 0) throw DimensionMismatch("surrogate needs at least one feature");
    const auto [mn, mx] = std::minmax_element(y.begin(), y.end());
    if (*mn == *mx) throw DegenerateTarget("all training targets are identical");
    for (double t : y) {
        if (!std::isfinite(t)) throw DataError("training targets must be finite");
    }

    const std::size_t max_features =
        params.max_features > 0
            ? std::min<std::size_t>(static_cast<std::size_t>(params.max_features), x.cols())
            : static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(x.cols()))));

    std::vector<RegressionTree> trees;
    trees.reserve(static_cast<std::size_t>(params.n_trees));
    for (int t = 0; t < params.n_trees; ++t) {
        std::mt19937_64 rng(mix_seed(seed + static_cast<std::uint64_t>(t)));
        std::vector<std::size_t> rows(y.size());
        if (params.bootstrap) {
            std::uniform_int_distribution<std::size_t> pick(0, y.size() - 1);
            for (auto& r : rows) r = pick(rng);
            std::sort(rows.begin(), rows.end());
        } else {
            std::iota(rows.begin(), rows.end(), std::size_t{0});
        }
        TreeBuilder builder(x, y, params, max_features, rng);
        trees.push_back(builder.build(std::move(rows)));
    }
    return SurrogateModel(std::move(trees), params, seed, feature_hash, x.cols());
}

SurrogateModel SurrogateModel::train(std::span<const FeatureVector> x, std::span<const double> y,
                                     const ForestParams& params, std::uint64_t seed) {
    Matrix m(x.size(), kFeatureCount);
    for (std::size_t r = 0; r < x.size(); ++r) {
        for (std::size_t c = 0; c < kFeatureCount; ++c) m(r, c) = x[r][c];
    }
    return train(m, y, params, seed, feature_order_hash());
}

double SurrogateModel::predict_row(std::span<const double> x) const {
    if (x.size() != n_features_) {
        throw FeatureVersionMismatch("model expects " + std::to_string(n_features_) +
                                     " features, got " + std::to_string(x.size()));
    }
    double acc = 0.0;
    for (const auto& t : trees_) acc += t.predict(x);
    return acc / static_cast<double>(trees_.size());
}

double SurrogateModel::predict(const FeatureVector& features) const {
    if (feature_hash_ != feature_order_hash()) {
        throw FeatureVersionMismatch("model feature layout " + hex64(feature_hash_) +
                                     " differs from " + hex64(feature_order_hash()));
    }
    return predict_row(features);
}

void SurrogateModel::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write surrogate model '" + path.string() + "'");
    out << kModelMagic << ' ' << kModelVersion << '\n'
        << "feature_hash " << hex64(feature_hash_) << '\n'
        << "n_features " << n_features_ << '\n'
        << "n_trees " << trees_.size() << '\n'
        << "max_depth " << params_.max_depth << '\n'
        << "min_samples_leaf " << params_.min_samples_leaf << '\n'
        << "max_features " << params_.max_features << '\n'
        << "bootstrap " << (params_.bootstrap ? 1 : 0) << '\n'
        << "seed " << seed_ << '\n';
    for (std::size_t t = 0; t < trees_.size(); ++t) {
        const auto& nodes = trees_[t].nodes();
        out << "tree " << t << ' ' << nodes.size() << '\n';
        for (const auto& n : nodes) {
            out << n.feature << ' ' << text::format_double(n.threshold) << ' ' << n.left << ' '
                << n.right << ' ' << text::format_double(n.value) << '\n';
        }
    }
}

SurrogateModel SurrogateModel::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw MissingMetaInformation("cannot open surrogate model '" + path.string() + "'");
    std::size_t line_no = 0;
    std::string line;
    auto next_fields = [&]() {
        if (!std::getline(in, line)) throw ParseError(line_no + 1, "surrogate model truncated");
        ++line_no;
        std::vector<std::string> out;
        for (auto tok : text::split(text::trim(line), ' ')) {
            if (!tok.empty()) out.emplace_back(tok);
        }
        return out;
    };
    auto keyed = [&](std::string_view key) {
        auto f = next_fields();
        if (f.size() != 2 || f[0] != key) {
            throw ParseError(line_no, "expected '" + std::string(key) + " <value>'");
        }
        return f[1];
    };
    auto as_int = [&](const std::string& s) {
        auto v = text::parse_int<long long>(s);
        if (!v) throw ParseError(line_no, "expected an integer, got '" + s + "'");
        return *v;
    };
    auto as_real = [&](const std::string& s) {
        auto v = text::parse_double(s);
        if (!v) throw ParseError(line_no, "expected a real, got '" + s + "'");
        return *v;
    };

    auto magic = next_fields();
    if (magic.size() != 2 || magic[0] != kModelMagic) {
        throw ParseError(line_no, "not a surrogate model file");
    }
    if (as_int(magic[1]) != kModelVersion) {
        throw FeatureVersionMismatch("unsupported surrogate model version " + magic[1]);
    }
    std::uint64_t hash = 0;
    {
        const auto h = keyed("feature_hash");
        std::istringstream is(h);
        is >> std::hex >> hash;
        if (!is || !is.eof()) throw ParseError(line_no, "bad feature hash");
    }
    const auto n_features = static_cast<std::size_t>(as_int(keyed("n_features")));
    const auto n_trees = as_int(keyed("n_trees"));
    ForestParams params;
    params.n_trees = static_cast<int>(n_trees);
    params.max_depth = static_cast<int>(as_int(keyed("max_depth")));
    params.min_samples_leaf = static_cast<int>(as_int(keyed("min_samples_leaf")));
    params.max_features = static_cast<int>(as_int(keyed("max_features")));
    params.bootstrap = as_int(keyed("bootstrap")) != 0;
    const auto seed_text = keyed("seed");
    auto seed = text::parse_int<std::uint64_t>(seed_text);
    if (!seed) throw ParseError(line_no, "bad seed");

    std::vector<RegressionTree> trees;
    for (long long t = 0; t < n_trees; ++t) {
        auto header = next_fields();
        if (header.size() != 3 || header[0] != "tree" || as_int(header[1]) != t) {
            throw ParseError(line_no, "expected 'tree " + std::to_string(t) + " <nodes>'");
        }
        const auto count = as_int(header[2]);
        std::vector<TreeNode> nodes;
        nodes.reserve(static_cast<std::size_t>(count));
        for (long long i = 0; i < count; ++i) {
            auto f = next_fields();
            if (f.size() != 5) throw ParseError(line_no, "tree node needs 5 fields");
            nodes.push_back({static_cast<int>(as_int(f[0])), as_real(f[1]),
                             static_cast<int>(as_int(f[2])), static_cast<int>(as_int(f[3])),
                             as_real(f[4])});
        }
        trees.emplace_back(std::move(nodes));
    }
    return SurrogateModel(std::move(trees), params, *seed, hash, n_features);
}

OracleReport evaluate_oracle(std::span<const double> y_true, std::span<const double> y_pred) {
    if (y_true.size() != y_pred.size()) {
        throw LengthMismatch("oracle needs equally many true and predicted values");
    }
    if (y_true.empty()) throw EmptyEvaluation("oracle evaluation needs at least one pair");
    const double n = static_cast<double>(y_true.size());

    double abs_sum = 0.0;
    double sq_sum = 0.0;
    double mean_true = 0.0;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const double e = y_true[i] - y_pred[i];
        abs_sum += std::abs(e);
        sq_sum += e * e;
        mean_true += y_true[i];
    }
    mean_true /= n;
    double ss_tot = 0.0;
    for (double y : y_true) ss_tot += (y - mean_true) * (y - mean_true);

    OracleReport report;
    report.n_evaluated = y_true.size();
    report.mae = abs_sum / n;
    if (ss_tot > 0.0) report.r2 = 1.0 - sq_sum / ss_tot;

    if (report.mae > 0.0) {
        double var = 0.0;
        for (std::size_t i = 0; i < y_true.size(); ++i) {
            const double d = std::abs(y_true[i] - y_pred[i]) - report.mae;
            var += d * d;
        }
        report.cv_of_errors = std::sqrt(var / n) / report.mae;
    }
    return report;
}

}  // namespace dqsops
