#include "dqsops/harness.hpp"

#include <chrono>
#include <cmath>

#include "dqsops/activator.hpp"
#include "dqsops/aggregation.hpp"
#include "dqsops/errors.hpp"
#include "dqsops/predictor.hpp"
#include "dqsops/random.hpp"
#include "dqsops/scorers.hpp"
#include "dqsops/stream.hpp"
#include "text.hpp"

namespace dqsops {
namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint64_t kTestStreamSalt = 0x7e57'0000'0000'0001ULL;
constexpr std::int64_t kTestFirstId = 10'000'000;

struct Moments {
    double mean = 0.0;
    double std = 0.0;
};

Moments moments(const std::vector<double>& v) {
    Moments m;
    if (v.empty()) return m;
    for (double x : v) m.mean += x;
    m.mean /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(v.size()));
    return m;
}

struct Combination {
    std::vector<Dimension> dims;
    std::vector<std::size_t> columns;  // positions in kAllDimensions
    Aggregator aggregator;
    SurrogateModel model;
};

}  // namespace

std::vector<BenchRow> run_bench(const PipelineConfig& base, const BenchOptions& opt) {
    if (opt.measured_windows < 1 || opt.warmup_windows < 0 || opt.training_windows < 1) {
        throw ConfigError("bench window counts must be positive");
    }
    PipelineConfig cfg = base;
    cfg.enabled_dimensions.assign(kAllDimensions.begin(), kAllDimensions.end());

    SyntheticWindowSource clean(cfg, opt.seed, std::nullopt);
    const auto fitted = fit_references(clean, cfg);
    const auto refs = make_references(cfg, fitted.detector, fitted.reference);
    const auto plan = MutationPlan::from_config(cfg);

    std::vector<TrainingRow> rows;
    for (int i = 0; i < opt.training_windows; ++i) {
        rows.push_back(make_training_row(*clean.next(), plan, refs, cfg));
    }
    std::vector<FeatureVector> features;
    for (const auto& r : rows) features.push_back(r.features);

    std::array<std::vector<Combination>, kAllDimensions.size() + 1> by_size;
    for (unsigned mask = 1; mask < (1u << kAllDimensions.size()); ++mask) {
        std::vector<Dimension> dims;
        std::vector<std::size_t> cols;
        for (std::size_t j = 0; j < kAllDimensions.size(); ++j) {
            if (mask & (1u << j)) {
                dims.push_back(kAllDimensions[j]);
                cols.push_back(j);
            }
        }
        Matrix dq(rows.size(), cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const auto v = rows[i].scores.values();
            for (std::size_t c = 0; c < cols.size(); ++c) dq(i, c) = v[cols[c]];
        }
        auto agg = Aggregator::fit(dq, dims);
        std::vector<double> y;
        for (std::size_t i = 0; i < rows.size(); ++i) y.push_back(agg.consolidate(dq.row(i)));
        auto model = SurrogateModel::train(features, y, cfg.forest, mix_seed(opt.seed + mask));
        by_size[cols.size()].push_back({dims, cols, std::move(agg), std::move(model)});
    }

    SyntheticWindowSource test(cfg, opt.seed ^ kTestStreamSalt, std::nullopt, plan, kTestFirstId);
    std::array<std::vector<double>, kAllDimensions.size() + 1> t_std, t_pred;
    volatile double sink = 0.0;
    const int total = opt.warmup_windows + opt.measured_windows;
    for (int i = 0; i < total; ++i) {
        const auto window = *test.next();
        const bool keep = i >= opt.warmup_windows;
        for (std::size_t d = 1; d <= kAllDimensions.size(); ++d) {
            const auto& combo = by_size[d][static_cast<std::size_t>(i) % by_size[d].size()];

            auto t0 = Clock::now();
            const auto scored = score_all_dimensions(window, refs, combo.dims);
            const double standard = combo.aggregator.consolidate(scored.scores);
            auto t1 = Clock::now();
            sink = sink + standard;
            if (keep) t_std[d].push_back(std::chrono::duration<double>(t1 - t0).count());

            t0 = Clock::now();
            const double predicted = combo.model.predict(extract_features(window, cfg));
            t1 = Clock::now();
            sink = sink + predicted;
            if (keep) t_pred[d].push_back(std::chrono::duration<double>(t1 - t0).count());
        }
    }

    std::vector<BenchRow> out;
    for (std::size_t d = 1; d <= kAllDimensions.size(); ++d) {
        const auto s = moments(t_std[d]);
        const auto p = moments(t_pred[d]);
        const double speedup = p.mean > 0.0 ? s.mean / p.mean : 0.0;
        out.push_back({static_cast<int>(d), Method::Standard, s.mean, s.std,
                       s.mean > 0.0 ? s.std / s.mean : 0.0, speedup, t_std[d].size()});
        out.push_back({static_cast<int>(d), Method::Predicted, p.mean, p.std,
                       p.mean > 0.0 ? p.std / p.mean : 0.0, speedup, t_pred[d].size()});
    }
    return out;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows) {
    out << "dimensions,method,mean,std,cv,speedup\n";
    for (const auto& r : rows) {
        out << r.dimensions << ',' << to_string(r.method) << ',' << text::format_double(r.mean)
            << ',' << text::format_double(r.std) << ',' << text::format_double(r.cv) << ','
            << text::format_double(r.speedup) << '\n';
    }
}

std::vector<SweepRow> run_mutation_sweep(const PipelineConfig& cfg,
                                         const std::vector<double>& pcts,
                                         const SweepOptions& opt) {
    if (opt.training_windows < 1 || opt.validation_windows < 1) {
        throw ConfigError("sweep window counts must be positive");
    }
    SyntheticWindowSource clean(cfg, opt.seed, std::nullopt);
    const auto fitted = fit_references(clean, cfg);
    const auto refs = make_references(cfg, fitted.detector, fitted.reference);

    std::vector<DataWindow> training;
    for (int i = 0; i < opt.training_windows; ++i) training.push_back(*clean.next());

    const auto production = MutationPlan::from_config(cfg);
    SyntheticWindowSource held_out(cfg, opt.seed ^ kTestStreamSalt, opt.validation_windows,
                                   std::nullopt, kTestFirstId);
    std::vector<TrainingRow> validation;
    while (auto w = held_out.next()) {
        validation.push_back(make_training_row(*w, production, refs, cfg));
    }

    std::vector<SweepRow> out;
    for (double pct : pcts) {
        const auto plan = MutationPlan::uniform(cfg, pct);
        std::vector<TrainingRow> rows;
        rows.reserve(training.size());
        for (const auto& w : training) rows.push_back(make_training_row(w, plan, refs, cfg));
        const auto fit = fit_surrogate(rows, cfg);

        std::vector<double> truth, pred;
        for (const auto& v : validation) {
            truth.push_back(fit.aggregator.consolidate(v.scores));
            pred.push_back(fit.model.predict(v.features));
        }
        const auto report = evaluate_oracle(truth, pred);
        const double spread = moments(truth).std;
        out.push_back({pct, report.mae, spread > 0.0 ? report.mae / spread : 0.0, report.r2});
    }
    return out;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
    out << "pct,mae,mae_rel,r2\n";
    for (const auto& r : rows) {
        out << text::format_double(r.pct) << ',' << text::format_double(r.mae) << ','
            << text::format_double(r.mae_rel) << ','
            << (r.r2 ? text::format_double(*r.r2) : std::string("NA")) << '\n';
    }
}

}  // namespace dqsops
