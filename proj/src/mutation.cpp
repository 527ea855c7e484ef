#include "dqsops/mutation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "dqsops/errors.hpp"
#include "dqsops/random.hpp"

namespace dqsops {
namespace {

constexpr std::uint64_t kMutateSalt = 0x6d75746174650001ULL;
constexpr std::uint64_t kPlanSalt = 0x706c616e00000002ULL;
constexpr std::uint64_t kGeneratorSalt = 0x67656e0000000003ULL;

std::size_t cell_count(double pct, std::size_t n) {
    if (pct <= 0.0) return 0;
    const auto c = static_cast<std::size_t>(std::llround(pct / 100.0 * static_cast<double>(n)));
    return std::max<std::size_t>(c, 1);
}

double population_std(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double acc = 0.0;
    for (double x : xs) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(xs.size()));
}

void check_plan(const MutationPlan& plan) {
    for (double p : {plan.accuracy_pct, plan.completeness_pct, plan.consistency_pct,
                     plan.distribution_pct}) {
        if (!(p >= 0.0 && p <= 100.0)) throw PlanInfeasible("mutation percentage outside [0, 100]");
    }
    if (plan.accuracy_pct + plan.completeness_pct + plan.consistency_pct > 100.0 + 1e-9) {
        throw PlanInfeasible("cell-level mutation percentages sum above 100");
    }
    if (!(plan.integrity_min < plan.integrity_max)) {
        throw PlanInfeasible("integrity bounds must satisfy lo < hi");
    }
}

}  // namespace

std::string_view to_string(MutantClass c) {
    switch (c) {
        case MutantClass::Anomaly: return "anomaly";
        case MutantClass::Missing: return "missing";
        case MutantClass::OutOfRange: return "out_of_range";
        case MutantClass::DistributionShift: return "distribution_shift";
    }
    return "unknown";
}

bool MutationPlan::any_positive() const noexcept {
    return accuracy_pct > 0.0 || completeness_pct > 0.0 || consistency_pct > 0.0 ||
           distribution_pct > 0.0;
}

MutationPlan MutationPlan::from_config(const PipelineConfig& cfg) {
    MutationPlan p;
    p.accuracy_pct = cfg.mutation.accuracy;
    p.completeness_pct = cfg.mutation.completeness;
    p.consistency_pct = cfg.mutation.consistency;
    p.distribution_pct = cfg.mutation.distribution;
    p.seed = cfg.seed;
    p.shift_magnitude = cfg.mutation.shift_magnitude;
    p.spike_magnitude = cfg.mutation.spike_magnitude;
    p.out_of_range_margin = cfg.mutation.out_of_range_margin;
    p.integrity_min = cfg.integrity_min;
    p.integrity_max = cfg.integrity_max;
    return p;
}

MutationPlan MutationPlan::uniform(const PipelineConfig& cfg, double pct) {
    auto p = from_config(cfg);
    p.accuracy_pct = p.completeness_pct = p.consistency_pct = p.distribution_pct = pct;
    return p;
}

MutatedWindow mutate_window(const DataWindow& window, const MutationPlan& plan) {
    check_plan(plan);
    const std::size_t n = window.size();
    MutatedWindow out{window, {}};
    if (n == 0 || !plan.any_positive()) return out;

    std::vector<std::size_t> present;
    present.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (window.values[i]) present.push_back(i);
    }

    const std::size_t n_anomaly = cell_count(plan.accuracy_pct, n);
    const std::size_t n_missing = cell_count(plan.completeness_pct, n);
    const std::size_t n_range = cell_count(plan.consistency_pct, n);
    if (n_anomaly + n_missing + n_range > present.size()) {
        throw PlanInfeasible("window " + std::to_string(window.window_id) + " has " +
                             std::to_string(present.size()) + " present values, plan needs " +
                             std::to_string(n_anomaly + n_missing + n_range));
    }

    auto rng = window_engine(plan.seed, window.window_id, kMutateSalt);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Partial Fisher-Yates: the first k entries become a uniform k-subset.
    const std::size_t k = n_anomaly + n_missing + n_range;
    for (std::size_t i = 0; i < k; ++i) {
        std::uniform_int_distribution<std::size_t> pick(i, present.size() - 1);
        std::swap(present[i], present[pick(rng)]);
    }

    const auto values = window.present_values();
    double scale = population_std(values);
    if (!(scale > 0.0)) scale = 1.0;

    const double lo = plan.integrity_min;
    const double hi = plan.integrity_max;
    auto& vals = out.window.values;
    auto& cells = out.ledger.cells;

    for (std::size_t i = 0; i < n_anomaly; ++i) {
        const auto idx = present[i];
        const double v = *vals[idx];
        const double delta = (unit(rng) < 0.5 ? -1.0 : 1.0) * plan.spike_magnitude * scale;
        double nv = v + delta;
        if (nv < lo || nv > hi) nv = v - delta;
        if (nv < lo || nv > hi) nv = std::clamp(v + delta, lo, hi);
        if (nv == v) nv = (v == hi) ? lo : hi;
        vals[idx] = nv;
        cells.push_back({idx, MutantClass::Anomaly});
    }
    for (std::size_t i = n_anomaly; i < n_anomaly + n_missing; ++i) {
        vals[present[i]] = Missing;
        cells.push_back({present[i], MutantClass::Missing});
    }
    for (std::size_t i = n_anomaly + n_missing; i < k; ++i) {
        const auto idx = present[i];
        const double push = plan.out_of_range_margin * (1.0 + unit(rng));
        vals[idx] = unit(rng) < 0.5 ? lo - push : hi + push;
        cells.push_back({idx, MutantClass::OutOfRange});
    }

    // Always consume the draws so the cell-level stream does not depend on
    // the distribution percentage.
    const bool shifted = unit(rng) * 100.0 < plan.distribution_pct;
    const double sign = unit(rng) < 0.5 ? -1.0 : 1.0;
    if (shifted) {
        const double offset = sign * plan.shift_magnitude * scale;
        std::vector<bool> touched(n, false);
        for (std::size_t i = 0; i < k; ++i) touched[present[i]] = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (!touched[i] && vals[i]) vals[i] = *vals[i] + offset;
        }
        out.ledger.shift = offset;
    }

    std::sort(cells.begin(), cells.end(),
              [](const MutationLedger::Cell& a, const MutationLedger::Cell& b) {
                  return a.index < b.index;
              });
    return out;
}

MutationPlan window_plan(const MutationPlan& ceilings, const DataWindow& window) {
    auto rng = window_engine(ceilings.seed, window.window_id, kPlanSalt);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    MutationPlan p = ceilings;
    p.accuracy_pct = ceilings.accuracy_pct * unit(rng);
    p.completeness_pct = ceilings.completeness_pct * unit(rng);
    p.consistency_pct = ceilings.consistency_pct * unit(rng);
    const double total = p.accuracy_pct + p.completeness_pct + p.consistency_pct;
    if (total > 100.0) {
        const double f = 100.0 / total;
        p.accuracy_pct *= f;
        p.completeness_pct *= f;
        p.consistency_pct *= f;
    }

    // Rounded cell counts can overshoot the present values by a cell or two;
    // take the excess from the largest class.
    const std::size_t n = window.size();
    const std::size_t present = n - window.missing_count();
    const double cell = n > 0 ? 100.0 / static_cast<double>(n) : 100.0;
    std::array<double*, 3> pcts = {&p.accuracy_pct, &p.completeness_pct, &p.consistency_pct};
    auto used = [&] {
        std::size_t c = 0;
        for (double* q : pcts) c += cell_count(*q, n);
        return c;
    };
    while (used() > present) {
        double* largest = *std::max_element(pcts.begin(), pcts.end(),
                                            [](double* a, double* b) { return *a < *b; });
        *largest = std::max(0.0, *largest - cell);
    }
    return p;
}

DataWindow generate_clean_window(std::int64_t window_id, int window_size, std::uint64_t seed,
                                 const GeneratorParams& params) {
    auto rng = window_engine(seed, window_id, kGeneratorSalt);
    std::normal_distribution<double> noise(0.0, 1.0);
    DataWindow w;
    w.window_id = window_id;
    w.values.reserve(static_cast<std::size_t>(window_size));
    w.timestamps.reserve(static_cast<std::size_t>(window_size));
    const double horizon = params.decay * static_cast<double>(window_size);
    for (int t = 0; t < window_size; ++t) {
        double z = noise(rng);
        while (std::abs(z) > 5.0) z = noise(rng);
        const double trend = params.baseline + params.amplitude * std::exp(-t / horizon);
        w.values.emplace_back(trend + params.noise_std * z);
        w.timestamps.push_back(window_id * window_size + t);
    }
    return w;
}

std::vector<DataWindow> generate_clean_stream(int n_windows, int window_size, std::uint64_t seed,
                                              const GeneratorParams& params,
                                              std::int64_t first_id) {
    std::vector<DataWindow> out;
    out.reserve(static_cast<std::size_t>(std::max(n_windows, 0)));
    for (int i = 0; i < n_windows; ++i) {
        out.push_back(generate_clean_window(first_id + i, window_size, seed, params));
    }
    return out;
}

}  // namespace dqsops
