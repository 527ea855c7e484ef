#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dqsops/config.hpp"
#include "dqsops/types.hpp"

namespace dqsops {

enum class MutantClass { Anomaly, Missing, OutOfRange, DistributionShift };

std::string_view to_string(MutantClass c);

// Mutation recipe for one window. Percentages are in [0, 100]; the three
// cell-level classes must sum to at most 100.
struct MutationPlan {
    double accuracy_pct = 0.0;      // anomaly spikes
    double completeness_pct = 0.0;  // missing markers
    double consistency_pct = 0.0;   // out-of-range values
    double distribution_pct = 0.0;  // probability of a whole-window shift
    std::uint64_t seed = 0;
    double shift_magnitude = 1.0;
    double spike_magnitude = 6.0;
    double out_of_range_margin = 5.0;
    double integrity_min = 0.0;
    double integrity_max = 1.0;

    bool any_positive() const noexcept;

    // Plan using the configured percentages as they are.
    static MutationPlan from_config(const PipelineConfig& cfg);
    // Same magnitudes and bounds, every percentage set to `pct`.
    static MutationPlan uniform(const PipelineConfig& cfg, double pct);
};

struct MutationLedger {
    struct Cell {
        std::size_t index;
        MutantClass kind;
        bool operator==(const Cell&) const = default;
    };
    std::vector<Cell> cells;  // sorted by index
    // Offset added to every untouched value when the window was shifted.
    std::optional<double> shift;

    bool empty() const noexcept { return cells.empty() && !shift; }
};

struct MutatedWindow {
    DataWindow window;
    MutationLedger ledger;
};

// Injects disjoint cell-level mutants of exact size round(pct/100 * N) (at
// least one cell for a positive percentage), then shifts the untouched
// values with probability distribution_pct/100. Randomness comes from
// plan.seed XOR window_id. Throws PlanInfeasible.
MutatedWindow mutate_window(const DataWindow& window, const MutationPlan& plan);

// Per-window plan used for initialization and synthetic streams: each
// cell-level percentage is drawn uniformly from [0, configured ceiling]
// (rescaled to sum to 100 if the draws exceed it); distribution keeps the
// configured probability. Percentages are then trimmed so the rounded cell
// counts fit the window's present values.
MutationPlan window_plan(const MutationPlan& ceilings, const DataWindow& window);

// Deterministic synthetic pump-down windows, see GeneratorParams.
DataWindow generate_clean_window(std::int64_t window_id, int window_size, std::uint64_t seed,
                                 const GeneratorParams& params);
std::vector<DataWindow> generate_clean_stream(int n_windows, int window_size, std::uint64_t seed,
                                              const GeneratorParams& params,
                                              std::int64_t first_id = 0);

}  // namespace dqsops
