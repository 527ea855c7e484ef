#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "dqsops/config.hpp"
#include "dqsops/types.hpp"

namespace dqsops {

struct BenchOptions {
    int training_windows = 400;
    int warmup_windows = 20;
    int measured_windows = 200;
    std::uint64_t seed = 42;
};

// One row per (dimension count, method). Times are seconds per window,
// pooled over every dimension combination of that size. speedup is the
// standard mean divided by the predicted mean on both rows of a pair.
struct BenchRow {
    int dimensions = 0;
    Method method = Method::Standard;
    double mean = 0.0;
    double std = 0.0;
    double cv = 0.0;
    double speedup = 0.0;
    std::size_t samples = 0;
};

// For every non-empty subset of the five dimensions: fits an aggregator and a
// surrogate on one shared training pass, then times the standard path
// (scoring + consolidation) against the predicted path (features + forest)
// on the same fresh mutated windows. Cells are interleaved window by window
// and combinations of one size are visited round-robin.
std::vector<BenchRow> run_bench(const PipelineConfig& cfg, const BenchOptions& opt);

// dimensions,method,mean,std,cv,speedup
void write_bench_csv(std::ostream& out, const std::vector<BenchRow>& rows);

struct SweepOptions {
    int training_windows = 400;
    int validation_windows = 100;
    std::uint64_t seed = 42;
};

struct SweepRow {
    double pct = 0.0;
    double mae = 0.0;
    double mae_rel = 0.0;  // MAE / std of the validation ground truth
    std::optional<double> r2;
};

// Repeats the initialization fit with every mutation ceiling set to `pct`
// and scores each resulting surrogate on one shared validation set mutated
// at the configured production intensities.
std::vector<SweepRow> run_mutation_sweep(const PipelineConfig& cfg,
                                         const std::vector<double>& pcts,
                                         const SweepOptions& opt);

// pct,mae,mae_rel,r2 with r2 written as NA when undefined.
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace dqsops
