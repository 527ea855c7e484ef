#include <doctest.h>

#include <cmath>
#include <cstring>
#include <random>
#include <set>

#include "dqsops/errors.hpp"
#include "dqsops/mutation.hpp"
#include "dqsops/scorers.hpp"

using namespace dqsops;

namespace {

MutationPlan base_plan() {
    PipelineConfig cfg;
    auto p = MutationPlan::uniform(cfg, 0.0);
    p.seed = 99;
    return p;
}

bool same_bits(const DataWindow& a, const DataWindow& b) {
    if (a.size() != b.size() || a.window_id != b.window_id || a.timestamps != b.timestamps)
        return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a.values[i].has_value() != b.values[i].has_value()) return false;
        if (a.values[i] && std::memcmp(&*a.values[i], &*b.values[i], sizeof(double)) != 0)
            return false;
    }
    return true;
}

}  // namespace

TEST_CASE("zero plan is the identity") {
    PipelineConfig cfg;
    for (const auto& w : generate_clean_stream(5, 300, 3, cfg.generator)) {
        const auto m = mutate_window(w, base_plan());
        CHECK(same_bits(m.window, w));
        CHECK(m.ledger.empty());
    }
}

TEST_CASE("exact injection examples") {
    PipelineConfig cfg;
    auto plan = base_plan();
    plan.completeness_pct = 20;
    const auto w = generate_clean_window(0, 100, 1, cfg.generator);
    const auto m = mutate_window(w, plan);
    CHECK(m.window.missing_count() == 20);
    CHECK(score_completeness(m.window) == 0.2);

    auto p2 = base_plan();
    p2.consistency_pct = 10;
    const auto w2 = generate_clean_window(1, 200, 1, cfg.generator);
    const auto m2 = mutate_window(w2, p2);
    CHECK(score_consistency(m2.window, cfg.integrity_min, cfg.integrity_max) == 0.1);
    CHECK(score_completeness(m2.window) == 0.0);

    auto tiny = base_plan();
    tiny.accuracy_pct = 0.01;
    CHECK(mutate_window(w, tiny).ledger.cells.size() == 1);
}

TEST_CASE("infeasible plans") {
    PipelineConfig cfg;
    const auto w = generate_clean_window(0, 10, 1, cfg.generator);
    auto p = base_plan();
    p.accuracy_pct = 60;
    p.completeness_pct = 50;
    CHECK_THROWS_AS(mutate_window(w, p), PlanInfeasible);
    auto q = base_plan();
    q.distribution_pct = 120;
    CHECK_THROWS_AS(mutate_window(w, q), PlanInfeasible);

    // Fits by percentage but not by present values.
    DataWindow holes = w;
    for (std::size_t i = 0; i < 8; ++i) holes.values[i] = Missing;
    auto r = base_plan();
    r.accuracy_pct = 30;
    CHECK_THROWS_AS(mutate_window(holes, r), PlanInfeasible);
}

TEST_CASE("random plans: exactness, ledger completeness, nonequivalence, determinism") {
    PipelineConfig cfg;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 400; ++i) {
        const int n = 1 + static_cast<int>(u(rng) * 1500);
        const auto w = generate_clean_window(i, n, 17, cfg.generator);
        auto plan = base_plan();
        plan.seed = rng();
        plan.accuracy_pct = u(rng) * 40;
        plan.completeness_pct = u(rng) * 30;
        plan.consistency_pct = u(rng) * 30;
        plan.distribution_pct = u(rng) < 0.3 ? 0.0 : u(rng) * 100;
        if (u(rng) < 0.2) plan.accuracy_pct = 0;
        MutatedWindow m;
        try {
            m = mutate_window(w, plan);
        } catch (const PlanInfeasible&) {
            // Only tiny windows may round past N.
            CHECK(n < 20);
            continue;
        }
        const double nd = static_cast<double>(n);
        CHECK(std::abs(score_completeness(m.window) - plan.completeness_pct / 100.0) <= 1.0 / nd);
        CHECK(std::abs(score_consistency(m.window, cfg.integrity_min, cfg.integrity_max) -
                       plan.consistency_pct / 100.0) <= 1.0 / nd);

        std::set<std::size_t> ledger;
        for (const auto& c : m.ledger.cells) ledger.insert(c.index);
        CHECK(ledger.size() == m.ledger.cells.size());
        for (std::size_t k = 0; k < w.size(); ++k) {
            const bool changed = m.window.values[k] != w.values[k];
            if (ledger.count(k)) {
                CHECK(changed);
            } else if (m.ledger.shift) {
                CHECK(*m.window.values[k] == doctest::Approx(*w.values[k] + *m.ledger.shift));
            } else {
                CHECK_FALSE(changed);
            }
        }
        for (const auto& c : m.ledger.cells) {
            const auto& v = m.window.values[c.index];
            if (c.kind == MutantClass::Missing) CHECK_FALSE(v.has_value());
            if (c.kind == MutantClass::OutOfRange)
                CHECK((*v < cfg.integrity_min || *v > cfg.integrity_max));
            if (c.kind == MutantClass::Anomaly)
                CHECK((*v >= cfg.integrity_min && *v <= cfg.integrity_max));
        }

        if (plan.accuracy_pct + plan.completeness_pct + plan.consistency_pct > 0.0)
            CHECK_FALSE(same_bits(m.window, w));

        const auto again = mutate_window(w, plan);
        CHECK(same_bits(again.window, m.window));
        CHECK(again.ledger.cells == m.ledger.cells);
    }
}

TEST_CASE("distribution shift is all or nothing and frequency follows the percentage") {
    PipelineConfig cfg;
    auto plan = base_plan();
    plan.distribution_pct = 30;
    int shifted = 0;
    const int trials = 2000;
    for (int i = 0; i < trials; ++i) {
        const auto w = generate_clean_window(i, 50, 4, cfg.generator);
        const auto m = mutate_window(w, plan);
        CHECK(m.ledger.cells.empty());
        if (m.ledger.shift) {
            ++shifted;
            CHECK(std::abs(*m.ledger.shift) > 0.0);
        }
    }
    CHECK(std::abs(shifted / static_cast<double>(trials) - 0.3) < 0.05);
}

TEST_CASE("window_plan stays within ceilings and fits the window") {
    PipelineConfig cfg;
    auto ceilings = MutationPlan::uniform(cfg, 50.0);
    ceilings.seed = 8;
    for (int n : {1, 3, 7, 10, 100, 1000}) {
        for (int i = 0; i < 100; ++i) {
            auto w = generate_clean_window(i, n, 2, cfg.generator);
            if (i % 3 == 0 && n > 2) w.values[0] = Missing;
            const auto p = window_plan(ceilings, w);
            CHECK(p.accuracy_pct <= 50.0);
            CHECK(p.completeness_pct <= 50.0);
            CHECK(p.consistency_pct <= 50.0);
            CHECK(p.accuracy_pct + p.completeness_pct + p.consistency_pct <= 100.0 + 1e-9);
            CHECK(p.distribution_pct == 50.0);
            CHECK_NOTHROW(mutate_window(w, p));
            const auto p2 = window_plan(ceilings, w);
            CHECK(p2.accuracy_pct == p.accuracy_pct);
        }
    }
}

TEST_CASE("clean generator") {
    PipelineConfig cfg;
    const auto a = generate_clean_stream(4, 500, 12, cfg.generator);
    const auto b = generate_clean_stream(4, 500, 12, cfg.generator);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(same_bits(a[i], b[i]));
        CHECK(score_consistency(a[i], cfg.integrity_min, cfg.integrity_max) == 0.0);
    }
    CHECK(generate_clean_stream(0, 500, 12, cfg.generator).empty());
    CHECK_FALSE(same_bits(a[0], generate_clean_window(0, 500, 13, cfg.generator)));
}
