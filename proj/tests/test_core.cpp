#include <doctest.h>

#include <random>

#include "dqsops/config.hpp"
#include "dqsops/errors.hpp"
#include "dqsops/types.hpp"

using namespace dqsops;

TEST_CASE("window helpers keep missing distinct from values") {
    DataWindow w;
    w.values = {1.0, Missing, 3.0, Missing};
    CHECK(w.missing_count() == 2);
    CHECK(w.present_values() == std::vector<double>{1.0, 3.0});

    const std::vector<double> xs{1, 2, 3};
    auto m = make_window(7, xs);
    CHECK(m.window_id == 7);
    CHECK(m.size() == 3);
    CHECK(m.missing_count() == 0);
}

TEST_CASE("dimension names round trip") {
    for (auto d : kAllDimensions) CHECK(parse_dimension(to_string(d)) == d);
    CHECK_THROWS_AS(parse_dimension("freshness"), ConfigError);
    CHECK(parse_method("standard") == Method::Standard);
    CHECK(parse_method("predicted") == Method::Predicted);
}

TEST_CASE("score vector rejects duplicate dimensions") {
    DimensionScoreVector v(1, {{Dimension::Accuracy, 0.1}, {Dimension::Skewness, 0.2}});
    CHECK(v.get(Dimension::Skewness) == doctest::Approx(0.2));
    CHECK_FALSE(v.get(Dimension::Completeness).has_value());
    CHECK(v.dimensions() == std::vector<Dimension>{Dimension::Accuracy, Dimension::Skewness});
    CHECK_THROWS(DimensionScoreVector(1, {{Dimension::Accuracy, 0.1}, {Dimension::Accuracy, 0.2}}));
}

TEST_CASE("validate_config examples") {
    PipelineConfig c;
    c.beta = 10;
    c.n_ground_truth = 1;
    CHECK_NOTHROW(validate_config(c));

    c.beta = 5;
    c.n_ground_truth = 5;
    CHECK_THROWS_AS(validate_config(c), ConfigError);

    PipelineConfig b;
    b.histogram_bins = 1;
    CHECK_THROWS_AS(validate_config(b), ConfigError);

    PipelineConfig r;
    r.histogram_lo = 5;
    r.histogram_hi = 5;
    CHECK_THROWS_AS(validate_config(r), ConfigError);

    PipelineConfig e;
    e.enabled_dimensions.clear();
    CHECK_THROWS_AS(validate_config(e), ConfigError);
}

TEST_CASE("defaults") {
    PipelineConfig c;
    CHECK(c.window_size == 1000);
    CHECK(c.beta == 10);
    CHECK(c.n_ground_truth == 1);
    CHECK(c.anomaly_threshold_k == 3.5);
    CHECK(c.histogram_bins == 32);
    CHECK_FALSE(c.tau_mae.has_value());
    CHECK(c.tau_fraction == 0.1);
    CHECK(c.forest.n_trees == 50);
    CHECK(c.forest.max_depth == 8);
    CHECK(c.forest.min_samples_leaf == 5);
    CHECK(c.enabled_dimensions.size() == 5);
}

TEST_CASE("parse_config reads keys, comments and lists") {
    const auto c = parse_config(R"(# pump station
window_size = 500
enabled_dimensions = accuracy, timeliness   # two only
integrity_max = 80.5
tau_mae = 0.25
forest.n_trees = 10
mutation.accuracy = 5
paths.aggregator = agg.txt
)");
    CHECK(c.window_size == 500);
    CHECK(c.enabled_dimensions == std::vector<Dimension>{Dimension::Accuracy, Dimension::Timeliness});
    CHECK(c.integrity_max == 80.5);
    CHECK(c.tau_mae == 0.25);
    CHECK(c.forest.n_trees == 10);
    CHECK(c.mutation.accuracy == 5);
    CHECK(c.paths.aggregator == "agg.txt");
}

TEST_CASE("parse_config errors") {
    CHECK_THROWS_AS(parse_config("no_such_key = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("window_size = ten\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("window_size = 10\nwindow_size = 20\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("window_size\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("beta = 3\nn_ground_truth = 3\n"), ConfigError);
}

TEST_CASE("config round trip over random valid configs") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        PipelineConfig c;
        c.window_size = 1 + static_cast<int>(u(rng) * 5000);
        c.integrity_min = -u(rng) * 100;
        c.integrity_max = u(rng) * 100 + 1e-3;
        c.anomaly_threshold_k = 0.5 + u(rng) * 5;
        c.histogram_bins = 2 + static_cast<int>(u(rng) * 100);
        c.histogram_lo = -u(rng);
        c.histogram_hi = u(rng) * 1e6 + 1e-9;
        c.beta = 2 + static_cast<int>(u(rng) * 50);
        c.n_ground_truth = 1 + static_cast<int>(u(rng) * (c.beta - 1));
        if (u(rng) < 0.5) c.tau_mae = u(rng) / 3.0;
        c.tau_fraction = u(rng);
        c.seed = rng();
        c.mutation.accuracy = u(rng) * 30;
        c.mutation.shift_magnitude = u(rng) * 3;
        c.forest.bootstrap = u(rng) < 0.5;
        c.forest.max_features = static_cast<int>(u(rng) * 13);
        c.generator.noise_std = 0.1 + u(rng);
        c.paths.feature_store = "dir with space/fs.csv";
        std::vector<Dimension> dims;
        for (auto d : kAllDimensions)
            if (u(rng) < 0.6) dims.push_back(d);
        if (dims.empty()) dims.push_back(Dimension::Skewness);
        c.enabled_dimensions = dims;
        const auto back = parse_config(serialize_config(c));
        CHECK(back == c);
    }
}
