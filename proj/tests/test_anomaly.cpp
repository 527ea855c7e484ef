#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "dqsops/anomaly.hpp"
#include "dqsops/errors.hpp"
#include "oracles.hpp"

using namespace dqsops;

TEST_CASE("fit on 1..100") {
    std::vector<double> v;
    for (int i = 1; i <= 100; ++i) v.push_back(i);
    const auto d = AnomalyDetector::fit(v, 3.5);
    CHECK(d.median() == 50.5);
    std::vector<double> dev;
    for (double x : v) dev.push_back(std::abs(x - oracle::median(v)));
    CHECK(d.mad_scaled() == doctest::Approx(1.4826 * oracle::median(dev)).epsilon(1e-15));
    CHECK(d.threshold_k() == 3.5);
}

TEST_CASE("fit errors") {
    CHECK_THROWS_AS(AnomalyDetector::fit(std::vector<double>(100, 4.0), 3.5), DegenerateData);
    CHECK_THROWS_AS(AnomalyDetector::fit(std::vector<double>(10, 4.0), 3.5), InsufficientData);
    std::vector<double> ok;
    for (int i = 0; i < 50; ++i) ok.push_back(i);
    CHECK_THROWS_AS(AnomalyDetector::fit(ok, 0.0), ConfigError);
}

TEST_CASE("median matches the sort oracle") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g;
    for (int n = 1; n < 60; ++n) {
        std::vector<double> v(static_cast<std::size_t>(n));
        for (auto& x : v) x = std::round(g(rng) * 3);
        auto w = v;
        CHECK(median_inplace(w) == oracle::median(v));
    }
}

TEST_CASE("threshold is strict") {
    const auto d = AnomalyDetector::from_parameters(10.0, 2.0, 3.5);
    CHECK_FALSE(d.is_anomalous(10.0));
    CHECK(d.is_anomalous(10.0 + 4.5 * 2.0));
    CHECK(d.is_anomalous(10.0 - 4.5 * 2.0));
    CHECK_FALSE(d.is_anomalous(10.0 + 3.5 * 2.0));
}

TEST_CASE("flag rate on normal draws") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    std::vector<double> fit(200000);
    for (auto& x : fit) x = g(rng);
    const auto d = AnomalyDetector::fit(fit, 3.5);
    std::size_t flagged = 0;
    const std::size_t n = 1000000;
    for (std::size_t i = 0; i < n; ++i) flagged += d.is_anomalous(g(rng));
    const double rate = static_cast<double>(flagged) / n;
    CHECK(rate > 4.7e-4 / 5);
    CHECK(rate < 4.7e-4 * 5);

    std::size_t own = 0;
    for (double x : fit) own += d.is_anomalous(x);
    CHECK(static_cast<double>(own) / fit.size() < 0.02);
}

TEST_CASE("affine invariance of the flag") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g;
    std::uniform_real_distribution<double> u(0.1, 10.0);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(500);
        for (auto& v : x) v = g(rng);
        const double a = u(rng);
        const double b = u(rng) * 20 - 10;
        std::vector<double> y;
        for (double v : x) y.push_back(a * v + b);
        const auto dx = AnomalyDetector::fit(x, 3.5);
        const auto dy = AnomalyDetector::fit(y, 3.5);
        for (int q = 0; q < 200; ++q) {
            const double probe = g(rng) * 4;
            // Skip probes within rounding distance of the threshold.
            const double zx = std::abs(probe - dx.median()) / dx.mad_scaled();
            if (std::abs(zx - 3.5) < 1e-9) continue;
            CHECK(dx.is_anomalous(probe) == dy.is_anomalous(a * probe + b));
        }
    }
}

TEST_CASE("save and load") {
    const auto d = AnomalyDetector::from_parameters(0.1, 0.7, 3.5);
    const auto path = std::filesystem::temp_directory_path() / "dqsops_anomaly_test.txt";
    d.save(path);
    const auto back = AnomalyDetector::load(path);
    CHECK(back.median() == d.median());
    CHECK(back.mad_scaled() == d.mad_scaled());
    CHECK(back.threshold_k() == d.threshold_k());
    std::filesystem::remove(path);
    CHECK_THROWS_AS(AnomalyDetector::load(path), MissingMetaInformation);
}
