#include <doctest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "dqsops/config.hpp"
#include "dqsops/mutation.hpp"
#include "dqsops/repository.hpp"

using namespace dqsops;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run(const std::string& args) {
    const std::string cmd = std::string("\"") + DQSOPS_CLI_PATH + "\" " + args + " 2>/dev/null";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    REQUIRE(p != nullptr);
    std::array<char, 4096> buf{};
    while (fgets(buf.data(), buf.size(), p)) r.out += buf.data();
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

PipelineConfig quick_config() {
    PipelineConfig cfg;
    cfg.init.reference_windows = 20;
    cfg.init.batch_windows = 150;
    cfg.init.max_windows = 600;
    cfg.forest.n_trees = 20;
    cfg.forest.max_depth = 12;
    cfg.forest.min_samples_leaf = 2;
    cfg.tau_fraction = 0.5;
    return cfg;
}

fs::path workdir(const std::string& name) {
    const auto d = fs::temp_directory_path() / ("dqsops_cli_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

fs::path write_config(const fs::path& dir, const PipelineConfig& cfg) {
    const auto p = dir / "pipeline.conf";
    std::ofstream(p) << serialize_config(cfg);
    return p;
}

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

// Config after a successful init in its own directory.
fs::path initialized(const std::string& name) {
    const auto dir = workdir(name);
    const auto conf = write_config(dir, quick_config());
    const auto r = run("init --config " + q(conf));
    REQUIRE(r.code == 0);
    return conf;
}

}  // namespace

TEST_CASE("usage and configuration errors exit with 1") {
    CHECK(run("").code == 1);
    CHECK(run("init").code == 1);
    CHECK(run("init --config /nonexistent/dqsops.conf").code == 1);
    const auto dir = workdir("badkey");
    std::ofstream(dir / "bad.conf") << "no_such_key = 3\n";
    CHECK(run("init --config " + q(dir / "bad.conf")).code == 1);
    CHECK(run("--help").code == 0);
}

TEST_CASE("run before init is a configuration error") {
    const auto dir = workdir("noinit");
    CHECK(run("run --config " + q(write_config(dir, quick_config()))).code == 1);
}

TEST_CASE("unreachable tolerance exits with 3") {
    const auto dir = workdir("budget");
    auto cfg = quick_config();
    cfg.tau_mae = 1e-9;
    cfg.init.max_windows = 150;
    CHECK(run("init --config " + q(write_config(dir, cfg))).code == 3);
}

TEST_CASE("init, score and run") {
    const auto conf = initialized("flow");
    const auto dir = conf.parent_path();
    const auto cfg = load_config(conf);
    REQUIRE(cfg.tau_mae.has_value());
    CHECK(fs::exists(dir / "surrogate_model.txt"));
    CHECK(fs::exists(dir / "aggregator.txt"));

    SUBCASE("score on clean data stays low") {
        std::ofstream data(dir / "clean.csv");
        data << "timestamp,value\n";
        for (const auto& w : generate_clean_stream(5, cfg.window_size, 901, cfg.generator, 0)) {
            for (std::size_t i = 0; i < w.size(); ++i) data << w.timestamps[i] << ',' << *w.values[i] << '\n';
        }
        data.close();
        const auto r = run("score --config " + q(conf) + " --input " + q(dir / "clean.csv"));
        REQUIRE(r.code == 0);
        std::istringstream lines(r.out);
        std::string line;
        int n = 0;
        while (std::getline(lines, line)) {
            const auto rec = parse_score_record(line);
            REQUIRE(rec.dimension_scores.has_value());
            CHECK(rec.dimension_scores->size() == 5);
            for (double s : rec.dimension_scores->values()) CHECK(s <= 0.05);
            ++n;
        }
        CHECK(n == 5);
    }
    SUBCASE("malformed input exits with 2") {
        std::ofstream(dir / "broken.csv") << "1,0.5\n2,abc\n";
        CHECK(run("score --config " + q(conf) + " --input " + q(dir / "broken.csv")).code == 2);
    }
    SUBCASE("run appends to the repository") {
        const auto before = read_score_repository(dir / "score_repository.csv").size();
        const auto r = run("run --config " + q(conf) + " --windows 30");
        CHECK(r.code == 0);
        const auto after = read_score_repository(dir / "score_repository.csv").size();
        CHECK(after >= before + 30);
        CHECK(read_evaluation_log(dir / "evaluation_log.csv").size() == 3);
    }
    SUBCASE("persistent retrain failure exits with 4") {
        auto hard = cfg;
        hard.tau_mae = 1e-12;
        hard.max_retrain_rounds = 1;
        std::ofstream(conf) << serialize_config(hard);
        CHECK(run("run --config " + q(conf) + " --windows 30").code == 4);
        std::ifstream status(dir / "status.txt");
        std::string text((std::istreambuf_iterator<char>(status)), {});
        CHECK(text.find("alert = true") != std::string::npos);
    }
}

TEST_CASE("bench and sweep write CSV") {
    const auto dir = workdir("reports");
    const auto conf = write_config(dir, quick_config());
    const auto b = run("bench --config " + q(conf) +
                       " --training-windows 60 --warmup 2 --windows 5 --format csv");
    CHECK(b.code == 0);
    CHECK(b.out.rfind("dimensions,method,mean,std,cv,speedup\n", 0) == 0);
    const auto s = run("sweep-mutation --config " + q(conf) +
                       " --pcts 0,20 --windows 60 --validation-windows 20 --out " +
                       q(dir / "sweep.csv"));
    CHECK(s.code == 0);
    std::ifstream in(dir / "sweep.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "pct,mae,mae_rel,r2");
}
