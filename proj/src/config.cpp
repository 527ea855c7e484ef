#include "dqsops/config.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "dqsops/errors.hpp"
#include "text.hpp"

namespace dqsops {
namespace {

struct Field {
    std::string_view key;
    std::function<void(PipelineConfig&, std::string_view)> set;
    std::function<std::optional<std::string>(const PipelineConfig&)> get;
};

[[noreturn]] void bad_value(std::string_view key, std::string_view value) {
    throw ConfigError("invalid value '" + std::string(value) + "' for key '" + std::string(key) +
                      "'");
}

template <typename Int>
Field int_field(std::string_view key, Int PipelineConfig::*member) {
    return {key,
            [key, member](PipelineConfig& c, std::string_view v) {
                auto parsed = text::parse_int<Int>(v);
                if (!parsed) bad_value(key, v);
                c.*member = *parsed;
            },
            [member](const PipelineConfig& c) -> std::optional<std::string> {
                return std::to_string(c.*member);
            }};
}

// Accessor-based variant for nested structs.
template <typename Get>
Field double_field(std::string_view key, Get ref) {
    return {key,
            [key, ref](PipelineConfig& c, std::string_view v) {
                auto parsed = text::parse_double(v);
                if (!parsed) bad_value(key, v);
                ref(c) = *parsed;
            },
            [ref](const PipelineConfig& c) -> std::optional<std::string> {
                return text::format_double(ref(c));
            }};
}

template <typename Get>
Field nested_int_field(std::string_view key, Get ref) {
    return {key,
            [key, ref](PipelineConfig& c, std::string_view v) {
                auto parsed = text::parse_int<int>(v);
                if (!parsed) bad_value(key, v);
                ref(c) = *parsed;
            },
            [ref](const PipelineConfig& c) -> std::optional<std::string> {
                return std::to_string(ref(c));
            }};
}

template <typename Get>
Field path_field(std::string_view key, Get ref) {
    return {key,
            [ref](PipelineConfig& c, std::string_view v) { ref(c) = std::string(v); },
            [ref](const PipelineConfig& c) -> std::optional<std::string> {
                return ref(c);
            }};
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(int_field("window_size", &PipelineConfig::window_size));
        f.push_back({"enabled_dimensions",
                     [](PipelineConfig& c, std::string_view v) {
                         c.enabled_dimensions.clear();
                         for (auto item : text::split(v, ',')) {
                             item = text::trim(item);
                             if (item.empty()) continue;
                             c.enabled_dimensions.push_back(parse_dimension(item));
                         }
                     },
                     [](const PipelineConfig& c) -> std::optional<std::string> {
                         std::string out;
                         for (std::size_t i = 0; i < c.enabled_dimensions.size(); ++i) {
                             if (i) out += ", ";
                             out += to_string(c.enabled_dimensions[i]);
                         }
                         return out;
                     }});
        f.push_back(double_field("integrity_min", [](auto& c) -> auto& { return c.integrity_min; }));
        f.push_back(double_field("integrity_max", [](auto& c) -> auto& { return c.integrity_max; }));
        f.push_back(double_field("anomaly_threshold_k", [](auto& c) -> auto& { return c.anomaly_threshold_k; }));
        f.push_back(int_field("histogram_bins", &PipelineConfig::histogram_bins));
        f.push_back({"histogram_range",
                     [](PipelineConfig& c, std::string_view v) {
                         const auto parts = text::split(v, ',');
                         if (parts.size() != 2) bad_value("histogram_range", v);
                         auto lo = text::parse_double(parts[0]);
                         auto hi = text::parse_double(parts[1]);
                         if (!lo || !hi) bad_value("histogram_range", v);
                         c.histogram_lo = *lo;
                         c.histogram_hi = *hi;
                     },
                     [](const PipelineConfig& c) -> std::optional<std::string> {
                         return text::format_double(c.histogram_lo) + ", " +
                                text::format_double(c.histogram_hi);
                     }});
        f.push_back(int_field("beta", &PipelineConfig::beta));
        f.push_back(int_field("n_ground_truth", &PipelineConfig::n_ground_truth));
        f.push_back({"tau_mae",
                     [](PipelineConfig& c, std::string_view v) {
                         auto parsed = text::parse_double(v);
                         if (!parsed) bad_value("tau_mae", v);
                         c.tau_mae = *parsed;
                     },
                     [](const PipelineConfig& c) -> std::optional<std::string> {
                         if (!c.tau_mae) return std::nullopt;
                         return text::format_double(*c.tau_mae);
                     }});
        f.push_back(double_field("tau_fraction", [](auto& c) -> auto& { return c.tau_fraction; }));
        f.push_back(int_field("max_retrain_rounds", &PipelineConfig::max_retrain_rounds));
        f.push_back(int_field("seed", &PipelineConfig::seed));

        f.push_back(double_field("mutation.accuracy", [](auto& c) -> auto& { return c.mutation.accuracy; }));
        f.push_back(double_field("mutation.completeness", [](auto& c) -> auto& { return c.mutation.completeness; }));
        f.push_back(double_field("mutation.consistency", [](auto& c) -> auto& { return c.mutation.consistency; }));
        f.push_back(double_field("mutation.distribution", [](auto& c) -> auto& { return c.mutation.distribution; }));
        f.push_back(double_field("mutation.shift_magnitude", [](auto& c) -> auto& { return c.mutation.shift_magnitude; }));
        f.push_back(double_field("mutation.spike_magnitude", [](auto& c) -> auto& { return c.mutation.spike_magnitude; }));
        f.push_back(double_field("mutation.out_of_range_margin", [](auto& c) -> auto& { return c.mutation.out_of_range_margin; }));

        f.push_back(nested_int_field("forest.n_trees", [](auto& c) -> auto& { return c.forest.n_trees; }));
        f.push_back(nested_int_field("forest.max_depth", [](auto& c) -> auto& { return c.forest.max_depth; }));
        f.push_back(nested_int_field("forest.min_samples_leaf", [](auto& c) -> auto& { return c.forest.min_samples_leaf; }));
        f.push_back(nested_int_field("forest.max_features", [](auto& c) -> auto& { return c.forest.max_features; }));
        f.push_back({"forest.bootstrap",
                     [](PipelineConfig& c, std::string_view v) {
                         v = text::trim(v);
                         if (v == "true" || v == "1") c.forest.bootstrap = true;
                         else if (v == "false" || v == "0") c.forest.bootstrap = false;
                         else bad_value("forest.bootstrap", v);
                     },
                     [](const PipelineConfig& c) -> std::optional<std::string> {
                         return std::string(c.forest.bootstrap ? "true" : "false");
                     }});

        f.push_back(nested_int_field("init.reference_windows", [](auto& c) -> auto& { return c.init.reference_windows; }));
        f.push_back(nested_int_field("init.batch_windows", [](auto& c) -> auto& { return c.init.batch_windows; }));
        f.push_back(nested_int_field("init.max_windows", [](auto& c) -> auto& { return c.init.max_windows; }));

        f.push_back(double_field("generator.baseline", [](auto& c) -> auto& { return c.generator.baseline; }));
        f.push_back(double_field("generator.amplitude", [](auto& c) -> auto& { return c.generator.amplitude; }));
        f.push_back(double_field("generator.decay", [](auto& c) -> auto& { return c.generator.decay; }));
        f.push_back(double_field("generator.noise_std", [](auto& c) -> auto& { return c.generator.noise_std; }));

        f.push_back(path_field("paths.reference_sample", [](auto& c) -> auto& { return c.paths.reference_sample; }));
        f.push_back(path_field("paths.anomaly_model", [](auto& c) -> auto& { return c.paths.anomaly_model; }));
        f.push_back(path_field("paths.aggregator", [](auto& c) -> auto& { return c.paths.aggregator; }));
        f.push_back(path_field("paths.surrogate_model", [](auto& c) -> auto& { return c.paths.surrogate_model; }));
        f.push_back(path_field("paths.score_repository", [](auto& c) -> auto& { return c.paths.score_repository; }));
        f.push_back(path_field("paths.evaluation_log", [](auto& c) -> auto& { return c.paths.evaluation_log; }));
        f.push_back(path_field("paths.feature_store", [](auto& c) -> auto& { return c.paths.feature_store; }));
        f.push_back(path_field("paths.status_file", [](auto& c) -> auto& { return c.paths.status_file; }));
        return f;
    }();
    return table;
}

void check(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

bool in_percent_range(double v) { return v >= 0.0 && v <= 100.0; }

}  // namespace

PipelineConfig validate_config(PipelineConfig raw) {
    const auto& c = raw;
    check(c.window_size >= 1, "window_size must be >= 1");
    check(!c.enabled_dimensions.empty(), "enabled_dimensions must not be empty");
    {
        std::set<Dimension> seen(c.enabled_dimensions.begin(), c.enabled_dimensions.end());
        check(seen.size() == c.enabled_dimensions.size(), "enabled_dimensions contains duplicates");
    }
    check(c.integrity_min < c.integrity_max, "integrity_min must be < integrity_max");
    check(c.anomaly_threshold_k > 0.0, "anomaly_threshold_k must be > 0");
    check(c.histogram_bins >= 2, "histogram_bins must be >= 2");
    check(c.histogram_lo < c.histogram_hi, "histogram_range lo must be < hi");
    check(c.beta >= 2, "beta must be >= 2");
    check(c.n_ground_truth >= 1, "n_ground_truth must be >= 1");
    check(c.n_ground_truth < c.beta, "n_ground_truth must be < beta");
    check(!c.tau_mae || *c.tau_mae > 0.0, "tau_mae must be > 0");
    check(c.tau_fraction > 0.0, "tau_fraction must be > 0");
    check(c.max_retrain_rounds >= 1, "max_retrain_rounds must be >= 1");

    const auto& m = c.mutation;
    check(in_percent_range(m.accuracy), "mutation.accuracy must be in [0, 100]");
    check(in_percent_range(m.completeness), "mutation.completeness must be in [0, 100]");
    check(in_percent_range(m.consistency), "mutation.consistency must be in [0, 100]");
    check(in_percent_range(m.distribution), "mutation.distribution must be in [0, 100]");
    check(m.shift_magnitude > 0.0, "mutation.shift_magnitude must be > 0");
    check(m.spike_magnitude > 0.0, "mutation.spike_magnitude must be > 0");
    check(m.out_of_range_margin > 0.0, "mutation.out_of_range_margin must be > 0");

    check(c.forest.n_trees >= 1, "forest.n_trees must be >= 1");
    check(c.forest.max_depth >= 0, "forest.max_depth must be >= 0");
    check(c.forest.min_samples_leaf >= 1, "forest.min_samples_leaf must be >= 1");
    check(c.forest.max_features >= 0, "forest.max_features must be >= 0");

    check(c.init.reference_windows >= 1, "init.reference_windows must be >= 1");
    check(c.init.batch_windows >= 1, "init.batch_windows must be >= 1");
    check(c.init.max_windows >= c.init.batch_windows, "init.max_windows must be >= init.batch_windows");

    check(c.generator.decay > 0.0, "generator.decay must be > 0");
    check(c.generator.noise_std > 0.0, "generator.noise_std must be > 0");
    return raw;
}

PipelineConfig parse_config(std::string_view input) {
    PipelineConfig cfg;
    std::set<std::string, std::less<>> seen;
    std::size_t line_no = 0;
    for (auto line : text::split(input, '\n')) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const auto key = text::trim(line.substr(0, eq));
        const auto value = text::trim(line.substr(eq + 1));
        const auto& table = fields();
        auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
        if (it == table.end()) {
            throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" +
                              std::string(key) + "'");
        }
        if (!seen.insert(std::string(key)).second) {
            throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" +
                              std::string(key) + "'");
        }
        it->set(cfg, value);
    }
    return validate_config(std::move(cfg));
}

PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
    std::string out;
    for (const auto& f : fields()) {
        if (auto v = f.get(cfg)) {
            out += f.key;
            out += " = ";
            out += *v;
            out += '\n';
        }
    }
    return out;
}

void save_config(const PipelineConfig& cfg, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write config file '" + path.string() + "'");
    out << serialize_config(cfg);
}

void default_artifact_paths(PipelineConfig& cfg, const std::filesystem::path& dir) {
    auto fill = [&](std::string& p, const char* name) {
        if (p.empty()) p = (dir / name).string();
    };
    fill(cfg.paths.reference_sample, "reference_distribution.txt");
    fill(cfg.paths.anomaly_model, "anomaly_detector.txt");
    fill(cfg.paths.aggregator, "aggregator.txt");
    fill(cfg.paths.surrogate_model, "surrogate_model.txt");
    fill(cfg.paths.score_repository, "score_repository.csv");
    fill(cfg.paths.evaluation_log, "evaluation_log.csv");
    fill(cfg.paths.feature_store, "feature_store.csv");
    fill(cfg.paths.status_file, "status.txt");
}

}  // namespace dqsops
