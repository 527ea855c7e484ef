#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "dqsops/activator.hpp"
#include "dqsops/aggregation.hpp"
#include "dqsops/anomaly.hpp"
#include "dqsops/config.hpp"
#include "dqsops/errors.hpp"
#include "dqsops/mutation.hpp"
#include "dqsops/predictor.hpp"
#include "dqsops/scorers.hpp"
#include "dqsops/stream.hpp"

namespace py = pybind11;
using namespace dqsops;

namespace {

using Vec = std::vector<double>;

Matrix to_matrix(const std::vector<std::vector<double>>& rows) { return Matrix::from_rows(rows); }

DataWindow window_from(std::int64_t id, std::vector<Sample> values,
                       std::vector<std::int64_t> timestamps) {
    DataWindow w;
    w.window_id = id;
    w.values = std::move(values);
    w.timestamps = std::move(timestamps);
    return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Streaming data quality scoring";

    auto error = py::register_exception<Error>(m, "Error");
    auto config_error = py::register_exception<ConfigError>(m, "ConfigError", error.ptr());
    auto data_error = py::register_exception<DataError>(m, "DataError", error.ptr());
    py::register_exception<ParseError>(m, "ParseError", data_error.ptr());
    py::register_exception<PlanInfeasible>(m, "PlanInfeasible", error.ptr());
    py::register_exception<FeatureVersionMismatch>(m, "FeatureVersionMismatch", error.ptr());
    py::register_exception<InitializationBudgetExhausted>(m, "InitializationBudgetExhausted",
                                                          error.ptr());
    (void)config_error;

    py::enum_<Dimension>(m, "Dimension")
        .value("accuracy", Dimension::Accuracy)
        .value("completeness", Dimension::Completeness)
        .value("consistency", Dimension::Consistency)
        .value("timeliness", Dimension::Timeliness)
        .value("skewness", Dimension::Skewness);

    py::enum_<MutantClass>(m, "MutantClass")
        .value("anomaly", MutantClass::Anomaly)
        .value("missing", MutantClass::Missing)
        .value("out_of_range", MutantClass::OutOfRange)
        .value("distribution_shift", MutantClass::DistributionShift);

    // config
    py::class_<ForestParams>(m, "ForestParams")
        .def(py::init<>())
        .def_readwrite("n_trees", &ForestParams::n_trees)
        .def_readwrite("max_depth", &ForestParams::max_depth)
        .def_readwrite("min_samples_leaf", &ForestParams::min_samples_leaf)
        .def_readwrite("max_features", &ForestParams::max_features)
        .def_readwrite("bootstrap", &ForestParams::bootstrap);

    py::class_<PipelineConfig>(m, "PipelineConfig")
        .def(py::init<>())
        .def_readwrite("window_size", &PipelineConfig::window_size)
        .def_readwrite("enabled_dimensions", &PipelineConfig::enabled_dimensions)
        .def_readwrite("integrity_min", &PipelineConfig::integrity_min)
        .def_readwrite("integrity_max", &PipelineConfig::integrity_max)
        .def_readwrite("anomaly_threshold_k", &PipelineConfig::anomaly_threshold_k)
        .def_readwrite("histogram_bins", &PipelineConfig::histogram_bins)
        .def_readwrite("beta", &PipelineConfig::beta)
        .def_readwrite("n_ground_truth", &PipelineConfig::n_ground_truth)
        .def_readwrite("tau_mae", &PipelineConfig::tau_mae)
        .def_readwrite("tau_fraction", &PipelineConfig::tau_fraction)
        .def_readwrite("max_retrain_rounds", &PipelineConfig::max_retrain_rounds)
        .def_readwrite("seed", &PipelineConfig::seed)
        .def_readwrite("forest", &PipelineConfig::forest)
        .def_property(
            "reference_windows", [](const PipelineConfig& c) { return c.init.reference_windows; },
            [](PipelineConfig& c, int v) { c.init.reference_windows = v; })
        .def_property(
            "batch_windows", [](const PipelineConfig& c) { return c.init.batch_windows; },
            [](PipelineConfig& c, int v) { c.init.batch_windows = v; })
        .def_property(
            "max_windows", [](const PipelineConfig& c) { return c.init.max_windows; },
            [](PipelineConfig& c, int v) { c.init.max_windows = v; })
        .def("__eq__", [](const PipelineConfig& a, const PipelineConfig& b) { return a == b; });

    m.def("parse_config", &parse_config, py::arg("text"));
    m.def("serialize_config", &serialize_config, py::arg("config"));
    m.def("validate_config", &validate_config, py::arg("config"));
    m.def("load_config", &load_config, py::arg("path"));

    // windows
    py::class_<DataWindow>(m, "DataWindow")
        .def(py::init(&window_from), py::arg("window_id"), py::arg("values"),
             py::arg("timestamps") = std::vector<std::int64_t>{})
        .def_readwrite("window_id", &DataWindow::window_id)
        .def_readwrite("values", &DataWindow::values)
        .def_readwrite("timestamps", &DataWindow::timestamps)
        .def_readonly("partial", &DataWindow::partial)
        .def("present_values", &DataWindow::present_values)
        .def("missing_count", &DataWindow::missing_count)
        .def("__len__", &DataWindow::size);

    py::class_<GeneratorParams>(m, "GeneratorParams")
        .def(py::init<>())
        .def_readwrite("baseline", &GeneratorParams::baseline)
        .def_readwrite("amplitude", &GeneratorParams::amplitude)
        .def_readwrite("decay", &GeneratorParams::decay)
        .def_readwrite("noise_std", &GeneratorParams::noise_std);
    m.def("generate_clean_window", &generate_clean_window, py::arg("window_id"),
          py::arg("window_size"), py::arg("seed"), py::arg("params") = GeneratorParams{});
    m.def(
        "synthetic_windows",
        [](const PipelineConfig& cfg, std::uint64_t seed, std::int64_t count, bool mutate) {
            std::optional<MutationPlan> plan;
            if (mutate) plan = MutationPlan::from_config(cfg);
            SyntheticWindowSource src(cfg, seed, count, plan);
            std::vector<DataWindow> out;
            while (auto w = src.next()) out.push_back(std::move(*w));
            return out;
        },
        py::arg("config"), py::arg("seed"), py::arg("count"), py::arg("mutate") = false);

    // scorers
    m.def("ks_statistic", [](const Vec& x, const Vec& y) { return ks_statistic(x, y); }, py::arg("x"), py::arg("y"));
    m.def("histogram", [](const Vec& v, int bins, double lo, double hi) { return histogram(v, bins, lo, hi); }, py::arg("values"), py::arg("bins"), py::arg("lo"),
          py::arg("hi"));
    m.def("shannon_entropy", [](const Vec& p) { return shannon_entropy(p); }, py::arg("p"));
    m.def("jensen_shannon_divergence", [](const Vec& p, const Vec& q) { return jensen_shannon_divergence(p, q); }, py::arg("p"), py::arg("q"));
    m.def("normalize_minmax", &normalize_minmax, py::arg("raw"), py::arg("lo"), py::arg("hi"));

    py::class_<AnomalyDetector>(m, "AnomalyDetector")
        .def_static("fit", [](const Vec& v, double k) { return AnomalyDetector::fit(v, k); }, py::arg("values"), py::arg("k"))
        .def_static("from_parameters", &AnomalyDetector::from_parameters, py::arg("median"),
                    py::arg("mad_scaled"), py::arg("k"))
        .def("is_anomalous", &AnomalyDetector::is_anomalous)
        .def_property_readonly("median", &AnomalyDetector::median)
        .def_property_readonly("mad_scaled", &AnomalyDetector::mad_scaled)
        .def_property_readonly("threshold_k", &AnomalyDetector::threshold_k);

    py::class_<ReferenceDistribution>(m, "ReferenceDistribution")
        .def_static("from_values", [](const Vec& v, int bins, double lo, double hi) { return ReferenceDistribution::from_values(v, bins, lo, hi); }, py::arg("values"),
                    py::arg("bins"), py::arg("lo"), py::arg("hi"))
        .def_property_readonly("sample", &ReferenceDistribution::sample)
        .def_property_readonly("histogram", &ReferenceDistribution::histogram)
        .def_property_readonly("lo", &ReferenceDistribution::lo)
        .def_property_readonly("hi", &ReferenceDistribution::hi);

    py::class_<ScoringReferences>(m, "ScoringReferences");
    m.def("make_references", &make_references, py::arg("config"), py::arg("detector"),
          py::arg("reference"));
    m.def(
        "score_window",
        [](const DataWindow& w, const ScoringReferences& refs, const PipelineConfig& cfg) {
            const auto r = score_all_dimensions(w, refs, cfg);
            py::dict out;
            for (const auto& [d, s] : r.scores.entries()) out[py::str(std::string(to_string(d)))] = s;
            return out;
        },
        py::arg("window"), py::arg("references"), py::arg("config"));

    // aggregation
    py::class_<Aggregator>(m, "Aggregator")
        .def_static(
            "fit",
            [](const std::vector<std::vector<double>>& rows, std::vector<Dimension> order) {
                return Aggregator::fit(to_matrix(rows), std::move(order));
            },
            py::arg("rows"), py::arg("order"))
        .def("consolidate", [](const Aggregator& a, const Vec& v) { return a.consolidate(v); },
             py::arg("values"))
        .def_property_readonly("mu", &Aggregator::mu)
        .def_property_readonly("sigma", &Aggregator::sigma)
        .def_property_readonly("loadings", &Aggregator::loadings)
        .def_property_readonly("eigenvalue", &Aggregator::eigenvalue);

    // mutation
    py::class_<MutationPlan>(m, "MutationPlan")
        .def(py::init<>())
        .def_static("from_config", &MutationPlan::from_config)
        .def_static("uniform", &MutationPlan::uniform, py::arg("config"), py::arg("pct"))
        .def_readwrite("accuracy_pct", &MutationPlan::accuracy_pct)
        .def_readwrite("completeness_pct", &MutationPlan::completeness_pct)
        .def_readwrite("consistency_pct", &MutationPlan::consistency_pct)
        .def_readwrite("distribution_pct", &MutationPlan::distribution_pct)
        .def_readwrite("seed", &MutationPlan::seed);

    m.def(
        "mutate_window",
        [](const DataWindow& w, const MutationPlan& plan) {
            auto r = mutate_window(w, plan);
            std::vector<std::pair<std::size_t, MutantClass>> cells;
            for (const auto& c : r.ledger.cells) cells.emplace_back(c.index, c.kind);
            return py::make_tuple(std::move(r.window), cells, r.ledger.shift);
        },
        py::arg("window"), py::arg("plan"));

    // predictor
    m.attr("FEATURE_NAMES") = std::vector<std::string>(kFeatureNames.begin(), kFeatureNames.end());
    m.def("extract_features",
          py::overload_cast<const DataWindow&, double, double>(&extract_features),
          py::arg("window"), py::arg("integrity_min"), py::arg("integrity_max"));

    py::class_<SurrogateModel>(m, "SurrogateModel")
        .def_static(
            "train",
            [](const std::vector<std::vector<double>>& x, const std::vector<double>& y,
               const ForestParams& params, std::uint64_t seed) {
                return SurrogateModel::train(to_matrix(x), y, params, seed);
            },
            py::arg("x"), py::arg("y"), py::arg("params"), py::arg("seed"))
        .def("predict", [](const SurrogateModel& s, const Vec& x) { return s.predict_row(x); }, py::arg("features"))
        .def("save", &SurrogateModel::save)
        .def_static("load", &SurrogateModel::load);

    py::class_<OracleReport>(m, "OracleReport")
        .def_readonly("mae", &OracleReport::mae)
        .def_readonly("r2", &OracleReport::r2)
        .def_readonly("n_evaluated", &OracleReport::n_evaluated)
        .def_readonly("cv_of_errors", &OracleReport::cv_of_errors);
    m.def("evaluate_oracle", [](const Vec& t, const Vec& p) { return evaluate_oracle(t, p); }, py::arg("y_true"), py::arg("y_pred"));

    // initialization
    py::class_<InitializationResult>(m, "InitializationResult")
        .def_readonly("tau", &InitializationResult::tau)
        .def_readonly("validation", &InitializationResult::validation)
        .def_readonly("aggregator", &InitializationResult::aggregator)
        .def_readonly("model", &InitializationResult::model)
        .def_readonly("targets", &InitializationResult::targets)
        .def_readonly("rounds", &InitializationResult::rounds);
    m.def(
        "run_initialization",
        [](const PipelineConfig& cfg, std::uint64_t seed) {
            SyntheticWindowSource clean(cfg, seed, std::nullopt);
            return run_initialization(clean, MutationPlan::from_config(cfg), cfg);
        },
        py::arg("config"), py::arg("seed"));
}
