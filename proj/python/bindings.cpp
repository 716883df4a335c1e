#include <sstream>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "msaw/error.hpp"
#include "msaw/experiment.hpp"

namespace py = pybind11;
using namespace msaw;

namespace {

// Python holds schemas as shared_ptr<schema>; the library shares them const.
using py_schema = std::shared_ptr<schema>;

py_schema to_py(const schema_ptr& s) { return std::const_pointer_cast<schema>(s); }

std::vector<eval_record> records_of(const std::vector<double>& scores, const std::vector<bool>& labels) {
    if (scores.size() != labels.size()) throw data_error("scores and labels differ in length");
    std::vector<eval_record> out;
    out.reserve(scores.size());
    for (std::size_t i = 0; i < scores.size(); ++i) out.push_back({i, scores[i], labels[i]});
    return out;
}

py::dict report_dict(const metric_report& r) {
    py::dict vs;
    for (const auto& [name, d] : r.delong_vs) vs[py::str(name)] = py::make_tuple(d.z, d.p);
    py::dict out;
    out["method"] = r.method_name;
    out["auroc"] = r.auroc;
    out["n_pos"] = r.n_pos;
    out["n_neg"] = r.n_neg;
    out["delong_vs"] = vs;
    return out;
}

}  // namespace

PYBIND11_MODULE(_msaw, m) {
    m.doc() = "Incremental Naive Bayes with multi-source adaptive weighting";

    static py::exception<error> base_exc(m, "MsawError", PyExc_ValueError);
    py::register_exception<schema_error>(m, "SchemaError", base_exc.ptr());
    py::register_exception<data_error>(m, "DataError", base_exc.ptr());
    py::register_exception<config_error>(m, "ConfigError", base_exc.ptr());

    py::class_<feature_def>(m, "FeatureDef")
        .def(py::init<std::string, std::vector<std::string>>(), py::arg("name"), py::arg("alphabet"))
        .def_readwrite("name", &feature_def::name)
        .def_readwrite("alphabet", &feature_def::alphabet);

    py::class_<schema, py_schema>(m, "Schema")
        .def(py::init<std::vector<feature_def>, std::string, std::string, std::string>(), py::arg("features"),
             py::arg("label_name"), py::arg("positive_label"), py::arg("missing_code") = "M")
        .def("__len__", &schema::size)
        .def_property_readonly("features",
                               [](const schema& s) { return std::vector<feature_def>(s.features().begin(), s.features().end()); })
        .def_property_readonly("label_name", &schema::label_name)
        .def_property_readonly("positive_label", &schema::positive_label)
        .def_property_readonly("missing_code", &schema::missing_code)
        .def("feature_index", &schema::feature_index)
        .def("code_index", &schema::code_index)
        .def("to_json", [](const schema& s) { return s.to_json().dump(); })
        .def("__eq__", &schema::operator==);

    m.def("load_schema", [](const std::filesystem::path& p) { return std::make_shared<schema>(load_schema(p)); });
    m.def("parse_schema", [](const std::string& text) { return std::make_shared<schema>(parse_schema(text)); });

    py::class_<instance>(m, "Instance")
        .def(py::init([](std::vector<category_t> values, std::optional<bool> label, std::uint64_t ordinal) {
                 return instance{std::move(values), label, ordinal};
             }),
             py::arg("values"), py::arg("label") = std::nullopt, py::arg("ordinal") = 0)
        .def_readwrite("values", &instance::values)
        .def_readwrite("label", &instance::label)
        .def_readwrite("ordinal", &instance::ordinal);

    py::class_<season_dataset>(m, "SeasonDataset")
        .def_readonly("season_id", &season_dataset::season_id)
        .def_property_readonly("schema", [](const season_dataset& d) { return to_py(d.schema); })
        .def_readonly("instances", &season_dataset::instances)
        .def_property_readonly("is_target", [](const season_dataset& d) { return d.role == season_role::target; })
        .def("__len__", &season_dataset::size)
        .def("positives", &season_dataset::positives);

    m.def(
        "load_season_csv",
        [](const std::filesystem::path& p, const py_schema& s, const std::string& season_id) {
            return load_season_csv(p, s, season_id, season_role::source);
        },
        py::arg("path"), py::arg("schema"), py::arg("season_id"));

    py::class_<naive_bayes>(m, "NaiveBayes")
        .def(py::init([](const py_schema& s, double smoothing) { return naive_bayes(s, smoothing); }),
             py::arg("schema"), py::arg("smoothing") = 1.0)
        .def("update", &naive_bayes::update)
        .def("predict_proba", &naive_bayes::predict_proba)
        .def("class_count", &naive_bayes::class_count)
        .def("value_count", &naive_bayes::value_count)
        .def_property_readonly("total_count", &naive_bayes::total_count)
        .def_property_readonly("smoothing", &naive_bayes::smoothing)
        .def("to_json", [](const naive_bayes& nb) { return nb.to_json().dump(); })
        .def_static("from_json", [](const std::string& text) { return naive_bayes::from_json(nlohmann::json::parse(text)); })
        .def("__eq__", &naive_bayes::operator==);

    m.def(
        "fit_batch",
        [](const py_schema& s, const std::vector<instance>& data, double smoothing) { return fit_batch(s, data, smoothing); },
        py::arg("schema"), py::arg("data"), py::arg("smoothing") = 1.0);

    py::class_<feature_stat>(m, "FeatureStat")
        .def_readonly("feature", &feature_stat::feature)
        .def_readonly("category", &feature_stat::category)
        .def_readonly("p_given_pos", &feature_stat::p_given_pos)
        .def_readonly("p_given_neg", &feature_stat::p_given_neg)
        .def_readonly("log10_lr", &feature_stat::log10_lr);
    m.def("feature_report", &feature_report, py::arg("model"), py::arg("category") = std::optional<std::string>("P"),
          py::arg("min_p_pos") = 0.01);

    py::class_<msaw_config>(m, "MsawConfig")
        .def(py::init([](double alpha, double beta, double threshold) {
                 msaw_config c;
                 c.alpha = alpha;
                 c.beta = beta;
                 c.decision_threshold = threshold;
                 c.validate();
                 return c;
             }),
             py::arg("alpha") = msaw_config{}.alpha, py::arg("beta") = msaw_config{}.beta,
             py::arg("decision_threshold") = 0.5)
        .def_readonly("alpha", &msaw_config::alpha)
        .def_readonly("beta", &msaw_config::beta)
        .def_readonly("decision_threshold", &msaw_config::decision_threshold);

    py::class_<ensemble_state>(m, "EnsembleState")
        .def_static("initial", &ensemble_state::initial, py::arg("n_sources"), py::arg("config") = msaw_config{})
        .def_readonly("stream_index", &ensemble_state::stream_index)
        .def_readonly("log_source_weights", &ensemble_state::log_source_weights)
        .def_readonly("log_target_weight", &ensemble_state::log_target_weight)
        .def("weights", &ensemble_state::weights);

    m.def("penalty_factor", &penalty_factor, py::arg("j"), py::arg("alpha"));
    m.def(
        "msaw_step",
        [](const ensemble_state& state, const std::vector<double>& source_scores, double target_score, bool label) {
            auto r = msaw_step(state, source_scores, target_score, label);
            return py::make_tuple(r.prob, r.log_normalized, r.state);
        },
        py::arg("state"), py::arg("source_scores"), py::arg("target_score"), py::arg("label"),
        "Returns (prob, normalized log-weights, next state).");
    m.def(
        "static_weights",
        [](const std::string& kind, std::vector<double> params, std::size_t n) {
            weight_strategy s;
            if (kind == "equal") s = weight_strategy::equal();
            else if (kind == "volume") s = weight_strategy::volume(std::move(params));
            else if (kind == "time") s = weight_strategy::time(std::move(params));
            else throw config_error("unknown static strategy '" + kind + "'");
            return static_weights(s, n);
        },
        py::arg("kind"), py::arg("parameters"), py::arg("n"));

    m.def(
        "auroc",
        [](const std::vector<double>& scores, const std::vector<bool>& labels) { return auroc(records_of(scores, labels)); },
        py::arg("scores"), py::arg("labels"));
    m.def(
        "delong_test",
        [](const std::vector<double>& a, const std::vector<double>& b, const std::vector<bool>& labels) {
            const auto r = delong_test(records_of(a, labels), records_of(b, labels));
            return py::make_tuple(r.z, r.p);
        },
        py::arg("scores_a"), py::arg("scores_b"), py::arg("labels"), "Returns (z, two-sided p).");

    py::class_<drift_spec>(m, "DriftSpec")
        .def(py::init<>())
        .def_readwrite("n_features", &drift_spec::n_features)
        .def_readwrite("alphabet_size", &drift_spec::alphabet_size)
        .def_readwrite("n_sources", &drift_spec::n_sources)
        .def_readwrite("instances_per_season", &drift_spec::instances_per_season)
        .def_readwrite("prevalence", &drift_spec::prevalence)
        .def_readwrite("drift_rate", &drift_spec::drift_rate)
        .def_readwrite("seed", &drift_spec::seed)
        .def_readwrite("class_separation", &drift_spec::class_separation)
        .def_readwrite("concentration", &drift_spec::concentration)
        .def_readwrite("outlier_season", &drift_spec::outlier_season);

    py::class_<synthetic_benchmark>(m, "Benchmark")
        .def_readonly("spec", &synthetic_benchmark::spec)
        .def_property_readonly("schema", [](const synthetic_benchmark& b) { return to_py(b.schema); })
        .def_readonly("seasons", &synthetic_benchmark::seasons)
        .def_readonly("conditionals", &synthetic_benchmark::conditionals)
        .def("write", [](const synthetic_benchmark& b, const std::filesystem::path& dir) { return write_benchmark(b, dir); });
    m.def("generate", &generate, py::arg("spec"));

    m.def(
        "gen",
        [](const drift_spec& spec, const std::filesystem::path& dir) {
            std::ostringstream out;
            cmd_gen(spec, dir, out);
            return out.str();
        },
        py::arg("spec"), py::arg("output_dir"), "Write a benchmark; returns the printed summary.");
    m.def(
        "run",
        [](const std::filesystem::path& config_path, std::optional<std::filesystem::path> output_dir) {
            auto config = load_config(config_path);
            if (output_dir) config.output_dir = *output_dir;
            std::ostringstream out;
            cmd_run(config, out);
            return out.str();
        },
        py::arg("config"), py::arg("output_dir") = std::nullopt, "Run an experiment config; returns the summary.");
    m.def(
        "run_reports",
        [](const std::filesystem::path& config_path) {
            const auto config = load_config(config_path);
            const auto result = run_experiment(config, load_experiment(config));
            py::list out;
            for (const auto& r : result.reports) out.append(report_dict(r));
            return out;
        },
        py::arg("config"), "Run without writing files; one dict per method.");
}
