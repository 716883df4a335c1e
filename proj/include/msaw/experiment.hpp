#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msaw/data_model.hpp"
#include "msaw/ensemble.hpp"
#include "msaw/evaluation.hpp"
#include "msaw/naive_bayes.hpp"
#include "msaw/synth_gen.hpp"

namespace msaw {

// Baselines and the adaptive ensemble, as named in experiment configs.
enum class method_kind { pretrained_pooled, online, online_pretrained, equal, volume, time, msaw };

std::string_view to_string(method_kind k);
method_kind parse_method_kind(std::string_view name);

struct method_spec {
    std::string name;  // output label; defaults to the kind name
    method_kind kind = method_kind::msaw;
};

struct experiment_config {
    std::filesystem::path data_dir;
    std::filesystem::path schema_path;  // defaults to <data_dir>/schema.json
    std::string target_season;
    std::vector<method_spec> methods;
    msaw_config msaw;
    double smoothing = 1.0;
    std::filesystem::path output_dir = "results";
    std::optional<std::uint64_t> seed;
    std::uint64_t snapshot_stride = 1000;
    // Explicit chronological season list; empty means discover.
    std::vector<std::string> seasons;
    // "input" keeps config order in the printed summary; "auroc" sorts descending.
    std::string summary_order = "input";
    unsigned threads = 0;  // 0: one per method, capped at hardware concurrency
    bool verbose = false;

    void validate() const;
};

// Relative paths in the file resolve against the file's directory.
experiment_config parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
experiment_config load_config(const std::filesystem::path& path);

struct loaded_experiment {
    schema_ptr schema;
    std::vector<std::string> season_order;  // chronological, including the target
    std::vector<season_dataset> sources;
    season_dataset target;
    // Generator seed from data_dir/manifest.json, when there is one.
    std::optional<std::uint64_t> data_seed;
};

/// Resolves the season list (config, then data_dir/manifest.json, then
/// *.csv discovery sorted by name) and loads every season.
loaded_experiment load_experiment(const experiment_config& config);

struct method_outcome {
    method_spec method;
    std::vector<eval_record> records;
    std::vector<weight_snapshot> trajectory;  // msaw only
};

struct experiment_result {
    std::vector<method_outcome> outcomes;  // config order
    std::vector<metric_report> reports;    // config order
    std::size_t n_sources = 0;
};

// Trains the per-season and pooled source models and runs every method over
// the target stream. Each method owns a fresh target-model copy.
experiment_result run_experiment(const experiment_config& config, const loaded_experiment& data);

struct season_row {
    std::string season_id;
    double auroc = 0.0;
    std::size_t train_instances = 0;
    std::size_t train_positives = 0;
};

// Each source season's model scored on the full target season.
std::vector<season_row> evaluate_seasons(const experiment_config& config, const loaded_experiment& data);

// Command bodies. They write results under the configured output directory,
// print a human summary to `out`, and return the process exit status.
// Errors propagate as exceptions.
int cmd_gen(const drift_spec& spec, const std::filesystem::path& output_dir, std::ostream& out);
int cmd_run(const experiment_config& config, std::ostream& out);
int cmd_seasons(const experiment_config& config, std::ostream& out);

struct feature_options {
    std::string season;
    int top_k = 13;
    std::optional<std::string> category = std::string("P");
    double min_p_pos = 0.01;
};

int cmd_features(const experiment_config& config, const feature_options& options, std::ostream& out);

}  // namespace msaw
