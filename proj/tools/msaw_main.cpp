#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "msaw/error.hpp"
#include "msaw/experiment.hpp"

namespace {

msaw::experiment_config load_with_overrides(const std::string& config_path,
                                            const std::string& output_dir,
                                            const std::optional<std::uint64_t>& seed,
                                            bool verbose) {
    auto config = msaw::load_config(config_path);
    if (!output_dir.empty()) config.output_dir = output_dir;
    if (seed) config.seed = seed;
    config.verbose = verbose;
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-source adaptive weighting experiments over incremental Naive Bayes"};
    app.require_subcommand(1);

    std::string config_path;
    std::string output_dir;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
    app.add_option("--config", config_path, "Experiment config (JSON)");
    app.add_option("--output-dir,-o", output_dir, "Output directory (overrides the config)");
    app.add_option("--seed", seed, "Generator seed (gen) or seed recorded in the run manifest");
    app.add_flag("--verbose,-v", verbose, "Progress on stderr");

    msaw::drift_spec spec;
    auto* gen = app.add_subcommand("gen", "Write a synthetic multi-season benchmark");
    gen->add_option("--sources", spec.n_sources, "Number of source seasons")->check(CLI::PositiveNumber);
    gen->add_option("--per-season", spec.instances_per_season, "Instances per season")->check(CLI::PositiveNumber);
    gen->add_option("--prevalence", spec.prevalence, "Positive-class rate")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--features", spec.n_features, "Number of categorical features")->check(CLI::PositiveNumber);
    gen->add_option("--alphabet", spec.alphabet_size, "Codes per feature, including M")->check(CLI::Range(2, 65535));
    gen->add_option("--drift", spec.drift_rate, "Per-season total-variation step")->check(CLI::NonNegativeNumber);
    gen->add_option("--separation", spec.class_separation, "Class signal strength")->check(CLI::Range(0.0, 1.0));
    gen->add_flag("--outlier-season", spec.outlier_season, "Make the earliest season resemble the target");

    auto* run = app.add_subcommand("run", "Run every configured method over the target season");
    auto* seasons = app.add_subcommand("seasons", "Score each source-season model on the target season");

    msaw::feature_options features;
    std::string category = "P";
    bool all_categories = false;
    auto* feat = app.add_subcommand("features", "Top likelihood-ratio features of one season");
    feat->add_option("--season", features.season, "Season id")->required();
    feat->add_option("--top-k", features.top_k, "Rows to keep");
    feat->add_option("--category", category, "Only report this category code");
    feat->add_flag("--all-categories", all_categories, "Report every category");
    feat->add_option("--min-p-pos", features.min_p_pos, "Minimum P(feature | positive)");

    for (auto* sub : {run, seasons, feat}) {
        sub->add_option("--config", config_path, "Experiment config (JSON)");
        sub->add_option("--output-dir,-o", output_dir, "Output directory (overrides the config)");
        sub->add_flag("--verbose,-v", verbose, "Progress on stderr");
    }
    gen->add_option("--output-dir,-o", output_dir, "Output directory")->required();
    gen->add_option("--seed", seed, "Generator seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            if (seed) spec.seed = *seed;
            return msaw::cmd_gen(spec, output_dir, std::cout);
        }
        if (config_path.empty()) throw msaw::config_error("--config is required");
        auto config = load_with_overrides(config_path, output_dir, seed, verbose);
        if (run->parsed()) return msaw::cmd_run(config, std::cout);
        if (seasons->parsed()) return msaw::cmd_seasons(config, std::cout);
        if (feat->parsed()) {
            features.category = all_categories ? std::nullopt : std::optional<std::string>(category);
            return msaw::cmd_features(config, features, std::cout);
        }
    } catch (const msaw::config_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
