#pragma once

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "msaw/data_model.hpp"
#include "msaw/evaluation.hpp"
#include "msaw/naive_bayes.hpp"

namespace msaw {

struct msaw_config {
    double alpha = std::numbers::ln10 / std::numbers::ln2;  // log2(10)
    double beta = 1.0 / 200000.0;
    double decision_threshold = 0.5;

    // Throws config_error unless alpha > 1, 0 < beta < 1, 0 < threshold < 1.
    void validate() const;
};

/// Weights of the adaptive ensemble.
///
/// Weights are held as natural logs. The target weight is multiplied by
/// beta * j on every step, so after a few hundred steps at beta = 5e-6 its
/// linear value is far below the smallest double; in log space it stays
/// strictly positive as the update rule requires, and normalization is a
/// log-sum-exp shift.
struct ensemble_state {
    std::vector<double> log_source_weights;
    double log_target_weight = 0.0;
    std::uint64_t stream_index = 0;
    msaw_config config;

    // n sources, every weight 1.0, j = 0.
    static ensemble_state initial(std::size_t n_sources, const msaw_config& config = {});

    std::size_t n_sources() const { return log_source_weights.size(); }

    // Linear weights, sources first and the target last. Entries below the
    // double range read as 0.
    std::vector<double> weights() const;

    void validate() const;
};

// Weighted sum of model scores. `weights` and `scores` align one-to-one.
double combine(std::span<const double> weights, std::span<const double> scores);

// Sources then target, using the state's current weights as they stand.
double combine(std::span<const double> source_scores, double target_score, const ensemble_state& state);

// sqrt(j) / (sqrt(j) + alpha); j >= 1, alpha > 1.
double penalty_factor(std::uint64_t j, double alpha);

struct msaw_step_result {
    double prob = 0.0;
    // Weights right after normalization (logs; sources then target). These
    // are the weights `prob` was computed with.
    std::vector<double> log_normalized;
    // Post-penalty, unnormalized; normalization happens at the next step.
    ensemble_state state;
};

/// One pass of the adaptive-weighting loop body for a single instance:
/// advance j, scale the target weight by beta*j, normalize, combine, then
/// penalize every model whose thresholded score disagrees with the label.
msaw_step_result msaw_step(const ensemble_state& state,
                           std::span<const double> source_scores,
                           double target_score,
                           bool true_label);

enum class strategy_kind { msaw, equal, volume, time, single };

std::string_view to_string(strategy_kind k);

struct weight_strategy {
    strategy_kind kind = strategy_kind::msaw;
    // volume: training-set sizes; time: season distances (>= 1). One per source.
    std::vector<double> parameters;
    // single: whether the lone model keeps learning from the stream.
    bool learn_online = false;

    static weight_strategy equal() { return {strategy_kind::equal, {}, false}; }
    static weight_strategy volume(std::vector<double> sizes) { return {strategy_kind::volume, std::move(sizes), false}; }
    static weight_strategy time(std::vector<double> distances) {
        return {strategy_kind::time, std::move(distances), false};
    }
    static weight_strategy single(bool learn_online) { return {strategy_kind::single, {}, learn_online}; }
    static weight_strategy adaptive() { return {strategy_kind::msaw, {}, true}; }
};

// Fixed simplex weights for equal, volume, and time strategies.
std::vector<double> static_weights(const weight_strategy& strategy, std::size_t n);

struct weight_snapshot {
    std::uint64_t step = 0;
    std::vector<double> log_weights;  // post-normalization, sources then target
};

struct stream_result {
    std::vector<eval_record> records;
    std::vector<weight_snapshot> trajectory;
};

/// Prequential test-then-train pass over `stream`.
///
/// Each instance is scored by every model, combined per the strategy, and
/// recorded before the target model (a private copy) learns from it.
/// Static ensembles use only the source models. `single` scores the target
/// model alone. Snapshots are taken for MSAW at steps 1, 1 + stride, ...
/// and always at the final step.
stream_result run_stream(std::span<const naive_bayes> sources,
                         naive_bayes target_model,
                         const season_dataset& stream,
                         const weight_strategy& strategy,
                         const msaw_config& config = {},
                         std::uint64_t snapshot_stride = 1000);

// CSV: step,w_S_1..w_S_n,w_T with linear post-normalization weights.
void write_weight_trajectory(std::span<const weight_snapshot> trajectory, std::size_t n_sources, std::ostream& out);

double log_sum_exp(std::span<const double> logs);

}  // namespace msaw
