#include "msaw/ensemble.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

#include "msaw/error.hpp"

namespace msaw {

namespace {

constexpr double neg_inf = -std::numeric_limits<double>::infinity();

void check_score(double s, const char* what) {
    if (!(s >= 0.0 && s <= 1.0)) {
        throw error(std::string(what) + ": score " + std::to_string(s) + " outside [0,1]");
    }
}

bool same_schema(const schema_ptr& a, const schema_ptr& b) {
    return a == b || (a && b && *a == *b);
}

}  // namespace

void msaw_config::validate() const {
    if (!(alpha > 1.0) || !std::isfinite(alpha)) throw config_error("msaw: alpha must be in (1, inf)");
    if (!(beta > 0.0 && beta < 1.0)) throw config_error("msaw: beta must be in (0, 1)");
    if (!(decision_threshold > 0.0 && decision_threshold < 1.0)) {
        throw config_error("msaw: decision_threshold must be in (0, 1)");
    }
}

double log_sum_exp(std::span<const double> logs) {
    double hi = neg_inf;
    for (double v : logs) hi = std::max(hi, v);
    if (hi == neg_inf) return neg_inf;
    double acc = 0.0;
    for (double v : logs) acc += std::exp(v - hi);
    return hi + std::log(acc);
}

ensemble_state ensemble_state::initial(std::size_t n_sources, const msaw_config& config) {
    config.validate();
    ensemble_state s;
    s.log_source_weights.assign(n_sources, 0.0);
    s.log_target_weight = 0.0;
    s.stream_index = 0;
    s.config = config;
    return s;
}

std::vector<double> ensemble_state::weights() const {
    std::vector<double> w;
    w.reserve(log_source_weights.size() + 1);
    for (double lw : log_source_weights) w.push_back(std::exp(lw));
    w.push_back(std::exp(log_target_weight));
    return w;
}

void ensemble_state::validate() const {
    config.validate();
    bool any_positive = std::isfinite(log_target_weight);
    auto ok = [](double lw) { return !std::isnan(lw) && lw != std::numeric_limits<double>::infinity(); };
    if (!ok(log_target_weight)) throw error("ensemble_state: invalid target weight");
    for (double lw : log_source_weights) {
        if (!ok(lw)) throw error("ensemble_state: invalid source weight");
        any_positive = any_positive || std::isfinite(lw);
    }
    if (!any_positive) throw error("ensemble_state: every weight is zero");
}

double combine(std::span<const double> weights, std::span<const double> scores) {
    if (weights.size() != scores.size()) {
        throw error("combine: " + std::to_string(weights.size()) + " weights for " + std::to_string(scores.size()) +
                    " scores");
    }
    double acc = 0.0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        check_score(scores[i], "combine");
        if (!(weights[i] >= 0.0)) throw error("combine: negative weight");
        acc += weights[i] * scores[i];
    }
    return acc;
}

double combine(std::span<const double> source_scores, double target_score, const ensemble_state& state) {
    if (source_scores.size() != state.n_sources()) {
        throw error("combine: " + std::to_string(source_scores.size()) + " source scores for " +
                    std::to_string(state.n_sources()) + " source weights");
    }
    std::vector<double> scores(source_scores.begin(), source_scores.end());
    scores.push_back(target_score);
    return combine(state.weights(), scores);
}

double penalty_factor(std::uint64_t j, double alpha) {
    if (j == 0) throw error("penalty_factor: j must be >= 1");
    if (!(alpha > 1.0)) throw error("penalty_factor: alpha must be > 1");
    const double r = std::sqrt(static_cast<double>(j));
    return r / (r + alpha);
}

msaw_step_result msaw_step(const ensemble_state& state,
                           std::span<const double> source_scores,
                           double target_score,
                           bool true_label) {
    state.validate();
    const std::size_t n = state.n_sources();
    if (source_scores.size() != n) {
        throw error("msaw_step: " + std::to_string(source_scores.size()) + " source scores for " + std::to_string(n) +
                    " sources");
    }
    for (double s : source_scores) check_score(s, "msaw_step");
    check_score(target_score, "msaw_step");

    msaw_step_result out;
    ensemble_state& next = out.state;
    next = state;

    next.stream_index += 1;
    const auto j = next.stream_index;
    next.log_target_weight += std::log(next.config.beta) + std::log(static_cast<double>(j));

    std::vector<double> logs(next.log_source_weights);
    logs.push_back(next.log_target_weight);
    const double norm = log_sum_exp(logs);
    for (double& lw : logs) lw -= norm;
    std::copy(logs.begin(), logs.begin() + static_cast<std::ptrdiff_t>(n), next.log_source_weights.begin());
    next.log_target_weight = logs.back();

    double prob = 0.0;
    for (std::size_t i = 0; i < n; ++i) prob += std::exp(logs[i]) * source_scores[i];
    prob += std::exp(logs.back()) * target_score;
    out.prob = std::clamp(prob, 0.0, 1.0);
    out.log_normalized = std::move(logs);

    const double log_penalty = std::log(penalty_factor(j, next.config.alpha));
    const double threshold = next.config.decision_threshold;
    auto wrong = [&](double score) { return (score >= threshold) != true_label; };
    for (std::size_t i = 0; i < n; ++i) {
        if (wrong(source_scores[i])) next.log_source_weights[i] += log_penalty;
    }
    if (wrong(target_score)) next.log_target_weight += log_penalty;
    return out;
}

std::string_view to_string(strategy_kind k) {
    switch (k) {
        case strategy_kind::msaw: return "msaw";
        case strategy_kind::equal: return "equal";
        case strategy_kind::volume: return "volume";
        case strategy_kind::time: return "time";
        case strategy_kind::single: return "single";
    }
    return "unknown";
}

std::vector<double> static_weights(const weight_strategy& strategy, std::size_t n) {
    if (n == 0) throw error("static_weights: need at least one source");
    switch (strategy.kind) {
        case strategy_kind::equal:
            return std::vector<double>(n, 1.0 / static_cast<double>(n));
        case strategy_kind::volume:
        case strategy_kind::time: {
            const bool by_time = strategy.kind == strategy_kind::time;
            if (strategy.parameters.size() != n) {
                throw error(std::string("static_weights: ") + (by_time ? "time" : "volume") + " needs " +
                            std::to_string(n) + " parameters, got " + std::to_string(strategy.parameters.size()));
            }
            std::vector<double> w;
            w.reserve(n);
            for (double p : strategy.parameters) {
                if (by_time) {
                    if (!(p > 0.0)) throw error("static_weights: season distance must be positive");
                    w.push_back(1.0 / p);
                } else {
                    if (!(p >= 0.0)) throw error("static_weights: negative volume");
                    w.push_back(p);
                }
            }
            double total = 0.0;
            for (double v : w) total += v;
            if (!(total > 0.0)) throw error("static_weights: total volume is zero");
            for (double& v : w) v /= total;
            return w;
        }
        default:
            throw error("static_weights: strategy '" + std::string(to_string(strategy.kind)) + "' has no fixed weights");
    }
}

stream_result run_stream(std::span<const naive_bayes> sources,
                         naive_bayes target_model,
                         const season_dataset& stream,
                         const weight_strategy& strategy,
                         const msaw_config& config,
                         std::uint64_t snapshot_stride) {
    if (stream.instances.empty()) throw data_error("run_stream: stream '" + stream.season_id + "' is empty");
    if (snapshot_stride == 0) throw config_error("run_stream: snapshot stride must be positive");
    for (const auto& m : sources) {
        if (!same_schema(m.schema_ref(), stream.schema)) throw data_error("run_stream: source model schema mismatch");
    }
    if (!same_schema(target_model.schema_ref(), stream.schema)) {
        throw data_error("run_stream: target model schema mismatch");
    }

    const std::size_t n = sources.size();
    stream_result out;
    out.records.reserve(stream.size());
    std::vector<double> scores(n);
    auto score_sources = [&](const instance& x) {
        for (std::size_t i = 0; i < n; ++i) scores[i] = sources[i].predict_proba(x);
    };
    auto record = [&](const instance& x, double prob) {
        if (!x.label) throw data_error("run_stream: instance " + std::to_string(x.ordinal) + " is unlabeled");
        out.records.push_back({x.ordinal, prob, *x.label});
    };

    switch (strategy.kind) {
        case strategy_kind::msaw: {
            auto state = ensemble_state::initial(n, config);
            const std::size_t last = stream.size() - 1;
            for (std::size_t k = 0; k < stream.size(); ++k) {
                const auto& x = stream.instances[k];
                if (!x.label) throw data_error("run_stream: instance " + std::to_string(x.ordinal) + " is unlabeled");
                score_sources(x);
                auto step = msaw_step(state, scores, target_model.predict_proba(x), *x.label);
                record(x, step.prob);
                if (k % snapshot_stride == 0 || k == last) {
                    out.trajectory.push_back({step.state.stream_index, std::move(step.log_normalized)});
                }
                state = std::move(step.state);
                target_model.update(x);
            }
            break;
        }
        case strategy_kind::equal:
        case strategy_kind::volume:
        case strategy_kind::time: {
            const auto w = static_weights(strategy, n);
            for (const auto& x : stream.instances) {
                score_sources(x);
                record(x, std::clamp(combine(w, scores), 0.0, 1.0));
            }
            break;
        }
        case strategy_kind::single:
            for (const auto& x : stream.instances) {
                record(x, target_model.predict_proba(x));
                if (strategy.learn_online) target_model.update(x);
            }
            break;
    }
    return out;
}

void write_weight_trajectory(std::span<const weight_snapshot> trajectory, std::size_t n_sources, std::ostream& out) {
    out << "step";
    for (std::size_t i = 1; i <= n_sources; ++i) out << ",w_S_" << i;
    out << ",w_T\n";
    const auto old_precision = out.precision(17);
    for (const auto& snap : trajectory) {
        if (snap.log_weights.size() != n_sources + 1) throw error("write_weight_trajectory: snapshot width mismatch");
        out << snap.step;
        for (double lw : snap.log_weights) out << ',' << std::exp(lw);
        out << '\n';
    }
    out.precision(old_precision);
}

}  // namespace msaw
