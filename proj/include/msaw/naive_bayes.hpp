#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msaw/data_model.hpp"

namespace msaw {

/// Incremental categorical Naive Bayes for a binary label.
///
/// Holds exact counts only; probabilities are derived on demand with
/// additive smoothing `s` on both the class prior and every conditional:
///
///   prior(c)      = (n_c + s) / (N + 2s)
///   cond(f=v | c) = (n_{f,v,c} + s) / (n_c + s * |alphabet(f)|)
///
/// Scoring accumulates log terms so thousands of features do not underflow.
/// Counting is single-writer; const members are safe to call concurrently.
class naive_bayes {
public:
    explicit naive_bayes(schema_ptr s, double smoothing = 1.0);

    const schema_ptr& schema_ref() const { return schema_; }
    double smoothing() const { return smoothing_; }

    std::uint64_t class_count(bool positive) const { return class_counts_[positive ? 1 : 0]; }
    std::uint64_t total_count() const { return class_counts_[0] + class_counts_[1]; }
    std::uint64_t value_count(std::size_t feature, category_t code, bool positive) const {
        return counts_[offsets_[feature] + code][positive ? 1 : 0];
    }

    // Adds one labeled instance to the tallies.
    void update(const instance& x);

    double log_prior(bool positive) const;
    double conditional(std::size_t feature, category_t code, bool positive) const;
    double log_conditional(std::size_t feature, category_t code, bool positive) const;

    // P(positive | x). The label of x is ignored.
    double predict_proba(const instance& x) const;

    nlohmann::json to_json() const;
    static naive_bayes from_json(const nlohmann::json& j);

    // Count equality; smoothing and schema must match too.
    bool operator==(const naive_bayes& other) const;

private:
    void check_conformance(const instance& x) const;

    schema_ptr schema_;
    double smoothing_;
    std::array<std::uint64_t, 2> class_counts_{0, 0};
    std::vector<std::size_t> offsets_;
    std::vector<std::array<std::uint64_t, 2>> counts_;
};

naive_bayes fit_batch(schema_ptr s, std::span<const instance> data, double smoothing = 1.0);

struct feature_stat {
    std::string feature;
    std::string category;
    double p_given_pos = 0.0;
    double p_given_neg = 0.0;
    double log10_lr = 0.0;
};

// Per (feature, category) smoothed conditionals and their log10 likelihood
// ratio, filtered by p_given_pos >= min_p_pos and sorted by log10_lr
// descending. Requires both classes to have been observed.
std::vector<feature_stat> feature_report(const naive_bayes& model,
                                         std::optional<std::string> category_filter = std::nullopt,
                                         double min_p_pos = 0.0);

}  // namespace msaw
