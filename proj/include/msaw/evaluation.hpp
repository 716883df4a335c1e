#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "msaw/data_model.hpp"
#include "msaw/naive_bayes.hpp"

namespace msaw {

struct eval_record {
    std::uint64_t ordinal = 0;
    double score = 0.0;
    bool label = false;

    bool operator==(const eval_record&) const = default;
};

struct delong_result {
    double z = 0.0;
    double p = 1.0;
};

struct metric_report {
    std::string method_name;
    double auroc = 0.0;
    std::size_t n_pos = 0;
    std::size_t n_neg = 0;
    // Comparisons against named reference methods, in insertion order.
    std::vector<std::pair<std::string, delong_result>> delong_vs;
};

/// Mann-Whitney AUROC: (wins + ties/2) / (n_pos * n_neg) over every
/// positive/negative pair, via mid-rank sums. The numerator is kept as an
/// exact integer (twice the U statistic), so the result is bit-identical
/// to a pairwise count.
double auroc(std::span<const eval_record> records);

/// DeLong's test for two correlated AUROCs on the same instances.
///
/// Uses the placement-value (structural component) covariance; ties count
/// one half. z = (auc_a - auc_b) / sd, p two-sided. Zero variance gives
/// z = 0, p = 1 when the AUROCs agree and z = +-inf, p = 0 otherwise.
delong_result delong_test(std::span<const eval_record> a, std::span<const eval_record> b);

std::vector<eval_record> score_dataset(const naive_bayes& model, const season_dataset& test);

metric_report evaluate_static(const naive_bayes& model, const season_dataset& test);

struct method_records {
    std::string name;
    std::vector<eval_record> records;
};

inline constexpr const char* reference_method = "msaw";

// One report per method in input order, each non-reference method carrying
// its DeLong comparison against "msaw".
std::vector<metric_report> compare_methods(std::span<const method_records> methods);

nlohmann::json to_json(const metric_report& r);
void write_metrics_json(std::span<const metric_report> reports, std::ostream& out);
// method,auroc,n_pos,n_neg,z_vs_msaw,p_vs_msaw
void write_metrics_csv(std::span<const metric_report> reports, std::ostream& out);
// ordinal,score,label
void write_records_csv(std::span<const eval_record> records, std::ostream& out);

}  // namespace msaw
