#include "msaw/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <numeric>
#include <ostream>
#include <unordered_set>

#include "msaw/error.hpp"

namespace msaw {

namespace {

struct class_counts {
    std::size_t pos = 0;
    std::size_t neg = 0;
};

class_counts count_classes(std::span<const eval_record> records, const char* who) {
    class_counts c;
    for (const auto& r : records) {
        if (std::isnan(r.score)) throw data_error(std::string(who) + ": NaN score at ordinal " + std::to_string(r.ordinal));
        (r.label ? c.pos : c.neg) += 1;
    }
    if (c.pos == 0 || c.neg == 0) {
        throw data_error(std::string(who) + ": need at least one positive and one negative record");
    }
    return c;
}

// psi(x, y) for a positive score x against a negative score y.
double psi(double x, double y) {
    if (x > y) return 1.0;
    if (x == y) return 0.5;
    return 0.0;
}

struct placements {
    double auc = 0.0;
    std::vector<double> pos;  // V10: per positive, fraction of negatives it beats
    std::vector<double> neg;  // V01: per negative, fraction of positives beating it
};

placements compute_placements(std::span<const eval_record> records) {
    std::vector<double> p, n;
    for (const auto& r : records) (r.label ? p : n).push_back(r.score);
    placements out;
    out.pos.assign(p.size(), 0.0);
    out.neg.assign(n.size(), 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        for (std::size_t j = 0; j < n.size(); ++j) {
            const double s = psi(p[i], n[j]);
            out.pos[i] += s;
            out.neg[j] += s;
        }
    }
    for (double& v : out.pos) v /= static_cast<double>(n.size());
    for (double& v : out.neg) v /= static_cast<double>(p.size());
    out.auc = auroc(records);
    return out;
}

// Sample covariance of two aligned placement vectors around their AUROCs.
double covariance(const std::vector<double>& x, double mx, const std::vector<double>& y, double my) {
    if (x.size() < 2) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) acc += (x[i] - mx) * (y[i] - my);
    return acc / static_cast<double>(x.size() - 1);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

nlohmann::json json_number(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

}  // namespace

double auroc(std::span<const eval_record> records) {
    const auto counts = count_classes(records, "auroc");
    std::vector<std::size_t> order(records.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return records[a].score < records[b].score; });

    // Twice the positive rank sum, with tied groups sharing their mid-rank.
    std::uint64_t rank_sum_x2 = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t k = i + 1;
        while (k < order.size() && records[order[k]].score == records[order[i]].score) ++k;
        const std::uint64_t mid_rank_x2 = (i + 1) + k;
        for (std::size_t t = i; t < k; ++t) {
            if (records[order[t]].label) rank_sum_x2 += mid_rank_x2;
        }
        i = k;
    }
    const std::uint64_t np = counts.pos, nn = counts.neg;
    const std::uint64_t u_x2 = rank_sum_x2 - np * (np + 1);
    return static_cast<double>(u_x2) / static_cast<double>(2 * np * nn);
}

delong_result delong_test(std::span<const eval_record> a, std::span<const eval_record> b) {
    if (a.size() != b.size()) {
        throw data_error("delong_test: unpaired inputs (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + " records)");
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i].label != b[i].label || a[i].ordinal != b[i].ordinal) {
            throw data_error("delong_test: unpaired inputs at position " + std::to_string(i));
        }
    }
    const auto counts = count_classes(a, "delong_test");
    const auto pa = compute_placements(a);
    const auto pb = compute_placements(b);

    const double s10 = covariance(pa.pos, pa.auc, pa.pos, pa.auc) + covariance(pb.pos, pb.auc, pb.pos, pb.auc) -
                       2.0 * covariance(pa.pos, pa.auc, pb.pos, pb.auc);
    const double s01 = covariance(pa.neg, pa.auc, pa.neg, pa.auc) + covariance(pb.neg, pb.auc, pb.neg, pb.auc) -
                       2.0 * covariance(pa.neg, pa.auc, pb.neg, pb.auc);
    const double var = s10 / static_cast<double>(counts.pos) + s01 / static_cast<double>(counts.neg);
    const double diff = pa.auc - pb.auc;

    delong_result out;
    if (!(var > 0.0)) {
        if (diff == 0.0) return {0.0, 1.0};
        out.z = diff > 0 ? std::numeric_limits<double>::infinity() : -std::numeric_limits<double>::infinity();
        out.p = 0.0;
        return out;
    }
    out.z = diff / std::sqrt(var);
    out.p = std::clamp(std::erfc(std::fabs(out.z) / std::numbers::sqrt2), 0.0, 1.0);
    return out;
}

std::vector<eval_record> score_dataset(const naive_bayes& model, const season_dataset& test) {
    if (!(model.schema_ref() == test.schema || (test.schema && *model.schema_ref() == *test.schema))) {
        throw data_error("evaluate: model schema does not match season '" + test.season_id + "'");
    }
    std::vector<eval_record> records;
    records.reserve(test.size());
    for (const auto& x : test.instances) {
        if (!x.label) throw data_error("evaluate: instance " + std::to_string(x.ordinal) + " is unlabeled");
        records.push_back({x.ordinal, model.predict_proba(x), *x.label});
    }
    return records;
}

metric_report evaluate_static(const naive_bayes& model, const season_dataset& test) {
    const auto records = score_dataset(model, test);
    const auto counts = count_classes(records, "evaluate_static");
    return {test.season_id, auroc(records), counts.pos, counts.neg, {}};
}

std::vector<metric_report> compare_methods(std::span<const method_records> methods) {
    std::unordered_set<std::string> names;
    const method_records* ref = nullptr;
    for (const auto& m : methods) {
        if (!names.insert(m.name).second) throw data_error("compare_methods: duplicate method '" + m.name + "'");
        if (m.name == reference_method) ref = &m;
    }
    if (!ref) throw data_error(std::string("compare_methods: reference method '") + reference_method + "' is absent");

    std::vector<metric_report> out;
    out.reserve(methods.size());
    for (const auto& m : methods) {
        const auto counts = count_classes(m.records, "compare_methods");
        metric_report r{m.name, auroc(m.records), counts.pos, counts.neg, {}};
        if (&m != ref) r.delong_vs.emplace_back(reference_method, delong_test(m.records, ref->records));
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::json to_json(const metric_report& r) {
    nlohmann::json vs = nlohmann::json::object();
    for (const auto& [name, d] : r.delong_vs) vs[name] = {{"z", json_number(d.z)}, {"p", json_number(d.p)}};
    return {{"method", r.method_name},
            {"auroc", json_number(r.auroc)},
            {"n_pos", r.n_pos},
            {"n_neg", r.n_neg},
            {"delong_vs", std::move(vs)}};
}

void write_metrics_json(std::span<const metric_report> reports, std::ostream& out) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : reports) arr.push_back(to_json(r));
    out << arr.dump(2) << '\n';
}

void write_metrics_csv(std::span<const metric_report> reports, std::ostream& out) {
    out << "method,auroc,n_pos,n_neg,z_vs_msaw,p_vs_msaw\n";
    for (const auto& r : reports) {
        out << r.method_name << ',' << format_double(r.auroc) << ',' << r.n_pos << ',' << r.n_neg << ',';
        auto it = std::find_if(r.delong_vs.begin(), r.delong_vs.end(),
                               [](const auto& e) { return e.first == reference_method; });
        if (it != r.delong_vs.end()) out << format_double(it->second.z) << ',' << format_double(it->second.p);
        else out << ',';
        out << '\n';
    }
}

void write_records_csv(std::span<const eval_record> records, std::ostream& out) {
    out << "ordinal,score,label\n";
    for (const auto& r : records) out << r.ordinal << ',' << format_double(r.score) << ',' << (r.label ? 1 : 0) << '\n';
}

}  // namespace msaw
