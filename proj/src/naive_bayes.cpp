#include "msaw/naive_bayes.hpp"

#include <algorithm>
#include <cmath>

#include "msaw/error.hpp"

namespace msaw {

naive_bayes::naive_bayes(schema_ptr s, double smoothing) : schema_(std::move(s)), smoothing_(smoothing) {
    if (!schema_) throw error("naive_bayes: null schema");
    if (!(smoothing_ > 0.0) || !std::isfinite(smoothing_)) {
        throw error("naive_bayes: smoothing must be a positive finite pseudocount");
    }
    offsets_.reserve(schema_->size() + 1);
    std::size_t total = 0;
    for (std::size_t f = 0; f < schema_->size(); ++f) {
        offsets_.push_back(total);
        total += schema_->alphabet_size(f);
    }
    offsets_.push_back(total);
    counts_.assign(total, {0, 0});
}

void naive_bayes::check_conformance(const instance& x) const {
    if (x.values.size() != schema_->size()) {
        throw data_error("naive_bayes: instance " + std::to_string(x.ordinal) + " has " +
                         std::to_string(x.values.size()) + " values, model expects " +
                         std::to_string(schema_->size()));
    }
    for (std::size_t f = 0; f < x.values.size(); ++f) {
        if (x.values[f] >= schema_->alphabet_size(f)) {
            throw data_error("naive_bayes: instance " + std::to_string(x.ordinal) + ": code index " +
                             std::to_string(x.values[f]) + " outside alphabet of '" + schema_->feature(f).name + "'");
        }
    }
}

void naive_bayes::update(const instance& x) {
    if (!x.label) throw data_error("naive_bayes: cannot update with unlabeled instance " + std::to_string(x.ordinal));
    check_conformance(x);
    const int c = *x.label ? 1 : 0;
    ++class_counts_[c];
    for (std::size_t f = 0; f < x.values.size(); ++f) ++counts_[offsets_[f] + x.values[f]][c];
}

double naive_bayes::log_prior(bool positive) const {
    const double n_c = static_cast<double>(class_count(positive));
    const double n = static_cast<double>(total_count());
    return std::log((n_c + smoothing_) / (n + 2.0 * smoothing_));
}

double naive_bayes::conditional(std::size_t feature, category_t code, bool positive) const {
    const double n_fvc = static_cast<double>(value_count(feature, code, positive));
    const double n_c = static_cast<double>(class_count(positive));
    const double k = static_cast<double>(schema_->alphabet_size(feature));
    return (n_fvc + smoothing_) / (n_c + smoothing_ * k);
}

double naive_bayes::log_conditional(std::size_t feature, category_t code, bool positive) const {
    return std::log(conditional(feature, code, positive));
}

double naive_bayes::predict_proba(const instance& x) const {
    check_conformance(x);
    double lp = log_prior(true);
    double ln = log_prior(false);
    for (std::size_t f = 0; f < x.values.size(); ++f) {
        lp += log_conditional(f, x.values[f], true);
        ln += log_conditional(f, x.values[f], false);
    }
    // Logistic of the log-odds, written so that neither branch overflows.
    const double d = lp - ln;
    if (d >= 0) return 1.0 / (1.0 + std::exp(-d));
    const double e = std::exp(d);
    return e / (1.0 + e);
}

nlohmann::json naive_bayes::to_json() const {
    nlohmann::json counts = nlohmann::json::array();
    for (std::size_t f = 0; f < schema_->size(); ++f) {
        for (std::size_t v = 0; v < schema_->alphabet_size(f); ++v) {
            const auto& cell = counts_[offsets_[f] + v];
            if (cell[0] == 0 && cell[1] == 0) continue;
            counts.push_back({{"feature", schema_->feature(f).name},
                              {"category", schema_->feature(f).alphabet[v]},
                              {"neg", cell[0]},
                              {"pos", cell[1]}});
        }
    }
    return {{"schema", schema_->to_json()},
            {"smoothing", smoothing_},
            {"class_counts", {{"neg", class_counts_[0]}, {"pos", class_counts_[1]}}},
            {"value_counts", std::move(counts)}};
}

naive_bayes naive_bayes::from_json(const nlohmann::json& j) {
    try {
        auto s = std::make_shared<const schema>(schema::from_json(j.at("schema")));
        naive_bayes m(s, j.at("smoothing").get<double>());
        m.class_counts_[0] = j.at("class_counts").at("neg").get<std::uint64_t>();
        m.class_counts_[1] = j.at("class_counts").at("pos").get<std::uint64_t>();
        for (const auto& cell : j.at("value_counts")) {
            const auto name = cell.at("feature").get<std::string>();
            auto f = s->feature_index(name);
            if (!f) throw data_error("model: unknown feature '" + name + "'");
            const auto code = cell.at("category").get<std::string>();
            auto v = s->code_index(*f, code);
            if (!v) throw data_error("model: unknown category '" + code + "' for feature '" + name + "'");
            m.counts_[m.offsets_[*f] + *v] = {cell.at("neg").get<std::uint64_t>(), cell.at("pos").get<std::uint64_t>()};
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw data_error(std::string("model: malformed JSON: ") + e.what());
    }
}

bool naive_bayes::operator==(const naive_bayes& other) const {
    return smoothing_ == other.smoothing_ && class_counts_ == other.class_counts_ && counts_ == other.counts_ &&
           (schema_ == other.schema_ || *schema_ == *other.schema_);
}

naive_bayes fit_batch(schema_ptr s, std::span<const instance> data, double smoothing) {
    naive_bayes m(std::move(s), smoothing);
    for (const auto& x : data) m.update(x);
    return m;
}

std::vector<feature_stat> feature_report(const naive_bayes& model,
                                         std::optional<std::string> category_filter,
                                         double min_p_pos) {
    if (model.class_count(true) == 0 || model.class_count(false) == 0) {
        throw data_error("feature_report: both classes must have at least one instance");
    }
    const schema& s = *model.schema_ref();
    std::vector<feature_stat> out;
    for (std::size_t f = 0; f < s.size(); ++f) {
        for (std::size_t v = 0; v < s.alphabet_size(f); ++v) {
            const auto& code = s.feature(f).alphabet[v];
            if (category_filter && code != *category_filter) continue;
            const auto c = static_cast<category_t>(v);
            feature_stat st;
            st.feature = s.feature(f).name;
            st.category = code;
            st.p_given_pos = model.conditional(f, c, true);
            st.p_given_neg = model.conditional(f, c, false);
            st.log10_lr = std::log10(st.p_given_pos / st.p_given_neg);
            if (st.p_given_pos < min_p_pos) continue;
            out.push_back(std::move(st));
        }
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const feature_stat& a, const feature_stat& b) { return a.log10_lr > b.log10_lr; });
    return out;
}

}  // namespace msaw
