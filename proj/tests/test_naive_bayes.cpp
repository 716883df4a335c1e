#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/rational.hpp>

#include "msaw/error.hpp"
#include "msaw/naive_bayes.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace msaw;

namespace {

using rational = boost::rational<long long>;

double to_double(const rational& r) { return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator()); }

// One feature f in {P, N, M}: positives P:3 N:1, negatives P:1 N:5.
std::vector<instance> ten_instances() {
    std::vector<instance> xs;
    auto add = [&](category_t v, bool pos, int times) {
        for (int i = 0; i < times; ++i) xs.push_back({{v}, pos, xs.size()});
    };
    add(0, true, 3);
    add(1, true, 1);
    add(0, false, 1);
    add(1, false, 5);
    return xs;
}

void check_counts_match(const naive_bayes& m, const oracle::tally& t) {
    const auto& s = *m.schema_ref();
    auto get = [&](long f, long v, int c) {
        auto it = t.find({f, v, c});
        return it == t.end() ? std::uint64_t{0} : it->second;
    };
    CHECK(m.class_count(false) == get(-1, 0, 0));
    CHECK(m.class_count(true) == get(-1, 0, 1));
    for (std::size_t f = 0; f < s.size(); ++f) {
        for (std::size_t v = 0; v < s.alphabet_size(f); ++v) {
            for (int c = 0; c < 2; ++c) {
                CHECK(m.value_count(f, static_cast<category_t>(v), c == 1) ==
                      get(static_cast<long>(f), static_cast<long>(v), c));
            }
        }
    }
}

}  // namespace

TEST_CASE("fit_batch tallies exact counts") {
    const auto s = test::make_schema(1);
    const auto m = fit_batch(s, ten_instances());
    CHECK(m.class_count(true) == 4);
    CHECK(m.class_count(false) == 6);
    CHECK(m.value_count(0, 0, true) == 3);
    CHECK(m.value_count(0, 1, true) == 1);
    CHECK(m.value_count(0, 2, true) == 0);
    CHECK(m.value_count(0, 0, false) == 1);
    CHECK(m.value_count(0, 1, false) == 5);
    CHECK(m.value_count(0, 2, false) == 0);
}

TEST_CASE("empty data gives a zero-count model") {
    const auto s = test::make_schema(3);
    const auto m = fit_batch(s, {});
    CHECK(m.total_count() == 0);
    CHECK(m == naive_bayes(s));
}

TEST_CASE("single update") {
    const auto s = test::make_schema(1);
    naive_bayes m(s);
    m.update({{0}, true, 0});
    CHECK(m.class_count(true) == 1);
    CHECK(m.class_count(false) == 0);
    CHECK(m.value_count(0, 0, true) == 1);
    CHECK(m.value_count(0, 1, true) == 0);
}

TEST_CASE("update errors") {
    const auto s = test::make_schema(2);
    naive_bayes m(s);
    CHECK_THROWS_AS(m.update({{0, 1}, std::nullopt, 0}), data_error);
    CHECK_THROWS_AS(m.update({{0, 3}, true, 0}), data_error);
    CHECK_THROWS_AS(m.update({{0}, true, 0}), data_error);
    CHECK(m.total_count() == 0);
    CHECK_THROWS_AS(naive_bayes(s, 0.0), error);
}

TEST_CASE("update folding equals batch counts (random sequences)") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 25; ++trial) {
        std::uniform_int_distribution<int> nf(1, 8), na(2, 5), n(0, 300);
        const auto s = test::make_schema(static_cast<std::size_t>(nf(rng)), static_cast<std::size_t>(na(rng)));
        const auto d1 = test::random_instances(*s, static_cast<std::size_t>(n(rng)), rng);
        const auto d2 = test::random_instances(*s, static_cast<std::size_t>(n(rng)), rng);
        auto joined = d1;
        joined.insert(joined.end(), d2.begin(), d2.end());

        auto folded = fit_batch(s, d1);
        for (const auto& x : d2) folded.update(x);
        const auto batch = fit_batch(s, joined);
        CHECK(folded == batch);
        check_counts_match(batch, oracle::count_directly(joined));
    }
}

TEST_CASE("count invariant: per-feature totals equal class counts") {
    std::mt19937_64 rng(5);
    const auto s = test::make_schema(6, 4);
    const auto m = fit_batch(s, test::random_instances(*s, 500, rng));
    for (std::size_t f = 0; f < s->size(); ++f) {
        for (bool c : {false, true}) {
            std::uint64_t total = 0;
            for (std::size_t v = 0; v < s->alphabet_size(f); ++v) total += m.value_count(f, static_cast<category_t>(v), c);
            CHECK(total == m.class_count(c));
        }
    }
}

TEST_CASE("predict_proba matches exact-fraction arithmetic") {
    const auto s = test::make_schema(1);
    const auto m = fit_batch(s, ten_instances(), 1.0);
    // prior(pos) = 5/12, cond(P|pos) = 4/7; prior(neg) = 7/12, cond(P|neg) = 2/9
    const rational pos = rational(5, 12) * rational(4, 7);
    const rational neg = rational(7, 12) * rational(2, 9);
    const double expected = to_double(pos / (pos + neg));
    const double got = m.predict_proba({{0}, std::nullopt, 0});
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
    CHECK(got == doctest::Approx(0.6475).epsilon(1e-3));

    // Same oracle for the other two codes.
    for (category_t v : {category_t{1}, category_t{2}}) {
        const long pc[] = {1 + 1, 0 + 1}, nc[] = {5 + 1, 0 + 1};
        const rational p = rational(5, 12) * rational(pc[v - 1], 7);
        const rational n = rational(7, 12) * rational(nc[v - 1], 9);
        CHECK(m.predict_proba({{v}, std::nullopt, 0}) == doctest::Approx(to_double(p / (p + n))).epsilon(1e-12));
    }
}

TEST_CASE("zero-count model scores exactly one half") {
    std::mt19937_64 rng(9);
    const auto s = test::make_schema(10);
    const naive_bayes m(s);
    for (const auto& x : test::random_instances(*s, 20, rng)) CHECK(m.predict_proba(x) == 0.5);
}

TEST_CASE("positive-only model favors its mode") {
    const auto s = test::make_schema(3);
    naive_bayes m(s);
    for (std::uint64_t i = 0; i < 5; ++i) m.update({{0, 1, 0}, true, i});
    CHECK(m.predict_proba({{0, 1, 0}, std::nullopt, 0}) > 0.5);
}

TEST_CASE("posteriors stay in range on thousands of features") {
    std::mt19937_64 rng(13);
    const auto s = test::make_schema(4000);
    const auto train = test::random_instances(*s, 50, rng, 0.1);
    const auto m = fit_batch(s, train);
    for (const auto& x : train) {
        const double p = m.predict_proba(x);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(std::isfinite(p));
    }
}

TEST_CASE("order independence under permutation") {
    std::mt19937_64 rng(17);
    const auto s = test::make_schema(12);
    auto data = test::random_instances(*s, 400, rng);
    const auto reference = fit_batch(s, data);
    const auto probes = test::random_instances(*s, 30, rng);
    for (int trial = 0; trial < 10; ++trial) {
        std::shuffle(data.begin(), data.end(), rng);
        const auto m = fit_batch(s, data);
        CHECK(m == reference);
        for (const auto& x : probes) CHECK(std::fabs(m.predict_proba(x) - reference.predict_proba(x)) <= 1e-12);
    }
}

TEST_CASE("monotone evidence: a matching positive never lowers the score") {
    std::mt19937_64 rng(19);
    const auto s = test::make_schema(8);
    for (int trial = 0; trial < 50; ++trial) {
        auto m = fit_batch(s, test::random_instances(*s, 60, rng));
        auto x = test::random_instances(*s, 1, rng).front();
        const double before = m.predict_proba(x);
        x.label = true;
        m.update(x);
        CHECK(m.predict_proba(x) >= before);
    }
}

TEST_CASE("JSON round trip preserves scores") {
    std::mt19937_64 rng(23);
    const auto s = test::make_schema(15, 4);
    const auto m = fit_batch(s, test::random_instances(*s, 300, rng), 0.5);
    const auto text = m.to_json().dump();
    const auto back = naive_bayes::from_json(nlohmann::json::parse(text));
    CHECK(back == m);
    for (const auto& x : test::random_instances(*s, 40, rng)) {
        CHECK(std::fabs(back.predict_proba(x) - m.predict_proba(x)) <= 1e-12);
    }
    CHECK_THROWS_AS(naive_bayes::from_json(nlohmann::json::parse(R"({"smoothing": 1})")), data_error);
}

TEST_CASE("feature_report log likelihood ratios") {
    // Alphabet {P, M}: 3 positives all P gives p_pos = 4/5; 123 negatives
    // all M gives p_neg = 1/125.
    auto s = std::make_shared<const schema>(std::vector<feature_def>{{"cui", {"P"}}}, "y", "1");
    naive_bayes m(s);
    std::uint64_t ord = 0;
    for (int i = 0; i < 3; ++i) m.update({{0}, true, ord++});
    for (int i = 0; i < 123; ++i) m.update({{1}, false, ord++});
    const auto stats = feature_report(m, std::string("P"), 0.0);
    REQUIRE(stats.size() == 1);
    CHECK(stats[0].p_given_pos == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(stats[0].p_given_neg == doctest::Approx(0.008).epsilon(1e-15));
    CHECK(std::fabs(stats[0].log10_lr - 2.0) <= 1e-12);
}

TEST_CASE("feature_report min_p_pos filter") {
    // 198 positives, none with P: p_pos(P) = 1/200 = 0.005.
    auto s = std::make_shared<const schema>(std::vector<feature_def>{{"cui", {"P"}}}, "y", "1");
    naive_bayes m(s);
    std::uint64_t ord = 0;
    for (int i = 0; i < 198; ++i) m.update({{1}, true, ord++});
    for (int i = 0; i < 10; ++i) m.update({{0}, false, ord++});
    CHECK(feature_report(m, std::string("P"), 0.01).empty());
    const auto unfiltered = feature_report(m, std::string("P"), 0.0);
    REQUIRE(unfiltered.size() == 1);
    CHECK(unfiltered[0].p_given_pos == doctest::Approx(0.005));
    CHECK(feature_report(m, std::nullopt, 0.0).size() == 2);
}

TEST_CASE("feature_report is zero under symmetric counts and sorted otherwise") {
    const auto s = test::make_schema(5);
    naive_bayes sym(s);
    std::mt19937_64 rng(29);
    for (auto x : test::random_instances(*s, 100, rng)) {
        x.label = true;
        sym.update(x);
        x.label = false;
        sym.update(x);
    }
    for (const auto& st : feature_report(sym)) CHECK(std::fabs(st.log10_lr) <= 1e-12);

    const auto m = fit_batch(s, test::random_instances(*s, 400, rng));
    const auto stats = feature_report(m);
    CHECK(stats.size() == 15);
    for (std::size_t i = 1; i < stats.size(); ++i) CHECK(stats[i - 1].log10_lr >= stats[i].log10_lr);
    for (const auto& st : stats) {
        CHECK(std::fabs(st.log10_lr - std::log10(st.p_given_pos / st.p_given_neg)) <= 1e-12);
    }
}

TEST_CASE("feature_report needs both classes") {
    const auto s = test::make_schema(1);
    naive_bayes m(s);
    m.update({{0}, true, 0});
    CHECK_THROWS_AS(feature_report(m), data_error);
}
