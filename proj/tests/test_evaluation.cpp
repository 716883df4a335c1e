#include <doctest.h>

#include <cmath>
#include <sstream>

#include "msaw/error.hpp"
#include "msaw/evaluation.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace msaw;

namespace {

std::vector<eval_record> from_scores(const std::vector<double>& pos, const std::vector<double>& neg) {
    std::vector<eval_record> out;
    for (double s : pos) out.push_back({out.size(), s, true});
    for (double s : neg) out.push_back({out.size(), s, false});
    return out;
}

}  // namespace

TEST_CASE("auroc examples") {
    CHECK(auroc(from_scores({0.9, 0.4}, {0.5, 0.1, 0.3})) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(auroc(from_scores({0.5}, {0.5})) == 0.5);
    CHECK(auroc(from_scores({0.7, 0.8, 0.9}, {0.1, 0.2, 0.6})) == 1.0);
    CHECK(auroc(from_scores({0.1}, {0.9})) == 0.0);
    CHECK_THROWS_AS(auroc(from_scores({0.1, 0.2}, {})), data_error);
    CHECK_THROWS_AS(auroc(from_scores({}, {0.1})), data_error);
    CHECK_THROWS_AS(auroc(from_scores({std::nan("")}, {0.1})), data_error);
}

TEST_CASE("auroc equals the pairwise count exactly (random, with ties)") {
    std::mt19937_64 rng(61);
    std::uniform_int_distribution<int> n(2, 600), grid(0, 20);
    for (int trial = 0; trial < 60; ++trial) {
        const auto records = oracle::random_records(static_cast<std::size_t>(n(rng)), rng, grid(rng));
        CHECK(auroc(records) == oracle::brute_force_auroc(records));
    }
}

TEST_CASE("auroc is invariant under increasing transforms") {
    std::mt19937_64 rng(67);
    for (int trial = 0; trial < 20; ++trial) {
        auto records = oracle::random_records(300, rng, trial % 2 ? 10 : 0);
        const double base = auroc(records);
        for (auto& r : records) r.score = std::pow(r.score, 3.0) * 0.5 + 0.1;
        CHECK(auroc(records) == base);
    }
}

TEST_CASE("label flip complements auroc, ties included") {
    std::mt19937_64 rng(71);
    for (int trial = 0; trial < 20; ++trial) {
        auto records = oracle::random_records(250, rng, trial % 3 == 0 ? 0 : 8);
        const double base = auroc(records);
        for (auto& r : records) r.label = !r.label;
        CHECK(auroc(records) == doctest::Approx(1.0 - base).epsilon(1e-14));
    }
}

TEST_CASE("delong identical inputs") {
    std::mt19937_64 rng(73);
    const auto a = oracle::random_records(200, rng);
    const auto r = delong_test(a, a);
    CHECK(r.z == 0.0);
    CHECK(r.p == 1.0);
}

TEST_CASE("delong perfect vs anti-perfect separator") {
    std::vector<eval_record> a, b;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const bool pos = i < 5;
        // Scores interleave under any swap, so only the identity and full
        // swap keep the difference at one.
        a.push_back({i, pos ? 0.6 + 0.01 * i : 0.1 + 0.01 * i, pos});
        b.push_back({i, pos ? 0.01 * i : 0.9 + 0.01 * i, pos});
    }
    REQUIRE(auroc(a) == 1.0);
    REQUIRE(auroc(b) == 0.0);
    const auto r = delong_test(a, b);
    CHECK(r.p < 0.05);
    CHECK(r.z > 0);
    // Independent check: exact paired permutation test also rejects.
    CHECK(oracle::permutation_p(a, b, 0, 0) < 0.05);
}

TEST_CASE("delong antisymmetry and range (random)") {
    std::mt19937_64 rng(79);
    std::normal_distribution<double> noise(0.0, 0.15);
    for (int trial = 0; trial < 30; ++trial) {
        auto a = oracle::random_records(150, rng, trial % 4 == 0 ? 12 : 0);
        auto b = a;
        for (auto& r : b) r.score = std::clamp(r.score + noise(rng), 0.0, 1.0);
        const auto ab = delong_test(a, b);
        const auto ba = delong_test(b, a);
        CHECK(ab.z == -ba.z);
        CHECK(ab.p == ba.p);
        CHECK(ab.p >= 0.0);
        CHECK(ab.p <= 1.0);
        CHECK(std::isfinite(ab.z));
    }
}

TEST_CASE("delong agrees with a paired bootstrap on a few sets") {
    // Smaller version of the acceptance check so regressions show up here.
    std::mt19937_64 rng(83);
    std::normal_distribution<double> noise(0.0, 0.2);
    for (int trial = 0; trial < 3; ++trial) {
        auto a = oracle::random_records(200, rng, 0, 0.5);
        for (auto& r : a) r.score = std::clamp(r.score * 0.6 + (r.label ? 0.25 : 0.0), 0.0, 1.0);
        auto b = a;
        for (auto& r : b) r.score = std::clamp(r.score + noise(rng), 0.0, 1.0);
        const double p = delong_test(a, b).p;
        CHECK(std::fabs(p - oracle::bootstrap_p(a, b, 20000, 100 + static_cast<std::uint64_t>(trial))) <= 0.03);
    }
}

TEST_CASE("delong errors") {
    std::mt19937_64 rng(89);
    const auto a = oracle::random_records(20, rng);
    auto b = a;
    b.pop_back();
    CHECK_THROWS_AS(delong_test(a, b), data_error);
    b = a;
    b[3].label = !b[3].label;
    CHECK_THROWS_AS(delong_test(a, b), data_error);
    const auto one_class = from_scores({0.1, 0.2}, {});
    CHECK_THROWS_AS(delong_test(one_class, one_class), data_error);
}

TEST_CASE("evaluate_static") {
    std::mt19937_64 rng(97);
    const auto s = test::make_schema(6);
    // Separable: positives always P on f0, negatives always N.
    auto xs = test::random_instances(*s, 400, rng);
    for (auto& x : xs) x.values[0] = *x.label ? 0 : 1;
    const auto season = test::make_season(s, "2018-2019", xs);
    const auto model = fit_batch(s, xs);
    const auto report = evaluate_static(model, season);
    CHECK(report.auroc > 0.5);
    CHECK(report.method_name == "2018-2019");
    CHECK(report.n_pos + report.n_neg == 400);

    // Constant scores: smoothing-only model on identical instances.
    std::vector<instance> same;
    for (std::uint64_t i = 0; i < 20; ++i) same.push_back({std::vector<category_t>(6, 2), i % 3 == 0, i});
    CHECK(evaluate_static(naive_bayes(s), test::make_season(s, "c", same)).auroc == 0.5);

    std::vector<instance> negatives(5, instance{std::vector<category_t>(6, 0), false, 0});
    for (std::uint64_t i = 0; i < 5; ++i) negatives[i].ordinal = i;
    CHECK_THROWS_AS(evaluate_static(model, test::make_season(s, "n", negatives)), data_error);
    CHECK_THROWS_AS(evaluate_static(naive_bayes(test::make_schema(2)), season), data_error);
}

TEST_CASE("compare_methods") {
    std::mt19937_64 rng(101);
    const auto ref = oracle::random_records(100, rng);
    auto other = ref;
    for (auto& r : other) r.score = 1.0 - r.score;

    SUBCASE("only the reference") {
        const std::vector<method_records> in{{"msaw", ref}};
        const auto out = compare_methods(in);
        REQUIRE(out.size() == 1);
        CHECK(out[0].delong_vs.empty());
    }
    SUBCASE("self-comparison under another name") {
        const std::vector<method_records> in{{"copy", ref}, {"msaw", ref}};
        const auto out = compare_methods(in);
        REQUIRE(out.size() == 2);
        CHECK(out[0].method_name == "copy");
        REQUIRE(out[0].delong_vs.size() == 1);
        CHECK(out[0].delong_vs[0].first == "msaw");
        CHECK(out[0].delong_vs[0].second.z == 0.0);
        CHECK(out[0].delong_vs[0].second.p == 1.0);
    }
    SUBCASE("input order is kept") {
        const std::vector<method_records> in{{"a", other}, {"msaw", ref}, {"b", ref}};
        const auto out = compare_methods(in);
        CHECK(out[0].method_name == "a");
        CHECK(out[1].method_name == "msaw");
        CHECK(out[2].method_name == "b");
        CHECK(out[0].auroc == doctest::Approx(1.0 - out[1].auroc));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(compare_methods(std::vector<method_records>{{"a", ref}}), data_error);
        auto short_ref = ref;
        short_ref.pop_back();
        CHECK_THROWS_AS(compare_methods(std::vector<method_records>{{"a", short_ref}, {"msaw", ref}}), data_error);
        CHECK_THROWS_AS(compare_methods(std::vector<method_records>{{"msaw", ref}, {"msaw", ref}}), data_error);
    }
}

TEST_CASE("metric exports") {
    std::vector<metric_report> reports{{"equal", 0.75, 10, 90, {{"msaw", {-2.5, 0.0124}}}},
                                       {"msaw", 0.8, 10, 90, {}},
                                       {"inf", 1.0, 5, 5, {{"msaw", {INFINITY, 0.0}}}}};
    std::ostringstream csv;
    write_metrics_csv(reports, csv);
    CHECK(csv.str() ==
          "method,auroc,n_pos,n_neg,z_vs_msaw,p_vs_msaw\n"
          "equal,0.75,10,90,-2.5,0.0124\n"
          "msaw,0.80000000000000004,10,90,,\n"
          "inf,1,5,5,inf,0\n");

    std::ostringstream js;
    write_metrics_json(reports, js);
    const auto j = nlohmann::json::parse(js.str());
    REQUIRE(j.size() == 3);
    CHECK(j[0]["delong_vs"]["msaw"]["p"].get<double>() == 0.0124);
    CHECK(j[1]["delong_vs"].empty());
    CHECK(j[2]["delong_vs"]["msaw"]["z"].get<std::string>() == "inf");

    std::ostringstream rec;
    write_records_csv(std::vector<eval_record>{{0, 0.25, true}, {1, 0.5, false}}, rec);
    CHECK(rec.str() == "ordinal,score,label\n0,0.25,1\n1,0.5,0\n");
}
