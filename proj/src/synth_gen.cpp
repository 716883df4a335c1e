#include "msaw/synth_gen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "msaw/error.hpp"

namespace msaw {

namespace {

std::vector<double> dirichlet(std::mt19937_64& rng, std::size_t k, double concentration) {
    std::gamma_distribution<double> gamma(concentration, 1.0);
    std::vector<double> v(k);
    double total = 0.0;
    for (auto& x : v) {
        x = gamma(rng);
        total += x;
    }
    if (!(total > 0.0)) {
        std::fill(v.begin(), v.end(), 1.0 / static_cast<double>(k));
        return v;
    }
    for (auto& x : v) x /= total;
    return v;
}

std::vector<double> mix(const std::vector<double>& a, const std::vector<double>& b, double t) {
    std::vector<double> out(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) out[i] = (1.0 - t) * a[i] + t * b[i];
    return out;
}

void renormalize(std::vector<double>& p) {
    double total = 0.0;
    for (double& x : p) {
        x = std::max(x, 0.0);
        total += x;
    }
    for (double& x : p) x /= total;
}

// Moves p toward the anchor by `step` in total variation. If the anchor is
// closer than `step`, it is replaced by the vertex at p's smallest
// coordinate, which is always at least 1 - 1/k away.
std::vector<double> drift_toward(const std::vector<double>& p, std::vector<double>& anchor, double step) {
    if (step == 0.0) return p;
    double tv = total_variation(p, anchor);
    if (tv < step) {
        const auto m = static_cast<std::size_t>(std::min_element(p.begin(), p.end()) - p.begin());
        anchor.assign(p.size(), 0.0);
        anchor[m] = 1.0;
        tv = total_variation(p, anchor);
    }
    auto out = mix(p, anchor, std::min(1.0, step / tv));
    renormalize(out);
    return out;
}

// Pushes `target` out along the ray from p until a coordinate reaches zero,
// so a chain drifting toward it keeps a straight course for as long as
// possible before the vertex fallback kicks in.
std::vector<double> extend_to_boundary(const std::vector<double>& p, const std::vector<double>& target) {
    double t_max = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (target[i] < p[i]) t_max = std::min(t_max, p[i] / (p[i] - target[i]));
    }
    if (!std::isfinite(t_max)) return target;
    auto out = mix(p, target, t_max);
    renormalize(out);
    return out;
}

std::vector<std::string> alphabet_for(std::size_t size) {
    if (size == 3) return {"P", "N", "M"};
    if (size == 4) return {"H", "L", "N", "M"};
    std::vector<std::string> codes;
    for (std::size_t i = 1; i < size; ++i) codes.push_back("v" + std::to_string(i));
    codes.push_back("M");
    return codes;
}

std::string season_name(long long start_year) {
    return std::to_string(start_year) + "-" + std::to_string(start_year + 1);
}

std::size_t draw_category(std::mt19937_64& rng, const std::vector<double>& p) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double u = u01(rng);
    for (std::size_t i = 0; i + 1 < p.size(); ++i) {
        if (u < p[i]) return i;
        u -= p[i];
    }
    return p.size() - 1;
}

// Per-season generators, so one season's draws never shift another's.
std::seed_seq seed_sequence(std::uint64_t seed, std::uint32_t stream) {
    return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), stream};
}

}  // namespace

double total_variation(const std::vector<double>& p, const std::vector<double>& q) {
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) acc += std::fabs(p[i] - q[i]);
    return 0.5 * acc;
}

void drift_spec::validate() const {
    if (n_features < 1) throw config_error("drift spec: n_features must be >= 1");
    if (alphabet_size < 2) throw config_error("drift spec: alphabet_size must be >= 2");
    if (n_sources < 1) throw config_error("drift spec: n_sources must be >= 1");
    if (instances_per_season < 1) throw config_error("drift spec: instances_per_season must be >= 1");
    if (!(prevalence > 0.0 && prevalence < 1.0)) throw config_error("drift spec: prevalence must be in (0, 1)");
    if (!(drift_rate >= 0.0) || !std::isfinite(drift_rate)) throw config_error("drift spec: drift_rate must be >= 0");
    if (drift_rate > 1.0 - 1.0 / static_cast<double>(alphabet_size)) {
        throw config_error("drift spec: drift_rate exceeds the largest guaranteed total-variation step (1 - 1/alphabet_size)");
    }
    if (!(class_separation >= 0.0 && class_separation <= 1.0)) {
        throw config_error("drift spec: class_separation must be in [0, 1]");
    }
    if (!(concentration > 0.0) || !std::isfinite(concentration)) {
        throw config_error("drift spec: concentration must be positive");
    }
}

nlohmann::json drift_spec::to_json() const {
    return {{"n_features", n_features},
            {"alphabet_size", alphabet_size},
            {"n_sources", n_sources},
            {"instances_per_season", instances_per_season},
            {"prevalence", prevalence},
            {"drift_rate", drift_rate},
            {"seed", seed},
            {"class_separation", class_separation},
            {"concentration", concentration},
            {"outlier_season", outlier_season}};
}

synthetic_benchmark generate(const drift_spec& spec) {
    spec.validate();
    const std::size_t n_seasons = spec.n_sources + 1;
    const std::size_t k = spec.alphabet_size;

    std::vector<feature_def> features;
    const auto width = std::to_string(spec.n_features).size();
    for (std::size_t f = 0; f < spec.n_features; ++f) {
        auto num = std::to_string(f + 1);
        features.push_back({"f" + std::string(width - num.size(), '0') + num, alphabet_for(k)});
    }

    synthetic_benchmark out;
    out.spec = spec;
    out.schema = std::make_shared<const schema>(std::move(features), "label", "1", "M");

    // Distribution chain. One generator for every distribution draw keeps
    // the chain independent of the instance sampling below.
    std::mt19937_64 dist_rng(spec.seed);
    season_conditionals current(spec.n_features);
    season_conditionals anchors(spec.n_features);
    for (std::size_t f = 0; f < spec.n_features; ++f) {
        auto neg = dirichlet(dist_rng, k, spec.concentration);
        auto pos = mix(neg, dirichlet(dist_rng, k, spec.concentration), spec.class_separation);
        auto a_neg = dirichlet(dist_rng, k, spec.concentration);
        auto a_pos = mix(a_neg, dirichlet(dist_rng, k, spec.concentration), spec.class_separation);
        anchors[f] = {extend_to_boundary(neg, a_neg), extend_to_boundary(pos, a_pos)};
        current[f] = {std::move(neg), std::move(pos)};
    }
    out.conditionals.push_back(current);
    for (std::size_t s = 1; s < n_seasons; ++s) {
        for (std::size_t f = 0; f < spec.n_features; ++f) {
            for (int c = 0; c < 2; ++c) current[f][c] = drift_toward(current[f][c], anchors[f][c], spec.drift_rate);
        }
        out.conditionals.push_back(current);
    }

    if (spec.outlier_season && n_seasons > 1) {
        // The earliest season becomes one drift step away from the target.
        auto seq = seed_sequence(spec.seed, 0x0071E2);
        std::mt19937_64 outlier_rng(seq);
        auto& first = out.conditionals.front();
        const auto& target = out.conditionals.back();
        for (std::size_t f = 0; f < spec.n_features; ++f) {
            for (int c = 0; c < 2; ++c) {
                auto anchor = dirichlet(outlier_rng, k, spec.concentration);
                first[f][c] = drift_toward(target[f][c], anchor, spec.drift_rate);
            }
        }
    }

    const long long first_year = 2019 - static_cast<long long>(spec.n_sources);
    std::bernoulli_distribution label_dist(spec.prevalence);
    for (std::size_t s = 0; s < n_seasons; ++s) {
        auto seq = seed_sequence(spec.seed, static_cast<std::uint32_t>(s + 1));
        std::mt19937_64 rng(seq);
        season_dataset season;
        season.season_id = season_name(first_year + static_cast<long long>(s));
        season.schema = out.schema;
        season.role = s + 1 == n_seasons ? season_role::target : season_role::source;
        season.instances.reserve(spec.instances_per_season);
        const auto& cond = out.conditionals[s];
        for (std::size_t i = 0; i < spec.instances_per_season; ++i) {
            instance x;
            x.ordinal = i;
            const bool positive = label_dist(rng);
            x.label = positive;
            x.values.resize(spec.n_features);
            for (std::size_t f = 0; f < spec.n_features; ++f) {
                x.values[f] = static_cast<category_t>(draw_category(rng, cond[f][positive ? 1 : 0]));
            }
            season.instances.push_back(std::move(x));
        }
        out.seasons.push_back(std::move(season));
    }
    return out;
}

std::vector<std::filesystem::path> write_benchmark(const synthetic_benchmark& bench,
                                                   const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> written;

    const auto schema_path = dir / "schema.json";
    write_schema(*bench.schema, schema_path);
    written.push_back(schema_path);

    nlohmann::json seasons = nlohmann::json::array();
    for (const auto& season : bench.seasons) {
        const auto path = dir / (season.season_id + ".csv");
        write_season_csv(season, path);
        written.push_back(path);
        seasons.push_back({{"season_id", season.season_id},
                           {"file", path.filename().string()},
                           {"role", season.role == season_role::target ? "target" : "source"},
                           {"instances", season.size()},
                           {"positives", season.positives()}});
    }

    nlohmann::json manifest = {{"generator", "msaw synthetic seasonal drift"},
                               {"seed", bench.spec.seed},
                               {"spec", bench.spec.to_json()},
                               {"schema", "schema.json"},
                               {"target_season", bench.seasons.back().season_id},
                               {"seasons", std::move(seasons)}};
    const auto manifest_path = dir / "manifest.json";
    std::ofstream out(manifest_path);
    if (!out) throw error("cannot write " + manifest_path.string());
    out << manifest.dump(2) << '\n';
    written.push_back(manifest_path);
    return written;
}

}  // namespace msaw
