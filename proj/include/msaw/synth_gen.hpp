#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "msaw/data_model.hpp"

namespace msaw {

/// Knobs of the seasonal benchmark generator.
///
/// Each season's class-conditional distributions are the previous season's
/// moved by exactly `drift_rate` in total variation toward a per-feature,
/// per-class drift anchor: a Dirichlet draw pushed out to the simplex
/// boundary along the ray from season 0. Chains move in a straight line, so
/// distance to the target season grows with season distance.
struct drift_spec {
    std::size_t n_features = 30;
    std::size_t alphabet_size = 3;
    std::size_t n_sources = 8;
    std::size_t instances_per_season = 20000;
    double prevalence = 0.002;
    double drift_rate = 0.05;
    std::uint64_t seed = 7;

    // Mixing weight of the class signal: positive-class conditionals are
    // (1 - s) * negative + s * Dirichlet draw, both at season 0 and at the anchors.
    double class_separation = 0.5;
    // Dirichlet concentration for every draw.
    double concentration = 1.0;
    // Replace the earliest source season with a near-copy of the target.
    bool outlier_season = false;

    void validate() const;
    nlohmann::json to_json() const;
};

// conditionals[f][c] is P(feature f = code | class c); c = 0 negative, 1 positive.
using season_conditionals = std::vector<std::array<std::vector<double>, 2>>;

struct synthetic_benchmark {
    drift_spec spec;
    schema_ptr schema;
    // Sources in chronological order, the target last.
    std::vector<season_dataset> seasons;
    std::vector<season_conditionals> conditionals;
};

synthetic_benchmark generate(const drift_spec& spec);

// Writes schema.json, <season_id>.csv per season, and manifest.json.
// Returns the written paths in that order.
std::vector<std::filesystem::path> write_benchmark(const synthetic_benchmark& bench,
                                                   const std::filesystem::path& dir);

double total_variation(const std::vector<double>& p, const std::vector<double>& q);

}  // namespace msaw
