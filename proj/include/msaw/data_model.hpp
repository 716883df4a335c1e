#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace msaw {

// Index of a category code inside its feature's alphabet.
using category_t = std::uint16_t;

struct feature_def {
    std::string name;
    std::vector<std::string> alphabet;

    bool operator==(const feature_def&) const = default;
};

/// Named categorical features with closed alphabets plus a binary label.
///
/// Construction validates the feature list and appends the missing-value
/// code to any alphabet that lacks it, so every feature can always encode
/// an absent cell.
class schema {
public:
    schema(std::vector<feature_def> features,
           std::string label_name,
           std::string positive_label,
           std::string missing_code = "M");

    std::size_t size() const { return features_.size(); }
    const feature_def& feature(std::size_t i) const { return features_[i]; }
    std::span<const feature_def> features() const { return features_; }
    std::size_t alphabet_size(std::size_t i) const { return features_[i].alphabet.size(); }

    const std::string& label_name() const { return label_name_; }
    const std::string& positive_label() const { return positive_label_; }
    // Code written for negative labels when serializing a dataset.
    const std::string& negative_label() const { return negative_label_; }
    const std::string& missing_code() const { return missing_code_; }

    std::optional<std::size_t> feature_index(std::string_view name) const;
    std::optional<category_t> code_index(std::size_t feature, std::string_view code) const;
    category_t missing_index(std::size_t feature) const { return missing_index_[feature]; }
    const std::string& code(std::size_t feature, category_t c) const {
        return features_[feature].alphabet[c];
    }

    nlohmann::json to_json() const;
    static schema from_json(const nlohmann::json& j);

    bool operator==(const schema& other) const;

private:
    std::vector<feature_def> features_;
    std::string label_name_;
    std::string positive_label_;
    std::string negative_label_;
    std::string missing_code_;
    std::vector<category_t> missing_index_;
    std::unordered_map<std::string, std::size_t> by_name_;
    std::vector<std::unordered_map<std::string, category_t>> code_lookup_;
};

using schema_ptr = std::shared_ptr<const schema>;

/// One labeled (or unlabeled) observation. `values` is in schema feature order.
struct instance {
    std::vector<category_t> values;
    std::optional<bool> label;  // true = positive class
    std::uint64_t ordinal = 0;

    bool operator==(const instance&) const = default;
};

enum class season_role { source, target };

struct season_dataset {
    std::string season_id;
    schema_ptr schema;
    std::vector<instance> instances;
    season_role role = season_role::source;

    std::size_t size() const { return instances.size(); }
    std::size_t positives() const;
};

schema load_schema(const std::filesystem::path& path);
schema parse_schema(std::string_view json_text);
void write_schema(const schema& s, const std::filesystem::path& path);

/// Reads one season. Row order becomes stream order; empty or absent cells
/// become the missing code. Unknown codes are errors, never coerced.
season_dataset load_season_csv(const std::filesystem::path& path,
                               schema_ptr s,
                               std::string season_id,
                               season_role role);
season_dataset read_season_csv(std::istream& in,
                               schema_ptr s,
                               std::string season_id,
                               season_role role,
                               std::string_view source_name = "<stream>");

void write_season_csv(const season_dataset& data, std::ostream& out);
void write_season_csv(const season_dataset& data, const std::filesystem::path& path);

// Throws data_error on the first instance that violates the schema or the
// ordinal sequence.
void validate_instance(const schema& s, const instance& x);
void validate(const season_dataset& data);

struct season_split {
    std::vector<season_dataset> sources;
    season_dataset target;
};

season_split split_by_season(std::vector<season_dataset> datasets, std::string_view target_id);

}  // namespace msaw
