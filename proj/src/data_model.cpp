#include "msaw/data_model.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "msaw/error.hpp"

namespace msaw {

namespace {

std::string feature_context(std::size_t i, const std::string& name) {
    return "features[" + std::to_string(i) + "] ('" + name + "')";
}

// Splits one CSV record. Quoted fields are accepted so that files written by
// spreadsheets load, although category codes never need quoting.
std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

}  // namespace

schema::schema(std::vector<feature_def> features,
               std::string label_name,
               std::string positive_label,
               std::string missing_code)
    : features_(std::move(features)),
      label_name_(std::move(label_name)),
      positive_label_(std::move(positive_label)),
      missing_code_(std::move(missing_code)) {
    if (label_name_.empty()) throw schema_error("schema: label name is empty");
    if (positive_label_.empty()) throw schema_error("schema: positive_label is empty");
    if (missing_code_.empty()) throw schema_error("schema: missing_code is empty");
    negative_label_ = positive_label_ == "0" ? "1" : "0";

    code_lookup_.reserve(features_.size());
    missing_index_.reserve(features_.size());
    for (std::size_t i = 0; i < features_.size(); ++i) {
        auto& f = features_[i];
        if (f.name.empty()) throw schema_error("schema: " + feature_context(i, f.name) + " has an empty name");
        if (f.name == label_name_) {
            throw schema_error("schema: " + feature_context(i, f.name) + " collides with the label column");
        }
        if (!by_name_.emplace(f.name, i).second) {
            throw schema_error("schema: duplicate feature name at " + feature_context(i, f.name));
        }
        if (f.alphabet.empty()) throw schema_error("schema: " + feature_context(i, f.name) + " has an empty alphabet");
        if (std::find(f.alphabet.begin(), f.alphabet.end(), missing_code_) == f.alphabet.end()) {
            f.alphabet.push_back(missing_code_);
        }
        if (f.alphabet.size() < 2) {
            throw schema_error("schema: " + feature_context(i, f.name) + " needs at least 2 distinct codes");
        }
        if (f.alphabet.size() > std::numeric_limits<category_t>::max()) {
            throw schema_error("schema: " + feature_context(i, f.name) + " alphabet is too large");
        }
        std::unordered_map<std::string, category_t> lookup;
        for (std::size_t c = 0; c < f.alphabet.size(); ++c) {
            if (f.alphabet[c].empty()) {
                throw schema_error("schema: " + feature_context(i, f.name) + " contains an empty code");
            }
            if (!lookup.emplace(f.alphabet[c], static_cast<category_t>(c)).second) {
                throw schema_error("schema: " + feature_context(i, f.name) + " repeats code '" + f.alphabet[c] + "'");
            }
        }
        missing_index_.push_back(lookup.at(missing_code_));
        code_lookup_.push_back(std::move(lookup));
    }
}

std::optional<std::size_t> schema::feature_index(std::string_view name) const {
    auto it = by_name_.find(std::string(name));
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::optional<category_t> schema::code_index(std::size_t feature, std::string_view code) const {
    const auto& lookup = code_lookup_[feature];
    auto it = lookup.find(std::string(code));
    if (it == lookup.end()) return std::nullopt;
    return it->second;
}

bool schema::operator==(const schema& other) const {
    return features_ == other.features_ && label_name_ == other.label_name_ &&
           positive_label_ == other.positive_label_ && missing_code_ == other.missing_code_;
}

nlohmann::json schema::to_json() const {
    nlohmann::json features = nlohmann::json::array();
    for (const auto& f : features_) {
        features.push_back({{"name", f.name}, {"alphabet", f.alphabet}});
    }
    return {{"label", label_name_},
            {"positive_label", positive_label_},
            {"missing_code", missing_code_},
            {"features", std::move(features)}};
}

schema schema::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw schema_error("schema: top-level value must be an object");
    auto required_string = [&](const char* key) {
        auto it = j.find(key);
        if (it == j.end() || !it->is_string()) {
            throw schema_error(std::string("schema: missing or non-string field '") + key + "'");
        }
        return it->get<std::string>();
    };
    std::string label = required_string("label");
    std::string positive = required_string("positive_label");
    std::string missing = "M";
    if (auto it = j.find("missing_code"); it != j.end()) {
        if (!it->is_string()) throw schema_error("schema: 'missing_code' must be a string");
        missing = it->get<std::string>();
    }
    auto fit = j.find("features");
    if (fit == j.end() || !fit->is_array()) throw schema_error("schema: 'features' must be an array");

    std::vector<feature_def> features;
    features.reserve(fit->size());
    for (std::size_t i = 0; i < fit->size(); ++i) {
        const auto& fj = (*fit)[i];
        if (!fj.is_object() || !fj.contains("name") || !fj["name"].is_string()) {
            throw schema_error("schema: features[" + std::to_string(i) + "] needs a string 'name'");
        }
        feature_def f;
        f.name = fj["name"].get<std::string>();
        if (!fj.contains("alphabet") || !fj["alphabet"].is_array()) {
            throw schema_error("schema: " + feature_context(i, f.name) + " needs an 'alphabet' array");
        }
        for (const auto& c : fj["alphabet"]) {
            if (!c.is_string()) throw schema_error("schema: " + feature_context(i, f.name) + " has a non-string code");
            f.alphabet.push_back(c.get<std::string>());
        }
        features.push_back(std::move(f));
    }
    return schema(std::move(features), std::move(label), std::move(positive), std::move(missing));
}

schema parse_schema(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw schema_error(std::string("schema: parse failure: ") + e.what());
    }
    return schema::from_json(j);
}

schema load_schema(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw schema_error("schema: cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_schema(buf.str());
    } catch (const schema_error& e) {
        throw schema_error(path.string() + ": " + e.what());
    }
}

void write_schema(const schema& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw error("cannot write " + path.string());
    out << s.to_json().dump(2) << '\n';
}

std::size_t season_dataset::positives() const {
    return static_cast<std::size_t>(
        std::count_if(instances.begin(), instances.end(), [](const instance& x) { return x.label.value_or(false); }));
}

season_dataset read_season_csv(std::istream& in,
                               schema_ptr s,
                               std::string season_id,
                               season_role role,
                               std::string_view source_name) {
    if (!s) throw error("read_season_csv: null schema");
    const std::string where(source_name);
    std::string line;
    if (!std::getline(in, line)) throw data_error(where + ": empty file, header expected");
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);

    auto header = split_csv_line(line);
    std::optional<std::size_t> label_col;
    // column -> feature index, or npos for the label column
    std::vector<std::size_t> col_feature(header.size(), std::string::npos);
    std::vector<bool> seen(s->size(), false);
    for (std::size_t c = 0; c < header.size(); ++c) {
        auto name = trim(header[c]);
        if (name == s->label_name()) {
            if (label_col) throw data_error(where + ": header repeats label column '" + std::string(name) + "'");
            label_col = c;
            continue;
        }
        auto fi = s->feature_index(name);
        if (!fi) throw data_error(where + ": header column '" + std::string(name) + "' is not a schema feature");
        if (seen[*fi]) throw data_error(where + ": header repeats column '" + std::string(name) + "'");
        seen[*fi] = true;
        col_feature[c] = *fi;
    }
    if (!label_col) throw data_error(where + ": header lacks label column '" + s->label_name() + "'");

    season_dataset out;
    out.season_id = std::move(season_id);
    out.schema = s;
    out.role = role;

    std::vector<category_t> defaults(s->size());
    for (std::size_t f = 0; f < s->size(); ++f) defaults[f] = s->missing_index(f);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            throw data_error(where + ": line " + std::to_string(line_no) + " has " + std::to_string(cells.size()) +
                             " cells, header has " + std::to_string(header.size()));
        }
        instance x;
        x.values = defaults;
        x.ordinal = out.instances.size();
        for (std::size_t c = 0; c < cells.size(); ++c) {
            auto cell = trim(cells[c]);
            if (c == *label_col) {
                if (cell.empty()) {
                    throw data_error(where + ": line " + std::to_string(line_no) + " is missing its label");
                }
                x.label = cell == s->positive_label();
                continue;
            }
            std::size_t f = col_feature[c];
            if (cell.empty()) continue;
            auto code = s->code_index(f, cell);
            if (!code) {
                throw data_error(where + ": line " + std::to_string(line_no) + ", column '" + s->feature(f).name +
                                 "': unknown code '" + std::string(cell) + "'");
            }
            x.values[f] = *code;
        }
        out.instances.push_back(std::move(x));
    }
    return out;
}

season_dataset load_season_csv(const std::filesystem::path& path,
                               schema_ptr s,
                               std::string season_id,
                               season_role role) {
    std::ifstream in(path);
    if (!in) throw data_error("cannot open season file " + path.string());
    return read_season_csv(in, std::move(s), std::move(season_id), role, path.string());
}

void write_season_csv(const season_dataset& data, std::ostream& out) {
    const schema& s = *data.schema;
    out << s.label_name();
    for (const auto& f : s.features()) out << ',' << f.name;
    out << '\n';
    for (const auto& x : data.instances) {
        if (!x.label) throw data_error("write_season_csv: instance " + std::to_string(x.ordinal) + " has no label");
        out << (*x.label ? s.positive_label() : s.negative_label());
        for (std::size_t f = 0; f < s.size(); ++f) out << ',' << s.code(f, x.values[f]);
        out << '\n';
    }
}

void write_season_csv(const season_dataset& data, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path.string());
    write_season_csv(data, out);
}

void validate_instance(const schema& s, const instance& x) {
    if (x.values.size() != s.size()) {
        throw data_error("instance " + std::to_string(x.ordinal) + " has " + std::to_string(x.values.size()) +
                         " values, schema has " + std::to_string(s.size()) + " features");
    }
    for (std::size_t f = 0; f < s.size(); ++f) {
        if (x.values[f] >= s.alphabet_size(f)) {
            throw data_error("instance " + std::to_string(x.ordinal) + ": feature '" + s.feature(f).name +
                             "' has out-of-alphabet index " + std::to_string(x.values[f]));
        }
    }
}

void validate(const season_dataset& data) {
    if (!data.schema) throw data_error("season " + data.season_id + " has no schema");
    for (std::size_t i = 0; i < data.instances.size(); ++i) {
        const auto& x = data.instances[i];
        if (x.ordinal != i) {
            throw data_error("season " + data.season_id + ": instance " + std::to_string(i) + " has ordinal " +
                             std::to_string(x.ordinal));
        }
        validate_instance(*data.schema, x);
    }
}

season_split split_by_season(std::vector<season_dataset> datasets, std::string_view target_id) {
    std::unordered_set<std::string> ids;
    for (const auto& d : datasets) {
        if (!ids.insert(d.season_id).second) throw data_error("duplicate season id '" + d.season_id + "'");
    }
    auto it = std::find_if(datasets.begin(), datasets.end(),
                           [&](const season_dataset& d) { return d.season_id == target_id; });
    if (it == datasets.end()) throw data_error("target season '" + std::string(target_id) + "' not found");

    season_split out;
    out.target = std::move(*it);
    out.target.role = season_role::target;
    datasets.erase(it);
    for (auto& d : datasets) d.role = season_role::source;
    out.sources = std::move(datasets);
    return out;
}

}  // namespace msaw
