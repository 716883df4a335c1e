#include "msaw/experiment.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <ostream>
#include <set>
#include <thread>

#include "msaw/error.hpp"

namespace msaw {

namespace {

namespace fs = std::filesystem;

struct method_name_entry {
    method_kind kind;
    const char* name;
};

constexpr method_name_entry method_names[] = {
    {method_kind::pretrained_pooled, "pretrained_pooled"},
    {method_kind::online, "online"},
    {method_kind::online_pretrained, "online_pretrained"},
    {method_kind::equal, "equal"},
    {method_kind::volume, "volume"},
    {method_kind::time, "time"},
    {method_kind::msaw, "msaw"},
};

fs::path resolve(const fs::path& base, const fs::path& p) {
    if (p.empty() || p.is_absolute() || base.empty()) return p;
    return base / p;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error("cannot write " + path.string());
    return out;
}

void log(const experiment_config& config, const std::string& msg) {
    if (config.verbose) std::clog << "[msaw] " << msg << '\n';
}

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string format_p(double p) {
    if (p < 0.001) return "P<0.001";
    return "P=" + fixed(p, 3);
}

std::vector<std::string> discover_seasons(const experiment_config& config, std::string& manifest_target,
                                          std::optional<std::uint64_t>& manifest_seed) {
    const auto manifest_path = config.data_dir / "manifest.json";
    if (fs::exists(manifest_path)) {
        std::ifstream in(manifest_path);
        nlohmann::json m;
        try {
            in >> m;
            std::vector<std::string> ids;
            for (const auto& s : m.at("seasons")) ids.push_back(s.at("season_id").get<std::string>());
            if (auto it = m.find("target_season"); it != m.end()) manifest_target = it->get<std::string>();
            if (auto it = m.find("seed"); it != m.end() && it->is_number_unsigned()) manifest_seed = it->get<std::uint64_t>();
            if (!config.seasons.empty()) return config.seasons;
            return ids;
        } catch (const nlohmann::json::exception& e) {
            throw config_error(manifest_path.string() + ": malformed manifest: " + e.what());
        }
    }
    if (!config.seasons.empty()) return config.seasons;

    if (!fs::is_directory(config.data_dir)) throw config_error("data_dir " + config.data_dir.string() + " is not a directory");
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(config.data_dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".csv") ids.push_back(entry.path().stem().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

}  // namespace

std::string_view to_string(method_kind k) {
    for (const auto& e : method_names) {
        if (e.kind == k) return e.name;
    }
    return "unknown";
}

method_kind parse_method_kind(std::string_view name) {
    for (const auto& e : method_names) {
        if (name == e.name) return e.kind;
    }
    throw config_error("unknown method kind '" + std::string(name) + "'");
}

void experiment_config::validate() const {
    if (methods.empty()) throw config_error("config: 'methods' must not be empty");
    std::set<std::string> names;
    for (const auto& m : methods) {
        if (m.name.empty()) throw config_error("config: method name must not be empty");
        if (!names.insert(m.name).second) throw config_error("config: duplicate method name '" + m.name + "'");
    }
    msaw.validate();
    if (!(smoothing > 0.0)) throw config_error("config: smoothing must be positive");
    if (snapshot_stride == 0) throw config_error("config: snapshot_stride must be positive");
    if (summary_order != "input" && summary_order != "auroc") {
        throw config_error("config: summary_order must be 'input' or 'auroc'");
    }
}

experiment_config parse_config(const nlohmann::json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw config_error("config: top-level value must be an object");
    experiment_config c;
    try {
        c.data_dir = resolve(base_dir, j.at("data_dir").get<std::string>());
        if (auto it = j.find("schema"); it != j.end()) c.schema_path = resolve(base_dir, it->get<std::string>());
        else if (auto it2 = j.find("schema_path"); it2 != j.end()) c.schema_path = resolve(base_dir, it2->get<std::string>());
        else c.schema_path = c.data_dir / "schema.json";
        c.target_season = j.value("target_season", std::string{});

        for (const auto& m : j.at("methods")) {
            method_spec spec;
            if (m.is_string()) {
                spec.kind = parse_method_kind(m.get<std::string>());
                spec.name = m.get<std::string>();
            } else {
                spec.kind = parse_method_kind(m.at("kind").get<std::string>());
                spec.name = m.value("name", std::string(to_string(spec.kind)));
            }
            c.methods.push_back(std::move(spec));
        }
        if (auto it = j.find("msaw"); it != j.end()) {
            c.msaw.alpha = it->value("alpha", c.msaw.alpha);
            c.msaw.beta = it->value("beta", c.msaw.beta);
            c.msaw.decision_threshold = it->value("decision_threshold", c.msaw.decision_threshold);
        }
        c.smoothing = j.value("smoothing", c.smoothing);
        c.output_dir = resolve(base_dir, j.value("output_dir", c.output_dir.string()));
        if (auto it = j.find("seed"); it != j.end() && !it->is_null()) c.seed = it->get<std::uint64_t>();
        c.snapshot_stride = j.value("snapshot_stride", c.snapshot_stride);
        if (auto it = j.find("seasons"); it != j.end()) c.seasons = it->get<std::vector<std::string>>();
        c.summary_order = j.value("summary_order", c.summary_order);
        c.threads = j.value("threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("config: ") + e.what());
    }
    c.validate();
    return c;
}

experiment_config load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error(path.string() + ": " + e.what());
    }
    return parse_config(j, path.parent_path());
}

loaded_experiment load_experiment(const experiment_config& config) {
    loaded_experiment out;
    out.schema = std::make_shared<const schema>(load_schema(config.schema_path));

    std::string manifest_target;
    out.season_order = discover_seasons(config, manifest_target, out.data_seed);
    const std::string target = !config.target_season.empty() ? config.target_season : manifest_target;
    if (target.empty()) throw config_error("config: 'target_season' is required");
    if (std::find(out.season_order.begin(), out.season_order.end(), target) == out.season_order.end()) {
        throw config_error("target season '" + target + "' not found among seasons in " + config.data_dir.string());
    }

    std::vector<season_dataset> all;
    for (const auto& id : out.season_order) {
        const auto path = config.data_dir / (id + ".csv");
        if (!fs::exists(path)) throw data_error("season '" + id + "': missing file " + path.string());
        log(config, "loading " + path.string());
        all.push_back(load_season_csv(path, out.schema, id, season_role::source));
    }
    auto split = split_by_season(std::move(all), target);
    out.sources = std::move(split.sources);
    out.target = std::move(split.target);
    return out;
}

experiment_result run_experiment(const experiment_config& config, const loaded_experiment& data) {
    config.validate();
    if (data.target.positives() == 0 || data.target.positives() == data.target.size()) {
        throw data_error("target season '" + data.target.season_id + "' has a single class; AUROC is undefined");
    }

    std::vector<naive_bayes> source_models;
    source_models.reserve(data.sources.size());
    naive_bayes pooled(data.schema, config.smoothing);
    std::vector<double> volumes, distances;
    const auto target_pos = static_cast<long>(
        std::find(data.season_order.begin(), data.season_order.end(), data.target.season_id) - data.season_order.begin());
    for (const auto& s : data.sources) {
        source_models.push_back(fit_batch(data.schema, s.instances, config.smoothing));
        for (const auto& x : s.instances) pooled.update(x);
        volumes.push_back(static_cast<double>(s.size()));
        const auto pos = static_cast<long>(
            std::find(data.season_order.begin(), data.season_order.end(), s.season_id) - data.season_order.begin());
        distances.push_back(static_cast<double>(std::labs(target_pos - pos)));
    }
    log(config, "trained " + std::to_string(source_models.size()) + " source models");

    const naive_bayes fresh(data.schema, config.smoothing);
    auto run_method = [&](const method_spec& m) {
        method_outcome o;
        o.method = m;
        const bool static_ensemble =
            m.kind == method_kind::equal || m.kind == method_kind::volume || m.kind == method_kind::time;
        if (static_ensemble && source_models.empty()) {
            throw data_error("method '" + m.name + "' needs at least one source season");
        }
        stream_result r;
        switch (m.kind) {
            case method_kind::pretrained_pooled:
                r = run_stream({}, pooled, data.target, weight_strategy::single(false), config.msaw);
                break;
            case method_kind::online:
                r = run_stream({}, fresh, data.target, weight_strategy::single(true), config.msaw);
                break;
            case method_kind::online_pretrained:
                r = run_stream({}, pooled, data.target, weight_strategy::single(true), config.msaw);
                break;
            case method_kind::equal:
                r = run_stream(source_models, fresh, data.target, weight_strategy::equal(), config.msaw);
                break;
            case method_kind::volume:
                r = run_stream(source_models, fresh, data.target, weight_strategy::volume(volumes), config.msaw);
                break;
            case method_kind::time:
                r = run_stream(source_models, fresh, data.target, weight_strategy::time(distances), config.msaw);
                break;
            case method_kind::msaw:
                r = run_stream(source_models, fresh, data.target, weight_strategy::adaptive(), config.msaw,
                               config.snapshot_stride);
                break;
        }
        o.records = std::move(r.records);
        o.trajectory = std::move(r.trajectory);
        return o;
    };

    experiment_result result;
    result.n_sources = source_models.size();
    unsigned threads = config.threads;
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::min<unsigned>(threads, static_cast<unsigned>(config.methods.size()));

    result.outcomes.resize(config.methods.size());
    for (std::size_t begin = 0; begin < config.methods.size(); begin += threads) {
        const std::size_t end = std::min(config.methods.size(), begin + threads);
        std::vector<std::future<method_outcome>> pending;
        for (std::size_t i = begin; i < end; ++i) {
            pending.push_back(std::async(std::launch::async, run_method, std::cref(config.methods[i])));
        }
        for (std::size_t i = begin; i < end; ++i) {
            result.outcomes[i] = pending[i - begin].get();
            log(config, "finished method " + config.methods[i].name);
        }
    }

    std::vector<method_records> named;
    for (const auto& o : result.outcomes) named.push_back({o.method.name, o.records});
    const bool has_reference = std::any_of(named.begin(), named.end(),
                                           [](const method_records& m) { return m.name == reference_method; });
    if (has_reference) {
        result.reports = compare_methods(named);
    } else {
        for (const auto& m : named) {
            const auto n_pos = static_cast<std::size_t>(
                std::count_if(m.records.begin(), m.records.end(), [](const eval_record& r) { return r.label; }));
            result.reports.push_back({m.name, auroc(m.records), n_pos, m.records.size() - n_pos, {}});
        }
    }
    return result;
}

std::vector<season_row> evaluate_seasons(const experiment_config& config, const loaded_experiment& data) {
    if (data.sources.empty()) throw data_error("no source seasons to evaluate");
    std::vector<season_row> rows;
    for (const auto& s : data.sources) {
        const auto model = fit_batch(data.schema, s.instances, config.smoothing);
        const auto report = evaluate_static(model, data.target);
        rows.push_back({s.season_id, report.auroc, s.size(), s.positives()});
    }
    return rows;
}

int cmd_gen(const drift_spec& spec, const fs::path& output_dir, std::ostream& out) {
    const auto bench = generate(spec);
    const auto written = write_benchmark(bench, output_dir);
    out << "seed " << spec.seed << '\n';
    for (const auto& p : written) out << p.string() << '\n';
    return 0;
}

int cmd_run(const experiment_config& config, std::ostream& out) {
    const auto data = load_experiment(config);
    const auto result = run_experiment(config, data);
    const auto seed = config.seed ? config.seed : data.data_seed;

    fs::create_directories(config.output_dir);
    {
        auto f = open_output(config.output_dir / "metrics.json");
        write_metrics_json(result.reports, f);
    }
    {
        auto f = open_output(config.output_dir / "metrics.csv");
        write_metrics_csv(result.reports, f);
    }
    for (const auto& o : result.outcomes) {
        auto f = open_output(config.output_dir / ("records_" + o.method.name + ".csv"));
        write_records_csv(o.records, f);
        if (o.method.kind == method_kind::msaw) {
            auto w = open_output(config.output_dir / ("weights_" + o.method.name + ".csv"));
            write_weight_trajectory(o.trajectory, result.n_sources, w);
        }
    }
    {
        nlohmann::json methods = nlohmann::json::array();
        for (const auto& m : config.methods) methods.push_back({{"name", m.name}, {"kind", to_string(m.kind)}});
        nlohmann::json manifest = {
            {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
            {"target_season", data.target.season_id},
            {"target_instances", data.target.size()},
            {"target_positives", data.target.positives()},
            {"source_seasons", [&] {
                 std::vector<std::string> ids;
                 for (const auto& s : data.sources) ids.push_back(s.season_id);
                 return ids;
             }()},
            {"methods", std::move(methods)},
            {"msaw", {{"alpha", config.msaw.alpha}, {"beta", config.msaw.beta},
                      {"decision_threshold", config.msaw.decision_threshold}}},
            {"smoothing", config.smoothing},
            {"snapshot_stride", config.snapshot_stride}};
        auto f = open_output(config.output_dir / "run_manifest.json");
        f << manifest.dump(2) << '\n';
    }

    std::vector<const metric_report*> rows;
    for (const auto& r : result.reports) rows.push_back(&r);
    if (config.summary_order == "auroc") {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const metric_report* a, const metric_report* b) { return a->auroc > b->auroc; });
    }
    std::size_t width = 6;
    for (const auto* r : rows) width = std::max(width, r->method_name.size());
    out << "target " << data.target.season_id << ": " << data.target.size() << " instances, "
        << data.target.positives() << " positive";
    if (seed) out << ", seed " << *seed;
    out << '\n';
    out << std::left << std::setw(static_cast<int>(width)) << "method" << "  AUROC\n";
    for (const auto* r : rows) {
        out << std::left << std::setw(static_cast<int>(width)) << r->method_name << "  " << fixed(r->auroc, 3);
        if (!r->delong_vs.empty()) out << " (" << format_p(r->delong_vs.front().second.p) << ")";
        out << '\n';
    }
    return 0;
}

int cmd_seasons(const experiment_config& config, std::ostream& out) {
    const auto data = load_experiment(config);
    const auto rows = evaluate_seasons(config, data);
    fs::create_directories(config.output_dir);
    auto f = open_output(config.output_dir / "seasons.csv");
    f << "season,auroc,train_instances,train_positives\n";
    char buf[32];
    out << "target " << data.target.season_id << '\n' << "season       AUROC\n";
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.17g", r.auroc);
        f << r.season_id << ',' << buf << ',' << r.train_instances << ',' << r.train_positives << '\n';
        out << std::left << std::setw(12) << r.season_id << ' ' << fixed(r.auroc, 3) << '\n';
    }
    return 0;
}

int cmd_features(const experiment_config& config, const feature_options& options, std::ostream& out) {
    if (options.top_k < 1) throw config_error("features: top_k must be >= 1");
    const auto data = load_experiment(config);
    const season_dataset* season = nullptr;
    if (data.target.season_id == options.season) season = &data.target;
    for (const auto& s : data.sources) {
        if (s.season_id == options.season) season = &s;
    }
    if (!season) throw config_error("features: unknown season '" + options.season + "'");

    const auto model = fit_batch(data.schema, season->instances, config.smoothing);
    auto stats = feature_report(model, options.category, options.min_p_pos);
    if (stats.size() > static_cast<std::size_t>(options.top_k)) stats.resize(static_cast<std::size_t>(options.top_k));

    fs::create_directories(config.output_dir);
    auto f = open_output(config.output_dir / ("features_" + season->season_id + ".csv"));
    f << "feature,category,p_given_pos,p_given_neg,log10_lr\n";
    char buf[128];
    for (const auto& s : stats) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g", s.p_given_pos, s.p_given_neg, s.log10_lr);
        f << s.feature << ',' << s.category << ',' << buf << '\n';
        out << std::left << std::setw(12) << (s.feature + "=" + s.category) << " P(f|pos)=" << fixed(s.p_given_pos, 4)
            << " log10 LR=" << fixed(s.log10_lr, 3) << '\n';
    }
    return 0;
}

}  // namespace msaw
