#include <fstream>
#include <json.hpp>
#include <set>

#include "tlsel/cli.hpp"

namespace tlsel {
namespace {

using nlohmann::json;

void require_known_keys(const json& j, const std::set<std::string>& allowed,
                        const std::string& context) {
    for (const auto& [key, value] : j.items()) {
        if (!allowed.contains(key))
            throw ConfigError("unknown key '" + key + "' in " + context);
    }
}

DatasetRef parse_dataset_ref(const json& j, const std::string& context) {
    if (!j.is_object()) throw ConfigError(context + " must be an object");
    require_known_keys(j, {"path", "domain_id"}, context);
    DatasetRef ref;
    if (!j.contains("path")) throw ConfigError(context + " needs a 'path'");
    ref.path = j.at("path").get<std::string>();
    if (j.contains("domain_id")) ref.domain_id = j.at("domain_id").get<std::string>();
    if (ref.domain_id.empty()) ref.domain_id = ref.path.stem().string();
    return ref;
}

template <class T>
void read_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

CliConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config root must be an object");
    require_known_keys(j,
                       {"task_id", "method", "mode", "sources", "target", "n_in", "n_out",
                        "metrics", "baseline_family", "n_runs", "seed", "jobs", "elm",
                        "idtr", "ftann", "msann", "out"},
                       "config");

    CliConfig cfg;
    try {
        read_if(j, "task_id", cfg.task_id);
        read_if(j, "method", cfg.method);
        if (j.contains("mode"))
            cfg.mode = task_mode_from_string(j.at("mode").get<std::string>());
        if (j.contains("sources")) {
            if (!j.at("sources").is_array())
                throw ConfigError("'sources' must be an array");
            int i = 0;
            for (const auto& s : j.at("sources"))
                cfg.sources.push_back(parse_dataset_ref(s, "sources[" + std::to_string(i++) + "]"));
        }
        if (j.contains("target")) cfg.target = parse_dataset_ref(j.at("target"), "target");
        read_if(j, "n_in", cfg.n_in);
        read_if(j, "n_out", cfg.n_out);
        if (j.contains("metrics")) {
            for (const auto& m : j.at("metrics"))
                cfg.metrics.push_back(metric_from_string(m.get<std::string>()));
        }
        read_if(j, "baseline_family", cfg.baseline_family);
        read_if(j, "n_runs", cfg.n_runs);
        read_if(j, "seed", cfg.seed);
        read_if(j, "jobs", cfg.jobs);
        if (j.contains("elm")) {
            const auto& e = j.at("elm");
            require_known_keys(e, {"hidden", "ridge"}, "elm");
            read_if(e, "hidden", cfg.elm.hidden);
            read_if(e, "ridge", cfg.elm.ridge);
        }
        if (j.contains("idtr")) {
            const auto& e = j.at("idtr");
            require_known_keys(e, {"outer_steps", "inner_rounds", "max_depth"}, "idtr");
            read_if(e, "outer_steps", cfg.idtr.outer_steps);
            read_if(e, "inner_rounds", cfg.idtr.inner_rounds);
            read_if(e, "max_depth", cfg.idtr.max_depth);
        }
        if (j.contains("ftann")) {
            const auto& e = j.at("ftann");
            require_known_keys(e, {"epochs_source", "epochs_target", "lr"}, "ftann");
            read_if(e, "epochs_source", cfg.ftann.epochs_source);
            read_if(e, "epochs_target", cfg.ftann.epochs_target);
            read_if(e, "lr", cfg.ftann.lr);
        }
        if (j.contains("msann")) {
            const auto& e = j.at("msann");
            require_known_keys(e,
                               {"epoch_max", "lr", "coral_weight", "gamma", "mu",
                                "dropout_prob", "ramp_up_beta"},
                               "msann");
            read_if(e, "epoch_max", cfg.msann.epoch_max);
            read_if(e, "lr", cfg.msann.lr);
            read_if(e, "coral_weight", cfg.msann.coral_weight);
            read_if(e, "gamma", cfg.msann.gamma);
            read_if(e, "mu", cfg.msann.mu);
            read_if(e, "dropout_prob", cfg.msann.dropout_prob);
            read_if(e, "ramp_up_beta", cfg.msann.ramp_up_beta);
        }
        if (j.contains("out")) cfg.out = j.at("out").get<std::string>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config type error: ") + e.what());
    }

    if (cfg.n_in < 1 || cfg.n_out < 1)
        throw ConfigError("config needs positive 'n_in' and 'n_out'");
    if (cfg.target.path.empty()) throw ConfigError("config needs a 'target' dataset");
    if (cfg.n_runs < 1) throw ConfigError("'n_runs' must be >= 1");
    if (cfg.jobs < 1) throw ConfigError("'jobs' must be >= 1");
    return cfg;
}

CliConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw ConfigError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(file)),
                     std::istreambuf_iterator<char>());
    return parse_config_text(text);
}

LabeledDataset load_dataset(const DatasetRef& ref, int n_in, int n_out,
                            const std::optional<std::filesystem::path>& data_dir) {
    std::filesystem::path path = ref.path;
    if (path.is_relative() && data_dir) path = *data_dir / path;
    return load_csv(path, n_in, n_out, ref.domain_id);
}

TaskSpec build_task(const CliConfig& cfg,
                    const std::optional<std::filesystem::path>& data_dir) {
    if (cfg.method.empty()) throw ConfigError("config needs a 'method'");
    TaskSpec spec;
    spec.task_id = cfg.task_id;
    spec.method = cfg.method;
    spec.baseline_family = cfg.baseline_family;
    spec.mode = cfg.mode;
    spec.metrics = cfg.metrics;
    spec.n_runs = cfg.n_runs;
    spec.master_seed = cfg.seed;
    spec.elm = cfg.elm;
    spec.idtr = cfg.idtr;
    spec.ftann = cfg.ftann;
    spec.msann = cfg.msann;
    spec.jobs = cfg.jobs;
    for (const auto& ref : cfg.sources)
        spec.sources.push_back(load_dataset(ref, cfg.n_in, cfg.n_out, data_dir));
    spec.target = load_dataset(cfg.target, cfg.n_in, cfg.n_out, data_dir);
    spec.validate();
    return spec;
}

}  // namespace tlsel
