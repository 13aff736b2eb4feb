#include <charconv>
#include <json.hpp>

#include "tlsel/cli.hpp"

namespace tlsel {
namespace {

constexpr double kDensitySs316l = 7.98;  // g/cm^3
constexpr double kDensityDs2209 = 7.8;

std::filesystem::path require_file(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw DataError("dataset file not found: " + path.string() +
                        " (the external datasets are not shipped with this repository; "
                        "see README for the expected layout and where to obtain them)");
    return path;
}

// Raw melt-pool files carry process parameters; map them onto the common
// (MFR, TS, ED) feature space.
LabeledDataset load_melt_pool(const std::filesystem::path& path, ProcessKind kind,
                              std::string domain_id) {
    const int n_raw = kind == ProcessKind::DedLbPowder ? 3 : 4;
    LabeledDataset raw = load_csv(require_file(path), n_raw, 1, domain_id);
    LabeledDataset ds;
    ds.domain_id = std::move(domain_id);
    ds.feature_names = {"mfr", "ts", "ed"};
    ds.output_names = {"width"};
    ds.inputs.resize(raw.rows(), 3);
    ds.outputs = raw.outputs;
    for (Index i = 0; i < raw.rows(); ++i) {
        ProcessFeatureRow p;
        p.kind = kind;
        p.feed_rate = raw.inputs(i, 0);
        p.speed = raw.inputs(i, 1);
        p.laser_power = raw.inputs(i, 2);
        if (kind == ProcessKind::DedLbWire) {
            p.electrical_power = raw.inputs(i, 3);
            p.density = kDensityDs2209;
        } else {
            p.density = kDensitySs316l;
        }
        const CommonFeatures f = derive_common_features(p);
        ds.inputs(i, 0) = f.mfr;
        ds.inputs(i, 1) = f.ts;
        ds.inputs(i, 2) = f.ed;
    }
    ds.validate();
    return ds;
}

LabeledDataset load_density(const std::filesystem::path& dir, const std::string& stem) {
    return load_csv(require_file(dir / (stem + ".csv")), 4, 1, stem);
}

std::string metric_label(std::span<const Metric> metrics) {
    std::string label;
    for (Metric m : metrics) {
        if (!label.empty()) label += "+";
        label += to_string(m);
    }
    return label;
}

ReproduceRow search_row(const std::string& method, const LabeledDataset& source,
                        const LabeledDataset& target, std::span<const Metric> metrics,
                        const std::string& task_id, std::uint64_t seed, int jobs) {
    TaskSpec spec;
    spec.task_id = task_id;
    spec.method = method;
    spec.sources = {source};
    spec.target = target;
    spec.metrics.assign(metrics.begin(), metrics.end());
    spec.mode = TaskMode::Exhaustive;
    spec.master_seed = seed;
    spec.jobs = jobs;
    const EvalReport report = run_task(spec);
    const SearchTrace local = derive_local_from_exhaustive(*report.trace);

    ReproduceRow row;
    row.method = method;
    row.distances = metric_label(metrics);
    for (const auto& e : local.steps) {
        if (e.step.step == local.chosen_step) {
            row.local_median = e.sigma;
            break;
        }
    }
    row.local_step = local.chosen_step;
    row.local_size = local.chosen_subset.size();
    row.exhaustive_median = report.median_rmse;
    row.exhaustive_step = report.chosen_step;
    row.exhaustive_size = report.chosen_subset_size;
    row.all_source_median = *report.all_source_median;
    row.all_source_steps = report.total_frontiers;
    row.all_source_size = static_cast<std::size_t>(source.rows());
    row.param_count = report.model_param_count;
    return row;
}

ReproduceRow msann_row(std::span<const LabeledDataset> sources,
                       const LabeledDataset& target, const std::string& task_id,
                       std::uint64_t seed, int jobs) {
    TaskSpec spec;
    spec.task_id = task_id;
    spec.method = "msann";
    spec.sources.assign(sources.begin(), sources.end());
    spec.target = target;
    spec.mode = TaskMode::AllSource;
    spec.master_seed = seed;
    spec.jobs = jobs;
    const EvalReport report = run_task(spec);

    ReproduceRow row;
    row.method = "msann";
    row.all_source_median = report.median_rmse;
    row.all_source_size = report.chosen_subset_size;
    row.param_count = report.model_param_count;
    return row;
}

std::string fmt(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

const std::vector<std::vector<Metric>>& metric_combinations() {
    using enum Metric;
    static const std::vector<std::vector<Metric>> combos = {
        {Euclidean, Cosine},
        {Performance, Feature},
        {Euclidean, Performance},
        {Euclidean, Feature},
        {Cosine, Performance},
        {Cosine, Feature},
        {Euclidean, Cosine, Performance},
        {Euclidean, Cosine, Feature},
        {Euclidean, Performance, Feature},
        {Cosine, Performance, Feature},
        {Euclidean, Cosine, Performance, Feature},
    };
    return combos;
}

}  // namespace

ReproduceReport reproduce_task(int task, const std::filesystem::path& data_dir,
                               std::uint64_t seed, int jobs) {
    ReproduceReport report;
    report.task = task;
    const std::string task_id = "task" + std::to_string(task);

    if (task == 1) {
        const LabeledDataset source = load_melt_pool(
            data_dir / "melt_pool" / "ded_lb_p.csv", ProcessKind::DedLbPowder, "ded-lb-p");
        const LabeledDataset target = load_melt_pool(
            data_dir / "melt_pool" / "ded_lb_w.csv", ProcessKind::DedLbWire, "ded-lb-w");
        for (const std::string method : {"idtr", "ftann"}) {
            for (const auto& metrics : metric_combinations())
                report.rows.push_back(
                    search_row(method, source, target, metrics, task_id, seed, jobs));
        }
        return report;
    }

    if (task >= 2 && task <= 9) {
        static const char* source_stems[] = {"slm_250hl", "slm_125hl", "eos_m270",
                                             "concept_laser_m2"};
        const std::string target_stem = task <= 5 ? "slm" : "concept_laser_m3";
        const std::string source_stem = source_stems[(task - 2) % 4];
        const LabeledDataset source = load_density(data_dir / "density", source_stem);
        const LabeledDataset target = load_density(data_dir / "density", target_stem);
        const std::vector<Metric> metrics = {Metric::Euclidean, Metric::Performance};
        for (const std::string method : {"idtr", "ftann"})
            report.rows.push_back(
                search_row(method, source, target, metrics, task_id, seed, jobs));
        return report;
    }

    if (task == 10 || task == 11) {
        std::vector<LabeledDataset> sources;
        for (const char* stem : {"slm_125hl", "slm_250hl", "eos_m270", "concept_laser_m2"})
            sources.push_back(load_density(data_dir / "density", stem));
        const LabeledDataset target =
            load_density(data_dir / "density", task == 10 ? "slm" : "concept_laser_m3");
        report.rows.push_back(msann_row(sources, target, task_id, seed, jobs));
        return report;
    }

    throw ConfigError("unknown task id " + std::to_string(task) + " (valid: 1-11)");
}

std::string render_reproduce_csv(const ReproduceReport& report) {
    std::string out =
        "task,method,distances,local_median,local_step,local_size,"
        "exhaustive_median,exhaustive_step,exhaustive_size,"
        "all_source_median,all_source_steps,all_source_size,param_count\n";
    for (const auto& r : report.rows) {
        out += std::to_string(report.task) + "," + r.method + "," + r.distances + ",";
        out += (r.local_median ? fmt(*r.local_median) : "") + ",";
        out += std::to_string(r.local_step) + "," + std::to_string(r.local_size) + ",";
        out += (r.exhaustive_median ? fmt(*r.exhaustive_median) : "") + ",";
        out += std::to_string(r.exhaustive_step) + "," + std::to_string(r.exhaustive_size) + ",";
        out += fmt(r.all_source_median) + "," + std::to_string(r.all_source_steps) + "," +
               std::to_string(r.all_source_size) + ",";
        out += (r.param_count ? std::to_string(*r.param_count) : "") + "\n";
    }
    return out;
}

std::string render_reproduce_json(const ReproduceReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json j{{"method", r.method},
                         {"distances", r.distances},
                         {"local_step", r.local_step},
                         {"local_size", r.local_size},
                         {"exhaustive_step", r.exhaustive_step},
                         {"exhaustive_size", r.exhaustive_size},
                         {"all_source_median", r.all_source_median},
                         {"all_source_steps", r.all_source_steps},
                         {"all_source_size", r.all_source_size}};
        if (r.local_median) j["local_median"] = *r.local_median;
        if (r.exhaustive_median) j["exhaustive_median"] = *r.exhaustive_median;
        if (r.param_count) j["param_count"] = *r.param_count;
        rows.push_back(std::move(j));
    }
    nlohmann::json j{{"task", report.task}, {"rows", std::move(rows)}};
    return j.dump(2) + "\n";
}

}  // namespace tlsel
