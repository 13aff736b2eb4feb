#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>

#include "tlsel/cli.hpp"

namespace {

using namespace tlsel;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

struct GlobalFlags {
    std::optional<std::uint64_t> seed;
    std::optional<int> jobs;
    std::optional<std::string> out;
    bool force = false;
};

std::optional<std::filesystem::path> data_dir_from_env() {
    if (const char* dir = std::getenv("TLSEL_DATA_DIR")) return std::filesystem::path(dir);
    return std::nullopt;
}

void write_output(const std::filesystem::path& path, const std::string& content,
                  bool force) {
    if (std::filesystem::exists(path) && !force)
        throw ConfigError("refusing to overwrite " + path.string() + " (use --force)");
    std::ofstream file(path, std::ios::binary | std::ios::trunc);
    if (!file) throw DataError("cannot write " + path.string());
    file << content;
}

CliConfig load_config(const std::string& path, const GlobalFlags& flags) {
    CliConfig cfg = parse_config_file(path);
    if (flags.seed) cfg.seed = *flags.seed;
    if (flags.jobs) cfg.jobs = *flags.jobs;
    if (flags.out) cfg.out = *flags.out;
    return cfg;
}

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::cout << "warning: " << w << "\n";
}

void print_scaler_warnings(const ScalingSpec& scaler) {
    for (std::size_t c = 0; c < scaler.columns.size(); ++c) {
        if (scaler.columns[c].degenerate)
            std::cout << "warning: degenerate column " << c
                      << ": constant over the fitted datasets\n";
    }
}

int cmd_distances(const std::string& config_path, const GlobalFlags& flags) {
    CliConfig cfg = load_config(config_path, flags);
    if (cfg.sources.size() != 1)
        throw ConfigError("distances needs exactly one source dataset");
    if (cfg.metrics.empty()) throw ConfigError("distances needs a non-empty metric list");
    const auto data_dir = data_dir_from_env();
    const LabeledDataset source = load_dataset(cfg.sources[0], cfg.n_in, cfg.n_out, data_dir);
    const LabeledDataset target = load_dataset(cfg.target, cfg.n_in, cfg.n_out, data_dir);

    std::vector<LabeledDataset> all = {source, target};
    const ScalingSpec scaler = fit_unit_scaler(all);
    print_scaler_warnings(scaler);

    const DistanceTable table = compute_distance_table(
        apply_scaler(scaler, source), apply_scaler(scaler, target), cfg.metrics, cfg.elm,
        derive_seed(cfg.seed, cfg.task_id, "elm"));
    const std::string out_path = cfg.out.value_or("distances.csv");
    write_output(out_path, distance_table_csv(table), flags.force);
    std::cout << "wrote " << out_path << " (" << table.raw.rows() << " source rows)\n";
    return 0;
}

void print_trace(const EvalReport& report) {
    if (!report.trace) return;
    std::cout << "step  new  cumulative  sigma\n";
    for (const auto& e : report.trace->steps) {
        std::cout << e.step.step << "  " << e.step.newly_selected.size() << "  "
                  << e.step.cumulative.size() << "  " << e.sigma << "\n";
    }
    std::cout << "baseline sigma: " << report.sigma_baseline << "\n";
    std::cout << "chosen step " << report.chosen_step << " with "
              << report.chosen_subset_size << " rows, median RMSE " << report.median_rmse
              << " (" << to_string(report.trace->termination) << ")\n";
}

void write_report(const EvalReport& report, const CliConfig& cfg, const GlobalFlags& flags) {
    const std::string out_path = cfg.out.value_or("report.csv");
    const ReportFormat format = std::filesystem::path(out_path).extension() == ".json"
                                    ? ReportFormat::Json
                                    : ReportFormat::Csv;
    write_output(out_path, render_report(report, format), flags.force);
    std::cout << "wrote " << out_path << "\n";
}

int cmd_select(const std::string& config_path, const std::string& mode,
               const GlobalFlags& flags) {
    CliConfig cfg = load_config(config_path, flags);
    if (!mode.empty()) cfg.mode = task_mode_from_string(mode);
    if (cfg.mode == TaskMode::AllSource)
        throw ConfigError("select needs --mode local or exhaustive");
    const TaskSpec spec = build_task(cfg, data_dir_from_env());
    const EvalReport report = run_task(spec);
    print_warnings(report.warnings);
    print_trace(report);
    write_report(report, cfg, flags);
    return 0;
}

std::vector<std::size_t> read_subset_file(const std::filesystem::path& path) {
    std::ifstream file(path);
    if (!file) throw DataError("cannot open subset file: " + path.string());
    std::vector<std::size_t> indices;
    long long value = 0;
    while (file >> value) {
        if (value < 0) throw DataError("negative index in subset file " + path.string());
        indices.push_back(static_cast<std::size_t>(value));
    }
    if (!file.eof()) throw DataError("non-numeric entry in subset file " + path.string());
    if (indices.empty()) throw DataError("empty subset file " + path.string());
    return indices;
}

int cmd_evaluate(const std::string& config_path, const std::string& subset,
                 const GlobalFlags& flags) {
    CliConfig cfg = load_config(config_path, flags);
    cfg.mode = TaskMode::AllSource;
    TaskSpec spec = build_task(cfg, data_dir_from_env());
    if (subset != "all") {
        if (spec.sources.size() != 1)
            throw ConfigError("--subset file applies to single-source tasks");
        const auto indices = read_subset_file(subset);
        for (std::size_t i : indices) {
            if (i >= static_cast<std::size_t>(spec.sources[0].rows()))
                throw DataError("subset index " + std::to_string(i) +
                                " out of range for source with " +
                                std::to_string(spec.sources[0].rows()) + " rows");
        }
        spec.sources[0] = spec.sources[0].select_rows(indices);
    }
    const EvalReport report = run_task(spec);
    print_warnings(report.warnings);
    std::cout << "median RMSE " << report.median_rmse << " over "
              << report.chosen_subset_size << " source rows (baseline "
              << report.sigma_baseline << ")\n";
    if (report.model_param_count)
        std::cout << "model parameters: " << *report.model_param_count << "\n";
    write_report(report, cfg, flags);
    return 0;
}

int cmd_reproduce(int task, const std::string& data_dir_arg, const GlobalFlags& flags) {
    std::filesystem::path data_dir;
    if (!data_dir_arg.empty()) {
        data_dir = data_dir_arg;
    } else if (auto env = data_dir_from_env()) {
        data_dir = *env;
    } else {
        throw ConfigError("reproduce needs --data <dir> or TLSEL_DATA_DIR");
    }
    if (!std::filesystem::exists(data_dir))
        throw DataError("data directory not found: " + data_dir.string());

    const ReproduceReport report =
        reproduce_task(task, data_dir, flags.seed.value_or(0), flags.jobs.value_or(1));
    const std::string base = flags.out.value_or("task" + std::to_string(task) + "_report");
    const std::filesystem::path csv_path =
        std::filesystem::path(base).extension() == ".csv" ? base : base + ".csv";
    std::filesystem::path json_path = csv_path;
    json_path.replace_extension(".json");
    write_output(csv_path, render_reproduce_csv(report), flags.force);
    write_output(json_path, render_reproduce_json(report), flags.force);
    std::cout << render_reproduce_csv(report);
    std::cout << "wrote " << csv_path.string() << " and " << json_path.string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pareto-frontier source data selection for transfer-learning regression"};
    app.require_subcommand(1);
    app.fallthrough();

    GlobalFlags flags;
    app.add_option("--seed", flags.seed, "Master seed override");
    app.add_option("--jobs", flags.jobs, "Worker count for the evaluation runs");
    app.add_option("--out", flags.out, "Output file path");
    app.add_flag("--force", flags.force, "Overwrite existing output files");

    std::string config_path;
    std::string mode;
    std::string subset = "all";
    int task = 0;
    std::string data_dir;

    auto* distances = app.add_subcommand("distances", "Write the source-to-target distance table");
    distances->add_option("--config", config_path, "JSON task configuration")->required();

    auto* select = app.add_subcommand("select", "Run the frontier-peeling search");
    select->add_option("--config", config_path, "JSON task configuration")->required();
    select->add_option("--mode", mode, "local or exhaustive");

    auto* evaluate = app.add_subcommand("evaluate", "Evaluate a fixed source subset");
    evaluate->add_option("--config", config_path, "JSON task configuration")->required();
    evaluate->add_option("--subset", subset, "'all' or a file of source row indices");

    auto* reproduce = app.add_subcommand("reproduce", "Run a full benchmark task");
    reproduce->add_option("--task", task, "Task id (1-11)")->required();
    reproduce->add_option("--data", data_dir, "Directory with the external datasets");

    CLI11_PARSE(app, argc, argv);

    try {
        if (distances->parsed()) return cmd_distances(config_path, flags);
        if (select->parsed()) return cmd_select(config_path, mode, flags);
        if (evaluate->parsed()) return cmd_evaluate(config_path, subset, flags);
        if (reproduce->parsed()) return cmd_reproduce(task, data_dir, flags);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
