#pragma once

#include <filesystem>
#include <optional>

#include "tlsel/evaluation.hpp"

namespace tlsel {

struct DatasetRef {
    std::filesystem::path path;
    std::string domain_id;  // defaults to the file stem
};

// Structured experiment configuration; unknown keys are rejected at parse
// time so typos fail loudly instead of silently using a default.
struct CliConfig {
    std::string task_id = "task";
    std::string method;  // required by select/evaluate
    TaskMode mode = TaskMode::Exhaustive;
    std::vector<DatasetRef> sources;
    DatasetRef target;
    int n_in = 0;
    int n_out = 0;
    std::vector<Metric> metrics;
    std::string baseline_family = "idtr";
    int n_runs = 50;
    std::uint64_t seed = 0;
    int jobs = 1;
    ModelDistanceConfig elm;
    TwoStageBoostConfig idtr;
    FineTuneConfig ftann;
    MsAnnConfig msann;
    std::optional<std::string> out;
};

CliConfig parse_config_text(const std::string& text);
CliConfig parse_config_file(const std::filesystem::path& path);

// Loads the referenced datasets; relative paths resolve against data_dir
// when one is given (the TLSEL_DATA_DIR override).
TaskSpec build_task(const CliConfig& cfg,
                    const std::optional<std::filesystem::path>& data_dir);

LabeledDataset load_dataset(const DatasetRef& ref, int n_in, int n_out,
                            const std::optional<std::filesystem::path>& data_dir);

// --- reproduce: the paper-protocol driver over the external datasets -------

struct ReproduceRow {
    std::string method;
    std::string distances;  // "+"-joined metric names; empty for msann
    std::optional<double> local_median;
    int local_step = 0;
    std::size_t local_size = 0;
    std::optional<double> exhaustive_median;
    int exhaustive_step = 0;
    std::size_t exhaustive_size = 0;
    double all_source_median = 0.0;
    int all_source_steps = 0;  // total frontier count
    std::size_t all_source_size = 0;
    std::optional<long> param_count;
};

struct ReproduceReport {
    int task = 0;
    std::vector<ReproduceRow> rows;
};

// Runs the full protocol for one task id against the documented data layout
// (see README). Missing files raise DataError with an acquisition hint.
ReproduceReport reproduce_task(int task, const std::filesystem::path& data_dir,
                               std::uint64_t seed, int jobs);

std::string render_reproduce_csv(const ReproduceReport& report);
std::string render_reproduce_json(const ReproduceReport& report);

}  // namespace tlsel
