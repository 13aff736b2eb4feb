#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "tlsel/dataset.hpp"
#include "tlsel/distances.hpp"
#include "tlsel/pareto.hpp"
#include "tlsel/transfer.hpp"

namespace tlsel {

using Predictor = std::function<Matrix(const Matrix&)>;

// A model family bound to its hyperparameters. fit() trains on the given
// source datasets plus target training rows and returns a predictor.
struct Trainer {
    std::string name;
    // True when fit() ignores its seed; the multi-run protocol then trains
    // once and replicates the score, which changes nothing observable.
    bool deterministic = false;
    std::function<Predictor(std::span<const LabeledDataset> sources,
                            const LabeledDataset& target_train, std::uint64_t seed)>
        fit;
};

Trainer make_idtr_trainer(TwoStageBoostConfig cfg);
Trainer make_ftann_trainer(FineTuneConfig cfg);
Trainer make_msann_trainer(MsAnnConfig cfg);
// No-transfer baselines: boosted trees on target only, and a freshly
// initialized MLP trained for epochs_source + epochs_target epochs.
Trainer make_idtr_baseline_trainer(TwoStageBoostConfig cfg);
Trainer make_ftann_baseline_trainer(FineTuneConfig cfg);

// Leave-one-out over the target rows: train on sources + target-minus-j,
// score row j by RMSE (outputs pooled), return the mean over folds.
double loocv_score(const Trainer& trainer, std::span<const LabeledDataset> sources,
                   const LabeledDataset& target, std::uint64_t run_seed);

struct RunStats {
    std::vector<double> values;  // per-run scores in run order
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double min = 0.0;
    double max = 0.0;

    bool operator==(const RunStats&) const = default;
};

RunStats summarize_runs(std::vector<double> values);

// n_runs independent repetitions; run r draws its stream from
// (step_seed, r) so results do not depend on execution order or on jobs.
RunStats multi_run_median(const Trainer& trainer, std::span<const LabeledDataset> sources,
                          const LabeledDataset& target, int n_runs,
                          std::uint64_t step_seed, int jobs = 1);

// Median no-transfer error for the family ("idtr" or "ftann").
double baseline_error(const LabeledDataset& target, const std::string& family, int n_runs,
                      std::uint64_t master_seed, const TwoStageBoostConfig& idtr_cfg = {},
                      const FineTuneConfig& ftann_cfg = {}, int jobs = 1);

enum class TaskMode { Local, Exhaustive, AllSource };

std::string_view to_string(TaskMode m);
TaskMode task_mode_from_string(std::string_view name);

struct TaskSpec {
    std::string task_id;
    std::vector<LabeledDataset> sources;
    LabeledDataset target;
    std::string method;                    // idtr | ftann | msann | baseline
    std::string baseline_family = "idtr";  // used when method == "baseline"
    std::vector<Metric> metrics;
    TaskMode mode = TaskMode::Exhaustive;
    int n_runs = 50;
    std::uint64_t master_seed = 0;
    ModelDistanceConfig elm;
    TwoStageBoostConfig idtr;
    FineTuneConfig ftann;
    MsAnnConfig msann;
    int jobs = 1;

    void validate() const;
};

// Stable hash of the canonicalized configuration (datasets enter by identity:
// domain id and shape), embedded in reports for provenance.
std::string config_digest(const TaskSpec& spec);

struct EvalReport {
    std::string task_id;
    std::string method;
    TaskMode mode = TaskMode::Exhaustive;
    std::uint64_t master_seed = 0;
    std::string digest;
    double sigma_baseline = 0.0;
    std::optional<SearchTrace> trace;
    int chosen_step = 0;  // 0 when no search ran
    std::vector<std::size_t> chosen_subset;
    std::size_t chosen_subset_size = 0;
    double median_rmse = 0.0;
    RunStats chosen_stats;
    std::optional<double> all_source_median;
    int total_frontiers = 0;
    std::optional<long> model_param_count;
    std::vector<std::string> warnings;

    bool operator==(const EvalReport&) const = default;
};

// Fig.-3-style driver: scale jointly, compute the baseline, then either
// evaluate the full source set (AllSource) or peel frontiers and search.
EvalReport run_task(const TaskSpec& spec);

enum class ReportFormat { Csv, Json };

std::string render_report(const EvalReport& report, ReportFormat format);
EvalReport report_from_json(const std::string& text);

// Runs a task's worker in parallel chunks; exposed for the evaluation tests.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace tlsel
