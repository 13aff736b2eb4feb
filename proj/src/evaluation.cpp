#include "tlsel/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <thread>

namespace tlsel {
namespace {

double fold_rmse(const Matrix& predicted, const Matrix& actual) {
    return std::sqrt((predicted - actual).squaredNorm() /
                     static_cast<double>(actual.size()));
}

double quantile_of_sorted(const std::vector<double>& sorted, std::size_t lo,
                          std::size_t hi) {
    // median of sorted[lo, hi)
    const std::size_t n = hi - lo;
    const std::size_t mid = lo + n / 2;
    return n % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
}

}  // namespace

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& fn) {
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(jobs), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] {
            try {
                for (std::size_t i = w; i < count; i += workers) fn(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Trainer make_idtr_trainer(TwoStageBoostConfig cfg) {
    Trainer t;
    t.name = "idtr";
    t.deterministic = true;  // weighted fitting, no sampling anywhere
    t.fit = [cfg](std::span<const LabeledDataset> sources, const LabeledDataset& target,
                  std::uint64_t seed) -> Predictor {
        LabeledDataset source;
        if (sources.empty()) {
            source.domain_id = "none";
            source.inputs.resize(0, target.n_in());
            source.outputs.resize(0, target.n_out());
        } else {
            source = sources[0];
        }
        TreeEnsemble ensemble = fit_idtr(source, target, cfg, seed);
        return [ensemble = std::move(ensemble)](const Matrix& X) -> Matrix {
            return idtr_predict(ensemble, X);
        };
    };
    return t;
}

Trainer make_ftann_trainer(FineTuneConfig cfg) {
    Trainer t;
    t.name = "ftann";
    t.fit = [cfg](std::span<const LabeledDataset> sources, const LabeledDataset& target,
                  std::uint64_t seed) -> Predictor {
        if (sources.size() != 1) throw ShapeError("ftann trainer needs exactly one source");
        MlpParams params = fit_ftann(sources[0], target, cfg, seed);
        return [params = std::move(params)](const Matrix& X) -> Matrix {
            return mlp_forward(params, X, RunMode::Infer);
        };
    };
    return t;
}

Trainer make_msann_trainer(MsAnnConfig cfg) {
    Trainer t;
    t.name = "msann";
    t.fit = [cfg](std::span<const LabeledDataset> sources, const LabeledDataset& target,
                  std::uint64_t seed) -> Predictor {
        MsAnnModel model = fit_msann(sources, target, cfg, seed);
        return [model = std::move(model)](const Matrix& X) -> Matrix {
            return msann_predict(model, X);
        };
    };
    return t;
}

Trainer make_idtr_baseline_trainer(TwoStageBoostConfig cfg) {
    Trainer t;
    t.name = "idtr-baseline";
    t.deterministic = true;
    t.fit = [cfg](std::span<const LabeledDataset>, const LabeledDataset& target,
                  std::uint64_t) -> Predictor {
        TreeEnsemble ensemble = fit_adaboost_r2(target, cfg.inner_rounds, cfg.max_depth);
        return [ensemble = std::move(ensemble)](const Matrix& X) -> Matrix {
            return idtr_predict(ensemble, X);
        };
    };
    return t;
}

Trainer make_ftann_baseline_trainer(FineTuneConfig cfg) {
    Trainer t;
    t.name = "ftann-baseline";
    t.fit = [cfg](std::span<const LabeledDataset>, const LabeledDataset& target,
                  std::uint64_t seed) -> Predictor {
        MlpSpec spec;
        spec.n_in = static_cast<int>(target.n_in());
        spec.n_out = static_cast<int>(target.n_out());
        MlpParams params = mlp_init(spec, seed);
        Rng rng(derive_seed(seed, "baseline-dropout"));
        params = mlp_train(std::move(params), target, cfg.epochs_source + cfg.epochs_target,
                           AdamConfig{.lr = cfg.lr}, rng);
        return [params = std::move(params)](const Matrix& X) -> Matrix {
            return mlp_forward(params, X, RunMode::Infer);
        };
    };
    return t;
}

double loocv_score(const Trainer& trainer, std::span<const LabeledDataset> sources,
                   const LabeledDataset& target, std::uint64_t run_seed) {
    if (target.rows() < 2) throw ShapeError("loocv_score: target needs at least 2 rows");
    double sum = 0.0;
    for (Index j = 0; j < target.rows(); ++j) {
        const LabeledDataset train = remove_row(target, j);
        const Predictor predict =
            trainer.fit(sources, train, derive_seed(run_seed, "fold", j));
        const Matrix pred = predict(target.inputs.row(j));
        sum += fold_rmse(pred, target.outputs.row(j));
    }
    return sum / static_cast<double>(target.rows());
}

RunStats summarize_runs(std::vector<double> values) {
    if (values.empty()) throw ShapeError("summarize_runs: no values");
    RunStats stats;
    stats.values = std::move(values);
    std::vector<double> sorted = stats.values;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    stats.median = quantile_of_sorted(sorted, 0, n);
    if (n <= 1) {
        stats.q1 = stats.q3 = stats.median;
    } else {
        // Tukey hinges: halves exclude the middle element when n is odd
        stats.q1 = quantile_of_sorted(sorted, 0, n / 2);
        stats.q3 = quantile_of_sorted(sorted, n % 2 == 1 ? n / 2 + 1 : n / 2, n);
    }
    stats.min = sorted.front();
    stats.max = sorted.back();
    return stats;
}

RunStats multi_run_median(const Trainer& trainer, std::span<const LabeledDataset> sources,
                          const LabeledDataset& target, int n_runs, std::uint64_t step_seed,
                          int jobs) {
    if (n_runs < 1) throw ConfigError("multi_run_median: n_runs must be >= 1");
    std::vector<double> values(static_cast<std::size_t>(n_runs));
    if (trainer.deterministic) {
        const double score =
            loocv_score(trainer, sources, target, derive_seed(step_seed, "run", 0));
        std::fill(values.begin(), values.end(), score);
    } else {
        parallel_for(values.size(), jobs, [&](std::size_t r) {
            values[r] = loocv_score(trainer, sources, target,
                                    derive_seed(step_seed, "run", r));
        });
    }
    return summarize_runs(std::move(values));
}

double baseline_error(const LabeledDataset& target, const std::string& family, int n_runs,
                      std::uint64_t master_seed, const TwoStageBoostConfig& idtr_cfg,
                      const FineTuneConfig& ftann_cfg, int jobs) {
    Trainer trainer;
    if (family == "idtr") {
        trainer = make_idtr_baseline_trainer(idtr_cfg);
    } else if (family == "ftann") {
        trainer = make_ftann_baseline_trainer(ftann_cfg);
    } else {
        throw ConfigError("baseline_error: unknown family '" + family + "'");
    }
    return multi_run_median(trainer, {}, target, n_runs,
                            derive_seed(master_seed, "baseline"), jobs)
        .median;
}

std::string_view to_string(TaskMode m) {
    switch (m) {
        case TaskMode::Local: return "local";
        case TaskMode::Exhaustive: return "exhaustive";
        case TaskMode::AllSource: return "all-source";
    }
    return "unknown";
}

TaskMode task_mode_from_string(std::string_view name) {
    if (name == "local") return TaskMode::Local;
    if (name == "exhaustive") return TaskMode::Exhaustive;
    if (name == "all-source") return TaskMode::AllSource;
    throw ConfigError("unknown task mode: " + std::string(name));
}

void TaskSpec::validate() const {
    if (task_id.empty()) throw ConfigError("task id must not be empty");
    if (n_runs < 1) throw ConfigError("n_runs must be >= 1");
    if (jobs < 1) throw ConfigError("jobs must be >= 1");
    if (method != "idtr" && method != "ftann" && method != "msann" && method != "baseline")
        throw ConfigError("unknown method '" + method + "'");
    if (method == "baseline") {
        if (baseline_family != "idtr" && baseline_family != "ftann")
            throw ConfigError("baseline family must be idtr or ftann");
        return;
    }
    if (method == "msann") {
        if (mode != TaskMode::AllSource)
            throw ConfigError("msann evaluates all listed sources; use mode all-source");
        if (sources.empty()) throw ConfigError("msann needs at least one source");
    } else {
        if (sources.size() != 1)
            throw ConfigError(method + " needs exactly one source dataset");
    }
    if (mode != TaskMode::AllSource && metrics.empty())
        throw ConfigError("searching requires at least one distance metric");
    target.validate();
    for (const auto& s : sources) s.validate();
}

EvalReport run_task(const TaskSpec& spec) {
    spec.validate();

    std::vector<LabeledDataset> all = spec.sources;
    all.push_back(spec.target);
    const ScalingSpec scaler = fit_unit_scaler(all);

    EvalReport report;
    report.task_id = spec.task_id;
    report.method = spec.method;
    report.mode = spec.mode;
    report.master_seed = spec.master_seed;
    report.digest = config_digest(spec);

    for (int c = 0; c < scaler.n_in + scaler.n_out; ++c) {
        if (scaler.columns[static_cast<std::size_t>(c)].degenerate)
            report.warnings.push_back("degenerate column " + std::to_string(c) +
                                      ": constant over the fitted datasets");
    }

    std::vector<LabeledDataset> scaled_sources;
    for (const auto& s : spec.sources) scaled_sources.push_back(apply_scaler(scaler, s));
    const LabeledDataset scaled_target = apply_scaler(scaler, spec.target);

    // family baseline: trees for idtr, fresh MLP for the ANN families
    const std::string baseline_family =
        spec.method == "idtr" || (spec.method == "baseline" && spec.baseline_family == "idtr")
            ? "idtr"
            : "ftann";
    Trainer baseline = baseline_family == "idtr"
                           ? make_idtr_baseline_trainer(spec.idtr)
                           : make_ftann_baseline_trainer(spec.ftann);
    report.sigma_baseline =
        multi_run_median(baseline, {}, scaled_target, spec.n_runs,
                         derive_seed(spec.master_seed, spec.task_id, "step", 0), spec.jobs)
            .median;

    if (spec.method == "baseline") {
        report.median_rmse = report.sigma_baseline;
        return report;
    }

    Trainer trainer;
    if (spec.method == "idtr") {
        trainer = make_idtr_trainer(spec.idtr);
    } else if (spec.method == "ftann") {
        trainer = make_ftann_trainer(spec.ftann);
        report.model_param_count = mlp_param_count(static_cast<int>(spec.target.n_in()),
                                                   static_cast<int>(spec.target.n_out()));
    } else {
        trainer = make_msann_trainer(spec.msann);
        report.model_param_count =
            msann_param_count(static_cast<int>(spec.target.n_in()),
                              static_cast<int>(spec.target.n_out()),
                              static_cast<int>(spec.sources.size()));
    }

    if (spec.mode == TaskMode::AllSource) {
        const RunStats stats = multi_run_median(
            trainer, scaled_sources, scaled_target, spec.n_runs,
            derive_seed(spec.master_seed, spec.task_id, "all-source"), spec.jobs);
        report.median_rmse = stats.median;
        report.chosen_stats = stats;
        std::size_t total_rows = 0;
        for (const auto& s : scaled_sources) total_rows += static_cast<std::size_t>(s.rows());
        report.chosen_subset_size = total_rows;
        report.all_source_median = stats.median;
        return report;
    }

    const DistanceTable table = compute_distance_table(
        scaled_sources[0], scaled_target, spec.metrics, spec.elm,
        derive_seed(spec.master_seed, spec.task_id, "elm"));
    const std::vector<FrontierStep> steps = peel_frontiers(table);
    report.total_frontiers = static_cast<int>(steps.size());

    const StepEvaluator evaluate = [&](const FrontierStep& step) -> StepEval {
        const LabeledDataset subset = scaled_sources[0].select_rows(step.cumulative);
        const RunStats stats = multi_run_median(
            trainer, {&subset, 1}, scaled_target, spec.n_runs,
            derive_seed(spec.master_seed, spec.task_id, "step", step.step), spec.jobs);
        StepEval eval;
        eval.step = step;
        eval.sigma = stats.median;
        eval.run_errors = stats.values;
        return eval;
    };

    SearchTrace trace = spec.mode == TaskMode::Local
                            ? local_search(steps, evaluate, report.sigma_baseline)
                            : exhaustive_search(steps, evaluate, report.sigma_baseline);

    // all-source reference = the final cumulative step, evaluated with the
    // same per-step seed it would get in an exhaustive pass
    if (!trace.steps.empty() && trace.steps.back().step.step == steps.back().step) {
        report.all_source_median = trace.steps.back().sigma;
    } else {
        report.all_source_median = evaluate(steps.back()).sigma;
    }

    for (const auto& eval : trace.steps) {
        if (eval.step.step == trace.chosen_step) {
            report.chosen_stats = summarize_runs(eval.run_errors);
            break;
        }
    }
    report.chosen_step = trace.chosen_step;
    report.chosen_subset = trace.chosen_subset;
    report.chosen_subset_size = trace.chosen_subset.size();
    report.median_rmse = report.chosen_stats.median;
    report.trace = std::move(trace);
    return report;
}

}  // namespace tlsel
