#include <charconv>
#include <cstdio>
#include <json.hpp>

#include "tlsel/evaluation.hpp"
#include "tlsel/rng.hpp"

namespace tlsel {
namespace {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

json stats_to_json(const RunStats& s) {
    return json{{"values", s.values}, {"median", s.median}, {"q1", s.q1},
                {"q3", s.q3},         {"min", s.min},       {"max", s.max}};
}

RunStats stats_from_json(const json& j) {
    RunStats s;
    s.values = j.at("values").get<std::vector<double>>();
    s.median = j.at("median").get<double>();
    s.q1 = j.at("q1").get<double>();
    s.q3 = j.at("q3").get<double>();
    s.min = j.at("min").get<double>();
    s.max = j.at("max").get<double>();
    return s;
}

json trace_to_json(const SearchTrace& t) {
    json steps = json::array();
    for (const auto& e : t.steps) {
        steps.push_back(json{{"step", e.step.step},
                             {"new_indices", e.step.newly_selected},
                             {"cumulative_indices", e.step.cumulative},
                             {"sigma", e.sigma},
                             {"run_errors", e.run_errors}});
    }
    return json{{"mode", to_string(t.mode)},
                {"sigma_baseline", t.sigma_baseline},
                {"termination", to_string(t.termination)},
                {"chosen_step", t.chosen_step},
                {"chosen_subset", t.chosen_subset},
                {"steps", std::move(steps)}};
}

SearchTrace trace_from_json(const json& j) {
    SearchTrace t;
    t.mode = search_mode_from_string(j.at("mode").get<std::string>());
    t.sigma_baseline = j.at("sigma_baseline").get<double>();
    t.termination = termination_from_string(j.at("termination").get<std::string>());
    t.chosen_step = j.at("chosen_step").get<int>();
    t.chosen_subset = j.at("chosen_subset").get<std::vector<std::size_t>>();
    for (const auto& js : j.at("steps")) {
        StepEval e;
        e.step.step = js.at("step").get<int>();
        e.step.newly_selected = js.at("new_indices").get<std::vector<std::size_t>>();
        e.step.cumulative = js.at("cumulative_indices").get<std::vector<std::size_t>>();
        e.sigma = js.at("sigma").get<double>();
        e.run_errors = js.at("run_errors").get<std::vector<double>>();
        t.steps.push_back(std::move(e));
    }
    return t;
}

}  // namespace

std::string config_digest(const TaskSpec& spec) {
    json j;
    j["task_id"] = spec.task_id;
    j["method"] = spec.method;
    j["baseline_family"] = spec.baseline_family;
    j["mode"] = std::string(to_string(spec.mode));
    json metrics = json::array();
    for (Metric m : spec.metrics) metrics.push_back(std::string(to_string(m)));
    j["metrics"] = std::move(metrics);
    j["n_runs"] = spec.n_runs;
    j["master_seed"] = spec.master_seed;
    j["elm"] = {{"hidden", spec.elm.hidden}, {"ridge", spec.elm.ridge}};
    j["idtr"] = {{"outer_steps", spec.idtr.outer_steps},
                 {"inner_rounds", spec.idtr.inner_rounds},
                 {"max_depth", spec.idtr.max_depth}};
    j["ftann"] = {{"epochs_source", spec.ftann.epochs_source},
                  {"epochs_target", spec.ftann.epochs_target},
                  {"lr", spec.ftann.lr}};
    j["msann"] = {{"epoch_max", spec.msann.epoch_max},
                  {"lr", spec.msann.lr},
                  {"coral_weight", spec.msann.coral_weight},
                  {"gamma", spec.msann.gamma},
                  {"mu", spec.msann.mu},
                  {"dropout_prob", spec.msann.dropout_prob},
                  {"ramp_up_beta", spec.msann.ramp_up_beta}};
    json datasets = json::array();
    for (const auto& s : spec.sources)
        datasets.push_back(json{{"domain", s.domain_id}, {"rows", s.rows()},
                                {"n_in", s.n_in()}, {"n_out", s.n_out()}});
    datasets.push_back(json{{"domain", spec.target.domain_id},
                            {"rows", spec.target.rows()},
                            {"n_in", spec.target.n_in()},
                            {"n_out", spec.target.n_out()}});
    j["datasets"] = std::move(datasets);

    const std::uint64_t h = detail::seed_part(j.dump());
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

std::string render_report(const EvalReport& report, ReportFormat format) {
    if (format == ReportFormat::Csv) {
        std::string out = "task,method,mode,median_rmse,step,subset_size,baseline_rmse,seed\n";
        auto row = [&](const std::string& mode, double rmse, int step, std::size_t size) {
            out += report.task_id + "," + report.method + "," + mode + "," +
                   format_double(rmse) + "," + std::to_string(step) + "," +
                   std::to_string(size) + "," + format_double(report.sigma_baseline) + "," +
                   std::to_string(report.master_seed) + "\n";
        };
        row(std::string(to_string(report.mode)), report.median_rmse, report.chosen_step,
            report.chosen_subset_size);
        if (report.trace) {
            for (const auto& e : report.trace->steps)
                row("step", e.sigma, e.step.step, e.step.cumulative.size());
        }
        return out;
    }

    json j;
    j["task"] = report.task_id;
    j["method"] = report.method;
    j["mode"] = std::string(to_string(report.mode));
    j["seed"] = report.master_seed;
    j["config_digest"] = report.digest;
    j["baseline_rmse"] = report.sigma_baseline;
    j["median_rmse"] = report.median_rmse;
    j["chosen_step"] = report.chosen_step;
    j["chosen_subset"] = report.chosen_subset;
    j["subset_size"] = report.chosen_subset_size;
    j["chosen_stats"] = stats_to_json(report.chosen_stats);
    j["total_frontiers"] = report.total_frontiers;
    j["warnings"] = report.warnings;
    if (report.all_source_median) j["all_source_median_rmse"] = *report.all_source_median;
    if (report.model_param_count) j["model_param_count"] = *report.model_param_count;
    if (report.trace) j["trace"] = trace_to_json(*report.trace);
    return j.dump(2) + "\n";
}

EvalReport report_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw DataError(std::string("report parse error: ") + e.what());
    }
    EvalReport r;
    r.task_id = j.at("task").get<std::string>();
    r.method = j.at("method").get<std::string>();
    r.mode = task_mode_from_string(j.at("mode").get<std::string>());
    r.master_seed = j.at("seed").get<std::uint64_t>();
    r.digest = j.at("config_digest").get<std::string>();
    r.sigma_baseline = j.at("baseline_rmse").get<double>();
    r.median_rmse = j.at("median_rmse").get<double>();
    r.chosen_step = j.at("chosen_step").get<int>();
    r.chosen_subset = j.at("chosen_subset").get<std::vector<std::size_t>>();
    r.chosen_subset_size = j.at("subset_size").get<std::size_t>();
    r.chosen_stats = stats_from_json(j.at("chosen_stats"));
    r.total_frontiers = j.at("total_frontiers").get<int>();
    r.warnings = j.at("warnings").get<std::vector<std::string>>();
    if (j.contains("all_source_median_rmse"))
        r.all_source_median = j.at("all_source_median_rmse").get<double>();
    if (j.contains("model_param_count"))
        r.model_param_count = j.at("model_param_count").get<long>();
    if (j.contains("trace")) r.trace = trace_from_json(j.at("trace"));
    return r;
}

}  // namespace tlsel
