#include "tlsel/pareto.hpp"

#include <algorithm>

namespace tlsel {
namespace {

bool dominates(const Matrix& pts, Index a, Index b) {
    bool strict = false;
    for (Index c = 0; c < pts.cols(); ++c) {
        if (pts(a, c) > pts(b, c)) return false;
        if (pts(a, c) < pts(b, c)) strict = true;
    }
    return strict;
}

SearchTrace finish_best_seen(SearchTrace trace, Termination reason) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < trace.steps.size(); ++i)
        if (trace.steps[i].sigma < trace.steps[best].sigma) best = i;
    trace.chosen_step = trace.steps[best].step.step;
    trace.chosen_subset = trace.steps[best].step.cumulative;
    trace.termination = reason;
    return trace;
}

}  // namespace

std::vector<std::size_t> pareto_frontier(const Matrix& points) {
    if (points.rows() < 1 || points.cols() < 1)
        throw ShapeError("pareto_frontier: empty point set");
    std::vector<std::size_t> front;
    for (Index i = 0; i < points.rows(); ++i) {
        bool dominated = false;
        for (Index j = 0; j < points.rows() && !dominated; ++j)
            dominated = j != i && dominates(points, j, i);
        if (!dominated) front.push_back(static_cast<std::size_t>(i));
    }
    return front;
}

std::vector<FrontierStep> peel_frontiers(const Matrix& points) {
    if (points.rows() < 1) throw ShapeError("peel_frontiers: empty point set");
    std::vector<std::size_t> remaining(static_cast<std::size_t>(points.rows()));
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = i;

    std::vector<FrontierStep> steps;
    std::vector<std::size_t> cumulative;
    while (!remaining.empty()) {
        Matrix sub(static_cast<Index>(remaining.size()), points.cols());
        for (std::size_t r = 0; r < remaining.size(); ++r)
            sub.row(static_cast<Index>(r)) = points.row(static_cast<Index>(remaining[r]));
        const auto local = pareto_frontier(sub);

        FrontierStep step;
        step.step = static_cast<int>(steps.size()) + 1;
        for (std::size_t r : local) step.newly_selected.push_back(remaining[r]);
        std::sort(step.newly_selected.begin(), step.newly_selected.end());
        cumulative.insert(cumulative.end(), step.newly_selected.begin(),
                          step.newly_selected.end());
        std::sort(cumulative.begin(), cumulative.end());
        step.cumulative = cumulative;
        steps.push_back(step);

        std::vector<std::size_t> next;
        std::set_difference(remaining.begin(), remaining.end(), step.newly_selected.begin(),
                            step.newly_selected.end(), std::back_inserter(next));
        remaining = std::move(next);
    }
    return steps;
}

std::vector<FrontierStep> peel_frontiers(const DistanceTable& table) {
    return peel_frontiers(table.normalized);
}

std::string_view to_string(SearchMode m) {
    return m == SearchMode::Local ? "local" : "exhaustive";
}

std::string_view to_string(Termination t) {
    switch (t) {
        case Termination::Triggered: return "triggered";
        case Termination::ExhaustedWithoutTrigger: return "exhausted-without-trigger";
        case Termination::Completed: return "completed";
    }
    return "unknown";
}

SearchMode search_mode_from_string(std::string_view name) {
    if (name == "local") return SearchMode::Local;
    if (name == "exhaustive") return SearchMode::Exhaustive;
    throw ConfigError("unknown search mode: " + std::string(name));
}

Termination termination_from_string(std::string_view name) {
    if (name == "triggered") return Termination::Triggered;
    if (name == "exhausted-without-trigger") return Termination::ExhaustedWithoutTrigger;
    if (name == "completed") return Termination::Completed;
    throw ConfigError("unknown termination: " + std::string(name));
}

SearchTrace local_search(std::span<const FrontierStep> steps, const StepEvaluator& evaluate,
                         double sigma_baseline) {
    if (steps.empty()) throw ShapeError("local_search: no frontier steps");
    SearchTrace trace;
    trace.mode = SearchMode::Local;
    trace.sigma_baseline = sigma_baseline;

    for (const auto& step : steps) {
        trace.steps.push_back(evaluate(step));
        const std::size_t k = trace.steps.size();
        if (k >= 2) {
            const double sigma_k = trace.steps[k - 1].sigma;
            const double sigma_prev = trace.steps[k - 2].sigma;
            if (sigma_k > sigma_prev && sigma_prev < sigma_baseline) {
                trace.chosen_step = trace.steps[k - 2].step.step;
                trace.chosen_subset = trace.steps[k - 2].step.cumulative;
                trace.termination = Termination::Triggered;
                return trace;
            }
        }
    }
    return finish_best_seen(std::move(trace), Termination::ExhaustedWithoutTrigger);
}

SearchTrace exhaustive_search(std::span<const FrontierStep> steps,
                              const StepEvaluator& evaluate, double sigma_baseline) {
    if (steps.empty()) throw ShapeError("exhaustive_search: no frontier steps");
    SearchTrace trace;
    trace.mode = SearchMode::Exhaustive;
    trace.sigma_baseline = sigma_baseline;
    for (const auto& step : steps) trace.steps.push_back(evaluate(step));
    return finish_best_seen(std::move(trace), Termination::Completed);
}

SearchTrace derive_local_from_exhaustive(const SearchTrace& exhaustive) {
    std::vector<FrontierStep> steps;
    steps.reserve(exhaustive.steps.size());
    for (const auto& s : exhaustive.steps) steps.push_back(s.step);
    std::size_t next = 0;
    auto replay = [&](const FrontierStep&) { return exhaustive.steps[next++]; };
    return local_search(steps, replay, exhaustive.sigma_baseline);
}

}  // namespace tlsel
