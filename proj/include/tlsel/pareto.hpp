#pragma once

#include <functional>
#include <span>
#include <string_view>
#include <vector>

#include "tlsel/distances.hpp"

namespace tlsel {

// Indices of the non-dominated points under componentwise minimization.
// a dominates b iff a <= b in every coordinate and a < b in at least one;
// duplicate points never dominate each other and are co-selected.
std::vector<std::size_t> pareto_frontier(const Matrix& points);

struct FrontierStep {
    int step = 0;                              // k >= 1
    std::vector<std::size_t> newly_selected;   // this frontier, ascending
    std::vector<std::size_t> cumulative;       // union of frontiers 1..k, ascending

    bool operator==(const FrontierStep&) const = default;
};

// Repeatedly extracts the frontier of the remaining rows until none remain.
// The newly_selected sets partition the full index set.
std::vector<FrontierStep> peel_frontiers(const Matrix& points);
std::vector<FrontierStep> peel_frontiers(const DistanceTable& table);

struct StepEval {
    FrontierStep step;
    double sigma = 0.0;              // statistic of the per-run errors (median)
    std::vector<double> run_errors;  // one value per run

    bool operator==(const StepEval&) const = default;
};

enum class SearchMode { Local, Exhaustive };
enum class Termination { Triggered, ExhaustedWithoutTrigger, Completed };

std::string_view to_string(SearchMode m);
std::string_view to_string(Termination t);
SearchMode search_mode_from_string(std::string_view name);
Termination termination_from_string(std::string_view name);

struct SearchTrace {
    SearchMode mode = SearchMode::Exhaustive;
    double sigma_baseline = 0.0;
    std::vector<StepEval> steps;  // evaluated steps, in evaluation order
    int chosen_step = 0;
    std::vector<std::size_t> chosen_subset;
    Termination termination = Termination::Completed;

    bool operator==(const SearchTrace&) const = default;
};

using StepEvaluator = std::function<StepEval(const FrontierStep&)>;

// Stops at step k when sigma_k > sigma_{k-1} and sigma_{k-1} < sigma_baseline,
// returning the cumulative subset through step k-1. If the trigger never
// fires, returns the best-sigma subset seen (termination
// "exhausted-without-trigger").
SearchTrace local_search(std::span<const FrontierStep> steps, const StepEvaluator& evaluate,
                         double sigma_baseline);

// Evaluates every cumulative subset and returns the argmin-sigma one; ties go
// to the smaller step index (smaller subset).
SearchTrace exhaustive_search(std::span<const FrontierStep> steps,
                              const StepEvaluator& evaluate, double sigma_baseline);

// Replays the local stopping rule over an exhaustive trace. Because step
// evaluations are deterministic per (subset, step, seed), this equals running
// local_search with the same evaluator.
SearchTrace derive_local_from_exhaustive(const SearchTrace& exhaustive);

}  // namespace tlsel
