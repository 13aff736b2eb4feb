#pragma once

// Synthetic shifted-cluster task shared by tests and the shipped CSV files:
// the target law plus a far-away source cluster with a different response,
// so selecting near-target source rows should beat using everything.

#include <cmath>

#include "tlsel/dataset.hpp"
#include "tlsel/rng.hpp"

namespace tlsel::testing {

inline double target_law(double x0, double x1, double x2) {
    return 1.0 + x0 + 0.5 * std::sin(2.0 * x1) + 0.25 * x2 * x2;
}

inline double far_law(double x0, double x1) { return 5.0 - 0.8 * x0 + 0.3 * x1; }

inline LabeledDataset make_fixture_target(std::uint64_t seed = 0) {
    Rng rng(derive_seed(seed, "fixture-target"));
    LabeledDataset ds;
    ds.domain_id = "fixture-target";
    ds.feature_names = {"x0", "x1", "x2"};
    ds.output_names = {"y"};
    const Index n = 9;
    ds.inputs.resize(n, 3);
    ds.outputs.resize(n, 1);
    for (Index i = 0; i < n; ++i) {
        const double x0 = rng.next_double();
        const double x1 = rng.next_double();
        const double x2 = rng.next_double();
        ds.inputs.row(i) << x0, x1, x2;
        ds.outputs(i, 0) = target_law(x0, x1, x2) + 0.01 * rng.next_uniform(-1.0, 1.0);
    }
    return ds;
}

inline LabeledDataset make_fixture_source(std::uint64_t seed = 0) {
    Rng rng(derive_seed(seed, "fixture-source"));
    LabeledDataset ds;
    ds.domain_id = "fixture-source";
    ds.feature_names = {"x0", "x1", "x2"};
    ds.output_names = {"y"};
    const Index n_near = 42;
    const Index n_far = 18;
    ds.inputs.resize(n_near + n_far, 3);
    ds.outputs.resize(n_near + n_far, 1);
    for (Index i = 0; i < n_near; ++i) {
        const double x0 = rng.next_double();
        const double x1 = rng.next_double();
        const double x2 = rng.next_double();
        ds.inputs.row(i) << x0, x1, x2;
        ds.outputs(i, 0) = target_law(x0, x1, x2) + 0.02 * rng.next_uniform(-1.0, 1.0);
    }
    for (Index i = n_near; i < n_near + n_far; ++i) {
        const double x0 = 3.0 + rng.next_double();
        const double x1 = 3.0 + rng.next_double();
        const double x2 = 3.0 + rng.next_double();
        ds.inputs.row(i) << x0, x1, x2;
        ds.outputs(i, 0) = far_law(x0, x1) + 0.02 * rng.next_uniform(-1.0, 1.0);
    }
    return ds;
}

}  // namespace tlsel::testing
