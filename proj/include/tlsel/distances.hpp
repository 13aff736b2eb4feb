#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "tlsel/dataset.hpp"
#include "tlsel/elm.hpp"

namespace tlsel {

// 0.5 * RMSE + 0.5 * max-absolute-error, residuals pooled over all outputs.
double error_score(const Matrix& predicted, const Matrix& actual);

// Spatial metrics operate on concatenated [x, y] rows (LabeledDataset::joint_rows).
// Everything here is source-to-target directional; swapping arguments is a
// contract violation, not a symmetry.

// Minimum Euclidean distance of source_row to any target row.
double euclidean_distance(const Vector& source_row, const Matrix& target_rows);

// 1 - cos(angle) between v1 = source - nearest target d_k and v2 = d_j - d_k,
// where d_j is the nearest target to d_k strictly on the source's side of the
// hyperplane through d_k perpendicular to v1. No such d_j: 1. v1 = 0: 0.
double cosine_distance(const Vector& source_row, const Matrix& target_rows);

struct ModelDistanceConfig {
    int hidden = 20;
    double ridge = 1e-6;
    // Hidden-layer draw shared by every ELM fit inside one distance table, so
    // the leave-one-out deltas isolate the data change.
    std::uint64_t seed = 0;
};

// error(f_base(X_t), Y_t) - error(f_minus_i(X_t), Y_t). Negative means the
// target prediction got worse without row i, i.e. row i matters.
double performance_distance(Index i, const LabeledDataset& source,
                            const LabeledDataset& target, const ModelDistanceConfig& cfg);

// Orthogonal T minimizing ||T A - B||_F (Schonemann: T = U V^T from svd(B A^T)).
Matrix orthogonal_procrustes(const Matrix& A, const Matrix& B);

// diff_base - diff_minus_i where diff = ||procrustes(theta_s, theta_t) - I||_F
// over the ELM output-weight matrices.
double feature_distance(Index i, const LabeledDataset& source,
                        const LabeledDataset& target, const ModelDistanceConfig& cfg);

enum class Metric { Euclidean, Cosine, Performance, Feature };

std::string_view to_string(Metric m);
Metric metric_from_string(std::string_view name);

struct DistanceTable {
    std::vector<Metric> metrics;
    Matrix raw;         // N_s x m
    Matrix normalized;  // per-metric min-max to [0,1]; constant metric -> all 0
    ModelDistanceConfig cfg;
    std::uint64_t seed = 0;
};

DistanceTable compute_distance_table(const LabeledDataset& source,
                                     const LabeledDataset& target,
                                     std::span<const Metric> metrics,
                                     ModelDistanceConfig cfg, std::uint64_t seed);

// error of the full-source ELM on the target set; reporting only.
double base_transferability_score(const LabeledDataset& source,
                                  const LabeledDataset& target,
                                  const ModelDistanceConfig& cfg);

// CSV: source_index, <metric>_raw, <metric>_norm per enabled metric.
std::string distance_table_csv(const DistanceTable& table);

}  // namespace tlsel
