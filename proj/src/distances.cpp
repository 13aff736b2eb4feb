#include "tlsel/distances.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

namespace tlsel {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Index nearest_row(const Vector& point, const Matrix& rows) {
    Index best = 0;
    double best_d = kInf;
    for (Index j = 0; j < rows.rows(); ++j) {
        const double d = (rows.row(j).transpose() - point).norm();
        if (d < best_d) {
            best_d = d;
            best = j;
        }
    }
    return best;
}

struct ElmFits {
    ElmHidden hidden;
    ElmModel source_base;
    ElmModel target_base;
};

ElmFits fit_baselines(const LabeledDataset& source, const LabeledDataset& target,
                      const ModelDistanceConfig& cfg) {
    ElmFits fits;
    fits.hidden = draw_elm_hidden(source.n_in(), cfg.hidden, cfg.seed);
    fits.source_base =
        elm_train_with_hidden(fits.hidden, source.inputs, source.outputs, cfg.ridge, cfg.seed);
    fits.target_base =
        elm_train_with_hidden(fits.hidden, target.inputs, target.outputs, cfg.ridge, cfg.seed);
    return fits;
}

double performance_delta(const ElmFits& fits, Index i, const LabeledDataset& source,
                         const LabeledDataset& target, const ModelDistanceConfig& cfg) {
    const LabeledDataset reduced = remove_row(source, i);
    const ElmModel loo =
        elm_train_with_hidden(fits.hidden, reduced.inputs, reduced.outputs, cfg.ridge, cfg.seed);
    return error_score(elm_predict(fits.source_base, target.inputs), target.outputs) -
           error_score(elm_predict(loo, target.inputs), target.outputs);
}

double feature_delta(const ElmFits& fits, Index i, const LabeledDataset& source,
                     const ModelDistanceConfig& cfg) {
    const Index h = fits.source_base.output_weights.rows();
    const Matrix identity = Matrix::Identity(h, h);
    const Matrix t_base = orthogonal_procrustes(fits.source_base.output_weights,
                                                fits.target_base.output_weights);
    const double diff_base = (t_base - identity).norm();

    const LabeledDataset reduced = remove_row(source, i);
    const ElmModel loo =
        elm_train_with_hidden(fits.hidden, reduced.inputs, reduced.outputs, cfg.ridge, cfg.seed);
    const Matrix t_new =
        orthogonal_procrustes(loo.output_weights, fits.target_base.output_weights);
    const double diff_new = (t_new - identity).norm();
    return diff_base - diff_new;
}

void append_double(std::string& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

double error_score(const Matrix& predicted, const Matrix& actual) {
    if (predicted.rows() != actual.rows() || predicted.cols() != actual.cols())
        throw ShapeError("error_score: shape mismatch");
    if (predicted.size() == 0) throw ShapeError("error_score: empty input");
    const Matrix resid = predicted - actual;
    const double rmse = std::sqrt(resid.squaredNorm() / static_cast<double>(resid.size()));
    const double max_abs = resid.cwiseAbs().maxCoeff();
    return 0.5 * rmse + 0.5 * max_abs;
}

double euclidean_distance(const Vector& source_row, const Matrix& target_rows) {
    if (target_rows.rows() == 0) throw ShapeError("euclidean_distance: empty target");
    if (target_rows.cols() != source_row.size())
        throw ShapeError("euclidean_distance: dimension mismatch");
    double best = kInf;
    for (Index j = 0; j < target_rows.rows(); ++j)
        best = std::min(best, (target_rows.row(j).transpose() - source_row).norm());
    return best;
}

double cosine_distance(const Vector& source_row, const Matrix& target_rows) {
    if (target_rows.rows() == 0) throw ShapeError("cosine_distance: empty target");
    if (target_rows.cols() != source_row.size())
        throw ShapeError("cosine_distance: dimension mismatch");

    const Index k = nearest_row(source_row, target_rows);
    const Vector v1 = source_row - target_rows.row(k).transpose();
    if (v1.norm() == 0.0) return 0.0;  // source coincides with its nearest target

    Index j_best = -1;
    double j_dist = kInf;
    for (Index j = 0; j < target_rows.rows(); ++j) {
        if (j == k) continue;
        const Vector v2 = target_rows.row(j).transpose() - target_rows.row(k).transpose();
        if (v1.dot(v2) <= 0.0) continue;  // strictly same side only
        const double d = v2.norm();
        if (d < j_dist) {
            j_dist = d;
            j_best = j;
        }
    }
    if (j_best < 0) return 1.0;  // no target on the source's side
    const Vector v2 = target_rows.row(j_best).transpose() - target_rows.row(k).transpose();
    return 1.0 - v1.dot(v2) / (v1.norm() * v2.norm());
}

double performance_distance(Index i, const LabeledDataset& source,
                            const LabeledDataset& target, const ModelDistanceConfig& cfg) {
    if (source.rows() < 2) throw ShapeError("performance_distance: need at least 2 source rows");
    return performance_delta(fit_baselines(source, target, cfg), i, source, target, cfg);
}

Matrix orthogonal_procrustes(const Matrix& A, const Matrix& B) {
    if (A.rows() != B.rows() || A.cols() != B.cols())
        throw ShapeError("orthogonal_procrustes: shape mismatch");
    if (A.size() == 0) throw ShapeError("orthogonal_procrustes: empty input");
    if (!A.allFinite() || !B.allFinite())
        throw NumericError("orthogonal_procrustes: non-finite input");
    const Index h = A.rows();
    Eigen::JacobiSVD<Matrix> svd(B * A.transpose(),
                                 Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vector& sv = svd.singularValues();
    const double tol = sv(0) * 1e-12 * static_cast<double>(h);
    Index rank = 0;
    while (rank < sv.size() && sv(rank) > tol) ++rank;
    const Matrix& U = svd.matrixU();
    const Matrix& V = svd.matrixV();
    if (rank == h) return U * V.transpose();
    // Rank-deficient B A^T leaves the minimizer free on the null directions;
    // pin it to the minimizer closest to the identity (no spurious rotation),
    // which maximizes tr(T) over the optimal set.
    const Matrix K = V.transpose() * U;
    Eigen::JacobiSVD<Matrix> corner(K.bottomRightCorner(h - rank, h - rank),
                                    Eigen::ComputeFullU | Eigen::ComputeFullV);
    Matrix Z = Matrix::Identity(h, h);
    Z.bottomRightCorner(h - rank, h - rank) =
        corner.matrixV() * corner.matrixU().transpose();
    return U * Z * V.transpose();
}

double feature_distance(Index i, const LabeledDataset& source, const LabeledDataset& target,
                        const ModelDistanceConfig& cfg) {
    if (source.rows() < 2) throw ShapeError("feature_distance: need at least 2 source rows");
    return feature_delta(fit_baselines(source, target, cfg), i, source, cfg);
}

std::string_view to_string(Metric m) {
    switch (m) {
        case Metric::Euclidean: return "euclidean";
        case Metric::Cosine: return "cosine";
        case Metric::Performance: return "performance";
        case Metric::Feature: return "feature";
    }
    return "unknown";
}

Metric metric_from_string(std::string_view name) {
    if (name == "euclidean") return Metric::Euclidean;
    if (name == "cosine") return Metric::Cosine;
    if (name == "performance") return Metric::Performance;
    if (name == "feature") return Metric::Feature;
    throw ConfigError("unknown distance metric: " + std::string(name));
}

DistanceTable compute_distance_table(const LabeledDataset& source,
                                     const LabeledDataset& target,
                                     std::span<const Metric> metrics,
                                     ModelDistanceConfig cfg, std::uint64_t seed) {
    if (metrics.empty()) throw ConfigError("compute_distance_table: no metrics enabled");
    if (source.rows() < 1 || target.rows() < 1)
        throw ShapeError("compute_distance_table: empty dataset");
    cfg.seed = seed;

    DistanceTable table;
    table.metrics.assign(metrics.begin(), metrics.end());
    table.cfg = cfg;
    table.seed = seed;
    table.raw.resize(source.rows(), static_cast<Index>(metrics.size()));

    const bool needs_models =
        std::find(metrics.begin(), metrics.end(), Metric::Performance) != metrics.end() ||
        std::find(metrics.begin(), metrics.end(), Metric::Feature) != metrics.end();
    ElmFits fits;
    if (needs_models) {
        if (source.rows() < 2)
            throw ShapeError("compute_distance_table: model distances need >= 2 source rows");
        fits = fit_baselines(source, target, cfg);
    }

    const Matrix source_joint = source.joint_rows();
    const Matrix target_joint = target.joint_rows();
    for (std::size_t m = 0; m < metrics.size(); ++m) {
        const auto col = static_cast<Index>(m);
        for (Index i = 0; i < source.rows(); ++i) {
            switch (metrics[m]) {
                case Metric::Euclidean:
                    table.raw(i, col) =
                        euclidean_distance(source_joint.row(i).transpose(), target_joint);
                    break;
                case Metric::Cosine:
                    table.raw(i, col) =
                        cosine_distance(source_joint.row(i).transpose(), target_joint);
                    break;
                case Metric::Performance:
                    table.raw(i, col) = performance_delta(fits, i, source, target, cfg);
                    break;
                case Metric::Feature:
                    table.raw(i, col) = feature_delta(fits, i, source, cfg);
                    break;
            }
        }
    }

    table.normalized = table.raw;
    for (Index c = 0; c < table.raw.cols(); ++c) {
        const double lo = table.raw.col(c).minCoeff();
        const double hi = table.raw.col(c).maxCoeff();
        if (hi > lo)
            table.normalized.col(c) = (table.raw.col(c).array() - lo) / (hi - lo);
        else
            table.normalized.col(c).setZero();
    }
    return table;
}

double base_transferability_score(const LabeledDataset& source, const LabeledDataset& target,
                                  const ModelDistanceConfig& cfg) {
    if (source.rows() < 1 || target.rows() < 1)
        throw ShapeError("base_transferability_score: empty dataset");
    const ElmHidden hidden = draw_elm_hidden(source.n_in(), cfg.hidden, cfg.seed);
    const ElmModel base =
        elm_train_with_hidden(hidden, source.inputs, source.outputs, cfg.ridge, cfg.seed);
    return error_score(elm_predict(base, target.inputs), target.outputs);
}

std::string distance_table_csv(const DistanceTable& table) {
    std::string out = "source_index";
    for (Metric m : table.metrics) {
        out += ",";
        out += to_string(m);
        out += "_raw,";
        out += to_string(m);
        out += "_norm";
    }
    out += "\n";
    for (Index i = 0; i < table.raw.rows(); ++i) {
        out += std::to_string(i);
        for (Index c = 0; c < table.raw.cols(); ++c) {
            out += ",";
            append_double(out, table.raw(i, c));
            out += ",";
            append_double(out, table.normalized(i, c));
        }
        out += "\n";
    }
    return out;
}

}  // namespace tlsel
