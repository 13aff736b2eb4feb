#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tlsel/transfer.hpp"

namespace tlsel {
namespace {

constexpr double kBetaFloor = 1e-10;  // stands in for a perfectly fitting member

struct BoostResult {
    std::vector<TreeEnsembleMember> members;
    Vector weights;  // pool weights after the final round, total 1
};

// AdaBoost.R2 over the pooled sample where only target-row weights update.
// Rows [0, n_source) are source, the rest target.
BoostResult boost_target_only(const Matrix& X, const Vector& y, Vector w, Index n_source,
                              int rounds, int max_depth) {
    const Index n = X.rows();
    const Index n_target = n - n_source;
    BoostResult res;
    for (int round = 0; round < rounds; ++round) {
        const double total = w.sum();
        Vector wn = w / total;
        RegressionTree tree = RegressionTree::fit(X, y, wn, max_depth);
        const Vector resid = y - tree.predict(X);
        const double max_abs = resid.cwiseAbs().maxCoeff();
        if (max_abs <= 0.0) {
            res.members.push_back({std::move(tree), kBetaFloor});
            break;
        }
        const Vector adj = resid.cwiseAbs() / max_abs;
        const double target_mass = wn.tail(n_target).sum();
        const double eps =
            target_mass > 0
                ? wn.tail(n_target).dot(adj.tail(n_target)) / target_mass
                : 0.0;
        if (eps <= 0.0) {
            res.members.push_back({std::move(tree), kBetaFloor});
            break;
        }
        if (eps >= 0.5) {
            if (res.members.empty())
                res.members.push_back({std::move(tree), eps / (1.0 - eps)});
            break;
        }
        const double beta = eps / (1.0 - eps);
        res.members.push_back({std::move(tree), beta});
        for (Index i = n_source; i < n; ++i)
            w(i) *= std::pow(beta, 1.0 - adj(i));
        w /= w.sum();
    }
    res.weights = w / w.sum();
    return res;
}

// Common multiplier on the source weights so that the target share of the
// total equals `fraction`; bisection, then renormalize the pool to total 1.
void rescale_source_weights(Vector& w, Index n_source, double fraction) {
    const Index n_target = w.size() - n_source;
    if (n_source == 0) {
        w /= w.sum();
        return;
    }
    const double w_source = w.head(n_source).sum();
    const double w_target = w.tail(n_target).sum();
    if (w_source <= 0.0) {
        w /= w.sum();
        return;
    }
    if (fraction >= 1.0) {
        w.head(n_source).setZero();
        w /= w.sum();
        return;
    }
    auto target_share = [&](double c) { return w_target / (w_target + c * w_source); };
    double lo = 0.0, hi = 1.0;
    while (target_share(hi) > fraction) hi *= 2.0;
    for (int it = 0; it < 200 && hi - lo > 1e-18 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        (target_share(mid) > fraction ? lo : hi) = mid;
    }
    w.head(n_source) *= 0.5 * (lo + hi);
    w /= w.sum();
}

Vector ensemble_predict(const std::vector<TreeEnsembleMember>& members, const Matrix& X) {
    std::vector<double> values(members.size()), weights(members.size());
    for (std::size_t m = 0; m < members.size(); ++m)
        weights[m] = std::log(1.0 / members[m].beta);
    Vector out(X.rows());
    std::vector<Vector> per_member(members.size());
    for (std::size_t m = 0; m < members.size(); ++m)
        per_member[m] = members[m].tree.predict(X);
    for (Index i = 0; i < X.rows(); ++i) {
        for (std::size_t m = 0; m < members.size(); ++m) values[m] = per_member[m](i);
        out(i) = weighted_median(values, weights);
    }
    return out;
}

}  // namespace

double weighted_median(std::span<const double> values, std::span<const double> weights) {
    if (values.empty() || values.size() != weights.size())
        throw ShapeError("weighted_median: bad inputs");
    std::vector<std::size_t> order(values.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (values[a] != values[b]) return values[a] < values[b];
        return a < b;
    });
    double total = 0.0;
    for (double w : weights) total += w;
    double cum = 0.0;
    for (std::size_t k : order) {
        cum += weights[k];
        if (cum >= 0.5 * total) return values[k];
    }
    return values[order.back()];
}

TreeEnsemble fit_adaboost_r2(const LabeledDataset& data, int rounds, int max_depth) {
    if (data.rows() < 1) throw ShapeError("fit_adaboost_r2: empty data");
    if (data.n_out() != 1) throw ShapeError("fit_adaboost_r2: single-output targets only");
    Vector w = Vector::Constant(data.rows(), 1.0 / static_cast<double>(data.rows()));
    auto res = boost_target_only(data.inputs, data.outputs.col(0), std::move(w), 0, rounds,
                                 max_depth);
    return {std::move(res.members)};
}

TreeEnsemble fit_idtr(const LabeledDataset& source, const LabeledDataset& target,
                      const TwoStageBoostConfig& cfg, [[maybe_unused]] std::uint64_t seed) {
    if (target.rows() < 2) throw ShapeError("fit_idtr: target needs at least 2 rows");
    if (target.n_out() != 1) throw ShapeError("fit_idtr: single-output targets only");
    if (source.rows() > 0 && source.n_in() != target.n_in())
        throw ShapeError("fit_idtr: source/target input dimensions differ");
    if (cfg.outer_steps < 1 || cfg.inner_rounds < 1)
        throw ConfigError("fit_idtr: outer_steps and inner_rounds must be >= 1");

    const Index ns = source.rows();
    const Index nt = target.rows();
    const Index n = ns + nt;
    Matrix X(n, target.n_in());
    Vector y(n);
    if (ns > 0) {
        X.topRows(ns) = source.inputs;
        y.head(ns) = source.outputs.col(0);
    }
    X.bottomRows(nt) = target.inputs;
    y.tail(nt) = target.outputs.col(0);

    const double natural = static_cast<double>(nt) / static_cast<double>(n);
    Vector w = Vector::Constant(n, 1.0 / static_cast<double>(n));

    double best_cv = std::numeric_limits<double>::infinity();
    std::vector<TreeEnsembleMember> best_members;
    for (int t = 0; t < cfg.outer_steps; ++t) {
        const double progress =
            cfg.outer_steps > 1
                ? static_cast<double>(t) / static_cast<double>(cfg.outer_steps - 1)
                : 0.0;
        rescale_source_weights(w, ns, natural + progress * (1.0 - natural));

        // score this stage: leave-one-out over the target rows
        double cv = 0.0;
        for (Index j = 0; j < nt; ++j) {
            const Index drop = ns + j;
            Matrix Xm(n - 1, X.cols());
            Vector ym(n - 1), wm(n - 1);
            Xm.topRows(drop) = X.topRows(drop);
            ym.head(drop) = y.head(drop);
            wm.head(drop) = w.head(drop);
            Xm.bottomRows(n - 1 - drop) = X.bottomRows(n - 1 - drop);
            ym.tail(n - 1 - drop) = y.tail(n - 1 - drop);
            wm.tail(n - 1 - drop) = w.tail(n - 1 - drop);
            const auto fold = boost_target_only(Xm, ym, std::move(wm), ns,
                                                cfg.inner_rounds, cfg.max_depth);
            const double pred =
                ensemble_predict(fold.members, target.inputs.row(j))(0);
            cv += std::abs(target.outputs(j, 0) - pred);
        }
        cv /= static_cast<double>(nt);

        auto stage = boost_target_only(X, y, w, ns, cfg.inner_rounds, cfg.max_depth);
        w = stage.weights;
        if (cv < best_cv) {
            best_cv = cv;
            best_members = std::move(stage.members);
        }
    }
    return {std::move(best_members)};
}

Vector idtr_predict(const TreeEnsemble& ensemble, const Matrix& X) {
    if (ensemble.members.empty()) throw ShapeError("idtr_predict: empty ensemble");
    return ensemble_predict(ensemble.members, X);
}

}  // namespace tlsel
