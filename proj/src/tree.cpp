#include "tlsel/tree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

namespace tlsel {
namespace {

struct SplitCandidate {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double child_sse = std::numeric_limits<double>::infinity();
};

double node_sse(const Vector& y, const Vector& w, const std::vector<int>& idx) {
    double sw = 0.0, swy = 0.0, swy2 = 0.0;
    for (int i : idx) {
        sw += w(i);
        swy += w(i) * y(i);
        swy2 += w(i) * y(i) * y(i);
    }
    if (sw <= 0.0) return 0.0;
    return std::max(0.0, swy2 - swy * swy / sw);
}

double leaf_value(const Vector& y, const Vector& w, const std::vector<int>& idx) {
    double sw = 0.0, swy = 0.0;
    for (int i : idx) {
        sw += w(i);
        swy += w(i) * y(i);
    }
    if (sw > 0.0) return swy / sw;
    double mean = 0.0;
    for (int i : idx) mean += y(i);
    return mean / static_cast<double>(idx.size());
}

SplitCandidate best_split(const Matrix& X, const Vector& y, const Vector& w,
                          const std::vector<int>& idx) {
    SplitCandidate best;
    std::vector<int> order(idx);
    for (int f = 0; f < X.cols(); ++f) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (X(a, f) != X(b, f)) return X(a, f) < X(b, f);
            return a < b;
        });
        double sw_l = 0.0, swy_l = 0.0, swy2_l = 0.0;
        double sw_r = 0.0, swy_r = 0.0, swy2_r = 0.0;
        for (int i : order) {
            sw_r += w(i);
            swy_r += w(i) * y(i);
            swy2_r += w(i) * y(i) * y(i);
        }
        for (std::size_t p = 0; p + 1 < order.size(); ++p) {
            const int i = order[p];
            sw_l += w(i);
            swy_l += w(i) * y(i);
            swy2_l += w(i) * y(i) * y(i);
            sw_r -= w(i);
            swy_r -= w(i) * y(i);
            swy2_r -= w(i) * y(i) * y(i);
            const double lo = X(i, f);
            const double hi = X(order[p + 1], f);
            if (lo == hi) continue;
            const double sse_l = sw_l > 0 ? std::max(0.0, swy2_l - swy_l * swy_l / sw_l) : 0.0;
            const double sse_r = sw_r > 0 ? std::max(0.0, swy2_r - swy_r * swy_r / sw_r) : 0.0;
            const double total = sse_l + sse_r;
            if (total < best.child_sse) {
                best.found = true;
                best.feature = f;
                best.threshold = lo + (hi - lo) / 2.0;
                best.child_sse = total;
            }
        }
    }
    return best;
}

}  // namespace

RegressionTree RegressionTree::fit(const Matrix& X, const Vector& y, const Vector& weights,
                                   int max_depth) {
    if (X.rows() < 1) throw ShapeError("tree_fit: empty data");
    if (X.rows() != y.size() || X.rows() != weights.size())
        throw ShapeError("tree_fit: X/y/weights row counts differ");
    if (max_depth < 0) throw ConfigError("tree_fit: max_depth must be >= 0");
    if (weights.minCoeff() < 0) throw ShapeError("tree_fit: negative sample weight");
    if (weights.sum() <= 0) throw ShapeError("tree_fit: all sample weights are zero");

    RegressionTree tree;
    tree.n_features_ = X.cols();
    std::vector<int> all(static_cast<std::size_t>(X.rows()));
    std::iota(all.begin(), all.end(), 0);

    std::function<int(std::vector<int>, int)> build = [&](std::vector<int> idx,
                                                          int depth) -> int {
        const int node_id = static_cast<int>(tree.nodes_.size());
        tree.nodes_.emplace_back();
        tree.nodes_[node_id].value = leaf_value(y, weights, idx);

        if (depth >= max_depth || idx.size() < 2 || node_sse(y, weights, idx) <= 0.0)
            return node_id;
        const SplitCandidate split = best_split(X, y, weights, idx);
        if (!split.found) return node_id;

        std::vector<int> left, right;
        for (int i : idx) {
            (X(i, split.feature) <= split.threshold ? left : right).push_back(i);
        }
        tree.nodes_[node_id].feature = split.feature;
        tree.nodes_[node_id].threshold = split.threshold;
        const int l = build(std::move(left), depth + 1);
        tree.nodes_[node_id].left = l;
        const int r = build(std::move(right), depth + 1);
        tree.nodes_[node_id].right = r;
        return node_id;
    };
    build(std::move(all), 0);
    return tree;
}

double RegressionTree::predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& n = nodes_[static_cast<std::size_t>(node)];
        node = x(n.feature) <= n.threshold ? n.left : n.right;
    }
    return nodes_[static_cast<std::size_t>(node)].value;
}

Vector RegressionTree::predict(const Matrix& X) const {
    if (nodes_.empty()) throw ShapeError("tree_predict: empty tree");
    if (X.cols() != n_features_) throw ShapeError("tree_predict: feature count mismatch");
    Vector out(X.rows());
    for (Index i = 0; i < X.rows(); ++i) out(i) = predict_row(X.row(i));
    return out;
}

int RegressionTree::depth() const {
    std::function<int(int)> walk = [&](int node) -> int {
        const Node& n = nodes_[static_cast<std::size_t>(node)];
        if (n.feature < 0) return 0;
        return 1 + std::max(walk(n.left), walk(n.right));
    };
    return nodes_.empty() ? 0 : walk(0);
}

}  // namespace tlsel
