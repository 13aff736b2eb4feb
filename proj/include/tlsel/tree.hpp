#pragma once

#include <vector>

#include "tlsel/dataset.hpp"

namespace tlsel {

// Binary CART regression tree with axis-aligned midpoint splits chosen to
// minimize the weighted sum of child variances. Deterministic: ties resolve
// to the lowest feature index, then the smallest threshold.
class RegressionTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1;
        int right = -1;
        double value = 0.0;
    };

    static RegressionTree fit(const Matrix& X, const Vector& y, const Vector& weights,
                              int max_depth = 6);

    double predict_row(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
    Vector predict(const Matrix& X) const;

    int depth() const;
    const std::vector<Node>& nodes() const { return nodes_; }

private:
    std::vector<Node> nodes_;
    Index n_features_ = 0;
};

}  // namespace tlsel
