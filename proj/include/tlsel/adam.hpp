#pragma once

#include <cmath>

namespace tlsel {

struct AdamConfig {
    double lr = 0.005;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// One Adam update with bias correction; step_count is the 1-based step the
// moments are at after this update. Works for Eigen matrices and vectors.
template <class T>
void adam_update(T& param, T& m, T& v, const T& grad, long step_count,
                 const AdamConfig& cfg) {
    m = cfg.beta1 * m + (1.0 - cfg.beta1) * grad;
    v = cfg.beta2 * v + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_count));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_count));
    param -= (cfg.lr / c1) *
             (m.array() / ((v.array() / c2).sqrt() + cfg.eps)).matrix();
}

}  // namespace tlsel
