#pragma once

#include <array>
#include <cstdint>

#include "tlsel/adam.hpp"
#include "tlsel/dataset.hpp"
#include "tlsel/rng.hpp"

namespace tlsel {

// Three-hidden-layer regression MLP with widths (2, 3, 2) x n_in, rectifier
// hidden units, identity output, and dropout after the second hidden layer.
struct MlpSpec {
    int n_in = 1;
    int n_out = 1;
    double dropout_prob = 0.05;

    std::array<int, 3> hidden_sizes() const { return {2 * n_in, 3 * n_in, 2 * n_in}; }
};

// 14 n^2 + (7 + 2 n_out) n + n_out: weights plus biases of all four affine maps.
long mlp_param_count(int n_in, int n_out);

struct MlpParams {
    MlpSpec spec;
    std::array<Matrix, 4> weights;  // layer l: rows = fan-out, cols = fan-in
    std::array<Vector, 4> biases;
    // Adam accumulators
    std::array<Matrix, 4> m_w, v_w;
    std::array<Vector, 4> m_b, v_b;
    long adam_step = 0;

    long stored_param_count() const;
    void reset_optimizer();
};

// Uniform(-sqrt(1/fan_in), +sqrt(1/fan_in)) weights, zero biases, zeroed
// Adam state; bit-identical per seed.
MlpParams mlp_init(const MlpSpec& spec, std::uint64_t seed);

enum class RunMode { Train, Infer };

// Infer mode is deterministic and applies no dropout. Train mode samples an
// inverted-dropout mask from rng (required when spec.dropout_prob > 0).
Matrix mlp_forward(const MlpParams& params, const Matrix& X, RunMode mode,
                   Rng* rng = nullptr);

// Full-batch training: one Adam update per epoch on the MSE loss.
MlpParams mlp_train(MlpParams params, const LabeledDataset& data, int epochs,
                    const AdamConfig& opt, Rng& rng);

double mlp_mse(const MlpParams& params, const Matrix& X, const Matrix& Y);

struct MlpGradients {
    std::array<Matrix, 4> weights;
    std::array<Vector, 4> biases;
};

// Loss and analytic gradients with dropout disabled (the path the
// finite-difference check exercises).
std::pair<double, MlpGradients> mlp_mse_gradients(const MlpParams& params,
                                                  const Matrix& X, const Matrix& Y);

}  // namespace tlsel
