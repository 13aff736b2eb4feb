#include "tlsel/mlp.hpp"

#include <cmath>
#include <utility>

namespace tlsel {
namespace {

Matrix affine(const Matrix& X, const Matrix& W, const Vector& b) {
    Matrix z = X * W.transpose();
    z.rowwise() += b.transpose();
    return z;
}

Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

Matrix relu_grad_mask(const Matrix& z) {
    return (z.array() > 0.0).cast<double>().matrix();
}

struct ForwardCache {
    std::array<Matrix, 3> pre;   // pre-activations of the hidden layers
    std::array<Matrix, 3> act;   // post-activation (act[1] includes dropout)
    Matrix out;
};

// mask: inverted-dropout scale matrix for the second hidden layer, or empty.
ForwardCache forward_pass(const MlpParams& p, const Matrix& X, const Matrix& mask) {
    ForwardCache c;
    c.pre[0] = affine(X, p.weights[0], p.biases[0]);
    c.act[0] = relu(c.pre[0]);
    c.pre[1] = affine(c.act[0], p.weights[1], p.biases[1]);
    c.act[1] = relu(c.pre[1]);
    if (mask.size() > 0) c.act[1] = c.act[1].cwiseProduct(mask);
    c.pre[2] = affine(c.act[1], p.weights[2], p.biases[2]);
    c.act[2] = relu(c.pre[2]);
    c.out = affine(c.act[2], p.weights[3], p.biases[3]);
    return c;
}

Matrix sample_dropout_mask(Index rows, Index cols, double p, Rng& rng) {
    Matrix mask(rows, cols);
    const double scale = 1.0 / (1.0 - p);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) mask(i, j) = rng.next_double() >= p ? scale : 0.0;
    return mask;
}

std::pair<double, MlpGradients> backprop(const MlpParams& p, const Matrix& X,
                                         const Matrix& Y, const Matrix& mask) {
    const ForwardCache c = forward_pass(p, X, mask);
    const double denom = static_cast<double>(Y.rows() * Y.cols());
    const Matrix resid = c.out - Y;
    const double loss = resid.squaredNorm() / denom;

    MlpGradients g;
    Matrix d_out = (2.0 / denom) * resid;
    g.weights[3] = d_out.transpose() * c.act[2];
    g.biases[3] = d_out.colwise().sum();

    Matrix d_act2 = d_out * p.weights[3];
    Matrix d_pre2 = d_act2.cwiseProduct(relu_grad_mask(c.pre[2]));
    g.weights[2] = d_pre2.transpose() * c.act[1];
    g.biases[2] = d_pre2.colwise().sum();

    Matrix d_act1 = d_pre2 * p.weights[2];
    if (mask.size() > 0) d_act1 = d_act1.cwiseProduct(mask);
    Matrix d_pre1 = d_act1.cwiseProduct(relu_grad_mask(c.pre[1]));
    g.weights[1] = d_pre1.transpose() * c.act[0];
    g.biases[1] = d_pre1.colwise().sum();

    Matrix d_act0 = d_pre1 * p.weights[1];
    Matrix d_pre0 = d_act0.cwiseProduct(relu_grad_mask(c.pre[0]));
    g.weights[0] = d_pre0.transpose() * X;
    g.biases[0] = d_pre0.colwise().sum();

    return {loss, std::move(g)};
}

void check_input(const MlpParams& p, const Matrix& X) {
    if (X.cols() != p.spec.n_in) throw ShapeError("mlp: input column count mismatch");
}

}  // namespace

long mlp_param_count(int n_in, int n_out) {
    return 14L * n_in * n_in + (7L + 2L * n_out) * n_in + n_out;
}

long MlpParams::stored_param_count() const {
    long count = 0;
    for (const auto& w : weights) count += w.size();
    for (const auto& b : biases) count += b.size();
    return count;
}

void MlpParams::reset_optimizer() {
    for (std::size_t l = 0; l < 4; ++l) {
        m_w[l].setZero();
        v_w[l].setZero();
        m_b[l].setZero();
        v_b[l].setZero();
    }
    adam_step = 0;
}

MlpParams mlp_init(const MlpSpec& spec, std::uint64_t seed) {
    if (spec.n_in < 1 || spec.n_out < 1) throw ShapeError("mlp_init: bad dimensions");
    if (spec.dropout_prob < 0 || spec.dropout_prob >= 1)
        throw ConfigError("mlp_init: dropout probability must be in [0, 1)");
    const auto h = spec.hidden_sizes();
    const std::array<int, 5> sizes = {spec.n_in, h[0], h[1], h[2], spec.n_out};

    MlpParams p;
    p.spec = spec;
    Rng rng(derive_seed(seed, "mlp-init"));
    for (std::size_t l = 0; l < 4; ++l) {
        const int fan_in = sizes[l];
        const int fan_out = sizes[l + 1];
        const double bound = std::sqrt(1.0 / fan_in);
        p.weights[l].resize(fan_out, fan_in);
        for (Index r = 0; r < fan_out; ++r)
            for (Index c = 0; c < fan_in; ++c)
                p.weights[l](r, c) = rng.next_uniform(-bound, bound);
        p.biases[l] = Vector::Zero(fan_out);
        p.m_w[l] = Matrix::Zero(fan_out, fan_in);
        p.v_w[l] = Matrix::Zero(fan_out, fan_in);
        p.m_b[l] = Vector::Zero(fan_out);
        p.v_b[l] = Vector::Zero(fan_out);
    }
    return p;
}

Matrix mlp_forward(const MlpParams& params, const Matrix& X, RunMode mode, Rng* rng) {
    check_input(params, X);
    Matrix mask;
    if (mode == RunMode::Train && params.spec.dropout_prob > 0) {
        if (!rng) throw ConfigError("mlp_forward: train mode with dropout needs an rng");
        mask = sample_dropout_mask(X.rows(), params.spec.hidden_sizes()[1],
                                   params.spec.dropout_prob, *rng);
    }
    return forward_pass(params, X, mask).out;
}

MlpParams mlp_train(MlpParams params, const LabeledDataset& data, int epochs,
                    const AdamConfig& opt, Rng& rng) {
    check_input(params, data.inputs);
    if (data.outputs.cols() != params.spec.n_out)
        throw ShapeError("mlp_train: output column count mismatch");
    if (data.rows() < 1) throw ShapeError("mlp_train: empty training data");
    if (epochs < 0) throw ConfigError("mlp_train: epochs must be >= 0");

    for (int epoch = 0; epoch < epochs; ++epoch) {
        Matrix mask;
        if (params.spec.dropout_prob > 0)
            mask = sample_dropout_mask(data.rows(), params.spec.hidden_sizes()[1],
                                       params.spec.dropout_prob, rng);
        auto [loss, grads] = backprop(params, data.inputs, data.outputs, mask);
        if (!std::isfinite(loss)) throw NumericError("mlp_train: non-finite loss");
        ++params.adam_step;
        for (std::size_t l = 0; l < 4; ++l) {
            adam_update(params.weights[l], params.m_w[l], params.v_w[l], grads.weights[l],
                        params.adam_step, opt);
            adam_update(params.biases[l], params.m_b[l], params.v_b[l], grads.biases[l],
                        params.adam_step, opt);
        }
    }
    return params;
}

double mlp_mse(const MlpParams& params, const Matrix& X, const Matrix& Y) {
    check_input(params, X);
    const Matrix out = forward_pass(params, X, Matrix()).out;
    return (out - Y).squaredNorm() / static_cast<double>(Y.rows() * Y.cols());
}

std::pair<double, MlpGradients> mlp_mse_gradients(const MlpParams& params, const Matrix& X,
                                                  const Matrix& Y) {
    check_input(params, X);
    return backprop(params, X, Y, Matrix());
}

}  // namespace tlsel
