#pragma once

#include <cstdint>

#include "tlsel/dataset.hpp"

namespace tlsel {

// Frozen random hidden layer of an extreme learning machine. Never modified
// by training; identical (n_in, hidden, seed) triples yield identical layers,
// which is what lets several model fits share one hidden map.
struct ElmHidden {
    Matrix weights;  // hidden x n_in
    Vector bias;     // hidden
};

ElmHidden draw_elm_hidden(Index n_in, int hidden, std::uint64_t seed);

// tanh(X W^T + 1 b^T), N x hidden
Matrix elm_features(const ElmHidden& hidden, const Matrix& X);

struct ElmModel {
    ElmHidden hidden;
    Matrix output_weights;  // hidden x n_out, ridge least-squares solution
    double ridge = 0.0;
    std::uint64_t seed = 0;
};

// Solves min ||features(X) * theta - Y||^2 + ridge * ||theta||^2 in closed
// form. ridge = 0 falls back to the minimum-norm least-squares solution.
ElmModel elm_train(const Matrix& X, const Matrix& Y, int hidden = 20,
                   double ridge = 1e-6, std::uint64_t seed = 0);
ElmModel elm_train_with_hidden(ElmHidden hidden, const Matrix& X, const Matrix& Y,
                               double ridge, std::uint64_t seed = 0);

Matrix elm_predict(const ElmModel& model, const Matrix& X);

}  // namespace tlsel
