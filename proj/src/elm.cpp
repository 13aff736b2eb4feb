#include "tlsel/elm.hpp"

#include "tlsel/rng.hpp"

namespace tlsel {

ElmHidden draw_elm_hidden(Index n_in, int hidden, std::uint64_t seed) {
    if (n_in < 1 || hidden < 1) throw ShapeError("draw_elm_hidden: bad dimensions");
    Rng rng(derive_seed(seed, "elm-hidden"));
    ElmHidden h;
    h.weights.resize(hidden, n_in);
    h.bias.resize(hidden);
    for (Index r = 0; r < hidden; ++r)
        for (Index c = 0; c < n_in; ++c) h.weights(r, c) = rng.next_uniform(-1.0, 1.0);
    for (Index r = 0; r < hidden; ++r) h.bias(r) = rng.next_uniform(-1.0, 1.0);
    return h;
}

Matrix elm_features(const ElmHidden& hidden, const Matrix& X) {
    if (X.cols() != hidden.weights.cols())
        throw ShapeError("elm_features: input column count mismatch");
    Matrix z = X * hidden.weights.transpose();
    z.rowwise() += hidden.bias.transpose();
    return z.array().tanh();
}

ElmModel elm_train(const Matrix& X, const Matrix& Y, int hidden, double ridge,
                   std::uint64_t seed) {
    return elm_train_with_hidden(draw_elm_hidden(X.cols(), hidden, seed), X, Y, ridge,
                                 seed);
}

ElmModel elm_train_with_hidden(ElmHidden hidden, const Matrix& X, const Matrix& Y,
                               double ridge, std::uint64_t seed) {
    if (X.rows() != Y.rows()) throw ShapeError("elm_train: X/Y row counts differ");
    if (X.rows() < 1) throw ShapeError("elm_train: empty training set");
    if (ridge < 0) throw ConfigError("elm_train: ridge must be >= 0");

    const Matrix feats = elm_features(hidden, X);
    ElmModel model;
    model.ridge = ridge;
    model.seed = seed;
    if (ridge > 0) {
        const Index h = feats.cols();
        Matrix normal = feats.transpose() * feats;
        normal += ridge * Matrix::Identity(h, h);
        model.output_weights = normal.ldlt().solve(feats.transpose() * Y);
    } else {
        auto cod = feats.completeOrthogonalDecomposition();
        if (cod.rank() == 0)
            throw NumericError("elm_train: singular system (all-zero features at ridge 0)");
        model.output_weights = cod.solve(Y);
    }
    model.hidden = std::move(hidden);
    return model;
}

Matrix elm_predict(const ElmModel& model, const Matrix& X) {
    return elm_features(model.hidden, X) * model.output_weights;
}

}  // namespace tlsel
