#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "tlsel/rng.hpp"
#include "tlsel/transfer.hpp"

using namespace tlsel;

namespace {

Matrix random_matrix(Index rows, Index cols, Rng& rng, double lo = -1, double hi = 1) {
    Matrix m(rows, cols);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) m(i, j) = rng.next_uniform(lo, hi);
    return m;
}

LabeledDataset make_dataset(const Matrix& X, const Matrix& Y, const std::string& id = "d") {
    LabeledDataset ds;
    ds.domain_id = id;
    ds.inputs = X;
    ds.outputs = Y;
    for (Index c = 0; c < X.cols(); ++c) ds.feature_names.push_back("x" + std::to_string(c));
    for (Index c = 0; c < Y.cols(); ++c) ds.output_names.push_back("y" + std::to_string(c));
    return ds;
}

LabeledDataset empty_source(Index n_in, Index n_out) {
    LabeledDataset ds;
    ds.domain_id = "none";
    ds.inputs.resize(0, n_in);
    ds.outputs.resize(0, n_out);
    return ds;
}

// Gaussian-kernel V-statistic recomputed with explicit loops, including an
// independent median bandwidth.
double oracle_mmd(const Matrix& A, const Matrix& B) {
    std::vector<double> dists;
    const Index n = A.rows(), m = B.rows();
    auto row = [&](Index i) { return i < n ? A.row(i) : B.row(i - n); };
    for (Index i = 0; i < n + m; ++i)
        for (Index j = i + 1; j < n + m; ++j) dists.push_back((row(i) - row(j)).norm());
    double bw = 1.0;
    if (!dists.empty()) {
        std::sort(dists.begin(), dists.end());
        const std::size_t k = dists.size();
        const double med = k % 2 == 1 ? dists[k / 2] : 0.5 * (dists[k / 2 - 1] + dists[k / 2]);
        if (med > 0) bw = med;
    }
    auto kern = [&](const Eigen::RowVectorXd& a, const Eigen::RowVectorXd& b) {
        return std::exp(-(a - b).squaredNorm() / (2 * bw * bw));
    };
    double saa = 0, sbb = 0, sab = 0;
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) saa += kern(A.row(i), A.row(j));
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) sbb += kern(B.row(i), B.row(j));
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < m; ++j) sab += kern(A.row(i), B.row(j));
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    return saa / (dn * dn) + sbb / (dm * dm) - 2 * sab / (dn * dm);
}

double oracle_coral(const Matrix& A, const Matrix& B) {
    auto cov = [](const Matrix& M) {
        const Index n = M.rows(), d = M.cols();
        Matrix c = Matrix::Zero(d, d);
        if (n < 2) return c;
        Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(d);
        for (Index i = 0; i < n; ++i) mean += M.row(i);
        mean /= static_cast<double>(n);
        for (Index i = 0; i < n; ++i)
            c += (M.row(i) - mean).transpose() * (M.row(i) - mean);
        return Matrix(c / static_cast<double>(n - 1));
    };
    const double d = static_cast<double>(A.cols());
    return (cov(A) - cov(B)).squaredNorm() / (4 * d * d);
}

// every learnable scalar of an MS-ANN model
std::vector<double*> msann_param_pointers(MsAnnModel& m) {
    std::vector<double*> ptrs;
    auto add = [&](AffineLayer& l) {
        for (Index i = 0; i < l.W.size(); ++i) ptrs.push_back(l.W.data() + i);
        for (Index i = 0; i < l.b.size(); ++i) ptrs.push_back(l.b.data() + i);
    };
    add(m.common);
    for (auto& br : m.branches) {
        add(br.df1);
        add(br.df2);
        add(br.dr);
    }
    return ptrs;
}

std::vector<double> msann_gradient_values(const MsAnnGradients& g) {
    std::vector<double> vals;
    auto add_m = [&](const Matrix& w) {
        for (Index i = 0; i < w.size(); ++i) vals.push_back(w.data()[i]);
    };
    auto add_v = [&](const Vector& b) {
        for (Index i = 0; i < b.size(); ++i) vals.push_back(b.data()[i]);
    };
    add_m(g.common_w);
    add_v(g.common_b);
    for (const auto& br : g.branches) {
        add_m(br.df1_w);
        add_v(br.df1_b);
        add_m(br.df2_w);
        add_v(br.df2_b);
        add_m(br.dr_w);
        add_v(br.dr_b);
    }
    return vals;
}

}  // namespace

TEST_CASE("weighted_median") {
    const std::vector<double> v123 = {1, 2, 3};
    const std::vector<double> eq = {1, 1, 1};
    CHECK(weighted_median(v123, eq) == 2.0);

    const std::vector<double> v = {1, 10};
    const std::vector<double> w = {0.9, 0.1};
    CHECK(weighted_median(v, w) == 1.0);

    // order of the inputs does not matter
    const std::vector<double> v2 = {10, 1};
    const std::vector<double> w2 = {0.1, 0.9};
    CHECK(weighted_median(v2, w2) == 1.0);

    CHECK_THROWS_AS(weighted_median({}, {}), ShapeError);
}

TEST_CASE("fit_idtr") {
    Rng rng(3);
    SUBCASE("empty source with constant target predicts the constant") {
        const Matrix X = random_matrix(5, 2, rng);
        const Matrix Y = Matrix::Constant(5, 1, 4.5);
        const auto target = make_dataset(X, Y, "t");
        const auto ensemble = fit_idtr(empty_source(2, 1), target, {}, 0);
        CHECK(ensemble.members.size() == 1);  // first round fits exactly and stops
        const Vector pred = idtr_predict(ensemble, random_matrix(7, 2, rng));
        for (Index i = 0; i < pred.size(); ++i) CHECK(pred(i) == doctest::Approx(4.5));
    }
    SUBCASE("deterministic regardless of seed") {
        const auto source = make_dataset(random_matrix(12, 2, rng), random_matrix(12, 1, rng), "s");
        const auto target = make_dataset(random_matrix(5, 2, rng), random_matrix(5, 1, rng), "t");
        const auto a = fit_idtr(source, target, {}, 1);
        const auto b = fit_idtr(source, target, {}, 999);
        REQUIRE(a.members.size() == b.members.size());
        const Matrix probe = random_matrix(6, 2, rng);
        CHECK(idtr_predict(a, probe) == idtr_predict(b, probe));
    }
    SUBCASE("useful source rows improve the fit over a poisoned full set") {
        // target law y = x0; source mixes matching rows with far-off junk
        Matrix Xt = random_matrix(6, 1, rng, 0, 1);
        const auto target = make_dataset(Xt, Xt, "t");
        Matrix Xs(20, 1), Ys(20, 1);
        for (Index i = 0; i < 20; ++i) {
            if (i < 10) {
                Xs(i, 0) = rng.next_double();
                Ys(i, 0) = Xs(i, 0);
            } else {
                Xs(i, 0) = 10 + rng.next_double();
                Ys(i, 0) = -7;
            }
        }
        const auto source = make_dataset(Xs, Ys, "s");
        const auto ensemble = fit_idtr(source, target, {}, 0);
        const Vector pred = idtr_predict(ensemble, Xt);
        CHECK((pred - Xt.col(0)).cwiseAbs().maxCoeff() < 1.0);
    }
    SUBCASE("rejects tiny targets and multi-output data") {
        const auto target1 = make_dataset(random_matrix(1, 2, rng), random_matrix(1, 1, rng));
        CHECK_THROWS_AS(fit_idtr(empty_source(2, 1), target1, {}, 0), ShapeError);
        const auto target2 = make_dataset(random_matrix(4, 2, rng), random_matrix(4, 2, rng));
        CHECK_THROWS_AS(fit_idtr(empty_source(2, 2), target2, {}, 0), ShapeError);
    }
}

TEST_CASE("idtr_predict") {
    Rng rng(5);
    Matrix X(4, 1);
    X << 0, 1, 2, 3;
    auto constant_tree = [&](double value) {
        return RegressionTree::fit(X, Vector::Constant(4, value), Vector::Constant(4, 1.0), 6);
    };

    SUBCASE("single member returns its prediction") {
        TreeEnsemble e;
        e.members.push_back({constant_tree(2.5), 0.4});
        CHECK(idtr_predict(e, X)(2) == 2.5);
    }
    SUBCASE("identical members return the common prediction") {
        TreeEnsemble e;
        for (int i = 0; i < 3; ++i) e.members.push_back({constant_tree(1.25), 0.3});
        CHECK(idtr_predict(e, X)(0) == 1.25);
    }
    SUBCASE("three members match the brute-force weighted median") {
        TreeEnsemble e;
        const std::vector<double> values = {1.0, 2.0, 3.0};
        const std::vector<double> betas = {0.9, 0.2, 0.4};
        for (int i = 0; i < 3; ++i)
            e.members.push_back({constant_tree(values[static_cast<std::size_t>(i)]),
                                 betas[static_cast<std::size_t>(i)]});
        std::vector<double> weights;
        for (double b : betas) weights.push_back(std::log(1.0 / b));
        const double expect = weighted_median(values, weights);
        CHECK(idtr_predict(e, X)(0) == expect);
    }
    SUBCASE("empty ensemble") {
        CHECK_THROWS_AS(idtr_predict(TreeEnsemble{}, X), ShapeError);
    }
}

TEST_CASE("fit_adaboost_r2 is the no-transfer tree baseline") {
    Rng rng(7);
    const Matrix X = random_matrix(8, 2, rng);
    const auto ds = make_dataset(X, Matrix::Constant(8, 1, -1.5));
    const auto ensemble = fit_adaboost_r2(ds, 10, 6);
    CHECK(idtr_predict(ensemble, X)(0) == doctest::Approx(-1.5));
}

TEST_CASE("fit_ftann") {
    Rng rng(11);
    const Matrix Xs = random_matrix(20, 2, rng, 0, 1);
    Matrix Ys(20, 1);
    for (Index i = 0; i < 20; ++i) Ys(i, 0) = Xs(i, 0) + 0.5 * Xs(i, 1);
    const auto source = make_dataset(Xs, Ys, "s");

    const Matrix Xt = random_matrix(8, 2, rng, 0, 1);
    Matrix Yt(8, 1);
    for (Index i = 0; i < 8; ++i) Yt(i, 0) = Xt(i, 0) + 0.5 * Xt(i, 1) + 0.3;
    const auto target = make_dataset(Xt, Yt, "t");

    SUBCASE("zero fine-tune epochs returns the trained source parameters") {
        const FineTuneConfig cfg{.epochs_source = 30, .epochs_target = 0};
        const MlpParams p = fit_ftann(source, target, cfg, 5);
        const MlpParams q = fit_ftann(source, target, cfg, 5);
        for (std::size_t l = 0; l < 4; ++l) CHECK(p.weights[l] == q.weights[l]);
        CHECK(p.adam_step == 0);  // optimizer state is fresh after the copy
    }
    SUBCASE("zero epochs everywhere returns the initialization") {
        const FineTuneConfig cfg{.epochs_source = 0, .epochs_target = 0};
        const MlpParams p = fit_ftann(source, target, cfg, 5);
        const MlpParams init = mlp_init({.n_in = 2, .n_out = 1}, 5);
        for (std::size_t l = 0; l < 4; ++l) CHECK(p.weights[l] == init.weights[l]);
    }
    SUBCASE("fine-tuning a shifted copy does not hurt the target fit") {
        const FineTuneConfig cfg{};
        const MlpParams copied =
            fit_ftann(source, target, {.epochs_source = cfg.epochs_source, .epochs_target = 0}, 0);
        const MlpParams tuned = fit_ftann(source, target, cfg, 0);
        CHECK(mlp_mse(tuned, Xt, Yt) <= mlp_mse(copied, Xt, Yt));
    }
    SUBCASE("source == target: fine-tuning helps on at least 45 of 50 seeds") {
        int improved = 0;
        for (std::uint64_t seed = 0; seed < 50; ++seed) {
            const MlpParams copied =
                fit_ftann(source, source, {.epochs_source = 100, .epochs_target = 0}, seed);
            const MlpParams tuned =
                fit_ftann(source, source, {.epochs_source = 100, .epochs_target = 50}, seed);
            if (mlp_mse(tuned, Xs, Ys) <= mlp_mse(copied, Xs, Ys)) ++improved;
        }
        CHECK(improved >= 45);
    }
    SUBCASE("dimension mismatch") {
        const auto bad = make_dataset(random_matrix(4, 3, rng), random_matrix(4, 1, rng));
        CHECK_THROWS_AS(fit_ftann(bad, target, {}, 0), ShapeError);
    }
}

TEST_CASE("mmd") {
    Rng rng(13);
    SUBCASE("identical inputs give zero") {
        const Matrix A = random_matrix(6, 3, rng);
        CHECK(mmd(A, A) == doctest::Approx(0.0).epsilon(1e-12));
        const Matrix single = random_matrix(1, 3, rng);
        CHECK(mmd(single, single) == doctest::Approx(0.0));
    }
    SUBCASE("separated clusters match the direct-summation oracle") {
        const Matrix A = random_matrix(2, 2, rng, 0, 1);
        const Matrix B = random_matrix(2, 2, rng, 10, 11);
        CHECK(mmd(A, B) == doctest::Approx(oracle_mmd(A, B)).epsilon(1e-10));
    }
    SUBCASE("random instances: oracle agreement and nonnegativity") {
        for (int inst = 0; inst < 50; ++inst) {
            const Matrix A = random_matrix(1 + static_cast<Index>(rng.next_index(6)), 2, rng);
            const Matrix B = random_matrix(1 + static_cast<Index>(rng.next_index(6)), 2, rng);
            const double v = mmd(A, B);
            CHECK(v == doctest::Approx(oracle_mmd(A, B)).epsilon(1e-10));
            CHECK(v >= -1e-12);
        }
    }
    SUBCASE("shape mismatch") {
        CHECK_THROWS_AS(mmd(random_matrix(2, 2, rng), random_matrix(2, 3, rng)), ShapeError);
    }
}

TEST_CASE("coral") {
    Rng rng(17);
    SUBCASE("identical inputs give zero") {
        const Matrix A = random_matrix(5, 3, rng);
        CHECK(coral(A, A) == 0.0);
    }
    SUBCASE("row order does not matter") {
        const Matrix A = random_matrix(6, 2, rng);
        Matrix shuffled = A.colwise().reverse();
        CHECK(coral(A, shuffled) == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("handcrafted 3x2 case matches the covariance oracle") {
        Matrix A(3, 2), B(3, 2);
        A << 1, 2, 3, 5, -1, 0;
        B << 0, 1, 2, 2, 4, -3;
        CHECK(coral(A, B) == doctest::Approx(oracle_coral(A, B)).epsilon(1e-10));
    }
    SUBCASE("random instances: oracle agreement and nonnegativity") {
        for (int inst = 0; inst < 50; ++inst) {
            const Matrix A = random_matrix(1 + static_cast<Index>(rng.next_index(8)), 3, rng);
            const Matrix B = random_matrix(1 + static_cast<Index>(rng.next_index(8)), 3, rng);
            const double v = coral(A, B);
            CHECK(v == doctest::Approx(oracle_coral(A, B)).epsilon(1e-10));
            CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("regressor_distance") {
    Rng rng(19);
    SUBCASE("identical outputs give zero") {
        const Matrix O = random_matrix(5, 1, rng);
        const std::vector<Matrix> outs = {O, O, O};
        CHECK(regressor_distance(outs) == 0.0);
    }
    SUBCASE("two outputs differing by a constant") {
        const Index rows = 7;
        const Matrix O1 = random_matrix(rows, 1, rng);
        const double c = 0.8;
        const Matrix O2 = O1.array() + c;
        const std::vector<Matrix> outs = {O1, O2};
        CHECK(regressor_distance(outs) ==
              doctest::Approx(c * c / static_cast<double>(rows)).epsilon(1e-12));
    }
    SUBCASE("three outputs match the brute-force pairwise sum") {
        const Index rows = 4, cols = 2;
        std::vector<Matrix> outs;
        for (int i = 0; i < 3; ++i) outs.push_back(random_matrix(rows, cols, rng));
        double sum = 0;
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                sum += (outs[static_cast<std::size_t>(i)] - outs[static_cast<std::size_t>(j)])
                           .squaredNorm() /
                       static_cast<double>(rows * cols);
        const double expect = 2.0 / (3.0 * 2.0 * static_cast<double>(rows)) * sum;
        CHECK(regressor_distance(outs) == doctest::Approx(expect).epsilon(1e-12));
    }
    SUBCASE("needs at least two regressors") {
        const std::vector<Matrix> one = {random_matrix(3, 1, rng)};
        CHECK_THROWS_AS(regressor_distance(one), ShapeError);
    }
}

TEST_CASE("beta_step") {
    CHECK(beta_step(1, 1000000000) == doctest::Approx(1.5).epsilon(1e-7));
    CHECK(beta_step(10, 10) == doctest::Approx(1.0000453978687024).epsilon(1e-12));
    double prev = 2.0;
    for (long s = 1; s <= 20; ++s) {
        const double b = beta_step(s, 20);
        CHECK(b < prev);
        prev = b;
    }
    CHECK_THROWS_AS(beta_step(0, 10), ConfigError);
    CHECK_THROWS_AS(beta_step(11, 10), ConfigError);
}

TEST_CASE("total_loss") {
    const MsAnnConfig cfg;
    CHECK(total_loss(0.7, 0.0, 0.0, 5, 10, cfg) == doctest::Approx(0.7));
    CHECK(total_loss(0.0, 1.0, 0.0, 1, 1000000000, cfg) == doctest::Approx(1.5).epsilon(1e-7));
    // linear in each component at a fixed step
    const double base = total_loss(0.2, 0.3, 0.4, 3, 10, cfg);
    const double bumped = total_loss(0.2, 0.3 + 1.0, 0.4, 3, 10, cfg);
    CHECK(bumped - base == doctest::Approx(cfg.gamma * beta_step(3, 10)).epsilon(1e-12));
    const double bumped_reg = total_loss(0.2, 0.3, 0.4 + 1.0, 3, 10, cfg);
    CHECK(bumped_reg - base == doctest::Approx(cfg.mu * beta_step(3, 10)).epsilon(1e-12));
    CHECK_THROWS_AS(
        total_loss(std::numeric_limits<double>::infinity(), 0, 0, 1, 10, cfg),
        NumericError);
}

TEST_CASE("msann parameter counts") {
    CHECK(msann_param_count(4, 1, 2) == 482);
    CHECK(msann_param_count(4, 1, 3) == 703);
    CHECK(msann_param_count(4, 1, 4) == 924);
    for (int n_in = 1; n_in <= 6; ++n_in) {
        for (int domains = 1; domains <= 4; ++domains) {
            const auto model = msann_init(n_in, 1, domains, {}, 0);
            CHECK(model.stored_param_count() == msann_param_count(n_in, 1, domains));
        }
    }
}

TEST_CASE("msann analytic gradients match central finite differences") {
    Rng rng(23);
    MsAnnConfig cfg;
    cfg.dropout_prob = 0.0;
    MsAnnModel model = msann_init(2, 1, 2, cfg, 31);
    const Matrix Xs = random_matrix(4, 2, rng);
    const Matrix Ys = random_matrix(4, 1, rng);
    const Matrix Xt = random_matrix(4, 2, rng);

    for (int domain = 0; domain < 2; ++domain) {
        const double bw = msann_mmd_bandwidth(model, domain, Xs, Xt);
        const auto [loss, grads] =
            msann_loss_gradients(model, domain, Xs, Ys, Xt, bw, 3, 300);
        CHECK(std::isfinite(loss));
        const auto analytic = msann_gradient_values(grads);
        const auto ptrs = msann_param_pointers(model);
        REQUIRE(analytic.size() == ptrs.size());

        const double h = 1e-6;
        double max_rel = 0.0;
        for (std::size_t k = 0; k < ptrs.size(); ++k) {
            const double saved = *ptrs[k];
            *ptrs[k] = saved + h;
            const double up = msann_loss_gradients(model, domain, Xs, Ys, Xt, bw, 3, 300).first;
            *ptrs[k] = saved - h;
            const double down =
                msann_loss_gradients(model, domain, Xs, Ys, Xt, bw, 3, 300).first;
            *ptrs[k] = saved;
            const double fd = (up - down) / (2 * h);
            const double rel = std::abs(analytic[k] - fd) / std::max(std::abs(fd), 1e-4);
            max_rel = std::max(max_rel, rel);
        }
        CHECK(max_rel < 1e-3);
    }
}

TEST_CASE("fit_msann") {
    Rng rng(29);
    const auto target = make_dataset(random_matrix(5, 2, rng, 0, 1),
                                     random_matrix(5, 1, rng, 0, 1), "t");
    std::vector<LabeledDataset> sources;
    sources.push_back(make_dataset(random_matrix(7, 2, rng, 0, 1),
                                   random_matrix(7, 1, rng, 0, 1), "s1"));
    sources.push_back(make_dataset(random_matrix(3, 2, rng, 0, 1),
                                   random_matrix(3, 1, rng, 0, 1), "s2"));
    sources.push_back(make_dataset(random_matrix(6, 2, rng, 0, 1),
                                   random_matrix(6, 1, rng, 0, 1), "s3"));

    SUBCASE("step counter reaches domains x epochs") {
        MsAnnConfig cfg;
        cfg.epoch_max = 150;
        const auto model = fit_msann(sources, target, cfg, 0);
        CHECK(model.steps_trained == 450);
    }
    SUBCASE("deterministic per seed") {
        MsAnnConfig cfg;
        cfg.epoch_max = 5;
        const auto a = fit_msann(sources, target, cfg, 3);
        const auto b = fit_msann(sources, target, cfg, 3);
        const Matrix probe = random_matrix(4, 2, rng);
        CHECK(msann_predict(a, probe) == msann_predict(b, probe));
    }
    SUBCASE("single source trains with the pair losses skipped") {
        MsAnnConfig cfg;
        cfg.epoch_max = 10;
        const std::vector<LabeledDataset> one = {sources[0]};
        const auto model = fit_msann(one, target, cfg, 1);
        CHECK(model.steps_trained == 10);
        CHECK(msann_predict(model, target.inputs).allFinite());
        // with N = 1 the step loss is the regression error plus a nonnegative
        // discrepancy; the regressor-distance term contributes exactly zero
        MsAnnModel probe_model = msann_init(2, 1, 1, cfg, 7);
        const double bw = msann_mmd_bandwidth(probe_model, 0, sources[0].inputs, target.inputs);
        const double loss = msann_loss_gradients(probe_model, 0, sources[0].inputs,
                                                 sources[0].outputs, target.inputs, bw, 1, 10)
                                .first;
        const double l_err =
            (msann_predict(probe_model, sources[0].inputs) - sources[0].outputs).squaredNorm() /
            static_cast<double>(sources[0].rows());
        CHECK(loss >= l_err - 1e-9);
    }
    SUBCASE("dimension mismatch across domains") {
        auto bad = sources;
        bad[1] = make_dataset(random_matrix(3, 3, rng), random_matrix(3, 1, rng));
        CHECK_THROWS_AS(fit_msann(bad, target, {}, 0), ShapeError);
    }
}

TEST_CASE("msann_predict") {
    MsAnnConfig cfg;
    SUBCASE("identical branches behave like a single branch") {
        MsAnnModel model = msann_init(2, 1, 2, cfg, 5);
        model.branches[1] = model.branches[0];
        MsAnnModel single = msann_init(2, 1, 1, cfg, 5);
        single.common = model.common;
        single.branches[0] = model.branches[0];
        Rng rng(31);
        const Matrix X = Matrix::Random(6, 2);
        CHECK((msann_predict(model, X) - msann_predict(single, X)).cwiseAbs().maxCoeff() <
              1e-12);
    }
    SUBCASE("two constant branches average") {
        MsAnnModel model = msann_init(2, 1, 2, cfg, 5);
        for (auto& br : model.branches) {
            br.df1.W.setZero();
            br.df1.b.setZero();
            br.df2.W.setZero();
            br.df2.b.setZero();
            br.dr.W.setZero();
        }
        model.branches[0].dr.b(0) = 0.0;
        model.branches[1].dr.b(0) = 2.0;
        const Matrix X = Matrix::Random(3, 2);
        const Matrix out = msann_predict(model, X);
        for (Index i = 0; i < out.rows(); ++i) CHECK(out(i, 0) == doctest::Approx(1.0));
    }
    SUBCASE("deterministic across calls") {
        const MsAnnModel model = msann_init(3, 2, 2, cfg, 9);
        const Matrix X = Matrix::Random(4, 3);
        CHECK(msann_predict(model, X) == msann_predict(model, X));
    }
}
