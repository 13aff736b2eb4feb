#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "tlsel/transfer.hpp"

namespace tlsel {
namespace {

Matrix affine(const Matrix& X, const AffineLayer& l) {
    Matrix z = X * l.W.transpose();
    z.rowwise() += l.b.transpose();
    return z;
}

Matrix relu(const Matrix& z) { return z.cwiseMax(0.0); }

Matrix relu_mask(const Matrix& z) { return (z.array() > 0.0).cast<double>().matrix(); }

double gauss_kernel(double sq_dist, double bandwidth) {
    return std::exp(-sq_dist / (2.0 * bandwidth * bandwidth));
}

Matrix covariance(const Matrix& A) {
    const Index n = A.rows();
    if (n < 2) return Matrix::Zero(A.cols(), A.cols());
    const Matrix centered = A.rowwise() - A.colwise().mean();
    return centered.transpose() * centered / static_cast<double>(n - 1);
}

struct CommonCache {
    Matrix z;
    Matrix h;
};

CommonCache forward_common(const MsAnnModel& m, const Matrix& X) {
    CommonCache c;
    c.z = affine(X, m.common);
    c.h = relu(c.z);
    return c;
}

struct BranchCache {
    Matrix z1, a1, a1d, z2, a2, out;
};

BranchCache forward_branch(const MsAnnModel::Branch& br, const Matrix& hc,
                           const Matrix& mask) {
    BranchCache c;
    c.z1 = affine(hc, br.df1);
    c.a1 = relu(c.z1);
    c.a1d = mask.size() > 0 ? c.a1.cwiseProduct(mask) : c.a1;
    c.z2 = affine(c.a1d, br.df2);
    c.a2 = relu(c.z2);
    c.out = affine(c.a2, br.dr);
    return c;
}

// Backpropagates dOut (regressor head) and dFeat (feature head, may be empty)
// through one branch; accumulates parameter gradients, returns d(common h).
Matrix branch_backward(const MsAnnModel::Branch& br, const BranchCache& c, const Matrix& hc,
                       const Matrix& dOut, const Matrix& dFeat, const Matrix& mask,
                       MsAnnGradients::Branch& g) {
    Matrix dA2 = dFeat.size() > 0 ? dFeat : Matrix::Zero(c.a2.rows(), c.a2.cols());
    if (dOut.size() > 0) {
        g.dr_w += dOut.transpose() * c.a2;
        g.dr_b += dOut.colwise().sum();
        dA2 += dOut * br.dr.W;
    }
    Matrix dZ2 = dA2.cwiseProduct(relu_mask(c.z2));
    g.df2_w += dZ2.transpose() * c.a1d;
    g.df2_b += dZ2.colwise().sum();
    Matrix dA1 = dZ2 * br.df2.W;
    if (mask.size() > 0) dA1 = dA1.cwiseProduct(mask);
    Matrix dZ1 = dA1.cwiseProduct(relu_mask(c.z1));
    g.df1_w += dZ1.transpose() * hc;
    g.df1_b += dZ1.colwise().sum();
    return dZ1 * br.df1.W;
}

// d(MMD^2)/dA, d(MMD^2)/dB scaled by `scale`, added into gA/gB.
void mmd_gradients(const Matrix& A, const Matrix& B, double bandwidth, double scale,
                   Matrix& gA, Matrix& gB) {
    const auto n = static_cast<double>(A.rows());
    const auto m = static_cast<double>(B.rows());
    const double inv_bw2 = 1.0 / (bandwidth * bandwidth);
    for (Index p = 0; p < A.rows(); ++p) {
        Eigen::RowVectorXd grad = Eigen::RowVectorXd::Zero(A.cols());
        for (Index j = 0; j < A.rows(); ++j) {
            const Eigen::RowVectorXd diff = A.row(j) - A.row(p);
            grad += (2.0 / (n * n)) * gauss_kernel(diff.squaredNorm(), bandwidth) * diff;
        }
        for (Index j = 0; j < B.rows(); ++j) {
            const Eigen::RowVectorXd diff = B.row(j) - A.row(p);
            grad -= (2.0 / (n * m)) * gauss_kernel(diff.squaredNorm(), bandwidth) * diff;
        }
        gA.row(p) += scale * inv_bw2 * grad;
    }
    for (Index q = 0; q < B.rows(); ++q) {
        Eigen::RowVectorXd grad = Eigen::RowVectorXd::Zero(B.cols());
        for (Index j = 0; j < B.rows(); ++j) {
            const Eigen::RowVectorXd diff = B.row(j) - B.row(q);
            grad += (2.0 / (m * m)) * gauss_kernel(diff.squaredNorm(), bandwidth) * diff;
        }
        for (Index i = 0; i < A.rows(); ++i) {
            const Eigen::RowVectorXd diff = A.row(i) - B.row(q);
            grad -= (2.0 / (n * m)) * gauss_kernel(diff.squaredNorm(), bandwidth) * diff;
        }
        gB.row(q) += scale * inv_bw2 * grad;
    }
}

void coral_gradients(const Matrix& A, const Matrix& B, double scale, Matrix& gA,
                     Matrix& gB) {
    const auto d = static_cast<double>(A.cols());
    const Matrix G = (covariance(A) - covariance(B)) / (2.0 * d * d);
    if (A.rows() >= 2) {
        const Matrix centered = A.rowwise() - A.colwise().mean();
        gA += scale * 2.0 / static_cast<double>(A.rows() - 1) * centered * G;
    }
    if (B.rows() >= 2) {
        const Matrix centered = B.rowwise() - B.colwise().mean();
        gB -= scale * 2.0 / static_cast<double>(B.rows() - 1) * centered * G;
    }
}

MsAnnGradients zero_gradients(const MsAnnModel& m) {
    MsAnnGradients g;
    g.common_w = Matrix::Zero(m.common.W.rows(), m.common.W.cols());
    g.common_b = Vector::Zero(m.common.b.size());
    g.branches.resize(m.branches.size());
    for (std::size_t i = 0; i < m.branches.size(); ++i) {
        const auto& br = m.branches[i];
        auto& gb = g.branches[i];
        gb.df1_w = Matrix::Zero(br.df1.W.rows(), br.df1.W.cols());
        gb.df1_b = Vector::Zero(br.df1.b.size());
        gb.df2_w = Matrix::Zero(br.df2.W.rows(), br.df2.W.cols());
        gb.df2_b = Vector::Zero(br.df2.b.size());
        gb.dr_w = Matrix::Zero(br.dr.W.rows(), br.dr.W.cols());
        gb.dr_b = Vector::Zero(br.dr.b.size());
    }
    return g;
}

// Full training-step loss and gradients; masks may be empty (dropout off).
std::pair<double, MsAnnGradients> step_loss_gradients(
    const MsAnnModel& model, int domain, const Matrix& Xs, const Matrix& Ys,
    const Matrix& Xt, double bandwidth, long step, long step_max, const Matrix& src_mask,
    const std::vector<Matrix>& tgt_masks) {
    const auto n_dom = static_cast<int>(model.branches.size());
    const auto& br_i = model.branches[static_cast<std::size_t>(domain)];

    const CommonCache cs = forward_common(model, Xs);
    const CommonCache ct = forward_common(model, Xt);
    const BranchCache src = forward_branch(br_i, cs.h, src_mask);
    std::vector<BranchCache> tgt(static_cast<std::size_t>(n_dom));
    for (int j = 0; j < n_dom; ++j)
        tgt[static_cast<std::size_t>(j)] = forward_branch(
            model.branches[static_cast<std::size_t>(j)], ct.h,
            tgt_masks.empty() ? Matrix() : tgt_masks[static_cast<std::size_t>(j)]);

    const double err_denom = static_cast<double>(Ys.rows() * Ys.cols());
    const double l_error = (src.out - Ys).squaredNorm() / err_denom;

    const auto& feat_s = src.a2;
    const auto& feat_t = tgt[static_cast<std::size_t>(domain)].a2;
    const double l_dis = mmd_with_bandwidth(feat_s, feat_t, bandwidth) +
                         model.cfg.coral_weight * coral(feat_s, feat_t);

    std::vector<Matrix> regressor_outs;
    for (const auto& t : tgt) regressor_outs.push_back(t.out);
    const double l_reg = n_dom >= 2 ? regressor_distance(regressor_outs) : 0.0;

    const double loss = total_loss(l_error, l_dis, l_reg, step, step_max, model.cfg);
    const double beta = model.cfg.ramp_up_beta
                            ? 2.0 / (1.0 + std::exp(-10.0 * static_cast<double>(step) /
                                                    static_cast<double>(step_max))) -
                                  1.0
                            : beta_step(step, step_max);

    MsAnnGradients g = zero_gradients(model);

    // regression-error head
    Matrix d_out_src = (2.0 / err_denom) * (src.out - Ys);

    // discrepancy head on the domain branch's features
    Matrix d_feat_src = Matrix::Zero(feat_s.rows(), feat_s.cols());
    Matrix d_feat_tgt = Matrix::Zero(feat_t.rows(), feat_t.cols());
    const double dis_scale = model.cfg.gamma * beta;
    mmd_gradients(feat_s, feat_t, bandwidth, dis_scale, d_feat_src, d_feat_tgt);
    coral_gradients(feat_s, feat_t, dis_scale * model.cfg.coral_weight, d_feat_src,
                    d_feat_tgt);

    // regressor-distance head on all target outputs
    std::vector<Matrix> d_out_tgt(static_cast<std::size_t>(n_dom));
    const auto rows = static_cast<double>(Xt.rows());
    const auto cols = static_cast<double>(model.n_out);
    const double reg_coef = n_dom >= 2
                                ? model.cfg.mu * beta * 2.0 /
                                      (static_cast<double>(n_dom) *
                                       static_cast<double>(n_dom - 1) * rows)
                                : 0.0;
    for (int a = 0; a < n_dom; ++a) {
        Matrix d = Matrix::Zero(Xt.rows(), model.n_out);
        if (n_dom >= 2) {
            for (int b = 0; b < n_dom; ++b) {
                if (b == a) continue;
                d += (2.0 / (rows * cols)) *
                     (regressor_outs[static_cast<std::size_t>(a)] -
                      regressor_outs[static_cast<std::size_t>(b)]);
            }
            d *= reg_coef;
        }
        d_out_tgt[static_cast<std::size_t>(a)] = std::move(d);
    }

    // source stream: branch `domain` then the common layer
    Matrix d_hc_s =
        branch_backward(br_i, src, cs.h, d_out_src, d_feat_src, src_mask,
                        g.branches[static_cast<std::size_t>(domain)]);
    Matrix d_zc_s = d_hc_s.cwiseProduct(relu_mask(cs.z));
    g.common_w += d_zc_s.transpose() * Xs;
    g.common_b += d_zc_s.colwise().sum();

    // target stream: every branch contributes
    Matrix d_hc_t = Matrix::Zero(ct.h.rows(), ct.h.cols());
    const Matrix no_feat_grad;
    for (int j = 0; j < n_dom; ++j) {
        const Matrix& d_feat = j == domain ? d_feat_tgt : no_feat_grad;
        d_hc_t += branch_backward(
            model.branches[static_cast<std::size_t>(j)], tgt[static_cast<std::size_t>(j)],
            ct.h, d_out_tgt[static_cast<std::size_t>(j)], d_feat,
            tgt_masks.empty() ? Matrix() : tgt_masks[static_cast<std::size_t>(j)],
            g.branches[static_cast<std::size_t>(j)]);
    }
    Matrix d_zc_t = d_hc_t.cwiseProduct(relu_mask(ct.z));
    g.common_w += d_zc_t.transpose() * Xt;
    g.common_b += d_zc_t.colwise().sum();

    return {loss, std::move(g)};
}

Matrix sample_mask(Index rows, Index cols, double p, Rng& rng) {
    Matrix mask(rows, cols);
    const double scale = 1.0 / (1.0 - p);
    for (Index i = 0; i < rows; ++i)
        for (Index j = 0; j < cols; ++j) mask(i, j) = rng.next_double() >= p ? scale : 0.0;
    return mask;
}

double step_bandwidth(const MsAnnModel& model, int domain, const Matrix& Xs,
                      const Matrix& Xt, const Matrix& src_mask,
                      const std::vector<Matrix>& tgt_masks) {
    const auto& br = model.branches[static_cast<std::size_t>(domain)];
    const Matrix feat_s = forward_branch(br, forward_common(model, Xs).h, src_mask).a2;
    const Matrix feat_t = forward_branch(
        br, forward_common(model, Xt).h,
        tgt_masks.empty() ? Matrix() : tgt_masks[static_cast<std::size_t>(domain)]).a2;
    const double med = median_pairwise_distance(feat_s, feat_t);
    return med > 0.0 ? med : 1.0;
}

struct AdamState {
    MsAnnGradients m;
    MsAnnGradients v;
    long step = 0;
};

void apply_adam(MsAnnModel& model, AdamState& state, const MsAnnGradients& g,
                const AdamConfig& cfg) {
    ++state.step;
    adam_update(model.common.W, state.m.common_w, state.v.common_w, g.common_w, state.step,
                cfg);
    adam_update(model.common.b, state.m.common_b, state.v.common_b, g.common_b, state.step,
                cfg);
    for (std::size_t i = 0; i < model.branches.size(); ++i) {
        auto& br = model.branches[i];
        auto& m = state.m.branches[i];
        auto& v = state.v.branches[i];
        const auto& gb = g.branches[i];
        adam_update(br.df1.W, m.df1_w, v.df1_w, gb.df1_w, state.step, cfg);
        adam_update(br.df1.b, m.df1_b, v.df1_b, gb.df1_b, state.step, cfg);
        adam_update(br.df2.W, m.df2_w, v.df2_w, gb.df2_w, state.step, cfg);
        adam_update(br.df2.b, m.df2_b, v.df2_b, gb.df2_b, state.step, cfg);
        adam_update(br.dr.W, m.dr_w, v.dr_w, gb.dr_w, state.step, cfg);
        adam_update(br.dr.b, m.dr_b, v.dr_b, gb.dr_b, state.step, cfg);
    }
}

AffineLayer init_layer(int fan_out, int fan_in, Rng& rng) {
    AffineLayer l;
    const double bound = std::sqrt(1.0 / fan_in);
    l.W.resize(fan_out, fan_in);
    for (Index r = 0; r < fan_out; ++r)
        for (Index c = 0; c < fan_in; ++c) l.W(r, c) = rng.next_uniform(-bound, bound);
    l.b = Vector::Zero(fan_out);
    return l;
}

}  // namespace

double median_pairwise_distance(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols()) throw ShapeError("median_pairwise_distance: column mismatch");
    Matrix all(A.rows() + B.rows(), A.cols());
    all << A, B;
    std::vector<double> dists;
    for (Index i = 0; i < all.rows(); ++i)
        for (Index j = i + 1; j < all.rows(); ++j)
            dists.push_back((all.row(i) - all.row(j)).norm());
    if (dists.empty()) return 0.0;
    std::sort(dists.begin(), dists.end());
    const std::size_t n = dists.size();
    return n % 2 == 1 ? dists[n / 2] : 0.5 * (dists[n / 2 - 1] + dists[n / 2]);
}

double mmd_with_bandwidth(const Matrix& A, const Matrix& B, double bandwidth) {
    if (A.cols() != B.cols()) throw ShapeError("mmd: column count mismatch");
    if (A.rows() == 0 || B.rows() == 0) throw ShapeError("mmd: empty input");
    if (!(bandwidth > 0)) throw ConfigError("mmd: bandwidth must be positive");
    const auto n = static_cast<double>(A.rows());
    const auto m = static_cast<double>(B.rows());
    double s_aa = 0.0, s_bb = 0.0, s_ab = 0.0;
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < A.rows(); ++j)
            s_aa += gauss_kernel((A.row(i) - A.row(j)).squaredNorm(), bandwidth);
    for (Index i = 0; i < B.rows(); ++i)
        for (Index j = 0; j < B.rows(); ++j)
            s_bb += gauss_kernel((B.row(i) - B.row(j)).squaredNorm(), bandwidth);
    for (Index i = 0; i < A.rows(); ++i)
        for (Index j = 0; j < B.rows(); ++j)
            s_ab += gauss_kernel((A.row(i) - B.row(j)).squaredNorm(), bandwidth);
    return s_aa / (n * n) + s_bb / (m * m) - 2.0 * s_ab / (n * m);
}

double mmd(const Matrix& A, const Matrix& B) {
    const double med = median_pairwise_distance(A, B);
    return mmd_with_bandwidth(A, B, med > 0.0 ? med : 1.0);
}

double coral(const Matrix& A, const Matrix& B) {
    if (A.cols() != B.cols()) throw ShapeError("coral: column count mismatch");
    if (A.rows() == 0 || B.rows() == 0) throw ShapeError("coral: empty input");
    const auto d = static_cast<double>(A.cols());
    return (covariance(A) - covariance(B)).squaredNorm() / (4.0 * d * d);
}

double regressor_distance(std::span<const Matrix> outputs) {
    if (outputs.size() < 2) throw ShapeError("regressor_distance: need at least 2 regressors");
    const Index rows = outputs[0].rows();
    const Index cols = outputs[0].cols();
    for (const auto& o : outputs)
        if (o.rows() != rows || o.cols() != cols)
            throw ShapeError("regressor_distance: output shapes differ");
    const auto n = static_cast<double>(outputs.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < outputs.size(); ++i)
        for (std::size_t j = i + 1; j < outputs.size(); ++j)
            sum += (outputs[i] - outputs[j]).squaredNorm() /
                   static_cast<double>(rows * cols);
    return 2.0 / (n * (n - 1.0) * static_cast<double>(rows)) * sum;
}

double beta_step(long step, long step_max) {
    if (step < 1 || step > step_max) throw ConfigError("beta_step: step out of range");
    return 1.0 + 1.0 / (1.0 + std::exp(10.0 * static_cast<double>(step) /
                                       static_cast<double>(step_max)));
}

double total_loss(double l_error, double l_dis, double l_reg, long step, long step_max,
                  const MsAnnConfig& cfg) {
    if (!std::isfinite(l_error) || !std::isfinite(l_dis) || !std::isfinite(l_reg))
        throw NumericError("total_loss: non-finite component");
    const double beta =
        cfg.ramp_up_beta
            ? 2.0 / (1.0 + std::exp(-10.0 * static_cast<double>(step) /
                                    static_cast<double>(step_max))) -
                  1.0
            : beta_step(step, step_max);
    return l_error + cfg.gamma * beta * l_dis + cfg.mu * beta * l_reg;
}

double multi_order_discrepancy(const Matrix& A, const Matrix& B, double coral_weight) {
    return mmd(A, B) + coral_weight * coral(A, B);
}

long msann_param_count(int n_in, int n_out, int n_domains) {
    const long n = n_in;
    const long N = n_domains;
    return (2 + 12 * N) * n * n + (2 + 5 * N + 2 * static_cast<long>(n_out) * N) * n +
           static_cast<long>(n_out) * N;
}

long MsAnnModel::stored_param_count() const {
    long count = common.W.size() + common.b.size();
    for (const auto& br : branches)
        count += br.df1.W.size() + br.df1.b.size() + br.df2.W.size() + br.df2.b.size() +
                 br.dr.W.size() + br.dr.b.size();
    return count;
}

MsAnnModel msann_init(int n_in, int n_out, int n_domains, const MsAnnConfig& cfg,
                      std::uint64_t seed) {
    if (n_in < 1 || n_out < 1 || n_domains < 1) throw ShapeError("msann_init: bad dimensions");
    MsAnnModel model;
    model.n_in = n_in;
    model.n_out = n_out;
    model.cfg = cfg;
    Rng rng(derive_seed(seed, "msann-init"));
    model.common = init_layer(2 * n_in, n_in, rng);
    model.branches.resize(static_cast<std::size_t>(n_domains));
    for (auto& br : model.branches) {
        br.df1 = init_layer(3 * n_in, 2 * n_in, rng);
        br.df2 = init_layer(2 * n_in, 3 * n_in, rng);
        br.dr = init_layer(n_out, 2 * n_in, rng);
    }
    return model;
}

MsAnnModel fit_msann(std::span<const LabeledDataset> sources, const LabeledDataset& target,
                     const MsAnnConfig& cfg, std::uint64_t seed) {
    if (sources.empty()) throw ShapeError("fit_msann: no source domains");
    if (target.rows() < 1) throw ShapeError("fit_msann: empty target");
    for (const auto& s : sources) {
        if (s.rows() < 1) throw ShapeError("fit_msann: empty source domain");
        if (s.n_in() != target.n_in() || s.n_out() != target.n_out())
            throw ShapeError("fit_msann: domain dimensions differ");
    }
    if (cfg.epoch_max < 0) throw ConfigError("fit_msann: epoch_max must be >= 0");

    const int n_dom = static_cast<int>(sources.size());
    MsAnnModel model = msann_init(static_cast<int>(target.n_in()),
                                  static_cast<int>(target.n_out()), n_dom, cfg,
                                  derive_seed(seed, "init"));
    Rng rng(derive_seed(seed, "train"));
    AdamState adam{zero_gradients(model), zero_gradients(model), 0};
    const AdamConfig opt{.lr = cfg.lr};

    long step = 1;
    const long step_max = static_cast<long>(n_dom) * cfg.epoch_max;
    const Index three_n = 3 * model.n_in;
    for (int epoch = 0; epoch < cfg.epoch_max; ++epoch) {
        for (int i = 0; i < n_dom; ++i) {
            const auto& src = sources[static_cast<std::size_t>(i)];
            const auto nb = static_cast<std::size_t>(std::min(src.rows(), target.rows()));
            const auto idx_s =
                sample_without_replacement(static_cast<std::size_t>(src.rows()), nb, rng);
            const auto idx_t =
                sample_without_replacement(static_cast<std::size_t>(target.rows()), nb, rng);

            Matrix Xs(static_cast<Index>(nb), src.n_in()), Ys(static_cast<Index>(nb), src.n_out());
            Matrix Xt(static_cast<Index>(nb), target.n_in());
            for (std::size_t r = 0; r < nb; ++r) {
                Xs.row(static_cast<Index>(r)) = src.inputs.row(static_cast<Index>(idx_s[r]));
                Ys.row(static_cast<Index>(r)) = src.outputs.row(static_cast<Index>(idx_s[r]));
                Xt.row(static_cast<Index>(r)) = target.inputs.row(static_cast<Index>(idx_t[r]));
            }

            Matrix src_mask;
            std::vector<Matrix> tgt_masks;
            if (cfg.dropout_prob > 0) {
                src_mask = sample_mask(static_cast<Index>(nb), three_n, cfg.dropout_prob, rng);
                tgt_masks.reserve(static_cast<std::size_t>(n_dom));
                for (int j = 0; j < n_dom; ++j)
                    tgt_masks.push_back(
                        sample_mask(static_cast<Index>(nb), three_n, cfg.dropout_prob, rng));
            }

            const double bw = step_bandwidth(model, i, Xs, Xt, src_mask, tgt_masks);
            auto [loss, grads] = step_loss_gradients(model, i, Xs, Ys, Xt, bw, step,
                                                     step_max, src_mask, tgt_masks);
            if (!std::isfinite(loss)) throw NumericError("fit_msann: non-finite loss");
            apply_adam(model, adam, grads, opt);
            ++step;
        }
    }
    model.steps_trained = step - 1;
    return model;
}

Matrix msann_predict(const MsAnnModel& model, const Matrix& X) {
    if (X.cols() != model.n_in) throw ShapeError("msann_predict: input column mismatch");
    const CommonCache c = forward_common(model, X);
    Matrix sum = Matrix::Zero(X.rows(), model.n_out);
    for (const auto& br : model.branches) sum += forward_branch(br, c.h, Matrix()).out;
    return sum / static_cast<double>(model.branches.size());
}

std::pair<double, MsAnnGradients> msann_loss_gradients(const MsAnnModel& model, int domain,
                                                       const Matrix& Xs, const Matrix& Ys,
                                                       const Matrix& Xt, double bandwidth,
                                                       long step, long step_max) {
    if (domain < 0 || domain >= static_cast<int>(model.branches.size()))
        throw ShapeError("msann_loss_gradients: domain out of range");
    return step_loss_gradients(model, domain, Xs, Ys, Xt, bandwidth, step, step_max,
                               Matrix(), {});
}

double msann_mmd_bandwidth(const MsAnnModel& model, int domain, const Matrix& Xs,
                           const Matrix& Xt) {
    if (domain < 0 || domain >= static_cast<int>(model.branches.size()))
        throw ShapeError("msann_mmd_bandwidth: domain out of range");
    return step_bandwidth(model, domain, Xs, Xt, Matrix(), {});
}

}  // namespace tlsel
