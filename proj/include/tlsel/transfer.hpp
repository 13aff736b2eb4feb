#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "tlsel/dataset.hpp"
#include "tlsel/mlp.hpp"
#include "tlsel/tree.hpp"

namespace tlsel {

// ---------------------------------------------------------------------------
// Instance-based transfer: two-stage boosted regression trees
// ---------------------------------------------------------------------------

struct TwoStageBoostConfig {
    int outer_steps = 5;   // source/target weight-balance stages
    int inner_rounds = 10; // boosting rounds per stage, target weights only
    int max_depth = 6;
};

struct TreeEnsembleMember {
    RegressionTree tree;
    double beta = 0.0;  // member weight is log(1/beta)
};

struct TreeEnsemble {
    std::vector<TreeEnsembleMember> members;
};

// Smallest value whose cumulative weight reaches half of the total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

// Plain boosted regression (inner loop only, uniform start); also the
// no-transfer baseline for the tree family.
TreeEnsemble fit_adaboost_r2(const LabeledDataset& data, int rounds, int max_depth);

// Two-stage weighting: outer stages rescale the source mass along a fraction
// schedule, inner rounds boost only the target weights; the returned ensemble
// is the stage with the lowest leave-one-out error on the target set.
// The source dataset may have zero rows. Single-output targets only.
TreeEnsemble fit_idtr(const LabeledDataset& source, const LabeledDataset& target,
                      const TwoStageBoostConfig& cfg, std::uint64_t seed);

// Per-row weighted median of member predictions.
Vector idtr_predict(const TreeEnsemble& ensemble, const Matrix& X);

// ---------------------------------------------------------------------------
// Model-based transfer: fine-tuned MLP
// ---------------------------------------------------------------------------

struct FineTuneConfig {
    int epochs_source = 100;
    int epochs_target = 50;
    double lr = 0.005;
};

// Trains the source MLP, copies all parameters into the target model (fresh
// optimizer state), then fine-tunes on the target data.
MlpParams fit_ftann(const LabeledDataset& source, const LabeledDataset& target,
                    const FineTuneConfig& cfg, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Multi-source transfer: shared extractor + per-domain branches
// ---------------------------------------------------------------------------

// Biased V-statistic estimate of squared MMD with a Gaussian kernel,
// bandwidth from the median pairwise distance over A union B.
double mmd(const Matrix& A, const Matrix& B);
double mmd_with_bandwidth(const Matrix& A, const Matrix& B, double bandwidth);
double median_pairwise_distance(const Matrix& A, const Matrix& B);

// ||cov(A) - cov(B)||_F^2 / (4 d^2) with unbiased sample covariances.
double coral(const Matrix& A, const Matrix& B);

// (2 / (N (N-1) Nt)) * sum_{i<j} MSE(outputs[i], outputs[j]); the extra 1/Nt
// factor is kept exactly as defined.
double regressor_distance(std::span<const Matrix> outputs);

struct MsAnnConfig {
    int epoch_max = 150;
    double lr = 0.005;
    double coral_weight = 5000.0;  // discrepancy mix: mmd + coral_weight * coral
    double gamma = 1.0;            // discrepancy tradeoff
    double mu = 10.0;              // regressor-distance tradeoff
    double dropout_prob = 0.05;
    // Alternative increasing schedule (0 -> 1) for sensitivity runs; the
    // default decreasing schedule follows beta_step below.
    bool ramp_up_beta = false;
};

// 1 + 1 / (1 + exp(10 step / step_max)); decreases from ~1.5 toward ~1.
double beta_step(long step, long step_max);

// l_error + gamma * beta * l_dis + mu * beta * l_reg
double total_loss(double l_error, double l_dis, double l_reg, long step, long step_max,
                  const MsAnnConfig& cfg);
double multi_order_discrepancy(const Matrix& A, const Matrix& B, double coral_weight);

// (2 + 12N) n^2 + (2 + 5N + 2 n_out N) n + n_out N
long msann_param_count(int n_in, int n_out, int n_domains);

struct AffineLayer {
    Matrix W;  // fan-out x fan-in
    Vector b;
};

struct MsAnnModel {
    int n_in = 0;
    int n_out = 0;
    AffineLayer common;  // n_in -> 2n, rectified
    struct Branch {
        AffineLayer df1;  // 2n -> 3n, rectified, dropout after
        AffineLayer df2;  // 3n -> 2n, rectified
        AffineLayer dr;   // 2n -> n_out, identity
    };
    std::vector<Branch> branches;
    MsAnnConfig cfg;
    long steps_trained = 0;

    long stored_param_count() const;
};

MsAnnModel msann_init(int n_in, int n_out, int n_domains, const MsAnnConfig& cfg,
                      std::uint64_t seed);

MsAnnModel fit_msann(std::span<const LabeledDataset> sources, const LabeledDataset& target,
                     const MsAnnConfig& cfg, std::uint64_t seed);

// Average output of all domain-specific regressors; dropout disabled.
Matrix msann_predict(const MsAnnModel& model, const Matrix& X);

struct MsAnnGradients {
    Matrix common_w;
    Vector common_b;
    struct Branch {
        Matrix df1_w;
        Vector df1_b;
        Matrix df2_w;
        Vector df2_b;
        Matrix dr_w;
        Vector dr_b;
    };
    std::vector<Branch> branches;
};

// One training step's loss and analytic gradients for source domain `domain`
// with dropout off and the MMD bandwidth held fixed (it is measured from the
// current batch and treated as a constant within the step).
std::pair<double, MsAnnGradients> msann_loss_gradients(const MsAnnModel& model, int domain,
                                                       const Matrix& Xs, const Matrix& Ys,
                                                       const Matrix& Xt, double bandwidth,
                                                       long step, long step_max);

// Median-heuristic bandwidth over the branch features the step would compare.
double msann_mmd_bandwidth(const MsAnnModel& model, int domain, const Matrix& Xs,
                           const Matrix& Xt);

}  // namespace tlsel
