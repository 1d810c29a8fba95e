#pragma once

#include "wgmm/barycenter.hpp"
#include "wgmm/gmm.hpp"
#include "wgmm/stream.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace wgmm {

/// Learnable dictionary: C labeled atom mixtures plus one row of
/// barycentric coordinates per domain (sources first, target last).
/// Atom component weights are fixed uniform; only means, stds and label
/// rows are learned.
struct Dictionary {
    std::vector<LabeledGmm> atoms;  // C atoms sharing K, d and class count
    Eigen::MatrixXd lambda;         // (N_S + 1) x C, every row on the simplex
    double var_floor_std = 1e-6;    // lower bound enforced on atom sigma entries

    int num_atoms() const { return static_cast<int>(atoms.size()); }
    int num_rows() const { return static_cast<int>(lambda.rows()); }
    int atom_components() const { return atoms.empty() ? 0 : atoms.front().num_components(); }
};

void validate(const Dictionary& dict);

struct DadilConfig {
    int num_atoms = 4;        // C
    int atom_components = 8;  // K per atom
    double beta = 1.0;        // label-cost weight; no endorsed default, set explicitly
    double lr_atoms = 0.1;
    double lr_lambda = 0.05;
    int steps_per_batch = 1;     // dictionary steps per stream batch
    int post_stream_iters = 100; // extra steps after the stream ends
    int n_iters = 200;           // offline step count
    int bary_fp_iters = 50;
    double bary_fp_tol = 1e-5;
    double var_floor_std = 1e-6;
    std::uint64_t seed = 0;
};

/// Atoms sampled (with a small seeded jitter) from the pooled source
/// components, labels copied from the sampled components, every lambda row
/// uniform at 1/C. The target argument is validated for dimension only.
Dictionary init_dictionary(const std::vector<LabeledGmm>& sources, const Gmm& target,
                           int num_atoms, int atom_components, std::uint64_t seed);

/// Per-row reconstruction errors: SMW2^2(source_l, B(lambda_l)) for each
/// source and MW2^2(target, B(lambda_T)) last. dadil_loss is their sum.
std::vector<double> dadil_loss_terms(const Dictionary& dict,
                                     const std::vector<LabeledGmm>& sources,
                                     const Gmm& target, const DadilConfig& cfg);
double dadil_loss(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                  const Gmm& target, const DadilConfig& cfg);

/// Transport plans held fixed while differentiating: per Lambda row, the
/// outer coupling between the domain mixture and its reconstruction, plus
/// the row-stochastic maps the barycenter fixed point ended on.
struct FrozenPlans {
    std::vector<Eigen::MatrixXd> outer;              // row l: K_l x K_B
    std::vector<std::vector<Eigen::MatrixXd>> maps;  // row l, atom c: K_B x K
};

FrozenPlans freeze_plans(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                         const Gmm& target, const DadilConfig& cfg);

/// The loss with every plan in `plans` held fixed: reconstructions are the
/// map-weighted averages of atom parameters (labels not renormalized), so
/// the value is exactly quadratic in atom parameters and in Lambda. No
/// simplex validation is performed — finite-difference probes may sit
/// slightly off the simplex.
double frozen_loss(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                   const Gmm& target, const DadilConfig& cfg, const FrozenPlans& plans);

struct DadilGrad {
    std::vector<Eigen::MatrixXd> atom_mu;      // per atom: K x d
    std::vector<Eigen::MatrixXd> atom_sigma;   // per atom: K x d
    std::vector<Eigen::MatrixXd> atom_labels;  // per atom: K x n_c
    Eigen::MatrixXd lambda;                    // (N_S + 1) x C

    bool all_finite() const;
};

/// Exact gradient of frozen_loss at the current dictionary.
DadilGrad frozen_grad(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                      const Gmm& target, const DadilConfig& cfg, const FrozenPlans& plans);

struct StepResult {
    Dictionary dict;
    double loss = 0.0;  // true loss of the returned dictionary
};

/// One plan-fixed gradient step with halving line search (at most 10
/// halvings): descend atoms (sigma re-floored, label rows projected back
/// onto the simplex) and Lambda rows (simplex projection); accept the
/// first candidate whose true loss does not increase, otherwise keep the
/// best seen, otherwise return the input unchanged. The returned loss is
/// never above the input's. Throws NumericError on non-finite gradients.
StepResult dadil_step(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                      const Gmm& target, const DadilConfig& cfg);

struct FitResult {
    Dictionary dict;
    std::vector<double> loss_trace;  // initial loss, then one entry per step
};

/// n_iters dadil_steps from a fresh init_dictionary.
FitResult fit_offline(const std::vector<LabeledGmm>& sources, const Gmm& target,
                      const DadilConfig& cfg);

struct MetricRecord {
    int step = 0;            // dictionary step index, counted from 1
    std::string phase;       // "stream" or "post"
    double recon_mw2_sq = 0; // MW2^2(target model, target reconstruction)
    double accuracy = std::numeric_limits<double>::quiet_NaN();  // NaN when not evaluated
    double wall_ms = 0.0;
};

struct OnlineResult {
    Dictionary dict;
    StreamState target_state;          // final online target model inside
    std::vector<MetricRecord> metrics; // one record per dictionary step
    int stream_end_step = 0;           // last step of the "stream" phase
    std::vector<double> loss_trace;    // initial loss, then one entry per step
};

/// Online variant: per batch, advance the target stream model one step and
/// run steps_per_batch dictionary updates against it; after the stream
/// ends, run post_stream_iters more updates against the final target
/// model. When eval data is supplied, every record carries MAP accuracy.
OnlineResult fit_online(const std::vector<LabeledGmm>& sources,
                        const std::vector<Eigen::MatrixXd>& target_batches,
                        const StreamConfig& stream_cfg, const DadilConfig& cfg,
                        const Eigen::MatrixXd* eval_X = nullptr,
                        const std::vector<int>* eval_y = nullptr);

/// The target-row reconstruction B(lambda_T, atoms).
LabeledGmm target_reconstruction(const Dictionary& dict, const DadilConfig& cfg);

/// MAP classification through the target reconstruction.
int target_classify(const Dictionary& dict, const DadilConfig& cfg,
                    const Eigen::RowVectorXd& x);
std::vector<int> target_classify(const Dictionary& dict, const DadilConfig& cfg,
                                 const Eigen::MatrixXd& X);

}  // namespace wgmm
