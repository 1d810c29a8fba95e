#pragma once

#include "wgmm/gmm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace wgmm {

struct StreamConfig {
    int k_min = 5;    // component count of the initial fit
    int k_max = 15;   // hard cap kept after every step
    int delta_k = 3;  // largest model order tried per batch
    double forgetting = 1.0;  // 1 keeps the full history; (0,1) decays old mass
    EmOptions em;
};

void validate(const StreamConfig& cfg);

/// Running summary of a sample stream: the current mixture plus the
/// bookkeeping needed to continue (or resume) the run deterministically.
struct StreamState {
    Gmm model;
    std::int64_t n_seen = 0;  // total samples consumed
    double n_eff = 0.0;       // effective old-mass count (== n_seen when forgetting == 1)
    int step_index = 0;       // completed stream_step calls since init
    std::uint64_t seed = 0;
    StreamConfig config;
};

/// Fits the initial k_min-component model on the first batch.
/// Throws std::invalid_argument if the batch holds fewer than k_min samples.
StreamState init_stream(const Eigen::MatrixXd& X0, const StreamConfig& cfg,
                        std::uint64_t seed);

/// Concatenates two mixtures, scaling weights by their effective sample
/// counts: old by n_old/(n_old+n_batch), new by n_batch/(n_old+n_batch).
Gmm concat_components(const Gmm& old_model, double n_old, const Gmm& new_model,
                      double n_batch);

/// Greedy pairwise reduction to at most k_max components: repeatedly merge
/// the W2-nearest component pair (ties to the lexicographically smallest
/// index pair), replacing component i with the merge and deleting j.
Gmm compress_gmm(const Gmm& gmm, int k_max);

/// One online update: BIC-selected fit of the batch (model orders
/// 1..min(delta_k, batch size)), concatenation under sample-count
/// weighting, compression back to k_max.
void stream_step(StreamState& state, const Eigen::MatrixXd& X_t);

/// Runs init_stream on the first batch and stream_step on the rest.
Gmm online_gmm_fit(const std::vector<Eigen::MatrixXd>& batches,
                   const StreamConfig& cfg, std::uint64_t seed);

}  // namespace wgmm
