#pragma once

#include "wgmm/gmm.hpp"

#include <Eigen/Dense>

namespace wgmm {

/// Coupling between two discrete marginals, with the cost it pays.
struct TransportPlan {
    Eigen::MatrixXd omega;    // K_P x K_Q, nonnegative; row sums p, column sums q
    double cost_value = 0.0;  // sum_ij omega(i,j) * cost(i,j)
};

/// Exact optimal transport between small discrete marginals via the
/// transportation simplex with Bland-style anti-cycling. Returns a vertex
/// of the transportation polytope: at most K_P + K_Q - 1 nonzeros, with
/// final flows recomputed from the basis tree so marginal residuals sit at
/// machine precision. Zero-mass marginal entries are dropped before the
/// solve and reinserted as zero rows/columns.
///
/// Throws std::invalid_argument on shape/simplex violations and
/// NumericError on non-finite costs or pivot-limit breakdown.
TransportPlan solve_exact_ot(const Eigen::MatrixXd& cost, const Eigen::VectorXd& p,
                             const Eigen::VectorXd& q);

/// Pairwise squared Gaussian W2 ground cost between component lists.
Eigen::MatrixXd w2_cost_matrix(const Gmm& P, const Gmm& Q);

/// Ground cost with the supervised label term:
/// w2² + beta * ||label_P - label_Q||².
Eigen::MatrixXd smw2_cost_matrix(const LabeledGmm& P, const LabeledGmm& Q, double beta);

/// Mixture-Wasserstein coupling: exact OT between the component weights
/// under the pairwise Gaussian W2² ground cost. cost_value is MW2².
TransportPlan mw2_plan(const Gmm& P, const Gmm& Q);

/// Squared mixture-Wasserstein distance MW2².
double mw2_sq(const Gmm& P, const Gmm& Q);

/// Supervised mixture-Wasserstein coupling (SMW2²) with label-aware
/// ground cost.
TransportPlan smw2_plan(const LabeledGmm& P, const LabeledGmm& Q, double beta);

/// Squared supervised mixture-Wasserstein distance SMW2².
double smw2_sq(const LabeledGmm& P, const LabeledGmm& Q, double beta);

}  // namespace wgmm
