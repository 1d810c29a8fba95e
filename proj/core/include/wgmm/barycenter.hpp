#pragma once

#include "wgmm/gmm.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace wgmm {

struct BarycenterConfig {
    int k_b = 1;             // component count of the barycenter
    int max_fp_iters = 50;   // fixed-point sweep cap
    double fp_tol = 1e-5;    // stop when no parameter moves more than this
    std::uint64_t seed = 0;  // drives the initial component draw
};

/// A mixture-Wasserstein barycenter together with the transport maps that
/// produced it: barycenter component k equals
///   sum_c lambda[c] * sum_j transport_maps[c](k, j) * (atom c, component j)
/// exactly, which is what the dictionary's plan-fixed gradients rely on.
struct BarycenterResult {
    LabeledGmm barycenter;                         // k_b components, uniform weights
    std::vector<Eigen::MatrixXd> transport_maps;   // per atom: k_b x K_c, row-stochastic
    std::vector<double> objective_trace;           // sum_c lambda_c * SMW2^2 per sweep
    double objective = 0.0;                        // trace.back()
    int iters = 0;                                 // completed update sweeps
};

/// Approximately minimizes sum_c lambda[c] * SMW2^2(B, atoms[c]) over a
/// k_b-component uniform-weight labeled mixture by fixed-point iteration:
/// solve the component couplings, then replace every barycenter component
/// by the coupling-weighted average of atom components (label rows clipped
/// back onto the simplex). Initialization draws component parameters from
/// the atoms proportionally to lambda (systematic sampling, seeded).
/// The objective trace is non-increasing.
BarycenterResult mixture_barycenter(const Eigen::VectorXd& lambda,
                                    const std::vector<LabeledGmm>& atoms,
                                    const BarycenterConfig& cfg, double beta);

}  // namespace wgmm
