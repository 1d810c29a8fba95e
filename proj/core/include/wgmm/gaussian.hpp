#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace wgmm {

/// Axis-aligned Gaussian, parametrized by mean and per-dimension standard
/// deviation. Under the 2-Wasserstein metric this family is flat: distances,
/// barycenters and merges all reduce to Euclidean operations on (mu, sigma).
struct DiagGaussian {
    Eigen::VectorXd mu;
    Eigen::VectorXd sigma;  // entries strictly positive

    Eigen::Index dim() const { return mu.size(); }
};

/// Throws std::invalid_argument if sizes disagree or sigma has a
/// non-positive entry.
void validate(const DiagGaussian& g);

/// Squared 2-Wasserstein distance between axis-aligned Gaussians:
/// ||mu_a - mu_b||^2 + ||sigma_a - sigma_b||^2.
double w2_diag_sq(const DiagGaussian& a, const DiagGaussian& b);

/// 2-Wasserstein distance; the Euclidean metric on (mu, sigma).
double w2_diag(const DiagGaussian& a, const DiagGaussian& b);

/// Wasserstein barycenter of axis-aligned Gaussians with simplex weights
/// lambda: the entrywise weighted average of means and standard deviations.
DiagGaussian gaussian_barycenter(const std::vector<DiagGaussian>& components,
                                 const Eigen::VectorXd& lambda);

/// Merges two weighted components into one. The merged weight is the exact
/// sum w_i + w_j; the merged parameters are the Wasserstein barycenter at
/// the relative weights (w_i, w_j) / (w_i + w_j).
std::pair<double, DiagGaussian> gauss_merge(double w_i, double w_j,
                                            const DiagGaussian& a,
                                            const DiagGaussian& b);

}  // namespace wgmm
