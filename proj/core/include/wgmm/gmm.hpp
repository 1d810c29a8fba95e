#pragma once

#include "wgmm/gaussian.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <utility>
#include <vector>

namespace wgmm {

/// Gaussian mixture with axis-aligned components.
struct Gmm {
    Eigen::VectorXd weights;               // simplex over components
    std::vector<DiagGaussian> components;

    int num_components() const { return static_cast<int>(components.size()); }
    Eigen::Index dim() const { return components.empty() ? 0 : components.front().dim(); }
};

void validate(const Gmm& gmm);

/// Mixture whose components carry class-probability rows; the basis of
/// MAP classification.
struct LabeledGmm {
    Gmm base;
    Eigen::MatrixXd labels;  // K x n_c, each row on the simplex

    int num_components() const { return base.num_components(); }
    Eigen::Index dim() const { return base.dim(); }
    int num_classes() const { return static_cast<int>(labels.cols()); }
};

void validate(const LabeledGmm& gmm);

/// Per-sample log densities log sum_k pi_k N(x_i; mu_k, diag(sigma_k^2)),
/// computed with log-sum-exp stabilization.
Eigen::VectorXd log_densities(const Gmm& gmm, const Eigen::MatrixXd& X);

/// Average per-sample log likelihood (1/n) sum_i log p(x_i).
double log_likelihood(const Gmm& gmm, const Eigen::MatrixXd& X);

/// Posterior component responsibilities, n x K, rows summing to 1.
Eigen::MatrixXd responsibilities(const Gmm& gmm, const Eigen::MatrixXd& X);

struct EmOptions {
    double tol = 1e-4;          // relative average log-likelihood improvement
    int max_iter = 200;
    double floor_scale = 1e-6;  // sigma floor = floor_scale * per-dim data std
};

struct EmTrace {
    std::vector<double> avg_log_likelihood;  // EM objective per iteration
    int reseeds = 0;                         // dead components re-seeded
};

/// Per-dimension sigma floor for a batch: floor_scale times the data
/// standard deviation, falling back to floor_scale itself on flat dimensions.
Eigen::VectorXd sigma_floor_for(const Eigen::MatrixXd& X, double floor_scale);

/// Fits a k-component mixture by EM with k-means++ seeding. Deterministic
/// given seed. k == 1 is the closed-form moment fit.
Gmm em_fit(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
           const EmOptions& opts = {}, EmTrace* trace = nullptr);

/// Free parameter count of an axis-aligned mixture: (K - 1) + 2 K d.
int param_count(const Gmm& gmm);

/// Bayesian Information Criterion: param_count * log(n) - 2 * n * avg loglik.
double bic(const Gmm& gmm, const Eigen::MatrixXd& X);

/// Fits EM for each k in {k1..k2} (k2 clamped to the sample count) and
/// returns the fit with the lowest BIC; ties go to the smaller k.
Gmm get_best_gmm(const Eigen::MatrixXd& X, int k1, int k2, std::uint64_t seed,
                 const EmOptions& opts = {});

/// Fits one BIC-selected mixture per class on the class-conditional data,
/// scales component weights by class frequency and attaches one-hot label
/// rows. Class count is max(y) + 1.
LabeledGmm fit_labeled(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       int k_per_class, std::uint64_t seed,
                       const EmOptions& opts = {});

/// MAP class prediction: argmax_j sum_k labels(k, j) r_k(x), ties toward
/// the smallest class index.
int map_classify(const LabeledGmm& gmm, const Eigen::RowVectorXd& x);
std::vector<int> map_classify(const LabeledGmm& gmm, const Eigen::MatrixXd& X);

/// Draws n points (component index from the weights, then a Gaussian draw).
Eigen::MatrixXd sample(const Gmm& gmm, int n, std::uint64_t seed);

/// As sample(), additionally drawing a class per point from the chosen
/// component's label row.
std::pair<Eigen::MatrixXd, std::vector<int>> sample_labeled(const LabeledGmm& gmm,
                                                            int n, std::uint64_t seed);

}  // namespace wgmm
