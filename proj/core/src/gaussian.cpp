#include "wgmm/gaussian.hpp"

#include "wgmm/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace wgmm {

void validate(const DiagGaussian& g) {
    if (g.mu.size() < 1) {
        throw std::invalid_argument("DiagGaussian: dimension must be >= 1");
    }
    if (g.mu.size() != g.sigma.size()) {
        throw std::invalid_argument("DiagGaussian: mu and sigma sizes differ");
    }
    if (!(g.sigma.array() > 0.0).all()) {
        throw std::invalid_argument("DiagGaussian: sigma entries must be strictly positive");
    }
}

double w2_diag_sq(const DiagGaussian& a, const DiagGaussian& b) {
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("w2_diag: dimension mismatch");
    }
    return (a.mu - b.mu).squaredNorm() + (a.sigma - b.sigma).squaredNorm();
}

double w2_diag(const DiagGaussian& a, const DiagGaussian& b) {
    return std::sqrt(w2_diag_sq(a, b));
}

DiagGaussian gaussian_barycenter(const std::vector<DiagGaussian>& components,
                                 const Eigen::VectorXd& lambda) {
    if (components.empty()) {
        throw std::invalid_argument("gaussian_barycenter: empty component list");
    }
    if (lambda.size() != static_cast<Eigen::Index>(components.size())) {
        throw std::invalid_argument("gaussian_barycenter: lambda length mismatch");
    }
    check_simplex(lambda, "gaussian_barycenter: lambda");
    const Eigen::Index d = components.front().dim();
    DiagGaussian out{Eigen::VectorXd::Zero(d), Eigen::VectorXd::Zero(d)};
    for (std::size_t i = 0; i < components.size(); ++i) {
        if (components[i].dim() != d) {
            throw std::invalid_argument("gaussian_barycenter: dimension mismatch");
        }
        out.mu += lambda[static_cast<Eigen::Index>(i)] * components[i].mu;
        out.sigma += lambda[static_cast<Eigen::Index>(i)] * components[i].sigma;
    }
    return out;
}

std::pair<double, DiagGaussian> gauss_merge(double w_i, double w_j,
                                            const DiagGaussian& a,
                                            const DiagGaussian& b) {
    if (!(w_i > 0.0) || !(w_j > 0.0)) {
        throw std::invalid_argument("gauss_merge: weights must be positive");
    }
    if (a.dim() != b.dim()) {
        throw std::invalid_argument("gauss_merge: dimension mismatch");
    }
    const double total = w_i + w_j;
    const double l1 = w_i / total;
    const double l2 = w_j / total;
    DiagGaussian merged{l1 * a.mu + l2 * b.mu, l1 * a.sigma + l2 * b.sigma};
    return {total, merged};
}

}  // namespace wgmm
