#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <stdexcept>
#include <string>
#include <vector>

namespace wgmm {

inline bool is_on_simplex(const Eigen::VectorXd& v, double tol = 1e-9) {
    if (v.size() == 0) return false;
    if ((v.array() < 0.0).any()) return false;
    return std::abs(v.sum() - 1.0) <= tol;
}

inline void check_simplex(const Eigen::VectorXd& v, const char* what, double tol = 1e-9) {
    if (!is_on_simplex(v, tol)) {
        throw std::invalid_argument(std::string(what) +
                                    ": entries must be nonnegative and sum to 1");
    }
}

/// Euclidean projection onto the probability simplex (sort-based).
/// One-hot inputs are fixed points, so hard assignments stay exactly
/// representable after projection.
inline Eigen::VectorXd project_to_simplex(const Eigen::VectorXd& v) {
    const Eigen::Index n = v.size();
    if (n == 0) throw std::invalid_argument("project_to_simplex: empty vector");
    std::vector<double> sorted(v.data(), v.data() + n);
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double running = 0.0;
    double theta = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        running += sorted[static_cast<std::size_t>(i)];
        const double candidate = (running - 1.0) / static_cast<double>(i + 1);
        if (sorted[static_cast<std::size_t>(i)] - candidate > 0.0) theta = candidate;
    }
    return (v.array() - theta).cwiseMax(0.0);
}

}  // namespace wgmm
