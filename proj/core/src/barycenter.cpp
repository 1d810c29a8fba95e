#include "wgmm/barycenter.hpp"

#include "wgmm/rng.hpp"
#include "wgmm/simplex.hpp"
#include "wgmm/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace wgmm {

namespace {

struct AtomParams {
    Eigen::MatrixXd mu;      // K_c x d
    Eigen::MatrixXd sigma;   // K_c x d
    Eigen::MatrixXd labels;  // K_c x n_c
};

AtomParams stack_params(const LabeledGmm& atom) {
    const int K = atom.num_components();
    const Eigen::Index d = atom.dim();
    AtomParams out;
    out.mu.resize(K, d);
    out.sigma.resize(K, d);
    for (int j = 0; j < K; ++j) {
        out.mu.row(j) = atom.base.components[static_cast<std::size_t>(j)].mu.transpose();
        out.sigma.row(j) = atom.base.components[static_cast<std::size_t>(j)].sigma.transpose();
    }
    out.labels = atom.labels;
    return out;
}

Eigen::RowVectorXd renorm_label_row(const Eigen::RowVectorXd& row) {
    Eigen::RowVectorXd v = row.cwiseMax(0.0);
    const double s = v.sum();
    if (s > 0.0) return v / s;
    return Eigen::RowVectorXd::Constant(row.size(), 1.0 / static_cast<double>(row.size()));
}

LabeledGmm from_stacked(const Eigen::MatrixXd& mu, const Eigen::MatrixXd& sigma,
                        const Eigen::MatrixXd& labels) {
    LabeledGmm out;
    const int K = static_cast<int>(mu.rows());
    out.base.weights = Eigen::VectorXd::Constant(K, 1.0 / static_cast<double>(K));
    out.base.components.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        out.base.components.push_back(
            DiagGaussian{mu.row(k).transpose(), sigma.row(k).transpose()});
    }
    out.labels = labels;
    return out;
}

}  // namespace

BarycenterResult mixture_barycenter(const Eigen::VectorXd& lambda,
                                    const std::vector<LabeledGmm>& atoms,
                                    const BarycenterConfig& cfg, double beta) {
    if (atoms.empty()) throw std::invalid_argument("mixture_barycenter: no atoms");
    if (lambda.size() != static_cast<Eigen::Index>(atoms.size())) {
        throw std::invalid_argument("mixture_barycenter: lambda length does not match atoms");
    }
    check_simplex(lambda, "mixture_barycenter: lambda");
    if (cfg.k_b < 1) throw std::invalid_argument("mixture_barycenter: k_b must be >= 1");
    if (cfg.max_fp_iters < 1) {
        throw std::invalid_argument("mixture_barycenter: max_fp_iters must be >= 1");
    }
    if (!(cfg.fp_tol > 0.0)) throw std::invalid_argument("mixture_barycenter: fp_tol must be > 0");
    if (beta < 0.0) throw std::invalid_argument("mixture_barycenter: beta must be nonnegative");

    const int C = static_cast<int>(atoms.size());
    const Eigen::Index d = atoms.front().dim();
    const int n_c = atoms.front().num_classes();
    for (const LabeledGmm& atom : atoms) {
        validate(atom);
        if (atom.dim() != d || atom.num_classes() != n_c) {
            throw std::invalid_argument("mixture_barycenter: atoms disagree on d or class count");
        }
    }

    std::vector<AtomParams> params;
    params.reserve(atoms.size());
    for (const LabeledGmm& atom : atoms) params.push_back(stack_params(atom));

    // Systematic lambda-proportional draw of initial components. The single
    // component cursor shared across atoms makes a one-hot lambda (with
    // k_b equal to that atom's K) an exact copy of the atom.
    const int K_B = cfg.k_b;
    Eigen::MatrixXd mu(K_B, d);
    Eigen::MatrixXd sigma(K_B, d);
    Eigen::MatrixXd labels(K_B, n_c);
    {
        Rng rng(mix_seed(cfg.seed, 0x6a7cULL));
        const double u = rng.uniform();
        int cursor = 0;
        for (int k = 0; k < K_B; ++k) {
            const double pos = (static_cast<double>(k) + u) / static_cast<double>(K_B);
            int c = 0;
            double cum = lambda[0];
            while (c < C - 1 && pos >= cum) {
                ++c;
                cum += lambda[c];
            }
            const int Kc = atoms[static_cast<std::size_t>(c)].num_components();
            const int j = cursor % Kc;
            ++cursor;
            mu.row(k) = params[static_cast<std::size_t>(c)].mu.row(j);
            sigma.row(k) = params[static_cast<std::size_t>(c)].sigma.row(j);
            labels.row(k) = params[static_cast<std::size_t>(c)].labels.row(j);
        }
    }

    BarycenterResult result;
    LabeledGmm B = from_stacked(mu, sigma, labels);

    auto solve_all = [&](const LabeledGmm& current,
                         std::vector<Eigen::MatrixXd>& omegas) -> double {
        omegas.resize(atoms.size());
        double objective = 0.0;
        for (int c = 0; c < C; ++c) {
            TransportPlan plan = smw2_plan(current, atoms[static_cast<std::size_t>(c)], beta);
            objective += lambda[c] * plan.cost_value;
            omegas[static_cast<std::size_t>(c)] = std::move(plan.omega);
        }
        return objective;
    };

    std::vector<Eigen::MatrixXd> omegas;
    result.objective_trace.push_back(solve_all(B, omegas));

    for (int iter = 0; iter < cfg.max_fp_iters; ++iter) {
        // apply the coupling-weighted parameter average
        Eigen::MatrixXd new_mu = Eigen::MatrixXd::Zero(K_B, d);
        Eigen::MatrixXd new_sigma = Eigen::MatrixXd::Zero(K_B, d);
        Eigen::MatrixXd new_labels = Eigen::MatrixXd::Zero(K_B, n_c);
        std::vector<Eigen::MatrixXd> maps(atoms.size());
        for (int c = 0; c < C; ++c) {
            maps[static_cast<std::size_t>(c)] =
                static_cast<double>(K_B) * omegas[static_cast<std::size_t>(c)];
            const Eigen::MatrixXd& T = maps[static_cast<std::size_t>(c)];
            if (lambda[c] == 0.0) continue;
            new_mu += lambda[c] * (T * params[static_cast<std::size_t>(c)].mu);
            new_sigma += lambda[c] * (T * params[static_cast<std::size_t>(c)].sigma);
            new_labels += lambda[c] * (T * params[static_cast<std::size_t>(c)].labels);
        }
        for (int k = 0; k < K_B; ++k) {
            new_labels.row(k) = renorm_label_row(new_labels.row(k));
        }

        double delta = (new_mu - mu).cwiseAbs().maxCoeff();
        delta = std::max(delta, (new_sigma - sigma).cwiseAbs().maxCoeff());
        delta = std::max(delta, (new_labels - labels).cwiseAbs().maxCoeff());

        mu = new_mu;
        sigma = new_sigma;
        labels = new_labels;
        B = from_stacked(mu, sigma, labels);
        result.transport_maps = std::move(maps);
        result.iters = iter + 1;

        result.objective_trace.push_back(solve_all(B, omegas));
        if (delta < cfg.fp_tol) break;
    }

    result.barycenter = std::move(B);
    result.objective = result.objective_trace.back();
    return result;
}

}  // namespace wgmm
