#include "wgmm/gmm.hpp"

#include "wgmm/rng.hpp"
#include "wgmm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace wgmm {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void check_data(const Gmm& gmm, const Eigen::MatrixXd& X) {
    if (X.rows() == 0) throw std::invalid_argument("empty data matrix");
    if (X.cols() != gmm.dim()) {
        throw std::invalid_argument("data dimension does not match mixture dimension");
    }
}

/// n x K matrix of log(pi_k) + log N(x_i; mu_k, diag(sigma_k^2)).
Eigen::MatrixXd weighted_log_gauss(const Gmm& gmm, const Eigen::MatrixXd& X) {
    const Eigen::Index n = X.rows();
    const Eigen::Index d = X.cols();
    const int K = gmm.num_components();
    Eigen::MatrixXd L(n, K);
    for (int k = 0; k < K; ++k) {
        const DiagGaussian& g = gmm.components[static_cast<std::size_t>(k)];
        const double log_norm =
            -0.5 * static_cast<double>(d) * kLog2Pi - g.sigma.array().log().sum();
        Eigen::ArrayXXd z = (X.rowwise() - g.mu.transpose()).array();
        z.rowwise() /= g.sigma.transpose().array();
        const double log_pi =
            gmm.weights[k] > 0.0 ? std::log(gmm.weights[k])
                                 : -std::numeric_limits<double>::infinity();
        L.col(k) = log_pi + log_norm - 0.5 * z.square().rowwise().sum();
    }
    return L;
}

/// Row-wise log-sum-exp.
Eigen::VectorXd log_sum_exp_rows(const Eigen::MatrixXd& L) {
    Eigen::VectorXd m = L.rowwise().maxCoeff();
    Eigen::VectorXd out(L.rows());
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        if (!std::isfinite(m[i])) {  // all components at -inf
            out[i] = m[i];
            continue;
        }
        out[i] = m[i] + std::log((L.row(i).array() - m[i]).exp().sum());
    }
    return out;
}

}  // namespace

void validate(const Gmm& gmm) {
    if (gmm.components.empty()) throw std::invalid_argument("Gmm: no components");
    if (gmm.weights.size() != gmm.num_components()) {
        throw std::invalid_argument("Gmm: weight count does not match component count");
    }
    check_simplex(gmm.weights, "Gmm: weights");
    const Eigen::Index d = gmm.components.front().dim();
    for (const DiagGaussian& g : gmm.components) {
        validate(g);
        if (g.dim() != d) throw std::invalid_argument("Gmm: components of mixed dimension");
    }
}

void validate(const LabeledGmm& gmm) {
    validate(gmm.base);
    if (gmm.labels.rows() != gmm.num_components()) {
        throw std::invalid_argument("LabeledGmm: label row count does not match components");
    }
    if (gmm.labels.cols() < 1) throw std::invalid_argument("LabeledGmm: no classes");
    for (Eigen::Index k = 0; k < gmm.labels.rows(); ++k) {
        check_simplex(gmm.labels.row(k).transpose(), "LabeledGmm: label row");
    }
}

Eigen::VectorXd log_densities(const Gmm& gmm, const Eigen::MatrixXd& X) {
    check_data(gmm, X);
    return log_sum_exp_rows(weighted_log_gauss(gmm, X));
}

double log_likelihood(const Gmm& gmm, const Eigen::MatrixXd& X) {
    return log_densities(gmm, X).mean();
}

Eigen::MatrixXd responsibilities(const Gmm& gmm, const Eigen::MatrixXd& X) {
    check_data(gmm, X);
    Eigen::MatrixXd L = weighted_log_gauss(gmm, X);
    Eigen::VectorXd lse = log_sum_exp_rows(L);
    return (L.colwise() - lse).array().exp();
}

Eigen::VectorXd sigma_floor_for(const Eigen::MatrixXd& X, double floor_scale) {
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd mean = X.colwise().mean();
    Eigen::VectorXd var = (X.rowwise() - mean.transpose()).array().square().colwise().sum() / n;
    Eigen::VectorXd sd = var.array().sqrt();
    for (Eigen::Index j = 0; j < sd.size(); ++j) {
        if (!(sd[j] > 0.0)) sd[j] = 1.0;
    }
    return floor_scale * sd;
}

namespace {

/// k-means++ seeding: means drawn from data points with D^2 weighting.
std::vector<Eigen::Index> kmeanspp_pick(const Eigen::MatrixXd& X, int k, Rng& rng) {
    const Eigen::Index n = X.rows();
    std::vector<Eigen::Index> picks;
    picks.reserve(static_cast<std::size_t>(k));
    picks.push_back(rng.uniform_int(static_cast<int>(n)));
    Eigen::VectorXd d2 =
        (X.rowwise() - X.row(picks.back())).rowwise().squaredNorm();
    for (int c = 1; c < k; ++c) {
        Eigen::Index pick;
        if (d2.sum() > 0.0) {
            pick = rng.categorical(d2);
        } else {
            pick = rng.uniform_int(static_cast<int>(n));  // all points coincide
        }
        picks.push_back(pick);
        d2 = d2.cwiseMin((X.rowwise() - X.row(pick)).rowwise().squaredNorm());
    }
    return picks;
}

Gmm moment_fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& floor) {
    const double n = static_cast<double>(X.rows());
    Eigen::VectorXd mean = X.colwise().mean();
    Eigen::VectorXd var = (X.rowwise() - mean.transpose()).array().square().colwise().sum() / n;
    Eigen::VectorXd sigma = var.array().sqrt().matrix().cwiseMax(floor);
    Gmm gmm;
    gmm.weights = Eigen::VectorXd::Ones(1);
    gmm.components.push_back(DiagGaussian{mean, sigma});
    return gmm;
}

}  // namespace

Gmm em_fit(const Eigen::MatrixXd& X, int k, std::uint64_t seed,
           const EmOptions& opts, EmTrace* trace) {
    if (k < 1) throw std::invalid_argument("em_fit: k must be >= 1");
    if (X.rows() < k) throw std::invalid_argument("em_fit: need at least k samples");
    if (X.cols() < 1) throw std::invalid_argument("em_fit: empty data");

    const Eigen::Index n = X.rows();
    const Eigen::VectorXd floor = sigma_floor_for(X, opts.floor_scale);

    if (k == 1) {
        Gmm gmm = moment_fit(X, floor);
        if (trace) trace->avg_log_likelihood.push_back(log_likelihood(gmm, X));
        return gmm;
    }

    Rng rng(seed);
    Eigen::VectorXd batch_sigma = sigma_floor_for(X, 1.0).cwiseMax(floor);

    Gmm gmm;
    gmm.weights = Eigen::VectorXd::Constant(k, 1.0 / k);
    for (Eigen::Index idx : kmeanspp_pick(X, k, rng)) {
        gmm.components.push_back(DiagGaussian{X.row(idx).transpose(), batch_sigma});
    }

    double prev_ll = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < opts.max_iter; ++it) {
        Eigen::MatrixXd L = weighted_log_gauss(gmm, X);
        Eigen::VectorXd lse = log_sum_exp_rows(L);
        const double avg_ll = lse.mean();
        if (trace) trace->avg_log_likelihood.push_back(avg_ll);
        if (it > 0 && avg_ll - prev_ll <= opts.tol * std::max(1.0, std::abs(prev_ll))) {
            break;
        }
        prev_ll = avg_ll;

        Eigen::MatrixXd R = (L.colwise() - lse).array().exp();
        Eigen::VectorXd mass = R.colwise().sum();

        bool reseeded = false;
        for (int c = 0; c < k; ++c) {
            DiagGaussian& g = gmm.components[static_cast<std::size_t>(c)];
            if (mass[c] < 1e-12 * static_cast<double>(n)) {
                // dead component: plant it on the worst-explained point
                Eigen::Index worst;
                lse.minCoeff(&worst);
                g.mu = X.row(worst).transpose();
                g.sigma = batch_sigma;
                gmm.weights[c] = 1.0 / static_cast<double>(n);
                if (trace) ++trace->reseeds;
                reseeded = true;
                continue;
            }
            Eigen::VectorXd mu = (R.col(c).transpose() * X).transpose() / mass[c];
            Eigen::VectorXd var =
                ((X.rowwise() - mu.transpose()).array().square().colwise() * R.col(c).array())
                    .colwise()
                    .sum()
                    .transpose() /
                mass[c];
            g.mu = mu;
            g.sigma = var.array().sqrt().matrix().cwiseMax(floor);
            gmm.weights[c] = mass[c] / static_cast<double>(n);
        }
        if (reseeded) gmm.weights /= gmm.weights.sum();
    }
    return gmm;
}

int param_count(const Gmm& gmm) {
    const int K = gmm.num_components();
    const int d = static_cast<int>(gmm.dim());
    return (K - 1) + 2 * K * d;
}

double bic(const Gmm& gmm, const Eigen::MatrixXd& X) {
    const double n = static_cast<double>(X.rows());
    return param_count(gmm) * std::log(n) - 2.0 * n * log_likelihood(gmm, X);
}

Gmm get_best_gmm(const Eigen::MatrixXd& X, int k1, int k2, std::uint64_t seed,
                 const EmOptions& opts) {
    if (k1 < 1 || k2 < k1) throw std::invalid_argument("get_best_gmm: need 1 <= k1 <= k2");
    const int n = static_cast<int>(X.rows());
    if (n < 1) throw std::invalid_argument("get_best_gmm: empty data");
    // short batches clamp the search range instead of failing
    const int hi = std::min(k2, n);
    const int lo = std::min(k1, hi);

    Gmm best;
    double best_bic = std::numeric_limits<double>::infinity();
    for (int k = lo; k <= hi; ++k) {
        Gmm candidate = em_fit(X, k, mix_seed(seed, static_cast<std::uint64_t>(k)), opts);
        const double score = bic(candidate, X);
        if (score < best_bic) {
            best_bic = score;
            best = std::move(candidate);
        }
    }
    return best;
}

LabeledGmm fit_labeled(const Eigen::MatrixXd& X, const std::vector<int>& y,
                       int k_per_class, std::uint64_t seed, const EmOptions& opts) {
    if (static_cast<Eigen::Index>(y.size()) != X.rows()) {
        throw std::invalid_argument("fit_labeled: label count does not match sample count");
    }
    if (y.empty()) throw std::invalid_argument("fit_labeled: empty data");
    if (k_per_class < 1) throw std::invalid_argument("fit_labeled: k_per_class must be >= 1");

    const int n_c = *std::max_element(y.begin(), y.end()) + 1;
    if (*std::min_element(y.begin(), y.end()) < 0) {
        throw std::invalid_argument("fit_labeled: negative class index");
    }

    const double n = static_cast<double>(X.rows());
    LabeledGmm out;
    std::vector<Eigen::VectorXd> weight_blocks;
    std::vector<Eigen::MatrixXd> label_blocks;
    for (int c = 0; c < n_c; ++c) {
        std::vector<Eigen::Index> rows;
        for (std::size_t i = 0; i < y.size(); ++i) {
            if (y[i] == c) rows.push_back(static_cast<Eigen::Index>(i));
        }
        if (rows.empty()) {
            throw std::invalid_argument("fit_labeled: class " + std::to_string(c) +
                                        " has no samples");
        }
        Eigen::MatrixXd Xc(rows.size(), X.cols());
        for (std::size_t i = 0; i < rows.size(); ++i) Xc.row(i) = X.row(rows[i]);

        Gmm fit = get_best_gmm(Xc, 1, k_per_class, mix_seed(seed, static_cast<std::uint64_t>(c)),
                               opts);
        const double freq = static_cast<double>(rows.size()) / n;
        weight_blocks.push_back(freq * fit.weights);
        Eigen::MatrixXd lab = Eigen::MatrixXd::Zero(fit.num_components(), n_c);
        lab.col(c).setOnes();
        label_blocks.push_back(lab);
        for (DiagGaussian& g : fit.components) out.base.components.push_back(std::move(g));
    }

    Eigen::Index total_k = 0;
    for (const Eigen::VectorXd& w : weight_blocks) total_k += w.size();
    out.base.weights.resize(total_k);
    out.labels.resize(total_k, n_c);
    Eigen::Index at = 0;
    for (std::size_t b = 0; b < weight_blocks.size(); ++b) {
        out.base.weights.segment(at, weight_blocks[b].size()) = weight_blocks[b];
        out.labels.middleRows(at, label_blocks[b].rows()) = label_blocks[b];
        at += weight_blocks[b].size();
    }
    return out;
}

int map_classify(const LabeledGmm& gmm, const Eigen::RowVectorXd& x) {
    Eigen::MatrixXd r = responsibilities(gmm.base, x);
    Eigen::RowVectorXd scores = r.row(0) * gmm.labels;
    int best = 0;
    for (int j = 1; j < scores.size(); ++j) {
        if (scores[j] > scores[best]) best = j;
    }
    return best;
}

std::vector<int> map_classify(const LabeledGmm& gmm, const Eigen::MatrixXd& X) {
    Eigen::MatrixXd r = responsibilities(gmm.base, X);
    Eigen::MatrixXd scores = r * gmm.labels;
    std::vector<int> out(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        int best = 0;
        for (int j = 1; j < scores.cols(); ++j) {
            if (scores(i, j) > scores(i, best)) best = j;
        }
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

namespace {

Eigen::MatrixXd sample_impl(const Gmm& gmm, int n, Rng& rng, std::vector<int>* comp_out) {
    if (n < 1) throw std::invalid_argument("sample: n must be >= 1");
    validate(gmm);
    const Eigen::Index d = gmm.dim();
    Eigen::MatrixXd X(n, d);
    for (int i = 0; i < n; ++i) {
        const int k = rng.categorical(gmm.weights);
        const DiagGaussian& g = gmm.components[static_cast<std::size_t>(k)];
        for (Eigen::Index j = 0; j < d; ++j) {
            X(i, j) = g.mu[j] + g.sigma[j] * rng.normal();
        }
        if (comp_out) comp_out->push_back(k);
    }
    return X;
}

}  // namespace

Eigen::MatrixXd sample(const Gmm& gmm, int n, std::uint64_t seed) {
    Rng rng(seed);
    return sample_impl(gmm, n, rng, nullptr);
}

std::pair<Eigen::MatrixXd, std::vector<int>> sample_labeled(const LabeledGmm& gmm,
                                                            int n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<int> comps;
    comps.reserve(static_cast<std::size_t>(n));
    Eigen::MatrixXd X = sample_impl(gmm.base, n, rng, &comps);
    std::vector<int> classes(comps.size());
    for (std::size_t i = 0; i < comps.size(); ++i) {
        classes[i] = rng.categorical(gmm.labels.row(comps[i]).transpose());
    }
    return {std::move(X), std::move(classes)};
}

}  // namespace wgmm
