#include "doctest.h"

#include <cmath>

#include "support/oracles.hpp"
#include "wgmm/barycenter.hpp"
#include "wgmm/transport.hpp"

using namespace wgmm;

namespace {

LabeledGmm single1d(double mu, double sigma) {
    LabeledGmm g;
    g.base.weights = Eigen::VectorXd::Ones(1);
    DiagGaussian c;
    c.mu = Eigen::VectorXd::Constant(1, mu);
    c.sigma = Eigen::VectorXd::Constant(1, sigma);
    g.base.components.push_back(c);
    g.labels = Eigen::MatrixXd::Ones(1, 1);
    return g;
}

// Reconstruction the caller can replay from the returned maps:
// component k = sum_c lambda_c sum_j maps[c](k, j) * atom_c[j].
LabeledGmm apply_maps(const Eigen::VectorXd& lambda,
                      const std::vector<LabeledGmm>& atoms,
                      const std::vector<Eigen::MatrixXd>& maps) {
    const int k_b = static_cast<int>(maps.front().rows());
    const Eigen::Index d = atoms.front().dim();
    const int n_c = atoms.front().num_classes();
    LabeledGmm out;
    out.base.weights = Eigen::VectorXd::Constant(k_b, 1.0 / k_b);
    out.labels = Eigen::MatrixXd::Zero(k_b, n_c);
    for (int k = 0; k < k_b; ++k) {
        DiagGaussian comp;
        comp.mu = Eigen::VectorXd::Zero(d);
        comp.sigma = Eigen::VectorXd::Zero(d);
        for (std::size_t c = 0; c < atoms.size(); ++c) {
            for (int j = 0; j < atoms[c].num_components(); ++j) {
                const double w = lambda[static_cast<Eigen::Index>(c)] * maps[c](k, j);
                comp.mu += w * atoms[c].base.components[j].mu;
                comp.sigma += w * atoms[c].base.components[j].sigma;
                out.labels.row(k) += w * atoms[c].labels.row(j);
            }
        }
        out.base.components.push_back(comp);
    }
    return out;
}

}  // namespace

TEST_CASE("two single-Gaussian atoms reduce to the Gaussian barycenter") {
    const std::vector<LabeledGmm> atoms{single1d(0.0, 1.0), single1d(4.0, 3.0)};
    Eigen::VectorXd lambda(2);
    lambda << 0.5, 0.5;
    BarycenterConfig cfg;  // k_b = 1
    const BarycenterResult res = mixture_barycenter(lambda, atoms, cfg, 0.0);
    CHECK(res.barycenter.base.components[0].mu[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.barycenter.base.components[0].sigma[0] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(res.barycenter.base.weights[0] == 1.0);
}

TEST_CASE("one-hot lambda with matching order copies the atom") {
    Rng rng(41);
    const LabeledGmm atom = oracle::random_labeled_gmm(rng, 4, 2, 3);
    // Force uniform weights: barycenters always carry uniform weights, so
    // exact self-reproduction needs a uniform-weight atom.
    LabeledGmm uniform_atom = atom;
    uniform_atom.base.weights = Eigen::VectorXd::Constant(4, 0.25);

    const LabeledGmm other = oracle::random_labeled_gmm(rng, 4, 2, 3);
    Eigen::VectorXd lambda(2);
    lambda << 1.0, 0.0;
    BarycenterConfig cfg;
    cfg.k_b = 4;
    const BarycenterResult res =
        mixture_barycenter(lambda, {uniform_atom, other}, cfg, 1.0);

    // Up to component order, each atom component appears exactly once.
    std::vector<bool> used(4, false);
    for (int k = 0; k < 4; ++k) {
        bool found = false;
        for (int j = 0; j < 4 && !found; ++j) {
            if (used[j]) continue;
            const bool mu_eq = (res.barycenter.base.components[k].mu -
                                uniform_atom.base.components[j].mu)
                                   .cwiseAbs()
                                   .maxCoeff() <= 1e-12;
            const bool sg_eq = (res.barycenter.base.components[k].sigma -
                                uniform_atom.base.components[j].sigma)
                                   .cwiseAbs()
                                   .maxCoeff() <= 1e-12;
            if (mu_eq && sg_eq) {
                used[j] = true;
                found = true;
            }
        }
        CHECK(found);
    }
    CHECK(res.objective <= 1e-12);
}

TEST_CASE("objective trace is non-increasing") {
    Rng rng(42);
    for (int t = 0; t < 10; ++t) {
        std::vector<LabeledGmm> atoms;
        const int n_atoms = 2 + rng.uniform_int(2);
        for (int c = 0; c < n_atoms; ++c)
            atoms.push_back(oracle::random_labeled_gmm(rng, 1 + rng.uniform_int(4), 2, 3));
        const Eigen::VectorXd lambda = oracle::random_simplex(rng, n_atoms);
        BarycenterConfig cfg;
        cfg.k_b = 3;
        cfg.seed = 100 + t;
        const BarycenterResult res = mixture_barycenter(lambda, atoms, cfg, 0.5);
        REQUIRE(res.objective_trace.size() >= 1);
        for (std::size_t i = 1; i < res.objective_trace.size(); ++i) {
            CHECK(res.objective_trace[i] <= res.objective_trace[i - 1] + 1e-10);
        }
        CHECK(res.objective == res.objective_trace.back());
    }
}

TEST_CASE("returned maps reproduce the barycenter exactly") {
    Rng rng(43);
    for (int t = 0; t < 8; ++t) {
        std::vector<LabeledGmm> atoms;
        for (int c = 0; c < 3; ++c)
            atoms.push_back(oracle::random_labeled_gmm(rng, 2 + rng.uniform_int(3), 2, 2));
        const Eigen::VectorXd lambda = oracle::random_simplex(rng, 3);
        BarycenterConfig cfg;
        cfg.k_b = 3;
        cfg.seed = 7 + t;
        const BarycenterResult res = mixture_barycenter(lambda, atoms, cfg, 1.0);

        REQUIRE(res.transport_maps.size() == 3);
        for (std::size_t c = 0; c < 3; ++c) {
            // Row-stochastic: each barycenter component distributes its
            // mass across atom components.
            CHECK((res.transport_maps[c].rowwise().sum() -
                   Eigen::VectorXd::Ones(cfg.k_b))
                      .cwiseAbs()
                      .maxCoeff() <= 1e-9);
            CHECK(res.transport_maps[c].minCoeff() >= 0.0);
        }

        const LabeledGmm replay = apply_maps(lambda, atoms, res.transport_maps);
        for (int k = 0; k < cfg.k_b; ++k) {
            CHECK((replay.base.components[k].mu -
                   res.barycenter.base.components[k].mu)
                      .cwiseAbs()
                      .maxCoeff() <= 1e-12);
            CHECK((replay.base.components[k].sigma -
                   res.barycenter.base.components[k].sigma)
                      .cwiseAbs()
                      .maxCoeff() <= 1e-12);
        }
        CHECK((replay.labels - res.barycenter.labels).cwiseAbs().maxCoeff() <= 1e-9);
    }
}

TEST_CASE("barycenter of identical atoms is that atom") {
    Rng rng(44);
    LabeledGmm atom = oracle::random_labeled_gmm(rng, 3, 2, 2);
    atom.base.weights = Eigen::VectorXd::Constant(3, 1.0 / 3.0);
    Eigen::VectorXd lambda(2);
    lambda << 0.4, 0.6;
    BarycenterConfig cfg;
    cfg.k_b = 3;
    const BarycenterResult res = mixture_barycenter(lambda, {atom, atom}, cfg, 2.0);
    CHECK(res.objective <= 1e-10);
}

TEST_CASE("barycenter input validation") {
    const LabeledGmm atom = single1d(0.0, 1.0);
    Eigen::VectorXd lambda(1);
    lambda << 1.0;
    BarycenterConfig cfg;

    SUBCASE("lambda size mismatch") {
        Eigen::VectorXd bad(2);
        bad << 0.5, 0.5;
        CHECK_THROWS_AS(mixture_barycenter(bad, {atom}, cfg, 0.0), std::invalid_argument);
    }
    SUBCASE("lambda off the simplex") {
        Eigen::VectorXd bad(1);
        bad << 0.7;
        CHECK_THROWS_AS(mixture_barycenter(bad, {atom}, cfg, 0.0), std::invalid_argument);
    }
    SUBCASE("no atoms") {
        CHECK_THROWS_AS(mixture_barycenter(Eigen::VectorXd(), {}, cfg, 0.0),
                        std::invalid_argument);
    }
    SUBCASE("bad config") {
        BarycenterConfig bad = cfg;
        bad.k_b = 0;
        CHECK_THROWS_AS(mixture_barycenter(lambda, {atom}, bad, 0.0), std::invalid_argument);
        bad = cfg;
        bad.max_fp_iters = 0;
        CHECK_THROWS_AS(mixture_barycenter(lambda, {atom}, bad, 0.0), std::invalid_argument);
    }
    SUBCASE("negative beta") {
        CHECK_THROWS_AS(mixture_barycenter(lambda, {atom}, cfg, -1.0), std::invalid_argument);
    }
    SUBCASE("mismatched class counts across atoms") {
        Rng rng(45);
        const LabeledGmm a = oracle::random_labeled_gmm(rng, 2, 1, 2);
        const LabeledGmm b = oracle::random_labeled_gmm(rng, 2, 1, 3);
        Eigen::VectorXd l2(2);
        l2 << 0.5, 0.5;
        CHECK_THROWS_AS(mixture_barycenter(l2, {a, b}, cfg, 0.0), std::invalid_argument);
    }
}
