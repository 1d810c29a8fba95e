#include "doctest.h"

#include <cmath>
#include <numbers>

#include "support/oracles.hpp"
#include "wgmm/gmm.hpp"
#include "wgmm/rng.hpp"

using namespace wgmm;

namespace {

Gmm single1d(double mu, double sigma) {
    Gmm g;
    g.weights = Eigen::VectorXd::Ones(1);
    DiagGaussian c;
    c.mu = Eigen::VectorXd::Constant(1, mu);
    c.sigma = Eigen::VectorXd::Constant(1, sigma);
    g.components.push_back(c);
    return g;
}

// Two well-separated 1-d blobs at 0 and 100, sigma = 1, 100 points each.
Eigen::MatrixXd two_blobs(std::uint64_t seed) {
    Rng rng(seed);
    Eigen::MatrixXd X(200, 1);
    for (int i = 0; i < 100; ++i) X(i, 0) = rng.normal();
    for (int i = 100; i < 200; ++i) X(i, 0) = 100.0 + rng.normal();
    return X;
}

}  // namespace

TEST_CASE("log_likelihood of the standard normal at zero") {
    const Gmm g = single1d(0.0, 1.0);
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(1, 1);
    const double want = -0.5 * std::log(2.0 * std::numbers::pi);  // about -0.9189
    CHECK(log_likelihood(g, X) == doctest::Approx(want).epsilon(1e-12));
    CHECK(log_densities(g, X)[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("log_densities agrees with a direct two-component evaluation") {
    Gmm g = single1d(0.0, 1.0);
    DiagGaussian c2;
    c2.mu = Eigen::VectorXd::Constant(1, 3.0);
    c2.sigma = Eigen::VectorXd::Constant(1, 2.0);
    g.components.push_back(c2);
    g.weights.resize(2);
    g.weights << 0.3, 0.7;

    Eigen::MatrixXd X(1, 1);
    X << 1.0;
    const auto pdf = [](double x, double mu, double s) {
        return std::exp(-0.5 * (x - mu) * (x - mu) / (s * s)) /
               (s * std::sqrt(2.0 * std::numbers::pi));
    };
    const double want = std::log(0.3 * pdf(1, 0, 1) + 0.7 * pdf(1, 3, 2));
    CHECK(log_densities(g, X)[0] == doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("responsibilities rows sum to one") {
    Rng rng(31);
    const Gmm g = oracle::random_gmm(rng, 4, 2);
    Eigen::MatrixXd X(50, 2);
    for (int i = 0; i < 50; ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = 6.0 * (2.0 * rng.uniform() - 1.0);
    const Eigen::MatrixXd R = responsibilities(g, X);
    CHECK(R.rows() == 50);
    CHECK(R.cols() == 4);
    CHECK((R.rowwise().sum() - Eigen::VectorXd::Ones(50)).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(R.minCoeff() >= 0.0);
}

TEST_CASE("em_fit recovers two well-separated blobs") {
    const Eigen::MatrixXd X = two_blobs(42);
    const Gmm g = em_fit(X, 2, 7);
    REQUIRE(g.num_components() == 2);
    const int lo = g.components[0].mu[0] < g.components[1].mu[0] ? 0 : 1;
    const int hi = 1 - lo;
    CHECK(std::abs(g.components[lo].mu[0] - 0.0) <= 0.5);
    CHECK(std::abs(g.components[hi].mu[0] - 100.0) <= 0.5);
    CHECK(std::abs(g.weights[lo] - 0.5) <= 0.05);
    CHECK(std::abs(g.weights[hi] - 0.5) <= 0.05);
}

TEST_CASE("em_fit is deterministic in the seed") {
    const Eigen::MatrixXd X = two_blobs(43);
    const Gmm a = em_fit(X, 3, 11);
    const Gmm b = em_fit(X, 3, 11);
    REQUIRE(a.num_components() == b.num_components());
    CHECK(a.weights == b.weights);
    for (int k = 0; k < a.num_components(); ++k) {
        CHECK(a.components[k].mu == b.components[k].mu);
        CHECK(a.components[k].sigma == b.components[k].sigma);
    }
}

TEST_CASE("em_fit objective is non-decreasing") {
    const Eigen::MatrixXd X = two_blobs(44);
    EmTrace trace;
    (void)em_fit(X, 3, 5, {}, &trace);
    REQUIRE(trace.avg_log_likelihood.size() >= 1);
    for (std::size_t i = 1; i < trace.avg_log_likelihood.size(); ++i) {
        CHECK(trace.avg_log_likelihood[i] >= trace.avg_log_likelihood[i - 1] - 1e-10);
    }
}

TEST_CASE("em_fit k=1 matches the moment fit") {
    Rng rng(32);
    Eigen::MatrixXd X(80, 2);
    for (int i = 0; i < 80; ++i)
        for (int j = 0; j < 2; ++j) X(i, j) = 3.0 * rng.normal() + j;
    const Gmm g = em_fit(X, 1, 0);
    const Eigen::RowVectorXd mean = X.colwise().mean();
    Eigen::RowVectorXd var = (X.rowwise() - mean).array().square().colwise().mean();
    CHECK((g.components[0].mu.transpose() - mean).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((g.components[0].sigma.transpose().array() - var.array().sqrt())
              .abs()
              .maxCoeff() <= 1e-12);
    CHECK(g.weights[0] == 1.0);
}

TEST_CASE("em_fit input validation") {
    Eigen::MatrixXd X(3, 1);
    X << 0, 1, 2;
    CHECK_THROWS_AS(em_fit(X, 0, 0), std::invalid_argument);
    CHECK_THROWS_AS(em_fit(X, 4, 0), std::invalid_argument);  // k > n
    CHECK_THROWS_AS(em_fit(Eigen::MatrixXd(0, 1), 1, 0), std::invalid_argument);
}

TEST_CASE("parameter count and BIC arithmetic") {
    // K = 3, d = 2: (K - 1) + 2 K d = 2 + 12 = 14.
    Rng rng(33);
    CHECK(param_count(oracle::random_gmm(rng, 3, 2)) == 14);

    // K = 1, d = 1: 2 parameters, so bic = 2 log n - 2 n avg_ll.
    const Gmm g = single1d(0.5, 1.3);
    Eigen::MatrixXd X(100, 1);
    for (int i = 0; i < 100; ++i) X(i, 0) = rng.normal();
    const double avg_ll = log_likelihood(g, X);
    CHECK(param_count(g) == 2);
    CHECK(bic(g, X) ==
          doctest::Approx(2.0 * std::log(100.0) - 2.0 * 100.0 * avg_ll).epsilon(1e-12));
}

TEST_CASE("get_best_gmm picks three components for three blobs") {
    // Means 0, 50, 100 with sigma = 1: separation 50 sigma.
    Rng rng(34);
    Eigen::MatrixXd X(500, 1);
    for (int i = 0; i < 500; ++i) {
        const double center = 50.0 * static_cast<double>(i % 3);
        X(i, 0) = center + rng.normal();
    }
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Gmm g = get_best_gmm(X, 1, 6, seed);
        if (g.num_components() == 3) ++hits;
    }
    CHECK(hits >= 9);
}

TEST_CASE("get_best_gmm clamps the upper k to the sample count") {
    Eigen::MatrixXd X(3, 1);
    X << 0.0, 50.0, 100.0;
    const Gmm g = get_best_gmm(X, 1, 10, 0);
    CHECK(g.num_components() <= 3);
}

TEST_CASE("fit_labeled weights classes by frequency") {
    Rng rng(35);
    const int sizes[3] = {100, 200, 100};
    Eigen::MatrixXd X(400, 1);
    std::vector<int> y(400);
    int r = 0;
    for (int c = 0; c < 3; ++c) {
        for (int i = 0; i < sizes[c]; ++i, ++r) {
            X(r, 0) = 40.0 * c + rng.normal();
            y[r] = c;
        }
    }
    const LabeledGmm g = fit_labeled(X, y, 1, 9);
    REQUIRE(g.num_components() == 3);
    REQUIRE(g.num_classes() == 3);
    // One component per class: weights are the class frequencies and the
    // label rows are exactly one-hot.
    for (int k = 0; k < 3; ++k) {
        Eigen::Index cls = 0;
        g.labels.row(k).maxCoeff(&cls);
        CHECK(g.labels(k, cls) == 1.0);
        CHECK(g.base.weights[k] == doctest::Approx(sizes[cls] / 400.0).epsilon(1e-12));
    }
}

TEST_CASE("fit_labeled rejects gap-ridden labels") {
    Eigen::MatrixXd X(4, 1);
    X << 0, 1, 2, 3;
    std::vector<int> y{0, 0, 2, 2};  // class 1 missing
    CHECK_THROWS_AS(fit_labeled(X, y, 1, 0), std::invalid_argument);
}

TEST_CASE("map_classify picks the responsible component's class") {
    LabeledGmm g;
    g.base.weights = Eigen::VectorXd::Constant(2, 0.5);
    DiagGaussian a, b;
    a.mu = Eigen::VectorXd::Constant(1, 0.0);
    a.sigma = Eigen::VectorXd::Ones(1);
    b.mu = Eigen::VectorXd::Constant(1, 100.0);
    b.sigma = Eigen::VectorXd::Ones(1);
    g.base.components = {a, b};
    g.labels.resize(2, 2);
    g.labels << 1, 0, 0, 1;

    Eigen::RowVectorXd x(1);
    x << 1.0;
    CHECK(map_classify(g, x) == 0);
    x << 99.0;
    CHECK(map_classify(g, x) == 1);

    Eigen::MatrixXd X(2, 1);
    X << 1.0, 99.0;
    CHECK(map_classify(g, X) == std::vector<int>{0, 1});
}

TEST_CASE("sample mean honors the CLT bound") {
    const Gmm g = single1d(3.0, 2.0);
    const int n = 100000;
    const Eigen::MatrixXd X = sample(g, n, 123);
    REQUIRE(X.rows() == n);
    const double bound = 3.0 * 2.0 / std::sqrt(static_cast<double>(n));
    CHECK(std::abs(X.col(0).mean() - 3.0) <= bound);
    const double sd = std::sqrt((X.col(0).array() - X.col(0).mean()).square().mean());
    CHECK(std::abs(sd - 2.0) <= 0.05);
}

TEST_CASE("sample_labeled draws classes from the component label rows") {
    LabeledGmm g;
    g.base.weights = Eigen::VectorXd::Constant(2, 0.5);
    DiagGaussian a, b;
    a.mu = Eigen::VectorXd::Constant(1, 0.0);
    a.sigma = Eigen::VectorXd::Constant(1, 0.1);
    b.mu = Eigen::VectorXd::Constant(1, 100.0);
    b.sigma = Eigen::VectorXd::Constant(1, 0.1);
    g.base.components = {a, b};
    g.labels.resize(2, 2);
    g.labels << 1, 0, 0, 1;

    const auto [X, y] = sample_labeled(g, 2000, 77);
    REQUIRE(static_cast<int>(y.size()) == 2000);
    for (int i = 0; i < 2000; ++i) {
        CHECK(y[i] == (X(i, 0) > 50.0 ? 1 : 0));
    }
}
