// Microbenchmarks for the library's hot paths: EM fitting, the exact OT
// solver, mixture distances, one stream update, the barycenter fixed point,
// and one dictionary gradient step. All inputs are seeded so numbers are
// comparable across runs and machines.

#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "wgmm/barycenter.hpp"
#include "wgmm/data.hpp"
#include "wgmm/dictionary.hpp"
#include "wgmm/gmm.hpp"
#include "wgmm/rng.hpp"
#include "wgmm/stream.hpp"
#include "wgmm/transport.hpp"

namespace {

using namespace wgmm;

Eigen::VectorXd random_simplex(Rng& rng, int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = -std::log(1.0 - rng.uniform());
    return v / v.sum();
}

DiagGaussian random_gaussian(Rng& rng, int d) {
    DiagGaussian g;
    g.mu.resize(d);
    g.sigma.resize(d);
    for (int i = 0; i < d; ++i) {
        g.mu[i] = 5.0 * (2.0 * rng.uniform() - 1.0);
        g.sigma[i] = 0.3 + 2.2 * rng.uniform();
    }
    return g;
}

Gmm random_gmm(Rng& rng, int k, int d) {
    Gmm g;
    g.weights = random_simplex(rng, k);
    for (int i = 0; i < k; ++i) g.components.push_back(random_gaussian(rng, d));
    return g;
}

LabeledGmm random_labeled_gmm(Rng& rng, int k, int d, int n_c) {
    LabeledGmm g;
    g.base = random_gmm(rng, k, d);
    g.labels = Eigen::MatrixXd::Zero(k, n_c);
    for (int i = 0; i < k; ++i) g.labels(i, i % n_c) = 1.0;
    return g;
}

// EM fit of k components on 1000 two-dimensional samples.
void BM_EmFit(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    Gmm truth;
    Rng rng(11);
    truth.weights = Eigen::VectorXd::Constant(4, 0.25);
    for (int i = 0; i < 4; ++i) truth.components.push_back(random_gaussian(rng, 2));
    const Eigen::MatrixXd X = sample(truth, 1000, 5);
    for (auto _ : state) {
        const Gmm fit = em_fit(X, k, 3);
        benchmark::DoNotOptimize(fit.weights.sum());
    }
}
BENCHMARK(BM_EmFit)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

// Exact OT between two k-point marginals (the inner solver of every
// mixture distance).
void BM_ExactOt(benchmark::State& state) {
    const int k = static_cast<int>(state.range(0));
    Rng rng(22);
    Eigen::MatrixXd cost(k, k);
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) cost(i, j) = 5.0 * rng.uniform();
    const Eigen::VectorXd p = random_simplex(rng, k);
    const Eigen::VectorXd q = random_simplex(rng, k);
    for (auto _ : state) {
        const TransportPlan plan = solve_exact_ot(cost, p, q);
        benchmark::DoNotOptimize(plan.cost_value);
    }
}
BENCHMARK(BM_ExactOt)->Arg(5)->Arg(15)->Arg(30);

// Mixture-Wasserstein distance between two 15-component mixtures in d=8
// (pairwise closed-form costs plus one exact OT solve).
void BM_Mw2Sq(benchmark::State& state) {
    Rng rng(33);
    const Gmm a = random_gmm(rng, 15, 8);
    const Gmm b = random_gmm(rng, 15, 8);
    for (auto _ : state) {
        benchmark::DoNotOptimize(mw2_sq(a, b));
    }
}
BENCHMARK(BM_Mw2Sq);

// One online update: BIC fit on the batch, concatenation, compression back
// under the component cap. Measured on a saturated state (K at the cap).
void BM_StreamStep(benchmark::State& state) {
    const int batch_n = static_cast<int>(state.range(0));
    Rng rng(44);
    Gmm truth;
    truth.weights = Eigen::VectorXd::Constant(4, 0.25);
    for (int i = 0; i < 4; ++i) truth.components.push_back(random_gaussian(rng, 2));
    const Eigen::MatrixXd X = sample(truth, 4 * batch_n, 6);
    const auto batches = as_stream(X, batch_n);
    StreamConfig cfg;
    StreamState base = init_stream(batches[0], cfg, 9);
    for (std::size_t b = 1; b < batches.size(); ++b) stream_step(base, batches[b]);
    const Eigen::MatrixXd fresh = sample(truth, batch_n, 7);
    for (auto _ : state) {
        StreamState s = base;
        stream_step(s, fresh);
        benchmark::DoNotOptimize(s.model.weights.sum());
    }
}
BENCHMARK(BM_StreamStep)->Arg(32)->Arg(500)->Unit(benchmark::kMillisecond);

// Barycenter fixed point over four 8-component atoms in d=8.
void BM_Barycenter(benchmark::State& state) {
    Rng rng(55);
    std::vector<LabeledGmm> atoms;
    for (int c = 0; c < 4; ++c) atoms.push_back(random_labeled_gmm(rng, 8, 8, 5));
    const Eigen::VectorXd lambda = Eigen::VectorXd::Constant(4, 0.25);
    BarycenterConfig cfg;
    cfg.k_b = 8;
    for (auto _ : state) {
        const BarycenterResult r = mixture_barycenter(lambda, atoms, cfg, 1.0);
        benchmark::DoNotOptimize(r.objective);
    }
}
BENCHMARK(BM_Barycenter)->Unit(benchmark::kMillisecond);

// One dictionary gradient step (freeze plans, analytic gradient, halving
// line search) on a three-source, four-atom problem at d=8.
void BM_DadilStep(benchmark::State& state) {
    Rng rng(66);
    std::vector<LabeledGmm> sources;
    for (int l = 0; l < 3; ++l) sources.push_back(random_labeled_gmm(rng, 5, 8, 5));
    const Gmm target = random_gmm(rng, 8, 8);
    DadilConfig cfg;
    cfg.num_atoms = 4;
    cfg.atom_components = 8;
    cfg.beta = 1.0;
    cfg.seed = 66;
    const Dictionary dict = init_dictionary(sources, target, 4, 8, 66);
    for (auto _ : state) {
        const StepResult r = dadil_step(dict, sources, target, cfg);
        benchmark::DoNotOptimize(r.loss);
    }
}
BENCHMARK(BM_DadilStep)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
