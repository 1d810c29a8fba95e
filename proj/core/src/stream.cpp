#include "wgmm/stream.hpp"

#include "wgmm/gaussian.hpp"
#include "wgmm/rng.hpp"

#include <algorithm>
#include <limits>
#include <stdexcept>

namespace wgmm {

void validate(const StreamConfig& cfg) {
    if (cfg.k_min < 1 || cfg.k_max < cfg.k_min) {
        throw std::invalid_argument("StreamConfig: need 1 <= k_min <= k_max");
    }
    if (cfg.delta_k < 1) throw std::invalid_argument("StreamConfig: delta_k must be >= 1");
    if (!(cfg.forgetting > 0.0 && cfg.forgetting <= 1.0)) {
        throw std::invalid_argument("StreamConfig: forgetting must lie in (0, 1]");
    }
}

StreamState init_stream(const Eigen::MatrixXd& X0, const StreamConfig& cfg,
                        std::uint64_t seed) {
    validate(cfg);
    if (X0.rows() < cfg.k_min) {
        throw std::invalid_argument("init_stream: first batch smaller than k_min");
    }
    StreamState state;
    state.model = get_best_gmm(X0, cfg.k_min, cfg.k_min, seed, cfg.em);
    state.n_seen = X0.rows();
    state.n_eff = static_cast<double>(X0.rows());
    state.step_index = 0;
    state.seed = seed;
    state.config = cfg;
    return state;
}

Gmm concat_components(const Gmm& old_model, double n_old, const Gmm& new_model,
                      double n_batch) {
    if (old_model.dim() != new_model.dim()) {
        throw std::invalid_argument("concat_components: dimension mismatch");
    }
    if (!(n_old > 0.0) || !(n_batch > 0.0)) {
        throw std::invalid_argument("concat_components: sample counts must be positive");
    }
    const double total = n_old + n_batch;
    Gmm out;
    out.weights.resize(old_model.num_components() + new_model.num_components());
    out.weights << (n_old / total) * old_model.weights,
        (n_batch / total) * new_model.weights;
    out.components = old_model.components;
    out.components.insert(out.components.end(), new_model.components.begin(),
                          new_model.components.end());
    return out;
}

Gmm compress_gmm(const Gmm& gmm, int k_max) {
    if (k_max < 1) throw std::invalid_argument("compress_gmm: k_max must be >= 1");
    Gmm out = gmm;
    while (out.num_components() > k_max) {
        const int K = out.num_components();
        double best = std::numeric_limits<double>::infinity();
        int bi = -1;
        int bj = -1;
        for (int i = 0; i < K; ++i) {
            for (int j = i + 1; j < K; ++j) {
                const double dist = w2_diag(out.components[static_cast<std::size_t>(i)],
                                            out.components[static_cast<std::size_t>(j)]);
                if (dist < best) {
                    best = dist;
                    bi = i;
                    bj = j;
                }
            }
        }
        auto [weight, merged] =
            gauss_merge(out.weights[bi], out.weights[bj],
                        out.components[static_cast<std::size_t>(bi)],
                        out.components[static_cast<std::size_t>(bj)]);
        out.weights[bi] = weight;
        out.components[static_cast<std::size_t>(bi)] = std::move(merged);
        // delete j by compaction
        Eigen::VectorXd w(K - 1);
        w << out.weights.head(bj), out.weights.tail(K - 1 - bj);
        out.weights = std::move(w);
        out.components.erase(out.components.begin() + bj);
    }
    return out;
}

void stream_step(StreamState& state, const Eigen::MatrixXd& X_t) {
    validate(state.config);
    if (X_t.rows() < 1) throw std::invalid_argument("stream_step: empty batch");
    if (X_t.cols() != state.model.dim()) {
        throw std::invalid_argument("stream_step: batch dimension mismatch");
    }
    const int dk = std::min<int>(state.config.delta_k, static_cast<int>(X_t.rows()));
    const std::uint64_t step_seed =
        mix_seed(state.seed, static_cast<std::uint64_t>(state.step_index) + 1);
    Gmm batch_model = get_best_gmm(X_t, 1, dk, step_seed, state.config.em);

    const double n_old = state.config.forgetting * state.n_eff;
    const double n_batch = static_cast<double>(X_t.rows());
    Gmm grown = concat_components(state.model, n_old, batch_model, n_batch);
    state.model = compress_gmm(grown, state.config.k_max);
    state.n_seen += X_t.rows();
    state.n_eff = n_old + n_batch;
    state.step_index += 1;
}

Gmm online_gmm_fit(const std::vector<Eigen::MatrixXd>& batches, const StreamConfig& cfg,
                   std::uint64_t seed) {
    if (batches.empty()) throw std::invalid_argument("online_gmm_fit: empty stream");
    StreamState state = init_stream(batches.front(), cfg, seed);
    for (std::size_t t = 1; t < batches.size(); ++t) {
        stream_step(state, batches[t]);
    }
    return state.model;
}

}  // namespace wgmm
