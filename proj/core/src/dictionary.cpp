#include "wgmm/dictionary.hpp"

#include "wgmm/errors.hpp"
#include "wgmm/rng.hpp"
#include "wgmm/simplex.hpp"
#include "wgmm/transport.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace wgmm {

namespace {

constexpr std::uint64_t kInitTag = 0xA70ULL;
constexpr std::uint64_t kRowTag = 0xBA00ULL;
constexpr std::uint64_t kDictTag = 0xD1C7ULL;
constexpr std::uint64_t kStreamTag = 0x5EEDULL;

/// Stacked parameters [mu | sigma | labels], one component per row.
Eigen::MatrixXd stack_labeled(const LabeledGmm& g) {
    const int K = g.num_components();
    const Eigen::Index d = g.dim();
    const int n_c = g.num_classes();
    Eigen::MatrixXd theta(K, 2 * d + n_c);
    for (int j = 0; j < K; ++j) {
        theta.row(j).segment(0, d) =
            g.base.components[static_cast<std::size_t>(j)].mu.transpose();
        theta.row(j).segment(d, d) =
            g.base.components[static_cast<std::size_t>(j)].sigma.transpose();
        theta.row(j).segment(2 * d, n_c) = g.labels.row(j);
    }
    return theta;
}

/// As stack_labeled for an unlabeled mixture; the label block is zero and
/// is matched with zero column weights so it never contributes.
Eigen::MatrixXd stack_plain(const Gmm& g, int n_c) {
    const int K = g.num_components();
    const Eigen::Index d = g.dim();
    Eigen::MatrixXd theta = Eigen::MatrixXd::Zero(K, 2 * d + n_c);
    for (int j = 0; j < K; ++j) {
        theta.row(j).segment(0, d) = g.components[static_cast<std::size_t>(j)].mu.transpose();
        theta.row(j).segment(d, d) =
            g.components[static_cast<std::size_t>(j)].sigma.transpose();
    }
    return theta;
}

Eigen::VectorXd column_weights(Eigen::Index d, int n_c, double label_weight) {
    Eigen::VectorXd w = Eigen::VectorXd::Ones(2 * d + n_c);
    w.tail(n_c).setConstant(label_weight);
    return w;
}

void check_inputs(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                  const Gmm& target, const DadilConfig& cfg) {
    validate(dict);
    if (sources.empty()) throw std::invalid_argument("dadil: no sources");
    if (dict.num_rows() != static_cast<int>(sources.size()) + 1) {
        throw std::invalid_argument("dadil: Lambda must have one row per source plus the target");
    }
    const Eigen::Index d = dict.atoms.front().dim();
    const int n_c = dict.atoms.front().num_classes();
    for (const LabeledGmm& s : sources) {
        validate(s);
        if (s.dim() != d || s.num_classes() != n_c) {
            throw std::invalid_argument("dadil: sources disagree with atoms on d or class count");
        }
    }
    validate(target);
    if (target.dim() != d) throw std::invalid_argument("dadil: target dimension mismatch");
    if (cfg.beta < 0.0) throw std::invalid_argument("dadil: beta must be nonnegative");
}

BarycenterConfig row_bary_config(const Dictionary& dict, const DadilConfig& cfg, int row) {
    BarycenterConfig bary;
    bary.k_b = dict.atom_components();
    bary.max_fp_iters = cfg.bary_fp_iters;
    bary.fp_tol = cfg.bary_fp_tol;
    bary.seed = mix_seed(cfg.seed, kRowTag + static_cast<std::uint64_t>(row));
    return bary;
}

double accuracy_of(const std::vector<int>& pred, const std::vector<int>& truth) {
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        if (pred[i] == truth[i]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(pred.size());
}

}  // namespace

void validate(const Dictionary& dict) {
    if (dict.atoms.empty()) throw std::invalid_argument("Dictionary: no atoms");
    const Eigen::Index d = dict.atoms.front().dim();
    const int K = dict.atoms.front().num_components();
    const int n_c = dict.atoms.front().num_classes();
    for (const LabeledGmm& atom : dict.atoms) {
        validate(atom);
        if (atom.dim() != d || atom.num_components() != K || atom.num_classes() != n_c) {
            throw std::invalid_argument("Dictionary: atoms disagree on K, d or class count");
        }
        for (const DiagGaussian& g : atom.base.components) {
            if ((g.sigma.array() < dict.var_floor_std - 1e-15).any()) {
                throw std::invalid_argument("Dictionary: atom sigma below the floor");
            }
        }
    }
    if (dict.lambda.cols() != dict.num_atoms() || dict.lambda.rows() < 2) {
        throw std::invalid_argument("Dictionary: Lambda must be (sources + 1) x atoms");
    }
    for (Eigen::Index r = 0; r < dict.lambda.rows(); ++r) {
        check_simplex(dict.lambda.row(r).transpose(), "Dictionary: Lambda row");
    }
}

Dictionary init_dictionary(const std::vector<LabeledGmm>& sources, const Gmm& target,
                           int num_atoms, int atom_components, std::uint64_t seed) {
    if (sources.empty()) throw std::invalid_argument("init_dictionary: no sources");
    if (num_atoms < 1 || atom_components < 1) {
        throw std::invalid_argument("init_dictionary: need num_atoms >= 1 and components >= 1");
    }
    const Eigen::Index d = sources.front().dim();
    const int n_c = sources.front().num_classes();
    for (const LabeledGmm& s : sources) {
        validate(s);
        if (s.dim() != d || s.num_classes() != n_c) {
            throw std::invalid_argument("init_dictionary: sources disagree on d or class count");
        }
    }
    validate(target);
    if (target.dim() != d) {
        throw std::invalid_argument("init_dictionary: target dimension mismatch");
    }

    // Pooled source components with weight source_weight / N_S.
    std::vector<const DiagGaussian*> pool;
    std::vector<Eigen::RowVectorXd> pool_labels;
    std::vector<double> pool_w;
    for (const LabeledGmm& s : sources) {
        for (int j = 0; j < s.num_components(); ++j) {
            pool.push_back(&s.base.components[static_cast<std::size_t>(j)]);
            pool_labels.push_back(s.labels.row(j));
            pool_w.push_back(s.base.weights[j] / static_cast<double>(sources.size()));
        }
    }
    Eigen::VectorXd pw = Eigen::Map<Eigen::VectorXd>(pool_w.data(),
                                                     static_cast<Eigen::Index>(pool_w.size()));

    // One scalar jitter magnitude: 0.01 x the global spread of pooled means.
    Eigen::MatrixXd mus(pool.size(), d);
    for (std::size_t i = 0; i < pool.size(); ++i) mus.row(static_cast<Eigen::Index>(i)) = pool[i]->mu.transpose();
    Eigen::RowVectorXd mean = mus.colwise().mean();
    const double var = (mus.rowwise() - mean).array().square().mean();
    const double spread = std::sqrt(var);
    const double jitter = 0.01 * (spread > 0.0 ? spread : 1.0);

    Dictionary dict;
    Rng rng(mix_seed(seed, kInitTag));
    for (int c = 0; c < num_atoms; ++c) {
        LabeledGmm atom;
        atom.base.weights = Eigen::VectorXd::Constant(
            atom_components, 1.0 / static_cast<double>(atom_components));
        atom.labels.resize(atom_components, n_c);
        for (int k = 0; k < atom_components; ++k) {
            const int idx = rng.categorical(pw);
            Eigen::VectorXd mu = pool[static_cast<std::size_t>(idx)]->mu;
            Eigen::VectorXd sigma = pool[static_cast<std::size_t>(idx)]->sigma;
            for (Eigen::Index j = 0; j < d; ++j) {
                mu[j] += jitter * rng.normal();
                sigma[j] = std::max(sigma[j] + jitter * rng.normal(), dict.var_floor_std);
            }
            atom.base.components.push_back(DiagGaussian{std::move(mu), std::move(sigma)});
            atom.labels.row(k) = pool_labels[static_cast<std::size_t>(idx)];
        }
        dict.atoms.push_back(std::move(atom));
    }
    dict.lambda = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(sources.size()) + 1,
                                            num_atoms, 1.0 / static_cast<double>(num_atoms));
    return dict;
}

std::vector<double> dadil_loss_terms(const Dictionary& dict,
                                     const std::vector<LabeledGmm>& sources,
                                     const Gmm& target, const DadilConfig& cfg) {
    check_inputs(dict, sources, target, cfg);
    const int rows = dict.num_rows();
    std::vector<double> terms(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        BarycenterResult bary = mixture_barycenter(dict.lambda.row(r).transpose(), dict.atoms,
                                                   row_bary_config(dict, cfg, r), cfg.beta);
        if (r < rows - 1) {
            terms[static_cast<std::size_t>(r)] =
                smw2_sq(sources[static_cast<std::size_t>(r)], bary.barycenter, cfg.beta);
        } else {
            terms[static_cast<std::size_t>(r)] = mw2_sq(target, bary.barycenter.base);
        }
    }
    return terms;
}

double dadil_loss(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                  const Gmm& target, const DadilConfig& cfg) {
    double total = 0.0;
    for (double t : dadil_loss_terms(dict, sources, target, cfg)) total += t;
    return total;
}

FrozenPlans freeze_plans(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                         const Gmm& target, const DadilConfig& cfg) {
    check_inputs(dict, sources, target, cfg);
    const int rows = dict.num_rows();
    FrozenPlans plans;
    plans.outer.resize(static_cast<std::size_t>(rows));
    plans.maps.resize(static_cast<std::size_t>(rows));
    for (int r = 0; r < rows; ++r) {
        BarycenterResult bary = mixture_barycenter(dict.lambda.row(r).transpose(), dict.atoms,
                                                   row_bary_config(dict, cfg, r), cfg.beta);
        if (r < rows - 1) {
            plans.outer[static_cast<std::size_t>(r)] =
                smw2_plan(sources[static_cast<std::size_t>(r)], bary.barycenter, cfg.beta).omega;
        } else {
            plans.outer[static_cast<std::size_t>(r)] =
                mw2_plan(target, bary.barycenter.base).omega;
        }
        plans.maps[static_cast<std::size_t>(r)] = std::move(bary.transport_maps);
    }
    return plans;
}

namespace {

/// Reconstruction of row r under fixed maps: sum_c lambda(r,c) T_rc Theta_c.
Eigen::MatrixXd frozen_recon(const Dictionary& dict,
                             const std::vector<Eigen::MatrixXd>& thetas,
                             const FrozenPlans& plans, int r) {
    const auto& maps = plans.maps[static_cast<std::size_t>(r)];
    Eigen::MatrixXd B = Eigen::MatrixXd::Zero(maps.front().rows(), thetas.front().cols());
    for (int c = 0; c < dict.num_atoms(); ++c) {
        B += dict.lambda(r, c) * (maps[static_cast<std::size_t>(c)] *
                                  thetas[static_cast<std::size_t>(c)]);
    }
    return B;
}

struct FrozenContext {
    std::vector<Eigen::MatrixXd> thetas;   // per atom
    std::vector<Eigen::MatrixXd> domains;  // per row, stacked domain parameters
    std::vector<Eigen::VectorXd> colw;     // per row, column weights
};

FrozenContext frozen_context(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                             const Gmm& target, const DadilConfig& cfg) {
    FrozenContext ctx;
    const Eigen::Index d = dict.atoms.front().dim();
    const int n_c = dict.atoms.front().num_classes();
    for (const LabeledGmm& atom : dict.atoms) ctx.thetas.push_back(stack_labeled(atom));
    for (const LabeledGmm& s : sources) {
        ctx.domains.push_back(stack_labeled(s));
        ctx.colw.push_back(column_weights(d, n_c, cfg.beta));
    }
    ctx.domains.push_back(stack_plain(target, n_c));
    ctx.colw.push_back(column_weights(d, n_c, 0.0));
    return ctx;
}

}  // namespace

double frozen_loss(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                   const Gmm& target, const DadilConfig& cfg, const FrozenPlans& plans) {
    FrozenContext ctx = frozen_context(dict, sources, target, cfg);
    double loss = 0.0;
    for (int r = 0; r < dict.num_rows(); ++r) {
        const Eigen::MatrixXd B = frozen_recon(dict, ctx.thetas, plans, r);
        const Eigen::MatrixXd& Q = ctx.domains[static_cast<std::size_t>(r)];
        const Eigen::VectorXd& w = ctx.colw[static_cast<std::size_t>(r)];
        const Eigen::MatrixXd& W = plans.outer[static_cast<std::size_t>(r)];
        for (Eigen::Index i = 0; i < W.rows(); ++i) {
            for (Eigen::Index k = 0; k < W.cols(); ++k) {
                if (W(i, k) == 0.0) continue;
                const double cell =
                    (w.array() * (Q.row(i) - B.row(k)).transpose().array().square()).sum();
                loss += W(i, k) * cell;
            }
        }
    }
    return loss;
}

bool DadilGrad::all_finite() const {
    for (const Eigen::MatrixXd& m : atom_mu) {
        if (!m.allFinite()) return false;
    }
    for (const Eigen::MatrixXd& m : atom_sigma) {
        if (!m.allFinite()) return false;
    }
    for (const Eigen::MatrixXd& m : atom_labels) {
        if (!m.allFinite()) return false;
    }
    return lambda.allFinite();
}

DadilGrad frozen_grad(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                      const Gmm& target, const DadilConfig& cfg, const FrozenPlans& plans) {
    FrozenContext ctx = frozen_context(dict, sources, target, cfg);
    const Eigen::Index d = dict.atoms.front().dim();
    const int n_c = dict.atoms.front().num_classes();
    const int C = dict.num_atoms();
    const int K = dict.atom_components();

    std::vector<Eigen::MatrixXd> theta_grad(
        static_cast<std::size_t>(C), Eigen::MatrixXd::Zero(K, 2 * d + n_c));
    DadilGrad grad;
    grad.lambda = Eigen::MatrixXd::Zero(dict.num_rows(), C);

    for (int r = 0; r < dict.num_rows(); ++r) {
        const Eigen::MatrixXd B = frozen_recon(dict, ctx.thetas, plans, r);
        const Eigen::MatrixXd& Q = ctx.domains[static_cast<std::size_t>(r)];
        const Eigen::VectorXd& w = ctx.colw[static_cast<std::size_t>(r)];
        const Eigen::MatrixXd& W = plans.outer[static_cast<std::size_t>(r)];
        const Eigen::VectorXd colmass = W.colwise().sum().transpose();
        Eigen::MatrixXd G = 2.0 * (colmass.asDiagonal() * B - W.transpose() * Q);
        G = G * w.asDiagonal();
        for (int c = 0; c < C; ++c) {
            const Eigen::MatrixXd& T = plans.maps[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
            theta_grad[static_cast<std::size_t>(c)] += dict.lambda(r, c) * (T.transpose() * G);
            grad.lambda(r, c) =
                (G.array() * (T * ctx.thetas[static_cast<std::size_t>(c)]).array()).sum();
        }
    }

    for (int c = 0; c < C; ++c) {
        const Eigen::MatrixXd& g = theta_grad[static_cast<std::size_t>(c)];
        grad.atom_mu.push_back(g.middleCols(0, d));
        grad.atom_sigma.push_back(g.middleCols(d, d));
        grad.atom_labels.push_back(g.middleCols(2 * d, n_c));
    }
    return grad;
}

namespace {

Dictionary apply_step(const Dictionary& dict, const DadilGrad& grad, double lr_atoms,
                      double lr_lambda) {
    Dictionary out = dict;
    for (int c = 0; c < dict.num_atoms(); ++c) {
        LabeledGmm& atom = out.atoms[static_cast<std::size_t>(c)];
        for (int k = 0; k < dict.atom_components(); ++k) {
            DiagGaussian& comp = atom.base.components[static_cast<std::size_t>(k)];
            comp.mu -= lr_atoms * grad.atom_mu[static_cast<std::size_t>(c)].row(k).transpose();
            comp.sigma =
                (comp.sigma -
                 lr_atoms * grad.atom_sigma[static_cast<std::size_t>(c)].row(k).transpose())
                    .cwiseMax(out.var_floor_std);
            atom.labels.row(k) =
                project_to_simplex(
                    atom.labels.row(k).transpose() -
                    lr_atoms * grad.atom_labels[static_cast<std::size_t>(c)].row(k).transpose())
                    .transpose();
        }
    }
    for (Eigen::Index r = 0; r < out.lambda.rows(); ++r) {
        out.lambda.row(r) = project_to_simplex(out.lambda.row(r).transpose() -
                                               lr_lambda * grad.lambda.row(r).transpose())
                                .transpose();
    }
    return out;
}

}  // namespace

StepResult dadil_step(const Dictionary& dict, const std::vector<LabeledGmm>& sources,
                      const Gmm& target, const DadilConfig& cfg) {
    if (!(cfg.lr_atoms > 0.0) || !(cfg.lr_lambda > 0.0)) {
        throw std::invalid_argument("dadil_step: learning rates must be positive");
    }
    FrozenPlans plans = freeze_plans(dict, sources, target, cfg);
    const double loss_before = frozen_loss(dict, sources, target, cfg, plans);
    DadilGrad grad = frozen_grad(dict, sources, target, cfg, plans);
    if (!grad.all_finite()) {
        throw NumericError("dadil_step: non-finite gradient (check atom spreads and beta)");
    }

    StepResult result;
    result.dict = dict;
    result.loss = loss_before;
    double scale = 1.0;
    for (int halving = 0; halving <= 10; ++halving) {
        Dictionary candidate =
            apply_step(dict, grad, scale * cfg.lr_atoms, scale * cfg.lr_lambda);
        const double cand_loss = dadil_loss(candidate, sources, target, cfg);
        if (cand_loss < result.loss) {
            result.loss = cand_loss;
            result.dict = std::move(candidate);
        }
        if (cand_loss <= loss_before) break;
        scale *= 0.5;
    }
    return result;
}

FitResult fit_offline(const std::vector<LabeledGmm>& sources, const Gmm& target,
                      const DadilConfig& cfg) {
    FitResult result;
    result.dict = init_dictionary(sources, target, cfg.num_atoms, cfg.atom_components,
                                  mix_seed(cfg.seed, kDictTag));
    result.dict.var_floor_std = cfg.var_floor_std;
    result.loss_trace.push_back(dadil_loss(result.dict, sources, target, cfg));
    for (int it = 0; it < cfg.n_iters; ++it) {
        StepResult step = dadil_step(result.dict, sources, target, cfg);
        result.dict = std::move(step.dict);
        result.loss_trace.push_back(step.loss);
    }
    return result;
}

OnlineResult fit_online(const std::vector<LabeledGmm>& sources,
                        const std::vector<Eigen::MatrixXd>& target_batches,
                        const StreamConfig& stream_cfg, const DadilConfig& cfg,
                        const Eigen::MatrixXd* eval_X, const std::vector<int>* eval_y) {
    if (target_batches.empty()) throw std::invalid_argument("fit_online: empty stream");
    if ((eval_X == nullptr) != (eval_y == nullptr)) {
        throw std::invalid_argument("fit_online: eval features and labels go together");
    }
    if (eval_X != nullptr) {
        if (eval_X->rows() == 0) throw std::invalid_argument("fit_online: empty eval set");
        if (eval_X->rows() != static_cast<Eigen::Index>(eval_y->size())) {
            throw std::invalid_argument("fit_online: eval feature/label count mismatch");
        }
    }

    OnlineResult out;
    out.target_state = init_stream(target_batches.front(), stream_cfg,
                                   mix_seed(cfg.seed, kStreamTag));
    out.dict = init_dictionary(sources, out.target_state.model, cfg.num_atoms,
                               cfg.atom_components, mix_seed(cfg.seed, kDictTag));
    out.dict.var_floor_std = cfg.var_floor_std;
    out.loss_trace.push_back(dadil_loss(out.dict, sources, out.target_state.model, cfg));

    int step = 0;
    auto run_steps = [&](int count, const char* phase) {
        for (int u = 0; u < count; ++u) {
            const auto t0 = std::chrono::steady_clock::now();
            StepResult r = dadil_step(out.dict, sources, out.target_state.model, cfg);
            const auto t1 = std::chrono::steady_clock::now();
            out.dict = std::move(r.dict);
            out.loss_trace.push_back(r.loss);
            ++step;

            MetricRecord rec;
            rec.step = step;
            rec.phase = phase;
            const LabeledGmm recon = target_reconstruction(out.dict, cfg);
            rec.recon_mw2_sq = mw2_sq(out.target_state.model, recon.base);
            if (eval_X != nullptr) {
                rec.accuracy = accuracy_of(map_classify(recon, *eval_X), *eval_y);
            }
            rec.wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
            out.metrics.push_back(std::move(rec));
        }
    };

    for (std::size_t t = 0; t < target_batches.size(); ++t) {
        if (t > 0) stream_step(out.target_state, target_batches[t]);
        run_steps(cfg.steps_per_batch, "stream");
    }
    out.stream_end_step = step;
    run_steps(cfg.post_stream_iters, "post");
    return out;
}

LabeledGmm target_reconstruction(const Dictionary& dict, const DadilConfig& cfg) {
    validate(dict);
    const int row = dict.num_rows() - 1;
    return mixture_barycenter(dict.lambda.row(row).transpose(), dict.atoms,
                              row_bary_config(dict, cfg, row), cfg.beta)
        .barycenter;
}

int target_classify(const Dictionary& dict, const DadilConfig& cfg,
                    const Eigen::RowVectorXd& x) {
    return map_classify(target_reconstruction(dict, cfg), x);
}

std::vector<int> target_classify(const Dictionary& dict, const DadilConfig& cfg,
                                 const Eigen::MatrixXd& X) {
    return map_classify(target_reconstruction(dict, cfg), X);
}

}  // namespace wgmm
