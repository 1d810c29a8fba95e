#include "wgmm/serialize.hpp"

#include "wgmm/errors.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace wgmm {

namespace {

using nlohmann::json;

const json& member(const json& j, const char* key, const std::string& path) {
    if (!j.is_object()) throw DataError(path + ": expected an object");
    const auto it = j.find(key);
    if (it == j.end()) throw DataError(path + "." + key + ": missing field");
    return *it;
}

double get_number(const json& j, const std::string& path) {
    if (!j.is_number()) throw DataError(path + ": expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw DataError(path + ": non-finite number");
    return v;
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) throw DataError(path + ": expected an integer");
    return j.get<int>();
}

std::uint64_t get_seed(const json& j, const std::string& path) {
    if (!j.is_number_integer() || (j.is_number_integer() && !j.is_number_unsigned() &&
                                   j.get<std::int64_t>() < 0)) {
        throw DataError(path + ": expected a nonnegative integer");
    }
    return j.get<std::uint64_t>();
}

Eigen::VectorXd get_vector(const json& j, const std::string& path) {
    if (!j.is_array()) throw DataError(path + ": expected an array");
    Eigen::VectorXd v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] =
            get_number(j[i], path + "[" + std::to_string(i) + "]");
    }
    return v;
}

json vector_to_json(const Eigen::VectorXd& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json matrix_to_json(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        out.push_back(vector_to_json(m.row(r).transpose()));
    }
    return out;
}

Eigen::MatrixXd get_matrix(const json& j, Eigen::Index cols, const std::string& path) {
    if (!j.is_array()) throw DataError(path + ": expected an array of rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        const std::string row_path = path + "[" + std::to_string(r) + "]";
        Eigen::VectorXd row = get_vector(j[r], row_path);
        if (row.size() != cols) {
            throw DataError(row_path + ": expected " + std::to_string(cols) + " entries");
        }
        m.row(static_cast<Eigen::Index>(r)) = row.transpose();
    }
    return m;
}

}  // namespace

json to_json(const Gmm& gmm) {
    json j;
    j["d"] = static_cast<int>(gmm.dim());
    j["K"] = gmm.num_components();
    j["weights"] = vector_to_json(gmm.weights);
    json comps = json::array();
    for (const DiagGaussian& g : gmm.components) {
        comps.push_back({{"mu", vector_to_json(g.mu)}, {"sigma", vector_to_json(g.sigma)}});
    }
    j["components"] = std::move(comps);
    return j;
}

json to_json(const LabeledGmm& gmm) {
    json j = to_json(gmm.base);
    j["labels"] = matrix_to_json(gmm.labels);
    return j;
}

Gmm gmm_from_json(const json& j, const std::string& path) {
    const int d = get_int(member(j, "d", path), path + ".d");
    const int K = get_int(member(j, "K", path), path + ".K");
    if (d < 1) throw DataError(path + ".d: must be >= 1");
    if (K < 1) throw DataError(path + ".K: must be >= 1");

    Gmm gmm;
    gmm.weights = get_vector(member(j, "weights", path), path + ".weights");
    if (gmm.weights.size() != K) {
        throw DataError(path + ".weights: expected " + std::to_string(K) + " entries");
    }
    const json& comps = member(j, "components", path);
    if (!comps.is_array() || comps.size() != static_cast<std::size_t>(K)) {
        throw DataError(path + ".components: expected an array of " + std::to_string(K) +
                        " components");
    }
    for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::string comp_path = path + ".components[" + std::to_string(k) + "]";
        DiagGaussian g;
        g.mu = get_vector(member(comps[k], "mu", comp_path), comp_path + ".mu");
        g.sigma = get_vector(member(comps[k], "sigma", comp_path), comp_path + ".sigma");
        if (g.mu.size() != d) {
            throw DataError(comp_path + ".mu: expected " + std::to_string(d) + " entries");
        }
        if (g.sigma.size() != d) {
            throw DataError(comp_path + ".sigma: expected " + std::to_string(d) + " entries");
        }
        gmm.components.push_back(std::move(g));
    }
    try {
        validate(gmm);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
    return gmm;
}

LabeledGmm labeled_gmm_from_json(const json& j, const std::string& path) {
    LabeledGmm gmm;
    gmm.base = gmm_from_json(j, path);
    const json& labels = member(j, "labels", path);
    if (!labels.is_array() || labels.empty()) {
        throw DataError(path + ".labels: expected a nonempty array of rows");
    }
    const Eigen::Index n_c =
        static_cast<Eigen::Index>(get_vector(labels[0], path + ".labels[0]").size());
    gmm.labels = get_matrix(labels, n_c, path + ".labels");
    try {
        validate(gmm);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
    return gmm;
}

json to_json(const StreamState& state) {
    json j;
    j["model"] = to_json(state.model);
    j["n_seen"] = state.n_seen;
    j["n_eff"] = state.n_eff;
    j["k_min"] = state.config.k_min;
    j["k_max"] = state.config.k_max;
    j["delta_k"] = state.config.delta_k;
    j["forgetting"] = state.config.forgetting;
    j["em"] = {{"tol", state.config.em.tol},
               {"max_iter", state.config.em.max_iter},
               {"floor_scale", state.config.em.floor_scale}};
    j["seed"] = state.seed;
    j["step_index"] = state.step_index;
    return j;
}

StreamState stream_state_from_json(const json& j, const std::string& path) {
    StreamState state;
    state.model = gmm_from_json(member(j, "model", path), path + ".model");
    state.n_seen = static_cast<std::int64_t>(get_number(member(j, "n_seen", path), path + ".n_seen"));
    state.n_eff = get_number(member(j, "n_eff", path), path + ".n_eff");
    state.config.k_min = get_int(member(j, "k_min", path), path + ".k_min");
    state.config.k_max = get_int(member(j, "k_max", path), path + ".k_max");
    state.config.delta_k = get_int(member(j, "delta_k", path), path + ".delta_k");
    state.config.forgetting = get_number(member(j, "forgetting", path), path + ".forgetting");
    const json& em = member(j, "em", path);
    state.config.em.tol = get_number(member(em, "tol", path + ".em"), path + ".em.tol");
    state.config.em.max_iter =
        get_int(member(em, "max_iter", path + ".em"), path + ".em.max_iter");
    state.config.em.floor_scale =
        get_number(member(em, "floor_scale", path + ".em"), path + ".em.floor_scale");
    state.seed = get_seed(member(j, "seed", path), path + ".seed");
    state.step_index = get_int(member(j, "step_index", path), path + ".step_index");
    try {
        validate(state.config);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
    if (state.n_seen < 1 || !(state.n_eff > 0.0)) {
        throw DataError(path + ": n_seen and n_eff must be positive");
    }
    if (state.step_index < 0) throw DataError(path + ".step_index: must be >= 0");
    return state;
}

json to_json(const Dictionary& dict, const DictionaryMeta& meta) {
    json j;
    j["C"] = dict.num_atoms();
    j["K"] = dict.atom_components();
    j["d"] = static_cast<int>(dict.atoms.empty() ? 0 : dict.atoms.front().dim());
    j["n_c"] = dict.atoms.empty() ? 0 : dict.atoms.front().num_classes();
    j["beta"] = meta.beta;
    j["var_floor_std"] = dict.var_floor_std;
    json atoms = json::array();
    for (const LabeledGmm& atom : dict.atoms) atoms.push_back(to_json(atom));
    j["atoms"] = std::move(atoms);
    j["Lambda"] = matrix_to_json(dict.lambda);
    j["meta"] = {{"seed", meta.seed}, {"iters", meta.iters}};
    return j;
}

std::pair<Dictionary, DictionaryMeta> dictionary_from_json(const json& j,
                                                           const std::string& path) {
    Dictionary dict;
    DictionaryMeta meta;
    const int C = get_int(member(j, "C", path), path + ".C");
    const int K = get_int(member(j, "K", path), path + ".K");
    const int d = get_int(member(j, "d", path), path + ".d");
    const int n_c = get_int(member(j, "n_c", path), path + ".n_c");
    meta.beta = get_number(member(j, "beta", path), path + ".beta");
    dict.var_floor_std =
        get_number(member(j, "var_floor_std", path), path + ".var_floor_std");

    const json& atoms = member(j, "atoms", path);
    if (!atoms.is_array() || atoms.size() != static_cast<std::size_t>(C)) {
        throw DataError(path + ".atoms: expected an array of " + std::to_string(C) + " atoms");
    }
    for (std::size_t c = 0; c < atoms.size(); ++c) {
        const std::string atom_path = path + ".atoms[" + std::to_string(c) + "]";
        LabeledGmm atom = labeled_gmm_from_json(atoms[c], atom_path);
        if (atom.num_components() != K || atom.dim() != d || atom.num_classes() != n_c) {
            throw DataError(atom_path + ": does not match the declared K, d, n_c");
        }
        dict.atoms.push_back(std::move(atom));
    }
    dict.lambda = get_matrix(member(j, "Lambda", path), C, path + ".Lambda");

    const json& m = member(j, "meta", path);
    meta.seed = get_seed(member(m, "seed", path + ".meta"), path + ".meta.seed");
    meta.iters = get_int(member(m, "iters", path + ".meta"), path + ".meta.iters");

    try {
        validate(dict);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
    return {std::move(dict), meta};
}

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw DataError(path + ": " + e.what());
    }
    return j;
}

void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open file for writing");
    out << j.dump(2) << '\n';
    if (!out) throw DataError(path + ": write failed");
}

}  // namespace wgmm
