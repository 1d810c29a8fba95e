#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <memory>
#include <string>

#include "cmds.hpp"
#include "wgmm/serialize.hpp"

namespace wgmmcli {

using nlohmann::json;

namespace {

json weights_array(const wgmm::Gmm& gmm) {
    json w = json::array();
    for (Eigen::Index k = 0; k < gmm.weights.size(); ++k) {
        w.push_back(gmm.weights[k]);
    }
    return w;
}

// Schema validation happens inside the typed parsers; any violation
// surfaces as a DataError naming the offending field path (exit code 3).
void run_inspect(const std::string& file) {
    const json j = wgmm::load_json_file(file);
    json summary{{"file", file}};

    if (j.contains("atoms")) {
        auto [dict, meta] = wgmm::dictionary_from_json(j, file);
        summary["type"] = "dictionary";
        summary["C"] = dict.num_atoms();
        summary["K"] = dict.atom_components();
        summary["d"] = dict.atoms.front().dim();
        summary["classes"] = dict.atoms.front().num_classes();
        summary["rows"] = dict.num_rows();
        summary["beta"] = meta.beta;
        summary["seed"] = meta.seed;
        summary["iters"] = meta.iters;
        json lambda = json::array();
        for (Eigen::Index r = 0; r < dict.lambda.rows(); ++r) {
            json row = json::array();
            for (Eigen::Index c = 0; c < dict.lambda.cols(); ++c) {
                row.push_back(dict.lambda(r, c));
            }
            lambda.push_back(row);
        }
        summary["lambda"] = lambda;
    } else if (j.contains("model")) {
        wgmm::StreamState state = wgmm::stream_state_from_json(j, file);
        summary["type"] = "checkpoint";
        summary["K"] = state.model.num_components();
        summary["d"] = state.model.dim();
        summary["n_seen"] = state.n_seen;
        summary["n_eff"] = state.n_eff;
        summary["step_index"] = state.step_index;
        summary["seed"] = state.seed;
        summary["k_min"] = state.config.k_min;
        summary["k_max"] = state.config.k_max;
        summary["delta_k"] = state.config.delta_k;
        summary["forgetting"] = state.config.forgetting;
        summary["weights"] = weights_array(state.model);
    } else if (j.contains("labels")) {
        wgmm::LabeledGmm gmm = wgmm::labeled_gmm_from_json(j, file);
        summary["type"] = "labeled_gmm";
        summary["K"] = gmm.num_components();
        summary["d"] = gmm.dim();
        summary["classes"] = gmm.num_classes();
        summary["weights"] = weights_array(gmm.base);
        summary["weight_sum"] = gmm.base.weights.sum();
    } else {
        wgmm::Gmm gmm = wgmm::gmm_from_json(j, file);
        summary["type"] = "gmm";
        summary["K"] = gmm.num_components();
        summary["d"] = gmm.dim();
        summary["weights"] = weights_array(gmm);
        summary["weight_sum"] = gmm.weights.sum();
    }

    std::cout << summary.dump(2) << "\n";
}

}  // namespace

void register_inspect(CLI::App& app) {
    auto file = std::make_shared<std::string>();
    CLI::App* sub = app.add_subcommand(
        "inspect", "Validate a model/checkpoint/dictionary JSON and print its summary");
    sub->add_option("file", *file, "JSON file to inspect")->required();
    sub->callback([file]() { run_inspect(*file); });
}

}  // namespace wgmmcli
