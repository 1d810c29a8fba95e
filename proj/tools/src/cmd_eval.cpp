#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "cmds.hpp"
#include "wgmm/data.hpp"
#include "wgmm/errors.hpp"
#include "wgmm/gmm.hpp"
#include "wgmm/serialize.hpp"
#include "wgmm/transport.hpp"

namespace wgmmcli {

using nlohmann::json;

namespace {

struct EvalOpts {
    std::string model;
    std::string other;
    std::string data;
    std::string label_column;
    double beta = -1.0;  // < 0: skip the label-aware distance
    std::string config;
};

struct LoadedModel {
    wgmm::Gmm base;
    std::optional<wgmm::LabeledGmm> labeled;
};

LoadedModel load_model(const std::string& path) {
    const json j = wgmm::load_json_file(path);
    LoadedModel m;
    if (j.contains("labels")) {
        m.labeled = wgmm::labeled_gmm_from_json(j, path);
        m.base = m.labeled->base;
    } else {
        m.base = wgmm::gmm_from_json(j, path);
    }
    return m;
}

void run_eval(const EvalOpts& o) {
    LoadedModel model = load_model(o.model);
    json report{{"model", o.model},
                {"K", model.base.num_components()},
                {"d", model.base.dim()},
                {"labeled", model.labeled.has_value()}};

    if (!o.other.empty()) {
        LoadedModel other = load_model(o.other);
        report["other"] = o.other;
        report["mw2_sq"] = wgmm::mw2_sq(model.base, other.base);
        if (o.beta >= 0.0) {
            if (!model.labeled || !other.labeled) {
                throw wgmm::DataError(
                    "--beta needs label rows in both model files");
            }
            report["smw2_sq"] = wgmm::smw2_sq(*model.labeled, *other.labeled, o.beta);
            report["beta"] = o.beta;
        }
    }

    if (!o.data.empty()) {
        const std::optional<std::string> label_col =
            o.label_column.empty() ? std::nullopt
                                   : std::optional<std::string>(o.label_column);
        wgmm::LabeledDataset data = load_dataset(o.data, label_col, false);
        report["data"] = o.data;
        report["n"] = data.n();
        report["avg_loglik"] = wgmm::log_likelihood(model.base, data.X);
        report["bic"] = wgmm::bic(model.base, data.X);
        if (model.labeled && data.labeled()) {
            const std::vector<int> pred = wgmm::map_classify(*model.labeled, data.X);
            int hits = 0;
            for (std::size_t i = 0; i < pred.size(); ++i) {
                hits += (pred[i] == data.y[i]) ? 1 : 0;
            }
            report["accuracy"] = static_cast<double>(hits) / static_cast<double>(pred.size());
        }
    }

    std::cout << report.dump(2) << "\n";
}

}  // namespace

void register_eval(CLI::App& app) {
    auto o = std::make_shared<EvalOpts>();
    CLI::App* sub = app.add_subcommand(
        "eval", "Score a mixture file: distance to another mixture, fit to a CSV");
    sub->add_option("--model", o->model, "Mixture JSON to evaluate")->required();
    sub->add_option("--other", o->other,
                    "Second mixture JSON; reports the squared mixture-Wasserstein distance");
    sub->add_option("--data", o->data, "CSV to score (average log-likelihood, BIC)");
    sub->add_option("--label-column", o->label_column,
                    "Label column of --data; adds MAP accuracy for labeled models");
    sub->add_option("--beta", o->beta,
                    "Label-cost weight; adds the label-aware distance (labeled models only)");
    sub->add_option("--config", o->config,
                    "Key=value file merged beneath the flags (flags win)");
    sub->callback([o]() { run_eval(*o); });
}

}  // namespace wgmmcli
