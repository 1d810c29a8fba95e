#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include "common.hpp"
#include "cmds.hpp"
#include "wgmm/data.hpp"
#include "wgmm/errors.hpp"
#include "wgmm/gmm.hpp"
#include "wgmm/serialize.hpp"

namespace wgmmcli {

using nlohmann::json;

namespace {

struct FitOfflineOpts {
    std::string input;
    std::string label_column;
    bool ignore_labels = false;
    int k_min = 1;
    int k_max = 15;
    int k_per_class = 3;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void run_fit_offline(const FitOfflineOpts& o) {
    const std::string out_dir = resolve_out_dir(o.out);
    const std::optional<std::string> label_col =
        o.label_column.empty() ? std::nullopt : std::optional<std::string>(o.label_column);
    wgmm::LabeledDataset data = load_dataset(o.input, label_col, o.ignore_labels);

    json outputs{{"model", "model.json"}};
    if (data.labeled()) {
        // Class-conditional fit: BIC-selected mixture per class, weights
        // scaled by class frequency, one-hot label rows attached.
        wgmm::LabeledGmm model =
            wgmm::fit_labeled(data.X, data.y, o.k_per_class, o.seed);
        wgmm::save_json_file(join_path(out_dir, "model.json"), wgmm::to_json(model));
        outputs["K"] = model.num_components();
        outputs["classes"] = model.num_classes();
        outputs["avg_loglik"] = wgmm::log_likelihood(model.base, data.X);
        outputs["bic"] = wgmm::bic(model.base, data.X);
        std::cout << "labeled fit: K=" << model.num_components() << " over "
                  << model.num_classes() << " classes\n";
    } else {
        wgmm::Gmm model = wgmm::get_best_gmm(data.X, o.k_min, o.k_max, o.seed);
        wgmm::save_json_file(join_path(out_dir, "model.json"), wgmm::to_json(model));
        outputs["K"] = model.num_components();
        outputs["avg_loglik"] = wgmm::log_likelihood(model, data.X);
        outputs["bic"] = wgmm::bic(model, data.X);
        std::cout << "unlabeled fit: BIC selected K=" << model.num_components() << "\n";
    }

    json config{{"input", o.input},
                {"label-column", o.label_column},
                {"ignore-labels", o.ignore_labels},
                {"k-min", o.k_min},
                {"k-max", o.k_max},
                {"k-per-class", o.k_per_class},
                {"seed", o.seed},
                {"out", out_dir}};
    write_manifest(out_dir, "fit-offline", config, outputs);
}

}  // namespace

void register_fit_offline(CLI::App& app) {
    auto o = std::make_shared<FitOfflineOpts>();
    CLI::App* sub = app.add_subcommand(
        "fit-offline", "Fit a mixture to a whole CSV at once (BIC model selection)");
    sub->add_option("--input", o->input, "Input CSV of samples")->required();
    sub->add_option("--label-column", o->label_column,
                    "Column (name or zero-based index) holding class labels");
    sub->add_flag("--ignore-labels", o->ignore_labels,
                  "Strip the label column and fit an unlabeled density");
    sub->add_option("--k-min", o->k_min, "Smallest model order tried (unlabeled fit)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k-max", o->k_max, "Largest model order tried (unlabeled fit)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k-per-class", o->k_per_class,
                    "Largest per-class model order tried (labeled fit)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "RNG seed")->capture_default_str();
    sub->add_option("--out", o->out, "Output directory (default: $WGMM_OUT_DIR or .)");
    sub->add_option("--config", o->config,
                    "Key=value file merged beneath the flags (flags win)");
    sub->callback([o]() { run_fit_offline(*o); });
}

}  // namespace wgmmcli
