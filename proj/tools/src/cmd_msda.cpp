#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "cmds.hpp"
#include "wgmm/data.hpp"
#include "wgmm/dictionary.hpp"
#include "wgmm/errors.hpp"
#include "wgmm/gmm.hpp"
#include "wgmm/serialize.hpp"

namespace wgmmcli {

using nlohmann::json;

namespace {

struct MsdaOpts {
    std::vector<std::string> sources;
    std::string target;
    std::string label_column = "label";
    int folds = 5;
    std::uint64_t seed = 0;
    int source_k = 3;
    // Target stream.
    int k_min = 5;
    int delta_k = 3;
    int k_max = 15;
    int batch = 32;
    double forgetting = 1.0;
    // Dictionary.
    int atoms = 4;
    int atom_components = 8;
    double beta = 1.0;
    double lr_atoms = 0.1;
    double lr_lambda = 0.05;
    int steps_per_batch = 1;
    int post_iters = 100;
    int bary_iters = 50;
    bool baseline = false;
    bool offline = false;
    int offline_iters = 200;
    std::string out;
    std::string config;
};

// Whether the CSV's header row contains the named column, so a target file
// without labels can be ingested without a dedicated flag.
bool header_has_column(const std::string& path, const std::string& column) {
    std::ifstream in(path);
    if (!in) {
        throw wgmm::DataError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        return false;
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        if (cell == column) return true;
    }
    return false;
}

struct Stats {
    double mean = 0.0;
    double std_dev = 0.0;  // sample standard deviation
};

Stats stats_of(const std::vector<double>& v) {
    Stats s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double acc = 0.0;
        for (double x : v) acc += (x - s.mean) * (x - s.mean);
        s.std_dev = std::sqrt(acc / static_cast<double>(v.size() - 1));
    }
    return s;
}

json stats_json(const std::vector<double>& v) {
    const Stats s = stats_of(v);
    return json{{"mean", s.mean},
                {"std", s.std_dev},
                {"mean_minus_2std", s.mean - 2.0 * s.std_dev},
                {"mean_plus_2std", s.mean + 2.0 * s.std_dev},
                {"per_fold", v}};
}

double accuracy_of(const std::vector<int>& pred, const std::vector<int>& truth) {
    int hits = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        hits += (pred[i] == truth[i]) ? 1 : 0;
    }
    return pred.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(pred.size());
}

void run_msda(const MsdaOpts& o) {
    const std::string out_dir = resolve_out_dir(o.out);

    // Sources must carry labels; the target's label column is optional and,
    // when present, used only for fold stratification and test accuracy.
    std::vector<wgmm::LabeledDataset> source_data;
    for (const std::string& path : o.sources) {
        wgmm::LabeledDataset ds = load_dataset(path, o.label_column, false);
        if (!ds.labeled()) {
            throw wgmm::DataError("source '" + path + "' has no labels in column '" +
                                  o.label_column + "'");
        }
        source_data.push_back(std::move(ds));
    }
    const bool target_labeled = header_has_column(o.target, o.label_column);
    wgmm::LabeledDataset target = load_dataset(
        o.target,
        target_labeled ? std::optional<std::string>(o.label_column) : std::nullopt,
        false);

    // Source mixtures are fold-independent: fit once.
    std::vector<wgmm::LabeledGmm> source_gmms;
    for (std::size_t i = 0; i < source_data.size(); ++i) {
        source_gmms.push_back(wgmm::fit_labeled(source_data[i].X, source_data[i].y,
                                                o.source_k, o.seed + i));
    }

    // Source-only baseline: one class-conditional fit of the pooled sources,
    // scored on each fold's target test split.
    std::optional<wgmm::LabeledGmm> baseline_model;
    if (o.baseline) {
        Eigen::Index total = 0;
        for (const auto& ds : source_data) total += ds.n();
        Eigen::MatrixXd pooled_X(total, source_data.front().dim());
        std::vector<int> pooled_y;
        pooled_y.reserve(static_cast<std::size_t>(total));
        Eigen::Index row = 0;
        for (const auto& ds : source_data) {
            pooled_X.middleRows(row, ds.n()) = ds.X;
            pooled_y.insert(pooled_y.end(), ds.y.begin(), ds.y.end());
            row += ds.n();
        }
        baseline_model = wgmm::fit_labeled(pooled_X, pooled_y, o.source_k, o.seed);
    }

    wgmm::StreamConfig scfg;
    scfg.k_min = o.k_min;
    scfg.delta_k = o.delta_k;
    scfg.k_max = o.k_max;
    scfg.forgetting = o.forgetting;
    wgmm::validate(scfg);

    wgmm::DadilConfig base_dcfg;
    base_dcfg.num_atoms = o.atoms;
    base_dcfg.atom_components = o.atom_components;
    base_dcfg.beta = o.beta;
    base_dcfg.lr_atoms = o.lr_atoms;
    base_dcfg.lr_lambda = o.lr_lambda;
    base_dcfg.steps_per_batch = o.steps_per_batch;
    base_dcfg.post_stream_iters = o.post_iters;
    base_dcfg.n_iters = o.offline_iters;
    base_dcfg.bary_fp_iters = o.bary_iters;

    const std::vector<wgmm::FoldSplit> folds = wgmm::kfold_split(target, o.folds, o.seed);

    json fold_reports = json::array();
    json output_files = json::array();
    std::vector<double> acc, acc_baseline, acc_offline, loss_online, loss_offline;

    for (std::size_t f = 0; f < folds.size(); ++f) {
        const std::uint64_t fold_seed = o.seed + f;  // independent derived seed
        wgmm::LabeledDataset train = wgmm::subset(target, folds[f].train);
        wgmm::LabeledDataset test = wgmm::subset(target, folds[f].test);

        wgmm::DadilConfig dcfg = base_dcfg;
        dcfg.seed = fold_seed;

        const std::vector<Eigen::MatrixXd> batches = wgmm::as_stream(train.X, o.batch);
        const Eigen::MatrixXd* eval_X = target_labeled ? &test.X : nullptr;
        const std::vector<int>* eval_y = target_labeled ? &test.y : nullptr;

        wgmm::OnlineResult res =
            wgmm::fit_online(source_gmms, batches, scfg, dcfg, eval_X, eval_y);

        const std::string metrics_name = "metrics_fold" + std::to_string(f) + ".jsonl";
        JsonlWriter metrics(join_path(out_dir, metrics_name), /*append=*/false);
        for (const wgmm::MetricRecord& r : res.metrics) {
            json rec{{"step", r.step},
                     {"phase", r.phase},
                     {"recon_mw2_sq", r.recon_mw2_sq},
                     {"wall_ms", r.wall_ms}};
            rec["accuracy"] = std::isnan(r.accuracy) ? json() : json(r.accuracy);
            metrics.write(rec);
            if (r.phase == "stream" && r.step == res.stream_end_step) {
                metrics.write({{"event", "stream_end"}, {"step", r.step}});
            }
        }

        const std::string dict_name = "dictionary_fold" + std::to_string(f) + ".json";
        wgmm::DictionaryMeta meta;
        meta.beta = o.beta;
        meta.seed = fold_seed;
        meta.iters = static_cast<int>(res.loss_trace.size()) - 1;
        wgmm::save_json_file(join_path(out_dir, dict_name), wgmm::to_json(res.dict, meta));
        output_files.push_back(dict_name);
        output_files.push_back(metrics_name);

        json rep{{"fold", f},
                 {"seed", fold_seed},
                 {"n_train", train.n()},
                 {"n_test", test.n()},
                 {"stream_end_step", res.stream_end_step},
                 {"target_K", res.target_state.model.num_components()},
                 {"final_loss", res.loss_trace.back()}};
        loss_online.push_back(res.loss_trace.back());

        if (target_labeled) {
            const double a =
                accuracy_of(wgmm::target_classify(res.dict, dcfg, test.X), test.y);
            rep["accuracy"] = a;
            acc.push_back(a);
            if (baseline_model) {
                const double b =
                    accuracy_of(wgmm::map_classify(*baseline_model, test.X), test.y);
                rep["baseline_accuracy"] = b;
                acc_baseline.push_back(b);
            }
        }

        if (o.offline) {
            // Same sources, same final target model: the offline reference
            // answers "what if every dictionary step had seen the finished
            // target mixture".
            wgmm::FitResult off =
                wgmm::fit_offline(source_gmms, res.target_state.model, dcfg);
            rep["offline_final_loss"] = off.loss_trace.back();
            loss_offline.push_back(off.loss_trace.back());
            if (target_labeled) {
                const double a =
                    accuracy_of(wgmm::target_classify(off.dict, dcfg, test.X), test.y);
                rep["offline_accuracy"] = a;
                acc_offline.push_back(a);
            }
        }

        fold_reports.push_back(rep);
        std::cout << "fold " << f << ": final_loss=" << res.loss_trace.back();
        if (target_labeled) std::cout << " accuracy=" << rep["accuracy"].get<double>();
        if (baseline_model && target_labeled) {
            std::cout << " baseline=" << rep["baseline_accuracy"].get<double>();
        }
        std::cout << "\n";
    }

    json report{{"n_folds", folds.size()},
                {"folds", fold_reports},
                {"final_loss", stats_json(loss_online)}};
    if (!acc.empty()) report["accuracy"] = stats_json(acc);
    if (!acc_baseline.empty()) report["baseline_accuracy"] = stats_json(acc_baseline);
    if (!loss_offline.empty()) report["offline_final_loss"] = stats_json(loss_offline);
    if (!acc_offline.empty()) report["offline_accuracy"] = stats_json(acc_offline);
    wgmm::save_json_file(join_path(out_dir, "accuracy_report.json"), report);
    output_files.push_back("accuracy_report.json");

    json config{{"sources", o.sources},
                {"target", o.target},
                {"label-column", o.label_column},
                {"folds", o.folds},
                {"seed", o.seed},
                {"source-k", o.source_k},
                {"k-min", o.k_min},
                {"delta-k", o.delta_k},
                {"k-max", o.k_max},
                {"batch", o.batch},
                {"forgetting", o.forgetting},
                {"atoms", o.atoms},
                {"atom-components", o.atom_components},
                {"beta", o.beta},
                {"lr-atoms", o.lr_atoms},
                {"lr-lambda", o.lr_lambda},
                {"steps-per-batch", o.steps_per_batch},
                {"post-iters", o.post_iters},
                {"bary-iters", o.bary_iters},
                {"baseline", o.baseline},
                {"offline", o.offline},
                {"offline-iters", o.offline_iters},
                {"out", out_dir}};
    write_manifest(out_dir, "msda", config, json{{"files", output_files}});

    if (!acc.empty()) {
        const Stats s = stats_of(acc);
        std::cout << "accuracy: mean=" << s.mean << " std=" << s.std_dev << " [2std: "
                  << s.mean - 2.0 * s.std_dev << ", " << s.mean + 2.0 * s.std_dev << "]\n";
        if (!acc_baseline.empty()) {
            std::cout << "baseline accuracy: mean=" << stats_of(acc_baseline).mean << "\n";
        }
    }
    const Stats ls = stats_of(loss_online);
    std::cout << "final_loss: mean=" << ls.mean << " std=" << ls.std_dev << "\n";
}

}  // namespace

void register_msda(CLI::App& app) {
    auto o = std::make_shared<MsdaOpts>();
    CLI::App* sub = app.add_subcommand(
        "msda", "Online multi-source domain adaptation over a streamed target");
    sub->add_option("--sources", o->sources, "Labeled source CSVs")
        ->required()
        ->expected(1, -1);
    sub->add_option("--target", o->target, "Target CSV (labels optional, used for scoring)")
        ->required();
    sub->add_option("--label-column", o->label_column, "Label column name")
        ->capture_default_str();
    sub->add_option("--folds", o->folds, "Cross-validation folds over the target")
        ->check(CLI::Range(2, 1000))
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "Base RNG seed; fold f runs with seed+f")
        ->capture_default_str();
    sub->add_option("--source-k", o->source_k, "Largest per-class model order for source fits")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k-min", o->k_min, "Initial component count of the target stream")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--delta-k", o->delta_k, "Largest per-batch model order")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k-max", o->k_max, "Target stream component cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--batch", o->batch, "Target stream batch size")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--forgetting", o->forgetting, "Target stream old-mass decay")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_option("--atoms", o->atoms, "Dictionary atoms (C)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--atom-components", o->atom_components, "Components per atom (K)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--beta", o->beta, "Label-cost weight in the source terms")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--lr-atoms", o->lr_atoms, "Atom learning rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--lr-lambda", o->lr_lambda, "Barycentric-coordinate learning rate")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--steps-per-batch", o->steps_per_batch,
                    "Dictionary steps per stream batch")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--post-iters", o->post_iters, "Dictionary steps after the stream ends")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    sub->add_option("--bary-iters", o->bary_iters, "Barycenter fixed-point iteration cap")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_flag("--baseline", o->baseline,
                  "Also score a pooled-source classifier on each test split");
    sub->add_flag("--offline", o->offline,
                  "Also fit the offline dictionary against each fold's final target model");
    sub->add_option("--offline-iters", o->offline_iters, "Offline dictionary step count")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--out", o->out, "Output directory (default: $WGMM_OUT_DIR or .)");
    sub->add_option("--config", o->config,
                    "Key=value file merged beneath the flags (flags win)");
    sub->callback([o]() { run_msda(*o); });
}

}  // namespace wgmmcli
