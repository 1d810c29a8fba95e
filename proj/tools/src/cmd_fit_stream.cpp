#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "common.hpp"
#include "cmds.hpp"
#include "wgmm/data.hpp"
#include "wgmm/serialize.hpp"
#include "wgmm/stream.hpp"
#include "wgmm/transport.hpp"

namespace wgmmcli {

using nlohmann::json;

namespace {

struct FitStreamOpts {
    std::string input;
    std::string label_column;
    int k_min = 5;
    int delta_k = 3;
    int k_max = 15;
    int batch = 32;
    double forgetting = 1.0;
    std::uint64_t seed = 0;
    bool offline = false;
    std::string resume;
    std::string out;
    std::string config;
};

double ms_since(const std::chrono::steady_clock::time_point& t0) {
    const auto dt = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double, std::milli>(dt).count();
}

void run_fit_stream(const FitStreamOpts& o) {
    const std::string out_dir = resolve_out_dir(o.out);
    const std::optional<std::string> label_col =
        o.label_column.empty() ? std::nullopt : std::optional<std::string>(o.label_column);
    // Density estimation: a label column, when named, is stripped.
    wgmm::LabeledDataset data = load_dataset(o.input, label_col, /*no_labels=*/true);

    const bool resuming = !o.resume.empty();
    wgmm::StreamConfig cfg;
    cfg.k_min = o.k_min;
    cfg.delta_k = o.delta_k;
    cfg.k_max = o.k_max;
    cfg.forgetting = o.forgetting;
    wgmm::validate(cfg);

    std::vector<Eigen::MatrixXd> batches = wgmm::as_stream(data.X, o.batch);
    JsonlWriter metrics(join_path(out_dir, "metrics.jsonl"), /*append=*/resuming);

    wgmm::StreamState state;
    std::size_t first = 0;
    if (resuming) {
        state = wgmm::stream_state_from_json(wgmm::load_json_file(o.resume));
    } else {
        const auto t0 = std::chrono::steady_clock::now();
        state = wgmm::init_stream(batches.front(), cfg, o.seed);
        metrics.write({{"step", 0},
                       {"K", state.model.num_components()},
                       {"loglik_on_batch", wgmm::log_likelihood(state.model, batches.front())},
                       {"wall_ms", ms_since(t0)}});
        first = 1;
    }
    for (std::size_t t = first; t < batches.size(); ++t) {
        const auto t0 = std::chrono::steady_clock::now();
        wgmm::stream_step(state, batches[t]);
        metrics.write({{"step", state.step_index},
                       {"K", state.model.num_components()},
                       {"loglik_on_batch", wgmm::log_likelihood(state.model, batches[t])},
                       {"wall_ms", ms_since(t0)}});
    }

    wgmm::save_json_file(join_path(out_dir, "model.json"), wgmm::to_json(state.model));
    wgmm::save_json_file(join_path(out_dir, "checkpoint.json"), wgmm::to_json(state));

    json outputs{{"model", "model.json"},
                 {"checkpoint", "checkpoint.json"},
                 {"metrics", "metrics.jsonl"},
                 {"final_K", state.model.num_components()},
                 {"n_seen", state.n_seen},
                 {"steps", state.step_index}};

    if (o.offline) {
        // Reference fit: one EM run at the stream's component cap on the
        // whole input, for an online-vs-offline distance readout.
        wgmm::Gmm offline = wgmm::get_best_gmm(data.X, o.k_max, o.k_max, o.seed);
        wgmm::save_json_file(join_path(out_dir, "offline_model.json"), wgmm::to_json(offline));
        const double gap = wgmm::mw2_sq(state.model, offline);
        outputs["offline_model"] = "offline_model.json";
        outputs["mw2_sq_online_vs_offline"] = gap;
        std::cout << "mw2_sq(online, offline) = " << gap << "\n";
    }

    json config{{"input", o.input},        {"label-column", o.label_column},
                {"k-min", o.k_min},        {"delta-k", o.delta_k},
                {"k-max", o.k_max},        {"batch", o.batch},
                {"forgetting", o.forgetting}, {"seed", o.seed},
                {"offline", o.offline},    {"resume", o.resume},
                {"out", out_dir}};
    write_manifest(out_dir, "fit-stream", config, outputs);
    std::cout << "stream done: " << batches.size() << " batches, K="
              << state.model.num_components() << ", n_seen=" << state.n_seen << "\n";
}

}  // namespace

void register_fit_stream(CLI::App& app) {
    auto o = std::make_shared<FitStreamOpts>();
    CLI::App* sub = app.add_subcommand(
        "fit-stream", "Fit a Gaussian mixture online over a streamed CSV");
    sub->add_option("--input", o->input, "Input CSV of samples")->required();
    sub->add_option("--label-column", o->label_column,
                    "Column (name or zero-based index) to strip before fitting");
    sub->add_option("--k-min", o->k_min, "Components of the initial fit")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--delta-k", o->delta_k, "Largest model order tried per batch")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--k-max", o->k_max, "Component cap kept after every step")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--batch", o->batch, "Samples per stream batch")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sub->add_option("--forgetting", o->forgetting,
                    "Old-mass decay per step; 1 keeps the full history")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    sub->add_option("--seed", o->seed, "RNG seed")->capture_default_str();
    sub->add_flag("--offline", o->offline,
                  "Also fit a k-max EM reference on the whole input");
    sub->add_option("--resume", o->resume,
                    "Checkpoint JSON to continue from (input CSV = remaining stream)");
    sub->add_option("--out", o->out, "Output directory (default: $WGMM_OUT_DIR or .)");
    sub->add_option("--config", o->config,
                    "Key=value file merged beneath the flags (flags win)");
    sub->callback([o]() { run_fit_stream(*o); });
}

}  // namespace wgmmcli
