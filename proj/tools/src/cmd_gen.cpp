#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <iostream>
#include <memory>
#include <string>

#include "common.hpp"
#include "cmds.hpp"
#include "wgmm/data.hpp"

namespace wgmmcli {

using nlohmann::json;

namespace {

struct ToyOpts {
    std::uint64_t seed = 0;
    bool shuffled = false;
    std::string out;
    std::string config;
};

void run_gen_toy(const ToyOpts& o) {
    const std::string out_dir = resolve_out_dir(o.out);
    wgmm::LabeledDataset data = wgmm::gen_toy_clusters(o.seed, o.shuffled);
    const std::string csv = join_path(out_dir, "toy.csv");
    wgmm::save_csv(csv, data);

    json config{{"seed", o.seed}, {"shuffled", o.shuffled}, {"out", out_dir}};
    json outputs{{"csv", "toy.csv"}, {"rows", data.n()}, {"dim", data.dim()}};
    write_manifest(out_dir, "gen-toy", config, outputs);
    std::cout << "wrote " << csv << " (" << data.n() << " rows, " << data.dim()
              << " features + label)\n";
}

struct MsdaOpts {
    int domains = 3;
    int classes = 5;
    int dim = 8;
    double shift_scale = 4.0;
    int per_domain = 500;
    std::uint64_t seed = 0;
    std::string out;
    std::string config;
};

void run_gen_msda(const MsdaOpts& o) {
    const std::string out_dir = resolve_out_dir(o.out);
    wgmm::MsdaData data = wgmm::gen_msda_synthetic(o.domains, o.classes, o.dim,
                                                   o.shift_scale, o.per_domain, o.seed);
    json outputs;
    outputs["sources"] = json::array();
    for (std::size_t i = 0; i < data.sources.size(); ++i) {
        const std::string name = "source_" + std::to_string(i) + ".csv";
        wgmm::save_csv(join_path(out_dir, name), data.sources[i]);
        outputs["sources"].push_back(name);
    }
    wgmm::save_csv(join_path(out_dir, "target.csv"), data.target);
    outputs["target"] = "target.csv";
    outputs["rows_per_domain"] = data.target.n();
    outputs["dim"] = data.target.dim();

    json config{{"domains", o.domains},        {"classes", o.classes},
                {"dim", o.dim},                {"shift-scale", o.shift_scale},
                {"per-domain", o.per_domain},  {"seed", o.seed},
                {"out", out_dir}};
    write_manifest(out_dir, "gen-msda", config, outputs);
    std::cout << "wrote " << data.sources.size() << " source CSVs + target.csv ("
              << data.target.n() << " rows each) to " << out_dir << "\n";
}

// The actual merge happens before parsing (see merge_config_args); the
// option exists so the flag is documented and reserved.
void add_config_option(CLI::App* sub, std::string& slot) {
    sub->add_option("--config", slot, "Key=value file merged beneath the flags (flags win)");
}

}  // namespace

void register_gen(CLI::App& app) {
    CLI::App* gen = app.add_subcommand("gen", "Generate synthetic benchmark datasets");
    gen->require_subcommand(1);

    auto toy = std::make_shared<ToyOpts>();
    CLI::App* toy_cmd = gen->add_subcommand("toy", "Three curved 2-D clusters, 600 samples");
    toy_cmd->add_option("--seed", toy->seed, "RNG seed")->capture_default_str();
    toy_cmd->add_flag("--shuffled", toy->shuffled,
                      "Randomize arrival order (default: cluster by cluster)");
    toy_cmd->add_option("--out", toy->out, "Output directory (default: $WGMM_OUT_DIR or .)");
    add_config_option(toy_cmd, toy->config);
    toy_cmd->callback([toy]() { run_gen_toy(*toy); });

    auto msda = std::make_shared<MsdaOpts>();
    CLI::App* msda_cmd =
        gen->add_subcommand("msda", "Shifted multi-domain Gaussian class blobs");
    msda_cmd->add_option("--domains", msda->domains, "Number of source domains")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    msda_cmd->add_option("--classes", msda->classes, "Classes per domain")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    msda_cmd->add_option("--dim", msda->dim, "Feature dimension")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    msda_cmd->add_option("--shift-scale", msda->shift_scale, "Length of each domain shift")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    msda_cmd->add_option("--per-domain", msda->per_domain, "Samples per domain")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    msda_cmd->add_option("--seed", msda->seed, "RNG seed")->capture_default_str();
    msda_cmd->add_option("--out", msda->out, "Output directory (default: $WGMM_OUT_DIR or .)");
    add_config_option(msda_cmd, msda->config);
    msda_cmd->callback([msda]() { run_gen_msda(*msda); });
}

}  // namespace wgmmcli
