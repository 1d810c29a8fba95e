#pragma once

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

#include "wgmm/data.hpp"

namespace wgmmcli {

// Exit codes shared by every subcommand.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumeric = 4;

// Output directory resolution: explicit flag > WGMM_OUT_DIR > current dir.
// Creates the directory when missing.
std::string resolve_out_dir(const std::string& flag_value);

// Config-file support: strips "--config FILE" (or --config=FILE) from the
// raw arguments and splices the file's key=value pairs in as "--key=value"
// tokens right after the subcommand names. Keys the command line already
// sets are skipped, so explicit flags always win; unknown keys surface as
// unrecognized options (usage error). The file holds one key=value per
// line, with '#'/';' comments.
std::vector<std::string> merge_config_args(const std::vector<std::string>& args);

// Joins out_dir and a file name portably.
std::string join_path(const std::string& dir, const std::string& name);

// Writes <command>_manifest.json with the resolved configuration and the
// produced files. Timestamps live only under "meta" so reruns stay
// byte-identical elsewhere.
void write_manifest(const std::string& out_dir, const std::string& command,
                    const nlohmann::json& resolved_config,
                    const nlohmann::json& outputs);

// Loads a CSV, optionally peeling a label column ("name" or zero-based
// index). no_labels drops the parsed labels (density-estimation inputs).
wgmm::LabeledDataset load_dataset(const std::string& path,
                                  const std::optional<std::string>& label_column,
                                  bool no_labels);

// Streams one JSON object per line into an already-open metrics file.
class JsonlWriter {
  public:
    JsonlWriter(const std::string& path, bool append);
    ~JsonlWriter();
    JsonlWriter(const JsonlWriter&) = delete;
    JsonlWriter& operator=(const JsonlWriter&) = delete;

    void write(const nlohmann::json& record);

  private:
    struct Impl;
    Impl* impl_;
};

}  // namespace wgmmcli
