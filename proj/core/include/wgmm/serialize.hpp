#pragma once

#include "wgmm/dictionary.hpp"
#include "wgmm/gmm.hpp"
#include "wgmm/stream.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <string>
#include <utility>

namespace wgmm {

/// Mixture schema: {d, K, weights[], components[{mu[], sigma[]}], labels[][]? }
/// (labels present only for labeled mixtures). Doubles round-trip exactly.
nlohmann::json to_json(const Gmm& gmm);
nlohmann::json to_json(const LabeledGmm& gmm);

/// Parsers throw DataError naming the offending field path.
Gmm gmm_from_json(const nlohmann::json& j, const std::string& path = "gmm");
LabeledGmm labeled_gmm_from_json(const nlohmann::json& j, const std::string& path = "gmm");

/// Stream checkpoint: the mixture schema plus
/// {n_seen, n_eff, k_min, k_max, delta_k, forgetting, em{...}, seed, step_index}.
/// A run resumed from a checkpoint replays bit-identically.
nlohmann::json to_json(const StreamState& state);
StreamState stream_state_from_json(const nlohmann::json& j,
                                   const std::string& path = "checkpoint");

struct DictionaryMeta {
    double beta = 0.0;
    std::uint64_t seed = 0;
    int iters = 0;
};

/// Dictionary schema:
/// {C, K, d, n_c, beta, var_floor_std, atoms[mixture-with-labels], Lambda[][],
///  meta{seed, iters}}.
nlohmann::json to_json(const Dictionary& dict, const DictionaryMeta& meta);
std::pair<Dictionary, DictionaryMeta> dictionary_from_json(
    const nlohmann::json& j, const std::string& path = "dictionary");

/// File helpers; DataError on I/O or parse failure.
nlohmann::json load_json_file(const std::string& path);
void save_json_file(const std::string& path, const nlohmann::json& j);

}  // namespace wgmm
