#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace wgmm {

struct LabeledDataset {
    Eigen::MatrixXd X;    // n x d features
    std::vector<int> y;   // n class indices; empty means unlabeled
    std::string domain_id;

    Eigen::Index n() const { return X.rows(); }
    Eigen::Index dim() const { return X.cols(); }
    bool labeled() const { return !y.empty(); }
    int num_classes() const;
};

void validate(const LabeledDataset& data);

/// Three interleaved spiral-arm clusters in the plane, 200 points each
/// (600 total), labels = arm index. Arrival order is adversarial by
/// default: arm by arm, each arm from the inside out; pass shuffled=true
/// for a random order instead.
LabeledDataset gen_toy_clusters(std::uint64_t seed, bool shuffled = false);

struct MsdaData {
    std::vector<LabeledDataset> sources;
    LabeledDataset target;
};

/// Class-conditional unit Gaussian blobs shared by all domains; every
/// domain is translated by its own random shift of length shift_scale
/// lying in the span of the centered class means, and the target shift is
/// a convex combination of the source shifts (so the target sits in the
/// sources' barycentric hull). Per-domain class counts are balanced
/// exactly; n_per_domain is rounded down to a multiple of n_c.
MsdaData gen_msda_synthetic(int n_sources, int n_c, int d, double shift_scale,
                            int n_per_domain, std::uint64_t seed);

/// CSV ingestion: numeric feature columns plus an optional label column
/// picked by header name or by zero-based index. Throws DataError naming
/// the offending row/column on malformed input, including NaN/inf cells.
LabeledDataset load_csv(const std::string& path,
                        const std::optional<std::string>& label_column = std::nullopt,
                        bool has_header = true);

/// Writes features (and the trailing label column when present) with 17
/// significant digits, so load_csv round-trips values exactly.
void save_csv(const std::string& path, const LabeledDataset& data,
              bool write_header = true);

struct FoldSplit {
    std::vector<int> train;
    std::vector<int> test;
};

/// Stratified k-fold partition: per class, indices are shuffled and dealt
/// round-robin, so folds are disjoint, exhaustive, and class-balanced
/// within one sample.
std::vector<FoldSplit> kfold_split(const LabeledDataset& data, int k, std::uint64_t seed);

/// Slices rows into ceil(n / n_b) contiguous batches, preserving order.
std::vector<Eigen::MatrixXd> as_stream(const Eigen::MatrixXd& X, int n_b);

/// Rows (and labels) at the given indices, in the given order.
LabeledDataset subset(const LabeledDataset& data, const std::vector<int>& idx);

}  // namespace wgmm
