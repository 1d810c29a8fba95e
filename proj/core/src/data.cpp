#include "wgmm/data.hpp"

#include "wgmm/errors.hpp"
#include "wgmm/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace wgmm {

int LabeledDataset::num_classes() const {
    if (y.empty()) return 0;
    return *std::max_element(y.begin(), y.end()) + 1;
}

void validate(const LabeledDataset& data) {
    if (data.X.rows() == 0 || data.X.cols() == 0) {
        throw std::invalid_argument("LabeledDataset: empty feature matrix");
    }
    if (!data.y.empty()) {
        if (static_cast<Eigen::Index>(data.y.size()) != data.X.rows()) {
            throw std::invalid_argument("LabeledDataset: label count does not match rows");
        }
        for (int label : data.y) {
            if (label < 0) throw std::invalid_argument("LabeledDataset: negative class index");
        }
    }
}

LabeledDataset gen_toy_clusters(std::uint64_t seed, bool shuffled) {
    constexpr int kArms = 3;
    constexpr int kPerArm = 200;
    // Each arm curves through ~69 degrees of its 120-degree slot, leaving a
    // clear gap to the next arm: the clusters stay visibly separate (a batch
    // of ~32 samples resolves all three) while each one is genuinely curved.
    constexpr double kSweep = 1.2;        // radians each arm curves through
    constexpr double kInnerRadius = 1.5;
    constexpr double kRadialGrowth = 2.5;
    constexpr double kNoise = 0.18;

    Rng rng(mix_seed(seed, 0x707ULL));
    LabeledDataset data;
    data.domain_id = "toy";
    data.X.resize(kArms * kPerArm, 2);
    data.y.resize(static_cast<std::size_t>(kArms) * kPerArm);
    Eigen::Index row = 0;
    for (int arm = 0; arm < kArms; ++arm) {
        const double base_angle = 2.0 * M_PI * arm / kArms;
        for (int i = 0; i < kPerArm; ++i) {
            const double s = (static_cast<double>(i) + 0.5) / kPerArm;
            const double angle = base_angle + kSweep * s;
            const double radius = kInnerRadius + kRadialGrowth * s;
            data.X(row, 0) = radius * std::cos(angle) + kNoise * rng.normal();
            data.X(row, 1) = radius * std::sin(angle) + kNoise * rng.normal();
            data.y[static_cast<std::size_t>(row)] = arm;
            ++row;
        }
    }
    if (shuffled) {
        const std::vector<int> perm = rng.permutation(static_cast<int>(data.X.rows()));
        return subset(data, perm);
    }
    return data;
}

MsdaData gen_msda_synthetic(int n_sources, int n_c, int d, double shift_scale,
                            int n_per_domain, std::uint64_t seed) {
    if (n_sources < 1) throw std::invalid_argument("gen_msda_synthetic: need n_sources >= 1");
    if (n_c < 2) throw std::invalid_argument("gen_msda_synthetic: need n_c >= 2");
    if (d < 1) throw std::invalid_argument("gen_msda_synthetic: need d >= 1");
    if (shift_scale < 0.0) {
        throw std::invalid_argument("gen_msda_synthetic: shift_scale must be nonnegative");
    }
    const int n_per_class = n_per_domain / n_c;
    if (n_per_class < 1) {
        throw std::invalid_argument("gen_msda_synthetic: n_per_domain yields empty classes");
    }

    constexpr double kSeparation = 8.0;  // minimum pairwise class-mean distance (std units)
    Rng rng(mix_seed(seed, 0xD0ULL));

    // Class means rescaled so the closest pair sits kSeparation apart.
    Eigen::MatrixXd means(n_c, d);
    for (Eigen::Index i = 0; i < means.size(); ++i) means.data()[i] = rng.normal();
    double min_dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < n_c; ++a) {
        for (int b = a + 1; b < n_c; ++b) {
            min_dist = std::min(min_dist, (means.row(a) - means.row(b)).norm());
        }
    }
    means *= kSeparation / min_dist;

    // Domain shifts: unit directions inside the span of the centered class
    // means (the discriminative subspace), scaled to shift_scale. The
    // target shift is an interior convex combination of the source shifts.
    Eigen::MatrixXd centered = means.rowwise() - means.colwise().mean();
    auto span_direction = [&]() {
        Eigen::RowVectorXd v = Eigen::RowVectorXd::Zero(d);
        for (int c = 0; c < n_c; ++c) v += rng.normal() * centered.row(c);
        const double norm = v.norm();
        return norm > 0.0 ? Eigen::RowVectorXd(v / norm) : v;
    };
    std::vector<Eigen::RowVectorXd> shifts;
    for (int s = 0; s < n_sources; ++s) shifts.push_back(shift_scale * span_direction());
    Eigen::VectorXd alpha(n_sources);
    for (int s = 0; s < n_sources; ++s) alpha[s] = -std::log(1.0 - rng.uniform());
    alpha /= alpha.sum();
    Eigen::RowVectorXd target_shift = Eigen::RowVectorXd::Zero(d);
    for (int s = 0; s < n_sources; ++s) target_shift += alpha[s] * shifts[s];

    auto make_domain = [&](const Eigen::RowVectorXd& shift, const std::string& id) {
        LabeledDataset domain;
        domain.domain_id = id;
        domain.X.resize(static_cast<Eigen::Index>(n_per_class) * n_c, d);
        domain.y.resize(static_cast<std::size_t>(n_per_class) * n_c);
        Eigen::Index row = 0;
        for (int c = 0; c < n_c; ++c) {
            for (int i = 0; i < n_per_class; ++i) {
                for (int j = 0; j < d; ++j) {
                    domain.X(row, j) = means(c, j) + shift[j] + rng.normal();
                }
                domain.y[static_cast<std::size_t>(row)] = c;
                ++row;
            }
        }
        // class-mixed row order, so stream batches are not class-blocked
        return subset(domain, rng.permutation(static_cast<int>(domain.X.rows())));
    };

    MsdaData out;
    for (int s = 0; s < n_sources; ++s) {
        out.sources.push_back(make_domain(shifts[static_cast<std::size_t>(s)],
                                          "source_" + std::to_string(s)));
    }
    out.target = make_domain(target_shift, "target");
    return out;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    return cells;
}

std::string trimmed(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return "";
    const auto end = s.find_last_not_of(" \t\r");
    return s.substr(begin, end - begin + 1);
}

double parse_cell(const std::string& raw, const std::string& path, std::size_t row,
                  std::size_t col) {
    const std::string cell = trimmed(raw);
    const auto where = [&] {
        return path + ": row " + std::to_string(row) + ", column " + std::to_string(col);
    };
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc() || ptr != last || cell.empty()) {
        throw DataError(where() + ": not a number: '" + cell + "'");
    }
    if (!std::isfinite(value)) {
        throw DataError(where() + ": non-finite value: '" + cell + "'");
    }
    return value;
}

}  // namespace

LabeledDataset load_csv(const std::string& path,
                        const std::optional<std::string>& label_column, bool has_header) {
    std::ifstream in(path);
    if (!in) throw DataError(path + ": cannot open file");

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw DataError(path + ": empty file");

    std::vector<std::string> header;
    std::size_t first_data = 0;
    if (has_header) {
        header = split_line(lines[0]);
        for (std::string& h : header) h = trimmed(h);
        first_data = 1;
        if (lines.size() == 1) throw DataError(path + ": no data rows");
    }

    const std::size_t n_cols = split_line(lines[first_data]).size();
    if (has_header && header.size() != n_cols) {
        throw DataError(path + ": header has " + std::to_string(header.size()) +
                        " columns but row 1 has " + std::to_string(n_cols));
    }

    std::ptrdiff_t label_idx = -1;
    if (label_column.has_value()) {
        const std::string want = trimmed(*label_column);
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == want) {
                label_idx = static_cast<std::ptrdiff_t>(i);
                break;
            }
        }
        if (label_idx < 0) {
            int parsed = -1;
            const auto [ptr, ec] =
                std::from_chars(want.data(), want.data() + want.size(), parsed);
            if (ec == std::errc() && ptr == want.data() + want.size() && parsed >= 0 &&
                parsed < static_cast<int>(n_cols)) {
                label_idx = parsed;
            }
        }
        if (label_idx < 0) {
            throw DataError(path + ": label column '" + *label_column + "' not found");
        }
    }

    const std::size_t n_rows = lines.size() - first_data;
    const std::size_t n_features = n_cols - (label_idx >= 0 ? 1 : 0);
    if (n_features == 0) throw DataError(path + ": no feature columns");

    LabeledDataset data;
    data.domain_id = path;
    data.X.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_features));
    if (label_idx >= 0) data.y.resize(n_rows);

    for (std::size_t r = 0; r < n_rows; ++r) {
        const std::size_t row_no = r + 1;  // 1-based data row for messages
        const std::vector<std::string> cells = split_line(lines[first_data + r]);
        if (cells.size() != n_cols) {
            throw DataError(path + ": row " + std::to_string(row_no) + " has " +
                            std::to_string(cells.size()) + " columns, expected " +
                            std::to_string(n_cols));
        }
        Eigen::Index feature = 0;
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double value = parse_cell(cells[c], path, row_no, c + 1);
            if (static_cast<std::ptrdiff_t>(c) == label_idx) {
                const long label = std::lround(value);
                if (std::abs(value - static_cast<double>(label)) > 1e-9 || label < 0) {
                    throw DataError(path + ": row " + std::to_string(row_no) +
                                    ": label must be a nonnegative integer, got '" +
                                    cells[c] + "'");
                }
                data.y[r] = static_cast<int>(label);
            } else {
                data.X(static_cast<Eigen::Index>(r), feature++) = value;
            }
        }
    }
    return data;
}

void save_csv(const std::string& path, const LabeledDataset& data, bool write_header) {
    validate(data);
    std::ofstream out(path);
    if (!out) throw DataError(path + ": cannot open file for writing");
    const Eigen::Index d = data.dim();
    if (write_header) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j > 0) out << ',';
            out << 'f' << j;
        }
        if (data.labeled()) out << ",label";
        out << '\n';
    }
    char buf[64];
    for (Eigen::Index i = 0; i < data.n(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            if (j > 0) out << ',';
            std::snprintf(buf, sizeof buf, "%.17g", data.X(i, j));
            out << buf;
        }
        if (data.labeled()) out << ',' << data.y[static_cast<std::size_t>(i)];
        out << '\n';
    }
    if (!out) throw DataError(path + ": write failed");
}

std::vector<FoldSplit> kfold_split(const LabeledDataset& data, int k, std::uint64_t seed) {
    validate(data);
    const int n = static_cast<int>(data.n());
    if (k < 2) throw std::invalid_argument("kfold_split: need k >= 2");
    if (k > n) throw std::invalid_argument("kfold_split: more folds than samples");

    // group indices by class (one group when unlabeled), shuffle, deal.
    const int n_groups = data.labeled() ? data.num_classes() : 1;
    std::vector<std::vector<int>> groups(static_cast<std::size_t>(n_groups));
    for (int i = 0; i < n; ++i) {
        const int g = data.labeled() ? data.y[static_cast<std::size_t>(i)] : 0;
        groups[static_cast<std::size_t>(g)].push_back(i);
    }

    Rng rng(mix_seed(seed, 0xF01DULL));
    std::vector<std::vector<int>> test_folds(static_cast<std::size_t>(k));
    for (std::vector<int>& group : groups) {
        const std::vector<int> perm = rng.permutation(static_cast<int>(group.size()));
        for (std::size_t pos = 0; pos < perm.size(); ++pos) {
            test_folds[pos % static_cast<std::size_t>(k)].push_back(
                group[static_cast<std::size_t>(perm[pos])]);
        }
    }

    std::vector<FoldSplit> folds(static_cast<std::size_t>(k));
    for (int f = 0; f < k; ++f) {
        std::vector<int>& test = test_folds[static_cast<std::size_t>(f)];
        std::sort(test.begin(), test.end());
        std::vector<char> in_test(static_cast<std::size_t>(n), 0);
        for (int i : test) in_test[static_cast<std::size_t>(i)] = 1;
        FoldSplit& fold = folds[static_cast<std::size_t>(f)];
        fold.test = std::move(test);
        for (int i = 0; i < n; ++i) {
            if (!in_test[static_cast<std::size_t>(i)]) fold.train.push_back(i);
        }
    }
    return folds;
}

std::vector<Eigen::MatrixXd> as_stream(const Eigen::MatrixXd& X, int n_b) {
    if (n_b < 1) throw std::invalid_argument("as_stream: batch size must be >= 1");
    std::vector<Eigen::MatrixXd> batches;
    for (Eigen::Index at = 0; at < X.rows(); at += n_b) {
        const Eigen::Index take = std::min<Eigen::Index>(n_b, X.rows() - at);
        batches.push_back(X.middleRows(at, take));
    }
    return batches;
}

LabeledDataset subset(const LabeledDataset& data, const std::vector<int>& idx) {
    LabeledDataset out;
    out.domain_id = data.domain_id;
    out.X.resize(static_cast<Eigen::Index>(idx.size()), data.dim());
    if (data.labeled()) out.y.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const int src = idx[i];
        if (src < 0 || src >= data.n()) {
            throw std::invalid_argument("subset: index out of range");
        }
        out.X.row(static_cast<Eigen::Index>(i)) = data.X.row(src);
        if (data.labeled()) out.y[i] = data.y[static_cast<std::size_t>(src)];
    }
    return out;
}

}  // namespace wgmm
