#include "qmkl/data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "qmkl/error.hpp"
#include "qmkl/random.hpp"

namespace qmkl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_both_classes(const std::vector<int> &labels, const char *what) {
    const bool pos = std::find(labels.begin(), labels.end(), 1) != labels.end();
    const bool neg = std::find(labels.begin(), labels.end(), -1) != labels.end();
    if (!pos || !neg) {
        fail(ErrorCode::Label, std::string(what) + " partition is missing a class");
    }
}

} // namespace

Matrix Dataset::rows(const std::vector<std::size_t> &idx) const {
    Matrix out(static_cast<Eigen::Index>(idx.size()), features.cols());
    for (std::size_t k = 0; k < idx.size(); ++k) {
        out.row(static_cast<Eigen::Index>(k)) = features.row(static_cast<Eigen::Index>(idx[k]));
    }
    return out;
}

std::vector<int> Dataset::labels_at(const std::vector<std::size_t> &idx) const {
    std::vector<int> out;
    out.reserve(idx.size());
    for (auto i : idx) {
        out.push_back(labels[i]);
    }
    return out;
}

bool operator==(const Dataset &a, const Dataset &b) {
    return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
           a.features == b.features && a.labels == b.labels &&
           a.train_indices == b.train_indices && a.test_indices == b.test_indices;
}

Dataset generate_dataset(const GeneratorConfig &config) {
    const std::size_t d = config.n_features;
    const std::size_t k = config.clusters_per_class;
    if (d < 1) {
        fail(ErrorCode::Argument, "generate_dataset: need at least one feature");
    }
    if (config.n_samples < 2 || config.n_samples % 2 != 0) {
        fail(ErrorCode::Argument, "generate_dataset: n_samples must be even and >= 2");
    }
    if (!(config.class_sep > 0.0)) {
        fail(ErrorCode::Argument, "generate_dataset: class_sep must be positive");
    }
    if (k < 1) {
        fail(ErrorCode::Argument, "generate_dataset: need at least one cluster per class");
    }
    const std::size_t n_clusters = 2 * k;
    if (d < 63 && n_clusters > (std::size_t{1} << d)) {
        fail(ErrorCode::Placement, "generate_dataset: " + std::to_string(n_clusters) +
                                       " clusters do not fit on the vertices of a " +
                                       std::to_string(d) + "-cube");
    }

    auto rng = make_rng(config.seed);
    std::bernoulli_distribution coin(0.5);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);

    std::vector<std::vector<bool>> vertices;
    while (vertices.size() < n_clusters) {
        std::vector<bool> v(d);
        for (std::size_t j = 0; j < d; ++j) {
            v[j] = coin(rng);
        }
        if (std::find(vertices.begin(), vertices.end(), v) == vertices.end()) {
            vertices.push_back(std::move(v));
        }
    }

    const std::size_t per_class = config.n_samples / 2;
    Dataset ds;
    ds.seed = config.seed;
    ds.class_sep = config.class_sep;
    ds.features.resize(static_cast<Eigen::Index>(config.n_samples), static_cast<Eigen::Index>(d));
    ds.labels.reserve(config.n_samples);

    Eigen::Index row = 0;
    for (std::size_t c = 0; c < n_clusters; ++c) {
        const int label = c % 2 == 0 ? -1 : 1;
        const std::size_t slot = c / 2;
        const std::size_t count = per_class / k + (slot < per_class % k ? 1 : 0);

        Vector centroid(static_cast<Eigen::Index>(d));
        for (std::size_t j = 0; j < d; ++j) {
            centroid(static_cast<Eigen::Index>(j)) = vertices[c][j] ? config.class_sep : -config.class_sep;
        }
        Matrix mixing(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d));
        for (Eigen::Index a = 0; a < mixing.rows(); ++a) {
            for (Eigen::Index b = 0; b < mixing.cols(); ++b) {
                mixing(a, b) = unit(rng);
            }
        }
        for (std::size_t s = 0; s < count; ++s) {
            Vector z(static_cast<Eigen::Index>(d));
            for (Eigen::Index j = 0; j < z.size(); ++j) {
                z(j) = normal(rng);
            }
            ds.features.row(row++) = (centroid + mixing * z).transpose();
            ds.labels.push_back(label);
        }
    }
    return ds;
}

void MinMaxScaler::fit(const Matrix &features) {
    if (features.rows() < 1) {
        fail(ErrorCode::Size, "MinMaxScaler: no samples");
    }
    min_ = features.colwise().minCoeff().transpose();
    max_ = features.colwise().maxCoeff().transpose();
    for (Eigen::Index j = 0; j < min_.size(); ++j) {
        if (!(max_(j) > min_(j))) {
            fail(ErrorCode::Degenerate, "MinMaxScaler: feature column " + std::to_string(j) +
                                            " is constant");
        }
    }
}

Matrix MinMaxScaler::transform(const Matrix &features) const {
    if (features.cols() != min_.size()) {
        fail(ErrorCode::Dimension, "MinMaxScaler: column count differs from fitted data");
    }
    Matrix out(features.rows(), features.cols());
    for (Eigen::Index j = 0; j < features.cols(); ++j) {
        const double lo = min_(j);
        const double span = max_(j) - lo;
        for (Eigen::Index i = 0; i < features.rows(); ++i) {
            out(i, j) = (features(i, j) - lo) / span * kTwoPi;
        }
    }
    return out;
}

Matrix minmax_scale(const Matrix &features) {
    MinMaxScaler scaler;
    scaler.fit(features);
    return scaler.transform(features);
}

Dataset split(Dataset dataset, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        fail(ErrorCode::Argument, "split: ratio must lie in (0, 1)");
    }
    const std::size_t n = dataset.n_samples();
    const auto n_train = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (n_train == 0 || n_train >= n) {
        fail(ErrorCode::Size, "split: ratio leaves one partition empty");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    auto rng = make_rng(derive_seed({seed, 0x5b117ULL}));
    std::shuffle(order.begin(), order.end(), rng);

    dataset.train_indices.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
    dataset.test_indices.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
    std::sort(dataset.train_indices.begin(), dataset.train_indices.end());
    std::sort(dataset.test_indices.begin(), dataset.test_indices.end());
    require_both_classes(dataset.train_labels(), "training");
    require_both_classes(dataset.test_labels(), "testing");
    return dataset;
}

Dataset make_instance(const InstanceConfig &config) {
    Dataset ds = generate_dataset(config.generator);
    if (!config.scale_on_train_only) {
        ds.features = minmax_scale(ds.features);
        return split(std::move(ds), config.train_ratio, config.generator.seed);
    }
    ds = split(std::move(ds), config.train_ratio, config.generator.seed);
    MinMaxScaler scaler;
    scaler.fit(ds.train_features());
    ds.features = scaler.transform(ds.features);
    return ds;
}

void save_csv(std::ostream &out, const Dataset &dataset) {
    const auto d = dataset.features.cols();
    for (Eigen::Index j = 0; j < d; ++j) {
        out << 'f' << j << ',';
    }
    out << "label,partition\n";

    std::vector<char> is_train(dataset.n_samples(), 0);
    std::vector<char> is_test(dataset.n_samples(), 0);
    for (auto i : dataset.train_indices) {
        is_train[i] = 1;
    }
    for (auto i : dataset.test_indices) {
        is_test[i] = 1;
    }
    char buf[40];
    for (std::size_t i = 0; i < dataset.n_samples(); ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", dataset.features(static_cast<Eigen::Index>(i), j));
            out << buf << ',';
        }
        out << dataset.labels[i] << ',';
        out << (is_train[i] ? "train" : is_test[i] ? "test" : "none") << '\n';
    }
}

Dataset load_csv(std::istream &in) {
    std::string line;
    if (!std::getline(in, line)) {
        fail(ErrorCode::Parse, "dataset csv: missing header");
    }
    if (!line.empty() && line.back() == '\r') {
        line.pop_back();
    }
    std::vector<std::string> header;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            header.push_back(cell);
        }
    }
    if (header.size() < 3 || header[header.size() - 2] != "label" || header.back() != "partition") {
        fail(ErrorCode::Parse, "dataset csv line 1: header must be f0,...,label,partition");
    }
    const std::size_t d = header.size() - 2;
    for (std::size_t j = 0; j < d; ++j) {
        if (header[j] != "f" + std::to_string(j)) {
            fail(ErrorCode::Parse, "dataset csv line 1: unexpected column '" + header[j] + "'");
        }
    }

    std::vector<std::vector<double>> rows;
    Dataset ds;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        const std::string where = "dataset csv line " + std::to_string(line_no) + ": ";
        if (cells.size() != d + 2) {
            fail(ErrorCode::Parse, where + "expected " + std::to_string(d + 2) + " fields, got " +
                                       std::to_string(cells.size()));
        }
        std::vector<double> row(d);
        for (std::size_t j = 0; j < d; ++j) {
            char *end = nullptr;
            row[j] = std::strtod(cells[j].c_str(), &end);
            if (cells[j].empty() || *end != '\0') {
                fail(ErrorCode::Parse, where + "bad number '" + cells[j] + "'");
            }
        }
        int label = 0;
        if (cells[d] == "1" || cells[d] == "+1") {
            label = 1;
        } else if (cells[d] == "-1") {
            label = -1;
        } else {
            fail(ErrorCode::Parse, where + "label must be -1 or 1, got '" + cells[d] + "'");
        }
        const std::size_t index = rows.size();
        if (cells[d + 1] == "train") {
            ds.train_indices.push_back(index);
        } else if (cells[d + 1] == "test") {
            ds.test_indices.push_back(index);
        } else if (cells[d + 1] != "none") {
            fail(ErrorCode::Parse, where + "partition must be train, test or none, got '" + cells[d + 1] + "'");
        }
        rows.push_back(std::move(row));
        ds.labels.push_back(label);
    }
    ds.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            ds.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return ds;
}

} // namespace qmkl
