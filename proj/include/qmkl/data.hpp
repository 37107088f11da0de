#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qmkl/kernels.hpp"

namespace qmkl {

struct Dataset {
    Matrix features;                 ///< M x d
    std::vector<int> labels;         ///< +-1
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> test_indices;
    std::uint64_t seed = 0;
    double class_sep = 0.0;

    [[nodiscard]] std::size_t n_samples() const noexcept { return labels.size(); }
    [[nodiscard]] std::size_t n_features() const noexcept {
        return static_cast<std::size_t>(features.cols());
    }
    [[nodiscard]] Matrix rows(const std::vector<std::size_t> &idx) const;
    [[nodiscard]] std::vector<int> labels_at(const std::vector<std::size_t> &idx) const;
    [[nodiscard]] Matrix train_features() const { return rows(train_indices); }
    [[nodiscard]] Matrix test_features() const { return rows(test_indices); }
    [[nodiscard]] std::vector<int> train_labels() const { return labels_at(train_indices); }
    [[nodiscard]] std::vector<int> test_labels() const { return labels_at(test_indices); }

    friend bool operator==(const Dataset &a, const Dataset &b);
};

struct GeneratorConfig {
    std::size_t n_features = 2;
    std::size_t n_samples = 100;
    double class_sep = 1.0;
    std::size_t clusters_per_class = 2;
    std::uint64_t seed = 0;
};

/// Gaussian clusters on hypercube vertices, one or more per class, with a
/// random linear mixing of the deviations in each cluster. Unscaled, unsplit.
Dataset generate_dataset(const GeneratorConfig &config);

/// Per-column affine map onto [0, 2pi].
class MinMaxScaler {
  public:
    void fit(const Matrix &features);
    [[nodiscard]] Matrix transform(const Matrix &features) const;

  private:
    Vector min_;
    Vector max_;
};

Matrix minmax_scale(const Matrix &features);

/// Random train/test partition; `ratio` is the training fraction.
Dataset split(Dataset dataset, double ratio, std::uint64_t seed);

struct InstanceConfig {
    GeneratorConfig generator;
    double train_ratio = 0.5;
    /// Fit the scaler on training rows only instead of the full instance.
    bool scale_on_train_only = false;
};

/// generate -> scale -> split, a pure function of the config.
Dataset make_instance(const InstanceConfig &config);

/// Header f0..f{d-1},label,partition; values printed with 17 significant digits.
void save_csv(std::ostream &out, const Dataset &dataset);
Dataset load_csv(std::istream &in);

} // namespace qmkl
