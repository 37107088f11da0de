#pragma once

#include <span>
#include <vector>

#include "qmkl/kernels.hpp"

namespace qmkl {

struct SVMOptions {
    double C = 1.0;
    /// Stop once the maximal KKT violation falls below this.
    double tolerance = 1e-5;
    /// One pass is M working-pair updates.
    int max_passes = 10000;
};

struct SVMModel {
    Vector alpha;
    double bias = 0.0;
    std::vector<std::size_t> support_indices;
    std::vector<int> labels;
    double C = 1.0;
    int iterations = 0;
    bool converged = false;
};

/// Soft-margin dual by SMO with maximal-violating-pair selection.
SVMModel train_svm(const Matrix &K_train, std::span<const int> labels,
                   const SVMOptions &options = {});

/// sum_m alpha_m y_m K_cross(t, m) + bias
Vector decision_values(const SVMModel &model, const Matrix &K_cross);

/// Sign of the decision values; zero maps to +1.
std::vector<int> predict(const SVMModel &model, const Matrix &K_cross);

/// sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
double svm_dual_objective(const Matrix &K, std::span<const int> labels, const Vector &alpha);

} // namespace qmkl
