#pragma once

#include <span>

#include "qmkl/kernels.hpp"

namespace qmkl {

struct SpectralRatio {
    /// raw^2 / M; 1 for the delta kernel, 1/M for the constant kernel.
    double normalized = 0.0;
    /// trace / Frobenius norm.
    double raw = 0.0;
};

struct MetricsRecord {
    double accuracy = 0.0;
    double aucroc = 0.0;
    double margin = 0.0;
    double spectral_ratio = 0.0;
    double spectral_ratio_raw = 0.0;
};

double accuracy(std::span<const int> predicted, std::span<const int> actual);

/// Mann-Whitney form: P(score_pos > score_neg) with ties counted as one half.
double aucroc(std::span<const double> scores, std::span<const int> actual);

/// Smallest feature-space distance between training points of opposite
/// class, sqrt(K_ii + K_jj - 2 K_ij). Not the SVM functional margin.
double margin(const Matrix &K_train, std::span<const int> labels);

SpectralRatio spectral_ratio(const Matrix &K_train);

} // namespace qmkl
