#include "qmkl/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "qmkl/error.hpp"

namespace qmkl {

double accuracy(std::span<const int> predicted, std::span<const int> actual) {
    if (predicted.empty()) {
        fail(ErrorCode::Argument, "accuracy: empty input");
    }
    if (predicted.size() != actual.size()) {
        fail(ErrorCode::Dimension, "accuracy: length mismatch");
    }
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predicted.size(); ++i) {
        hits += predicted[i] == actual[i] ? 1 : 0;
    }
    return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

double aucroc(std::span<const double> scores, std::span<const int> actual) {
    if (scores.size() != actual.size()) {
        fail(ErrorCode::Dimension, "aucroc: length mismatch");
    }
    const std::size_t n = scores.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // Midranks over tie groups.
    double rank_sum_pos = 0.0;
    std::size_t n_pos = 0;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) {
            ++j;
        }
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            if (actual[order[k]] > 0) {
                rank_sum_pos += midrank;
                ++n_pos;
            }
        }
        i = j;
    }
    const std::size_t n_neg = n - n_pos;
    if (n_pos == 0 || n_neg == 0) {
        fail(ErrorCode::UndefinedMetric, "aucroc: both classes must be present");
    }
    const double np = static_cast<double>(n_pos);
    const double u = rank_sum_pos - np * (np + 1.0) / 2.0;
    return u / (np * static_cast<double>(n_neg));
}

double margin(const Matrix &K, std::span<const int> labels) {
    const auto m = static_cast<Eigen::Index>(labels.size());
    if (K.rows() != m || K.cols() != m) {
        fail(ErrorCode::Dimension, "margin: Gram size differs from label count");
    }
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            if (labels[static_cast<std::size_t>(i)] > 0 && labels[static_cast<std::size_t>(j)] < 0) {
                const double sq = K(i, i) + K(j, j) - 2.0 * K(i, j);
                best = std::min(best, std::sqrt(std::max(sq, 0.0)));
            }
        }
    }
    if (!std::isfinite(best)) {
        fail(ErrorCode::UndefinedMetric, "margin: both classes must be present");
    }
    return best;
}

SpectralRatio spectral_ratio(const Matrix &K) {
    const auto m = K.rows();
    if (m < 1) {
        fail(ErrorCode::Size, "spectral_ratio: empty matrix");
    }
    const double trace = K.trace();
    const double sumsq = K.squaredNorm();
    if (!(sumsq > 0.0)) {
        fail(ErrorCode::Degenerate, "spectral_ratio: zero matrix");
    }
    SpectralRatio out;
    out.raw = trace / std::sqrt(sumsq);
    out.normalized = (trace * trace) / (sumsq * static_cast<double>(m));
    return out;
}

} // namespace qmkl
