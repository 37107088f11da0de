#include "qmkl/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmkl/error.hpp"
#include "qmkl/mkl.hpp"

namespace qmkl {

namespace {

constexpr double kTau = 1e-12;

} // namespace

SVMModel train_svm(const Matrix &K, std::span<const int> labels, const SVMOptions &options) {
    const auto m = static_cast<Eigen::Index>(labels.size());
    if (K.rows() != m || K.cols() != m) {
        fail(ErrorCode::Dimension, "train_svm: Gram size differs from label count");
    }
    check_binary_labels(labels);
    if (!(options.C > 0.0)) {
        fail(ErrorCode::Argument, "train_svm: C must be positive");
    }
    const double C = options.C;
    Vector y(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        y(i) = labels[static_cast<std::size_t>(i)];
    }

    Vector alpha = Vector::Zero(m);
    Vector G = Vector::Constant(m, -1.0); // Q alpha - e
    auto at_upper = [&](Eigen::Index t) { return alpha(t) >= C; };
    auto at_lower = [&](Eigen::Index t) { return alpha(t) <= 0.0; };

    SVMModel model;
    model.C = C;
    model.labels.assign(labels.begin(), labels.end());

    const long max_iter = static_cast<long>(options.max_passes) * std::max<long>(m, 1);
    long iter = 0;
    for (; iter < max_iter; ++iter) {
        Eigen::Index i = -1;
        Eigen::Index j = -1;
        double g_max = -std::numeric_limits<double>::infinity();
        double g_min = std::numeric_limits<double>::infinity();
        for (Eigen::Index t = 0; t < m; ++t) {
            const double v = -y(t) * G(t);
            const bool up = y(t) > 0 ? !at_upper(t) : !at_lower(t);
            const bool low = y(t) > 0 ? !at_lower(t) : !at_upper(t);
            if (up && v > g_max) {
                g_max = v;
                i = t;
            }
            if (low && v < g_min) {
                g_min = v;
                j = t;
            }
        }
        if (i < 0 || j < 0 || g_max - g_min < options.tolerance) {
            model.converged = true;
            break;
        }

        const double qii = K(i, i);
        const double qjj = K(j, j);
        const double qij = y(i) * y(j) * K(i, j);
        const double old_ai = alpha(i);
        const double old_aj = alpha(j);

        if (y(i) != y(j)) {
            double quad = qii + qjj + 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (-G(i) - G(j)) / quad;
            const double diff = alpha(i) - alpha(j);
            alpha(i) += delta;
            alpha(j) += delta;
            if (diff > 0.0) {
                if (alpha(j) < 0.0) {
                    alpha(j) = 0.0;
                    alpha(i) = diff;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = -diff;
            }
            if (diff > 0.0) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = C - diff;
                }
            } else if (alpha(j) > C) {
                alpha(j) = C;
                alpha(i) = C + diff;
            }
        } else {
            double quad = qii + qjj - 2.0 * qij;
            if (quad <= 0.0) {
                quad = kTau;
            }
            const double delta = (G(i) - G(j)) / quad;
            const double sum = alpha(i) + alpha(j);
            alpha(i) -= delta;
            alpha(j) += delta;
            if (sum > C) {
                if (alpha(i) > C) {
                    alpha(i) = C;
                    alpha(j) = sum - C;
                }
            } else if (alpha(j) < 0.0) {
                alpha(j) = 0.0;
                alpha(i) = sum;
            }
            if (sum > C) {
                if (alpha(j) > C) {
                    alpha(j) = C;
                    alpha(i) = sum - C;
                }
            } else if (alpha(i) < 0.0) {
                alpha(i) = 0.0;
                alpha(j) = sum;
            }
        }

        const double dai = alpha(i) - old_ai;
        const double daj = alpha(j) - old_aj;
        for (Eigen::Index t = 0; t < m; ++t) {
            G(t) += y(t) * (y(i) * K(t, i) * dai + y(j) * K(t, j) * daj);
        }
    }
    model.iterations = static_cast<int>(std::min<long>(iter, std::numeric_limits<int>::max()));

    double ub = std::numeric_limits<double>::infinity();
    double lb = -std::numeric_limits<double>::infinity();
    double sum_free = 0.0;
    int n_free = 0;
    for (Eigen::Index t = 0; t < m; ++t) {
        const double yg = y(t) * G(t);
        if (at_upper(t)) {
            if (y(t) < 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else if (at_lower(t)) {
            if (y(t) > 0) {
                ub = std::min(ub, yg);
            } else {
                lb = std::max(lb, yg);
            }
        } else {
            ++n_free;
            sum_free += yg;
        }
    }
    const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
    model.bias = -rho;
    model.alpha = std::move(alpha);
    for (Eigen::Index t = 0; t < m; ++t) {
        if (model.alpha(t) > 1e-8) {
            model.support_indices.push_back(static_cast<std::size_t>(t));
        }
    }
    return model;
}

Vector decision_values(const SVMModel &model, const Matrix &K_cross) {
    const auto m = static_cast<Eigen::Index>(model.labels.size());
    if (K_cross.cols() != m) {
        fail(ErrorCode::Dimension, "decision_values: cross Gram has " +
                                       std::to_string(K_cross.cols()) + " columns, model has " +
                                       std::to_string(m) + " training points");
    }
    Vector coef(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        coef(i) = model.alpha(i) * model.labels[static_cast<std::size_t>(i)];
    }
    Vector out = K_cross * coef;
    out.array() += model.bias;
    return out;
}

std::vector<int> predict(const SVMModel &model, const Matrix &K_cross) {
    const Vector v = decision_values(model, K_cross);
    std::vector<int> out(static_cast<std::size_t>(v.size()));
    for (Eigen::Index t = 0; t < v.size(); ++t) {
        out[static_cast<std::size_t>(t)] = v(t) >= 0.0 ? 1 : -1;
    }
    return out;
}

double svm_dual_objective(const Matrix &K, std::span<const int> labels, const Vector &alpha) {
    Vector ya(alpha.size());
    for (Eigen::Index i = 0; i < alpha.size(); ++i) {
        ya(i) = alpha(i) * labels[static_cast<std::size_t>(i)];
    }
    return alpha.sum() - 0.5 * ya.dot(K * ya);
}

} // namespace qmkl
