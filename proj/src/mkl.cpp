#include "qmkl/mkl.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "qmkl/error.hpp"

namespace qmkl {

namespace {

Matrix signed_gram(const Matrix &K, const Vector &y) {
    return y.asDiagonal() * K * y.asDiagonal();
}

Vector label_vector(std::span<const int> labels) {
    Vector y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = labels[i] > 0 ? 1.0 : -1.0;
    }
    return y;
}

void project_simplex(Vector &v, const std::vector<Eigen::Index> &idx) {
    std::vector<double> sorted;
    sorted.reserve(idx.size());
    for (auto i : idx) {
        sorted.push_back(v(i));
    }
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double cumulative = 0.0;
    double threshold = 0.0;
    for (std::size_t k = 0; k < sorted.size(); ++k) {
        cumulative += sorted[k];
        const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
        if (sorted[k] - t > 0.0) {
            threshold = t;
        }
    }
    for (auto i : idx) {
        v(i) = std::max(v(i) - threshold, 0.0);
    }
}

struct Objective {
    std::vector<Matrix> signed_grams;
    double lambda;

    double value(const Vector &phi, Vector *distances = nullptr) const {
        Vector d(static_cast<Eigen::Index>(signed_grams.size()));
        for (std::size_t r = 0; r < signed_grams.size(); ++r) {
            d(static_cast<Eigen::Index>(r)) = phi.dot(signed_grams[r] * phi);
        }
        if (distances) {
            *distances = d;
        }
        return (1.0 - lambda) * d.norm() + lambda * phi.squaredNorm();
    }

    Vector gradient(const Vector &phi) const {
        std::vector<Vector> products;
        products.reserve(signed_grams.size());
        Vector d(static_cast<Eigen::Index>(signed_grams.size()));
        for (std::size_t r = 0; r < signed_grams.size(); ++r) {
            products.push_back(signed_grams[r] * phi);
            d(static_cast<Eigen::Index>(r)) = phi.dot(products.back());
        }
        Vector g = 2.0 * lambda * phi;
        const double dn = d.norm();
        if (dn > 0.0) {
            for (std::size_t r = 0; r < signed_grams.size(); ++r) {
                g += (1.0 - lambda) * (d(static_cast<Eigen::Index>(r)) / dn) * 2.0 * products[r];
            }
        }
        return g;
    }
};

} // namespace

void check_binary_labels(std::span<const int> labels) {
    bool pos = false;
    bool neg = false;
    for (int y : labels) {
        if (y == 1) {
            pos = true;
        } else if (y == -1) {
            neg = true;
        } else {
            fail(ErrorCode::Label, "labels must be +1 or -1, got " + std::to_string(y));
        }
    }
    if (!pos || !neg) {
        fail(ErrorCode::Label, "both classes must be present");
    }
}

Vector distance_vector(std::span<const GramMatrix> grams, std::span<const int> labels,
                       const Vector &phi) {
    const auto m = static_cast<Eigen::Index>(labels.size());
    if (phi.size() != m) {
        fail(ErrorCode::Dimension, "distance_vector: phi length differs from label count");
    }
    const Vector y = label_vector(labels);
    const Vector yphi = y.cwiseProduct(phi);
    Vector d(static_cast<Eigen::Index>(grams.size()));
    for (std::size_t r = 0; r < grams.size(); ++r) {
        if (grams[r].size() != m) {
            fail(ErrorCode::Dimension, "distance_vector: Gram size differs from label count");
        }
        d(static_cast<Eigen::Index>(r)) = yphi.dot(grams[r].entries * yphi);
    }
    return d;
}

Vector project_bisimplex(const Vector &v, std::span<const int> labels) {
    if (v.size() != static_cast<Eigen::Index>(labels.size())) {
        fail(ErrorCode::Dimension, "project_bisimplex: vector length differs from label count");
    }
    std::vector<Eigen::Index> pos;
    std::vector<Eigen::Index> neg;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        (labels[i] > 0 ? pos : neg).push_back(static_cast<Eigen::Index>(i));
    }
    if (pos.empty() || neg.empty()) {
        fail(ErrorCode::Label, "project_bisimplex: both classes must be present");
    }
    Vector out = v;
    project_simplex(out, pos);
    project_simplex(out, neg);
    return out;
}

double easymkl_objective(std::span<const GramMatrix> grams, std::span<const int> labels,
                         const Vector &phi, double lambda) {
    const Vector d = distance_vector(grams, labels, phi);
    return (1.0 - lambda) * d.norm() + lambda * phi.squaredNorm();
}

Weights optimal_weights(const Vector &d) {
    const double n2 = d.norm();
    if (!(n2 > 0.0)) {
        fail(ErrorCode::Degenerate, "optimal_weights: distance vector is zero");
    }
    Weights w;
    w.l2 = d / n2;
    w.l1 = w.l2 / w.l2.lpNorm<1>();
    return w;
}

MKLSolution solve_easymkl(const MKLProblem &problem, const SolverOptions &options) {
    check_binary_labels(problem.labels);
    if (problem.grams.empty()) {
        fail(ErrorCode::Size, "solve_easymkl: no Gram matrices");
    }
    if (!(problem.lambda >= 0.0 && problem.lambda < 1.0)) {
        fail(ErrorCode::Argument, "solve_easymkl: lambda must lie in [0, 1)");
    }
    const auto m = static_cast<Eigen::Index>(problem.labels.size());
    const Vector y = label_vector(problem.labels);

    Objective f{{}, problem.lambda};
    for (const auto &K : problem.grams) {
        if (K.size() != m) {
            fail(ErrorCode::Dimension, "solve_easymkl: Gram size differs from label count");
        }
        f.signed_grams.push_back(signed_gram(K.entries, y));
    }

    Vector phi;
    if (options.initial_phi) {
        phi = project_bisimplex(*options.initial_phi, problem.labels);
    } else {
        const double n_pos = static_cast<double>((y.array() > 0).count());
        const double n_neg = static_cast<double>(m) - n_pos;
        phi.resize(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            phi(i) = y(i) > 0 ? 1.0 / n_pos : 1.0 / n_neg;
        }
    }

    MKLSolution sol;
    double value = f.value(phi);
    Vector grad = f.gradient(phi);
    if (options.record_history) {
        sol.objective_history.push_back(value);
    }

    Vector prev_phi;
    Vector prev_grad;
    double step = 1.0;
    auto pg_norm = [&](const Vector &p, const Vector &g) {
        return (p - project_bisimplex(p - g, problem.labels)).norm();
    };

    int it = 0;
    for (; it < options.max_iterations; ++it) {
        sol.projected_gradient_norm = pg_norm(phi, grad);
        if (sol.projected_gradient_norm < options.gradient_tolerance) {
            sol.converged = true;
            break;
        }

        // Barzilai-Borwein trial step, then Armijo backtracking along the
        // projection arc.
        if (it > 0) {
            const Vector s = phi - prev_phi;
            const Vector g = grad - prev_grad;
            const double sy = s.dot(g);
            step = sy > 0.0 ? std::clamp(s.squaredNorm() / sy, 1e-12, 1e12) : 2.0 * step;
        }

        Vector candidate;
        double cand_value = value;
        bool accepted = false;
        for (int shrinks = 0; shrinks < 80; ++shrinks) {
            candidate = project_bisimplex(phi - step * grad, problem.labels);
            cand_value = f.value(candidate);
            if (cand_value <= value + options.armijo_c * grad.dot(candidate - phi)) {
                accepted = true;
                break;
            }
            step *= options.shrink;
        }
        if (!accepted || cand_value > value) {
            // No descent available at machine precision.
            sol.converged = sol.projected_gradient_norm < 1e3 * options.gradient_tolerance;
            break;
        }

        prev_phi = std::move(phi);
        prev_grad = std::move(grad);
        phi = std::move(candidate);
        const double prev_value = value;
        value = cand_value;
        grad = f.gradient(phi);
        if (options.record_history) {
            sol.objective_history.push_back(value);
        }

        const double scale = std::max(std::abs(prev_value), std::numeric_limits<double>::min());
        if ((prev_value - value) / scale < options.relative_objective_tolerance) {
            ++it;
            sol.projected_gradient_norm = pg_norm(phi, grad);
            sol.converged = true;
            break;
        }
    }
    if (it == options.max_iterations) {
        sol.projected_gradient_norm = pg_norm(phi, grad);
    }

    sol.iterations = it;
    sol.phi = phi;
    sol.loss = f.value(phi, &sol.distances);
    const auto r = static_cast<Eigen::Index>(problem.grams.size());
    if (sol.distances.norm() > 0.0) {
        auto w = optimal_weights(sol.distances.cwiseMax(0.0));
        sol.gamma_l2 = std::move(w.l2);
        sol.gamma_l1 = std::move(w.l1);
    } else {
        sol.degenerate = true;
        sol.gamma_l2 = Vector::Constant(r, 1.0 / std::sqrt(static_cast<double>(r)));
        sol.gamma_l1 = Vector::Constant(r, 1.0 / static_cast<double>(r));
    }
    return sol;
}

} // namespace qmkl
