#pragma once

/**
 * @file
 * EasyMKL weight optimization for a fixed set of base Gram matrices.
 *
 * For labels y and per-kernel matrices Q_r = diag(y) K_r diag(y), the
 * separation vector is d_r(phi) = phi^T Q_r phi. The weights come from
 *
 *     phi_min = argmin_{phi in B} (1 - lambda) |d(phi)|_2 + lambda |phi|_2^2
 *     gamma   = d(phi_min) / |d(phi_min)|_2
 *
 * where B is the bi-simplex: phi >= 0 and phi sums to 1 over each class.
 */

#include <optional>
#include <span>
#include <vector>

#include "qmkl/kernels.hpp"

namespace qmkl {

struct MKLProblem {
    std::vector<GramMatrix> grams;
    std::vector<int> labels;
    double lambda = 0.2;
};

struct SolverOptions {
    int max_iterations = 10000;
    double gradient_tolerance = 1e-6;
    double relative_objective_tolerance = 1e-10;
    double armijo_c = 1e-4;
    double shrink = 0.5;
    /// Starting point; projected onto the bi-simplex. Uniform per class if unset.
    std::optional<Vector> initial_phi;
    bool record_history = false;
};

struct Weights {
    Vector l2; ///< unit Euclidean norm
    Vector l1; ///< sums to one
};

struct MKLSolution {
    Vector phi;
    Vector gamma_l2;
    Vector gamma_l1;
    Vector distances;
    double loss = 0.0;
    double projected_gradient_norm = 0.0;
    int iterations = 0;
    bool converged = false;
    /// d(phi_min) vanished; weights fell back to uniform.
    bool degenerate = false;
    std::vector<double> objective_history;
};

/// Component r is phi^T Y K_r Y phi.
Vector distance_vector(std::span<const GramMatrix> grams, std::span<const int> labels,
                       const Vector &phi);

/// Euclidean projection onto the bi-simplex, one class at a time.
Vector project_bisimplex(const Vector &v, std::span<const int> labels);

/// (1 - lambda) |d(phi)|_2 + lambda |phi|_2^2
double easymkl_objective(std::span<const GramMatrix> grams, std::span<const int> labels,
                         const Vector &phi, double lambda);

/// d / |d|_2 and its L1 rescaling. Throws ErrorCode::Degenerate on a zero vector.
Weights optimal_weights(const Vector &d);

MKLSolution solve_easymkl(const MKLProblem &problem, const SolverOptions &options = {});

/// Checks labels are +-1 with both classes present; throws ErrorCode::Label.
void check_binary_labels(std::span<const int> labels);

} // namespace qmkl
