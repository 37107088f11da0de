#pragma once

/**
 * @file
 * Alternating kernel-parameter training on top of EasyMKL.
 *
 * Each outer iteration rebuilds the base Gram matrices at the current
 * parameters, solves the EasyMKL problem, and takes an Adam step that
 * increases the optimal EasyMKL objective. Because the feasible set of phi
 * does not depend on the kernel parameters, the gradient of the optimal value
 * is the partial gradient at phi_min (Danskin), so no differentiation through
 * the solver is needed.
 */

#include <cstdint>
#include <span>
#include <vector>

#include "qmkl/kernels.hpp"
#include "qmkl/mkl.hpp"

namespace qmkl {

struct QCCNetConfig {
    double learning_rate = 0.05;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_epsilon = 1e-8;
    int max_outer_iters = 100;
    /// Early stop once the relative loss change stays below this for
    /// `patience` consecutive iterations.
    double loss_tolerance = 1e-6;
    int patience = 5;
    double lambda = 0.2;
    std::uint64_t seed = 0;
    SolverOptions solver;
};

struct AdamState {
    Vector m;
    Vector v;
    int step = 0;
};

/// One bias-corrected Adam update in the ascent direction.
Vector adam_step(const Vector &theta, const Vector &gradient, AdamState &state,
                 const QCCNetConfig &config);

struct LossGradient {
    Vector gradient;
    bool degenerate = false;
};

/// d L / d theta for the concatenated parameters of all kernels.
/// `gram_grads[r]` holds dK_r/dtheta_j for every parameter of kernel r
/// (empty for non-parametric kernels).
LossGradient loss_gradient_theta(std::span<const GramMatrix> grams,
                                 std::span<const std::vector<Matrix>> gram_grads,
                                 std::span<const int> labels, const Vector &phi, double lambda);

struct TraceRecord {
    int iteration = 0;
    double loss = 0.0;
    Vector gamma_l2;
    Vector gamma_l1;
    std::vector<std::vector<double>> theta; ///< per kernel
    int solver_iterations = 0;
    bool degenerate = false;
};

struct TrainingTrace {
    std::vector<TraceRecord> records;
    std::size_t best_iteration = 0;
};

struct TrainingResult {
    std::vector<KernelSpec> specs; ///< at theta_star
    Vector gamma_l2;
    Vector gamma_l1;
    GramMatrix final_gram;
    MKLSolution solution; ///< EasyMKL solve at theta_star
    TrainingTrace trace;
    bool trained = false; ///< false when no kernel had parameters
};

TrainingResult train(const std::vector<KernelSpec> &specs, const Matrix &train_X,
                     std::span<const int> train_labels, const QCCNetConfig &config);

/// Trainable coordinates: RBF bandwidths in log space, everything else as is.
Vector pack_parameters(std::span<const KernelSpec> specs);
std::vector<KernelSpec> unpack_parameters(std::span<const KernelSpec> specs, const Vector &packed);

} // namespace qmkl
