#include "qmkl/qccnet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "qmkl/error.hpp"

namespace qmkl {

namespace {

Vector signed_labels(std::span<const int> labels) {
    Vector y(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) {
        y(static_cast<Eigen::Index>(i)) = labels[i] > 0 ? 1.0 : -1.0;
    }
    return y;
}

std::vector<GramMatrix> build_grams(const std::vector<KernelSpec> &specs, const Matrix &X) {
    std::vector<GramMatrix> grams;
    grams.reserve(specs.size());
    for (const auto &s : specs) {
        grams.push_back(prepared_gram(s, X));
    }
    return grams;
}

TraceRecord make_record(int iteration, const MKLSolution &sol, const std::vector<KernelSpec> &specs) {
    TraceRecord rec;
    rec.iteration = iteration;
    rec.loss = sol.loss;
    rec.gamma_l2 = sol.gamma_l2;
    rec.gamma_l1 = sol.gamma_l1;
    rec.solver_iterations = sol.iterations;
    rec.degenerate = sol.degenerate;
    for (const auto &s : specs) {
        rec.theta.emplace_back(s.theta().begin(), s.theta().end());
    }
    return rec;
}

} // namespace

Vector adam_step(const Vector &theta, const Vector &gradient, AdamState &state,
                 const QCCNetConfig &config) {
    if (theta.size() != gradient.size()) {
        fail(ErrorCode::Dimension, "adam_step: gradient length differs from parameters");
    }
    if (state.m.size() != theta.size()) {
        state.m = Vector::Zero(theta.size());
        state.v = Vector::Zero(theta.size());
        state.step = 0;
    }
    ++state.step;
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    state.m = b1 * state.m + (1.0 - b1) * gradient;
    state.v = b2 * state.v + (1.0 - b2) * gradient.cwiseAbs2();
    const double c1 = 1.0 - std::pow(b1, state.step);
    const double c2 = 1.0 - std::pow(b2, state.step);
    Vector out = theta;
    for (Eigen::Index i = 0; i < theta.size(); ++i) {
        const double m_hat = state.m(i) / c1;
        const double v_hat = state.v(i) / c2;
        out(i) += config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_epsilon);
    }
    return out;
}

LossGradient loss_gradient_theta(std::span<const GramMatrix> grams,
                                 std::span<const std::vector<Matrix>> gram_grads,
                                 std::span<const int> labels, const Vector &phi, double lambda) {
    if (grams.size() != gram_grads.size()) {
        fail(ErrorCode::Dimension, "loss_gradient_theta: one gradient set per Gram required");
    }
    const Vector d = distance_vector(grams, labels, phi);
    const Vector yphi = signed_labels(labels).cwiseProduct(phi);

    std::size_t total = 0;
    for (const auto &g : gram_grads) {
        total += g.size();
    }
    LossGradient out;
    out.gradient = Vector::Zero(static_cast<Eigen::Index>(total));
    const double dn = d.norm();
    if (!(dn > 0.0)) {
        out.degenerate = true;
        return out;
    }
    Eigen::Index k = 0;
    for (std::size_t r = 0; r < gram_grads.size(); ++r) {
        for (const auto &dK : gram_grads[r]) {
            const double dd = yphi.dot(dK * yphi);
            out.gradient(k++) = (1.0 - lambda) * d(static_cast<Eigen::Index>(r)) * dd / dn;
        }
    }
    return out;
}

Vector pack_parameters(std::span<const KernelSpec> specs) {
    std::vector<double> flat;
    for (const auto &s : specs) {
        for (double t : s.theta()) {
            flat.push_back(s.kind() == KernelKind::RBF ? std::log(t) : t);
        }
    }
    return Eigen::Map<Vector>(flat.data(), static_cast<Eigen::Index>(flat.size()));
}

std::vector<KernelSpec> unpack_parameters(std::span<const KernelSpec> specs, const Vector &packed) {
    std::vector<KernelSpec> out;
    out.reserve(specs.size());
    Eigen::Index k = 0;
    for (const auto &s : specs) {
        std::vector<double> theta(s.theta().size());
        for (auto &t : theta) {
            t = s.kind() == KernelKind::RBF ? std::exp(packed(k)) : packed(k);
            ++k;
        }
        out.push_back(s.with_theta(std::move(theta)));
    }
    if (k != packed.size()) {
        fail(ErrorCode::Dimension, "unpack_parameters: parameter count mismatch");
    }
    return out;
}

TrainingResult train(const std::vector<KernelSpec> &specs, const Matrix &train_X,
                     std::span<const int> train_labels, const QCCNetConfig &config) {
    if (specs.empty()) {
        fail(ErrorCode::Size, "train: no kernels");
    }
    if (!(config.learning_rate > 0.0)) {
        fail(ErrorCode::Argument, "train: learning_rate must be positive");
    }
    if (!(config.lambda >= 0.0 && config.lambda < 1.0)) {
        fail(ErrorCode::Argument, "train: lambda must lie in [0, 1)");
    }
    check_binary_labels(train_labels);

    bool any_parametric = false;
    for (const auto &s : specs) {
        any_parametric = any_parametric || is_parametric(s.kind());
    }
    const std::vector<int> labels(train_labels.begin(), train_labels.end());

    TrainingResult result;
    std::vector<KernelSpec> current = specs;
    std::vector<GramMatrix> grams = build_grams(current, train_X);
    MKLSolution sol = solve_easymkl({grams, labels, config.lambda}, config.solver);
    result.trace.records.push_back(make_record(0, sol, current));

    std::vector<GramMatrix> best_grams = grams;
    MKLSolution best_solution = sol;
    std::vector<KernelSpec> best_specs = current;
    double best_loss = sol.loss;

    if (any_parametric) {
        result.trained = true;
        Vector packed = pack_parameters(current);
        AdamState adam;
        int quiet = 0;
        for (int iter = 1; iter <= config.max_outer_iters; ++iter) {
            std::vector<std::vector<Matrix>> grads(current.size());
            for (std::size_t r = 0; r < current.size(); ++r) {
                if (is_parametric(current[r].kind())) {
                    grads[r] = gram_gradient(current[r], train_X, !grams[r].bounded);
                }
            }
            const auto lg = loss_gradient_theta(grams, grads, labels, sol.phi, config.lambda);
            Vector g = lg.gradient;
            // Chain rule into log-space bandwidths.
            Eigen::Index k = 0;
            for (const auto &s : current) {
                for (double t : s.theta()) {
                    if (s.kind() == KernelKind::RBF) {
                        g(k) *= t;
                    }
                    ++k;
                }
            }
            packed = adam_step(packed, g, adam, config);
            // Negative polynomial coefficients break positive semi-definiteness.
            k = 0;
            for (const auto &s : current) {
                for (std::size_t j = 0; j < s.theta().size(); ++j, ++k) {
                    if (s.kind() == KernelKind::Polynomial) {
                        packed(k) = std::max(packed(k), 0.0);
                    }
                }
            }
            current = unpack_parameters(current, packed);

            grams = build_grams(current, train_X);
            SolverOptions warm = config.solver;
            warm.initial_phi = sol.phi;
            const double prev_loss = sol.loss;
            sol = solve_easymkl({grams, labels, config.lambda}, warm);
            result.trace.records.push_back(make_record(iter, sol, current));

            if (sol.loss > best_loss) {
                best_loss = sol.loss;
                best_grams = grams;
                best_solution = sol;
                best_specs = current;
                result.trace.best_iteration = static_cast<std::size_t>(iter);
            }

            const double scale = std::max(std::abs(prev_loss), std::numeric_limits<double>::min());
            quiet = std::abs(sol.loss - prev_loss) / scale < config.loss_tolerance ? quiet + 1 : 0;
            if (quiet >= config.patience) {
                break;
            }
        }
    }

    result.specs = std::move(best_specs);
    result.solution = std::move(best_solution);
    result.gamma_l2 = result.solution.gamma_l2;
    result.gamma_l1 = result.solution.gamma_l1;
    std::vector<double> w(result.gamma_l1.data(), result.gamma_l1.data() + result.gamma_l1.size());
    result.final_gram = combine_grams(best_grams, w);
    return result;
}

} // namespace qmkl
