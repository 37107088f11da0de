#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "qmkl/statevector.hpp"

namespace qmkl {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class KernelKind { Linear, Polynomial, RBF, RX, IQP, QAOA };

/// ZZ entangler layout for the QAOA embedding. AllPairs uses every unordered
/// pair p < q; Ring couples (p, p+1 mod d).
enum class QaoaTopology { AllPairs, Ring };

inline constexpr KernelKind kAllKernelKinds[] = {KernelKind::Linear, KernelKind::Polynomial,
                                                 KernelKind::RBF,    KernelKind::RX,
                                                 KernelKind::IQP,    KernelKind::QAOA};

std::string_view kind_name(KernelKind kind) noexcept;
KernelKind parse_kind(std::string_view name);
std::string_view topology_name(QaoaTopology topology) noexcept;
QaoaTopology parse_topology(std::string_view name);

bool is_quantum(KernelKind kind) noexcept;
bool is_bounded(KernelKind kind) noexcept;
bool is_parametric(KernelKind kind) noexcept;

std::size_t parameter_count(KernelKind kind, std::size_t n_features,
                            QaoaTopology topology = QaoaTopology::AllPairs);

/// Qubit pairs receiving a trainable ZZ angle, in parameter order.
std::vector<std::pair<std::size_t, std::size_t>> qaoa_pairs(std::size_t n_features,
                                                            QaoaTopology topology);

/// One base kernel: its kind, feature count and parameter slice.
///
/// Parameter layout:
///   Polynomial  (scale, offset) in (scale * <x, x'> + offset)^3
///   RBF         (gamma) in exp(-gamma * |x - x'|^2), gamma > 0
///   QAOA        one ZZ angle per qaoa_pairs() entry, then one RY angle per qubit
///   others      none
class KernelSpec {
  public:
    KernelSpec(KernelKind kind, std::size_t n_features, std::vector<double> theta = {},
               QaoaTopology topology = QaoaTopology::AllPairs);

    /// Default parameters: Polynomial (1/d, 1), RBF 1, QAOA uniform on [0, 2pi)
    /// drawn from `seed`.
    static KernelSpec with_defaults(KernelKind kind, std::size_t n_features, std::uint64_t seed,
                                    QaoaTopology topology = QaoaTopology::AllPairs);

    [[nodiscard]] KernelKind kind() const noexcept { return kind_; }
    [[nodiscard]] std::size_t n_features() const noexcept { return n_features_; }
    [[nodiscard]] QaoaTopology topology() const noexcept { return topology_; }
    [[nodiscard]] std::span<const double> theta() const noexcept { return theta_; }

    [[nodiscard]] KernelSpec with_theta(std::vector<double> theta) const;

    friend bool operator==(const KernelSpec &, const KernelSpec &) = default;

  private:
    KernelKind kind_;
    std::size_t n_features_;
    std::vector<double> theta_;
    QaoaTopology topology_;
};

struct GramMatrix {
    Matrix entries;
    bool bounded = false;
    bool normalized = false;

    [[nodiscard]] Eigen::Index size() const noexcept { return entries.rows(); }
};

/// Embedding circuit U(x)|0> for a quantum kernel.
Statevector embed_state(const KernelSpec &spec, std::span<const double> x);

double kernel_eval(const KernelSpec &spec, std::span<const double> x, std::span<const double> y);

/// Pairwise kernel values over the rows of X.
GramMatrix gram_matrix(const KernelSpec &spec, const Matrix &X);

/// Kernel values k(A_t, B_m) as a T x M matrix. With `normalize`, each entry
/// is divided by sqrt(k(A_t, A_t) k(B_m, B_m)).
Matrix cross_gram(const KernelSpec &spec, const Matrix &A, const Matrix &B, bool normalize);

/// K_ij / sqrt(K_ii K_jj). Throws ErrorCode::Degenerate on a non-positive diagonal.
GramMatrix normalize_gram(const GramMatrix &K);

/// gram_matrix followed by normalize_gram for unbounded kinds.
GramMatrix prepared_gram(const KernelSpec &spec, const Matrix &X);

/// sum_r gamma_r K_r. Requires gamma >= 0 and |gamma|_1 = 1 within 1e-8.
GramMatrix combine_grams(std::span<const GramMatrix> grams, std::span<const double> gamma);

/// Entrywise derivative of the Gram matrix with respect to every theta
/// component. `normalized` differentiates through normalize_gram (only
/// meaningful for unbounded kinds).
std::vector<Matrix> gram_gradient(const KernelSpec &spec, const Matrix &X, bool normalized);

double min_eigenvalue(const Matrix &K);

void write_gram_csv(std::ostream &out, const Matrix &K);
Matrix read_gram_csv(std::istream &in);
void write_gram_binary(std::ostream &out, const Matrix &K);
Matrix read_gram_binary(std::istream &in);

} // namespace qmkl
