#include "qmkl/kernels.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>

#include <Eigen/Eigenvalues>

#include "qmkl/error.hpp"
#include "qmkl/random.hpp"

namespace qmkl {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

double squared_distance(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double t = a[i] - b[i];
        acc += t * t;
    }
    return acc;
}

std::vector<double> row_of(const Matrix &X, Eigen::Index i) {
    std::vector<double> r(static_cast<std::size_t>(X.cols()));
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        r[static_cast<std::size_t>(j)] = X(i, j);
    }
    return r;
}

void check_features(const KernelSpec &spec, std::size_t got) {
    if (got != spec.n_features()) {
        fail(ErrorCode::Dimension, std::string(kind_name(spec.kind())) + " kernel expects " +
                                       std::to_string(spec.n_features()) + " features, got " +
                                       std::to_string(got));
    }
}

std::vector<Statevector> embed_rows(const KernelSpec &spec, const Matrix &X) {
    std::vector<Statevector> states;
    states.reserve(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const auto r = row_of(X, i);
        states.push_back(embed_state(spec, r));
    }
    return states;
}

} // namespace

std::string_view kind_name(KernelKind kind) noexcept {
    switch (kind) {
    case KernelKind::Linear: return "linear";
    case KernelKind::Polynomial: return "polynomial";
    case KernelKind::RBF: return "rbf";
    case KernelKind::RX: return "rx";
    case KernelKind::IQP: return "iqp";
    case KernelKind::QAOA: return "qaoa";
    }
    return "?";
}

KernelKind parse_kind(std::string_view name) {
    std::string lower(name);
    for (auto &c : lower) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    for (auto k : kAllKernelKinds) {
        if (kind_name(k) == lower) {
            return k;
        }
    }
    if (lower == "poly") {
        return KernelKind::Polynomial;
    }
    fail(ErrorCode::Kind, "unknown kernel kind '" + std::string(name) + "'");
}

std::string_view topology_name(QaoaTopology topology) noexcept {
    return topology == QaoaTopology::Ring ? "ring" : "all_pairs";
}

QaoaTopology parse_topology(std::string_view name) {
    if (name == "all_pairs" || name == "allpairs") {
        return QaoaTopology::AllPairs;
    }
    if (name == "ring") {
        return QaoaTopology::Ring;
    }
    fail(ErrorCode::Argument, "unknown QAOA topology '" + std::string(name) + "'");
}

bool is_quantum(KernelKind kind) noexcept {
    return kind == KernelKind::RX || kind == KernelKind::IQP || kind == KernelKind::QAOA;
}

bool is_bounded(KernelKind kind) noexcept {
    return kind != KernelKind::Linear && kind != KernelKind::Polynomial;
}

bool is_parametric(KernelKind kind) noexcept {
    return kind == KernelKind::Polynomial || kind == KernelKind::RBF || kind == KernelKind::QAOA;
}

std::vector<std::pair<std::size_t, std::size_t>> qaoa_pairs(std::size_t n_features,
                                                            QaoaTopology topology) {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    if (topology == QaoaTopology::AllPairs) {
        for (std::size_t p = 0; p < n_features; ++p) {
            for (std::size_t q = p + 1; q < n_features; ++q) {
                pairs.emplace_back(p, q);
            }
        }
    } else {
        for (std::size_t p = 0; p < n_features; ++p) {
            pairs.emplace_back(p, (p + 1) % n_features);
        }
    }
    return pairs;
}

std::size_t parameter_count(KernelKind kind, std::size_t n_features, QaoaTopology topology) {
    switch (kind) {
    case KernelKind::Polynomial: return 2;
    case KernelKind::RBF: return 1;
    case KernelKind::QAOA:
        return topology == QaoaTopology::AllPairs ? n_features * (n_features - 1) / 2 + n_features
                                                  : 2 * n_features;
    default: return 0;
    }
}

KernelSpec::KernelSpec(KernelKind kind, std::size_t n_features, std::vector<double> theta,
                       QaoaTopology topology)
    : kind_(kind), n_features_(n_features), theta_(std::move(theta)), topology_(topology) {
    if (n_features_ < 1) {
        fail(ErrorCode::Dimension, "kernel needs at least one feature");
    }
    if (is_quantum(kind_) && n_features_ > kMaxQubits) {
        fail(ErrorCode::Size, "quantum kernels support at most 24 features");
    }
    if (kind_ == KernelKind::QAOA && topology_ == QaoaTopology::Ring && n_features_ < 2) {
        fail(ErrorCode::Argument, "ring topology needs at least two qubits");
    }
    const auto expected = parameter_count(kind_, n_features_, topology_);
    if (theta_.size() != expected) {
        fail(ErrorCode::Dimension, std::string(kind_name(kind_)) + " kernel expects " +
                                       std::to_string(expected) + " parameters, got " +
                                       std::to_string(theta_.size()));
    }
    if (kind_ == KernelKind::RBF && !(theta_[0] > 0.0)) {
        fail(ErrorCode::Argument, "rbf bandwidth must be positive");
    }
}

KernelSpec KernelSpec::with_defaults(KernelKind kind, std::size_t n_features, std::uint64_t seed,
                                     QaoaTopology topology) {
    switch (kind) {
    case KernelKind::Polynomial:
        return KernelSpec(kind, n_features, {1.0 / static_cast<double>(n_features), 1.0});
    case KernelKind::RBF: return KernelSpec(kind, n_features, {1.0});
    case KernelKind::QAOA: {
        auto rng = make_rng(seed);
        std::uniform_real_distribution<double> angle(0.0, kTwoPi);
        std::vector<double> theta(parameter_count(kind, n_features, topology));
        for (auto &t : theta) {
            t = angle(rng);
        }
        return KernelSpec(kind, n_features, std::move(theta), topology);
    }
    default: return KernelSpec(kind, n_features);
    }
}

KernelSpec KernelSpec::with_theta(std::vector<double> theta) const {
    return KernelSpec(kind_, n_features_, std::move(theta), topology_);
}

Statevector embed_state(const KernelSpec &spec, std::span<const double> x) {
    if (!is_quantum(spec.kind())) {
        fail(ErrorCode::Kind, std::string(kind_name(spec.kind())) + " is not a quantum kernel");
    }
    check_features(spec, x.size());
    const std::size_t n = spec.n_features();
    auto state = Statevector::zero_state(n);

    switch (spec.kind()) {
    case KernelKind::RX:
        for (std::size_t p = 0; p < n; ++p) {
            state.apply_rotation(Axis::X, p, x[p]);
        }
        break;
    case KernelKind::IQP:
        for (std::size_t p = 0; p < n; ++p) {
            state.apply_hadamard(p);
        }
        for (std::size_t p = 0; p < n; ++p) {
            state.apply_rotation(Axis::Z, p, x[p]);
        }
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                state.apply_zz(p, q, x[p] * x[q]);
            }
        }
        break;
    case KernelKind::QAOA: {
        const auto theta = spec.theta();
        for (std::size_t p = 0; p < n; ++p) {
            state.apply_rotation(Axis::X, p, x[p]);
        }
        const auto pairs = qaoa_pairs(n, spec.topology());
        for (std::size_t k = 0; k < pairs.size(); ++k) {
            state.apply_zz(pairs[k].first, pairs[k].second, theta[k]);
        }
        for (std::size_t p = 0; p < n; ++p) {
            state.apply_rotation(Axis::Y, p, theta[pairs.size() + p]);
        }
        break;
    }
    default: break;
    }
    state.check_norm();
    return state;
}

double kernel_eval(const KernelSpec &spec, std::span<const double> x, std::span<const double> y) {
    check_features(spec, x.size());
    check_features(spec, y.size());
    const auto theta = spec.theta();
    switch (spec.kind()) {
    case KernelKind::Linear: return dot(x, y);
    case KernelKind::Polynomial: {
        const double base = theta[0] * dot(x, y) + theta[1];
        return base * base * base;
    }
    case KernelKind::RBF: return std::exp(-theta[0] * squared_distance(x, y));
    default: return fidelity(embed_state(spec, x), embed_state(spec, y));
    }
}

GramMatrix gram_matrix(const KernelSpec &spec, const Matrix &X) {
    check_features(spec, static_cast<std::size_t>(X.cols()));
    const Eigen::Index m = X.rows();
    if (m < 1) {
        fail(ErrorCode::Size, "gram_matrix needs at least one sample");
    }
    GramMatrix K;
    K.entries.resize(m, m);
    K.bounded = is_bounded(spec.kind());

    if (is_quantum(spec.kind())) {
        const auto states = embed_rows(spec, X);
        for (Eigen::Index i = 0; i < m; ++i) {
            for (Eigen::Index j = i; j < m; ++j) {
                const double v = fidelity(states[static_cast<std::size_t>(i)],
                                          states[static_cast<std::size_t>(j)]);
                K.entries(i, j) = v;
                K.entries(j, i) = v;
            }
        }
        return K;
    }

    for (Eigen::Index i = 0; i < m; ++i) {
        const auto xi = row_of(X, i);
        for (Eigen::Index j = i; j < m; ++j) {
            const auto xj = row_of(X, j);
            const double v = kernel_eval(spec, xi, xj);
            K.entries(i, j) = v;
            K.entries(j, i) = v;
        }
    }
    return K;
}

Matrix cross_gram(const KernelSpec &spec, const Matrix &A, const Matrix &B, bool normalize) {
    check_features(spec, static_cast<std::size_t>(A.cols()));
    check_features(spec, static_cast<std::size_t>(B.cols()));
    Matrix out(A.rows(), B.rows());

    if (is_quantum(spec.kind())) {
        const auto sa = embed_rows(spec, A);
        const auto sb = embed_rows(spec, B);
        for (Eigen::Index t = 0; t < A.rows(); ++t) {
            for (Eigen::Index m = 0; m < B.rows(); ++m) {
                out(t, m) = fidelity(sa[static_cast<std::size_t>(t)], sb[static_cast<std::size_t>(m)]);
            }
        }
        return out;
    }

    Vector self_a = Vector::Ones(A.rows());
    Vector self_b = Vector::Ones(B.rows());
    const bool scale = normalize && !is_bounded(spec.kind());
    if (scale) {
        for (Eigen::Index t = 0; t < A.rows(); ++t) {
            const auto a = row_of(A, t);
            self_a(t) = kernel_eval(spec, a, a);
        }
        for (Eigen::Index m = 0; m < B.rows(); ++m) {
            const auto b = row_of(B, m);
            self_b(m) = kernel_eval(spec, b, b);
        }
        if ((self_a.array() < 0.0).any() || (self_b.array() < 0.0).any() || self_a.hasNaN() ||
            self_b.hasNaN()) {
            fail(ErrorCode::Degenerate, "cannot normalize kernel with negative self-similarity");
        }
    }
    for (Eigen::Index t = 0; t < A.rows(); ++t) {
        const auto a = row_of(A, t);
        for (Eigen::Index m = 0; m < B.rows(); ++m) {
            const auto b = row_of(B, m);
            double v = kernel_eval(spec, a, b);
            if (scale) {
                // A zero-norm point is orthogonal to everything after normalization.
                const double denom = self_a(t) * self_b(m);
                v = denom > 0.0 ? v / std::sqrt(denom) : 0.0;
            }
            out(t, m) = v;
        }
    }
    return out;
}

GramMatrix normalize_gram(const GramMatrix &K) {
    const Eigen::Index m = K.size();
    const Vector diag = K.entries.diagonal();
    for (Eigen::Index i = 0; i < m; ++i) {
        if (!(diag(i) >= 0.0)) {
            fail(ErrorCode::Degenerate, "normalize_gram: diagonal entry " + std::to_string(i) +
                                            " is negative");
        }
    }
    GramMatrix out;
    out.bounded = K.bounded;
    out.normalized = true;
    out.entries.resize(m, m);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < m; ++j) {
            const double denom = diag(i) * diag(j);
            if (i == j) {
                out.entries(i, j) = 1.0;
            } else {
                out.entries(i, j) = denom > 0.0 ? K.entries(i, j) / std::sqrt(denom) : 0.0;
            }
        }
    }
    return out;
}

GramMatrix prepared_gram(const KernelSpec &spec, const Matrix &X) {
    auto K = gram_matrix(spec, X);
    return K.bounded ? K : normalize_gram(K);
}

GramMatrix combine_grams(std::span<const GramMatrix> grams, std::span<const double> gamma) {
    if (grams.empty() || grams.size() != gamma.size()) {
        fail(ErrorCode::Dimension, "combine_grams: need one weight per Gram matrix");
    }
    double l1 = 0.0;
    for (double g : gamma) {
        if (!(g >= 0.0)) {
            fail(ErrorCode::Weight, "combine_grams: weights must be non-negative");
        }
        l1 += g;
    }
    if (std::abs(l1 - 1.0) > 1e-8) {
        fail(ErrorCode::Weight, "combine_grams: weights must sum to 1");
    }
    const Eigen::Index m = grams.front().size();
    GramMatrix out;
    out.entries = Matrix::Zero(m, m);
    out.bounded = true;
    out.normalized = true;
    for (std::size_t r = 0; r < grams.size(); ++r) {
        if (grams[r].size() != m) {
            fail(ErrorCode::Dimension, "combine_grams: Gram sizes differ");
        }
        out.entries += gamma[r] * grams[r].entries;
        out.bounded = out.bounded && grams[r].bounded;
        out.normalized = out.normalized && (grams[r].normalized || grams[r].bounded);
    }
    // Identical inputs reproduce the base Gram exactly even though the weights
    // only sum to 1 within 1e-8.
    bool identical = true;
    for (std::size_t r = 1; r < grams.size() && identical; ++r) {
        identical = grams[r].entries == grams[0].entries;
    }
    if (identical) {
        out.entries = grams[0].entries;
    }
    return out;
}

std::vector<Matrix> gram_gradient(const KernelSpec &spec, const Matrix &X, bool normalized) {
    if (!is_parametric(spec.kind())) {
        fail(ErrorCode::Kind, std::string(kind_name(spec.kind())) + " kernel has no parameters");
    }
    check_features(spec, static_cast<std::size_t>(X.cols()));
    const Eigen::Index m = X.rows();
    const auto theta = spec.theta();
    const std::size_t n_params = theta.size();
    std::vector<Matrix> grads(n_params, Matrix::Zero(m, m));

    if (spec.kind() == KernelKind::QAOA) {
        // Parameter shift, applied separately to the ket-side and bra-side
        // occurrence of each angle.
        const auto base = embed_rows(spec, X);
        const double shift = std::numbers::pi / 2;
        for (std::size_t j = 0; j < n_params; ++j) {
            std::vector<double> plus(theta.begin(), theta.end());
            std::vector<double> minus(theta.begin(), theta.end());
            plus[j] += shift;
            minus[j] -= shift;
            const auto sp = embed_rows(spec.with_theta(plus), X);
            const auto sm = embed_rows(spec.with_theta(minus), X);
            Matrix &G = grads[j];
            for (Eigen::Index a = 0; a < m; ++a) {
                const auto ia = static_cast<std::size_t>(a);
                for (Eigen::Index b = a + 1; b < m; ++b) {
                    const auto ib = static_cast<std::size_t>(b);
                    const double ket = fidelity(sp[ia], base[ib]) - fidelity(sm[ia], base[ib]);
                    const double bra = fidelity(base[ia], sp[ib]) - fidelity(base[ia], sm[ib]);
                    const double v = 0.5 * (ket + bra);
                    G(a, b) = v;
                    G(b, a) = v;
                }
            }
        }
        return grads;
    }

    Matrix K(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        const auto xa = row_of(X, a);
        for (Eigen::Index b = a; b < m; ++b) {
            const auto xb = row_of(X, b);
            double k = 0.0;
            if (spec.kind() == KernelKind::Polynomial) {
                const double ip = dot(xa, xb);
                const double base = theta[0] * ip + theta[1];
                k = base * base * base;
                const double d_base = 3.0 * base * base;
                grads[0](a, b) = grads[0](b, a) = d_base * ip;
                grads[1](a, b) = grads[1](b, a) = d_base;
            } else {
                const double sq = squared_distance(xa, xb);
                k = std::exp(-theta[0] * sq);
                grads[0](a, b) = grads[0](b, a) = -sq * k;
            }
            K(a, b) = K(b, a) = k;
        }
    }

    if (!normalized || is_bounded(spec.kind())) {
        return grads;
    }

    // d/dtheta [K_ab / sqrt(K_aa K_bb)]
    //   = dK_ab / s - (K_ab / s) * (dK_aa / K_aa + dK_bb / K_bb) / 2,  s = sqrt(K_aa K_bb)
    const Vector diag = K.diagonal();
    if ((diag.array() <= 0.0).any()) {
        fail(ErrorCode::Degenerate, "gram_gradient: non-positive diagonal under normalization");
    }
    for (auto &G : grads) {
        const Vector rel = G.diagonal().cwiseQuotient(diag);
        Matrix out(m, m);
        for (Eigen::Index a = 0; a < m; ++a) {
            for (Eigen::Index b = 0; b < m; ++b) {
                if (a == b) {
                    out(a, b) = 0.0;
                    continue;
                }
                const double s = std::sqrt(diag(a) * diag(b));
                out(a, b) = G(a, b) / s - 0.5 * (K(a, b) / s) * (rel(a) + rel(b));
            }
        }
        G = std::move(out);
    }
    return grads;
}

double min_eigenvalue(const Matrix &K) {
    if (K.rows() == 0) {
        return 0.0;
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(K, Eigen::EigenvaluesOnly);
    return solver.eigenvalues().minCoeff();
}

void write_gram_csv(std::ostream &out, const Matrix &K) {
    char buf[40];
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", K(i, j));
            if (j > 0) {
                out << ',';
            }
            out << buf;
        }
        out << '\n';
    }
}

Matrix read_gram_csv(std::istream &in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char *end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str() || *end != '\0') {
                fail(ErrorCode::Parse, "gram csv line " + std::to_string(line_no) +
                                           ": bad number '" + cell + "'");
            }
            row.push_back(v);
        }
        rows.push_back(std::move(row));
    }
    const auto m = rows.size();
    Matrix K(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        if (rows[i].size() != m) {
            fail(ErrorCode::Parse, "gram csv row " + std::to_string(i + 1) + " has " +
                                       std::to_string(rows[i].size()) + " entries, expected " +
                                       std::to_string(m));
        }
        for (std::size_t j = 0; j < m; ++j) {
            K(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    return K;
}

namespace {

void put_u32_le(std::ostream &out, std::uint32_t v) {
    unsigned char b[4];
    for (int i = 0; i < 4; ++i) {
        b[i] = static_cast<unsigned char>(v >> (8 * i));
    }
    out.write(reinterpret_cast<const char *>(b), 4);
}

void put_f64_le(std::ostream &out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) {
        b[i] = static_cast<unsigned char>(bits >> (8 * i));
    }
    out.write(reinterpret_cast<const char *>(b), 8);
}

bool get_bytes(std::istream &in, unsigned char *b, std::size_t n) {
    in.read(reinterpret_cast<char *>(b), static_cast<std::streamsize>(n));
    return static_cast<std::size_t>(in.gcount()) == n;
}

} // namespace

void write_gram_binary(std::ostream &out, const Matrix &K) {
    if (K.rows() != K.cols()) {
        fail(ErrorCode::Dimension, "write_gram_binary: matrix is not square");
    }
    out.write("QGRM", 4);
    put_u32_le(out, static_cast<std::uint32_t>(K.rows()));
    for (Eigen::Index i = 0; i < K.rows(); ++i) {
        for (Eigen::Index j = 0; j < K.cols(); ++j) {
            put_f64_le(out, K(i, j));
        }
    }
}

Matrix read_gram_binary(std::istream &in) {
    unsigned char magic[4];
    if (!get_bytes(in, magic, 4) || std::memcmp(magic, "QGRM", 4) != 0) {
        fail(ErrorCode::Parse, "gram binary: missing QGRM magic");
    }
    unsigned char sb[4];
    if (!get_bytes(in, sb, 4)) {
        fail(ErrorCode::Parse, "gram binary: truncated header");
    }
    std::uint32_t m = 0;
    for (int i = 0; i < 4; ++i) {
        m |= static_cast<std::uint32_t>(sb[i]) << (8 * i);
    }
    Matrix K(m, m);
    for (std::uint32_t i = 0; i < m; ++i) {
        for (std::uint32_t j = 0; j < m; ++j) {
            unsigned char b[8];
            if (!get_bytes(in, b, 8)) {
                fail(ErrorCode::Parse, "gram binary: truncated payload");
            }
            std::uint64_t bits = 0;
            for (int k = 0; k < 8; ++k) {
                bits |= static_cast<std::uint64_t>(b[k]) << (8 * k);
            }
            double v;
            std::memcpy(&v, &bits, sizeof v);
            K(i, j) = v;
        }
    }
    return K;
}

} // namespace qmkl
