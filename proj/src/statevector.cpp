#include "qmkl/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "qmkl/error.hpp"

namespace qmkl {

const char *error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::Size: return "size error";
    case ErrorCode::Index: return "index error";
    case ErrorCode::Argument: return "argument error";
    case ErrorCode::Dimension: return "dimension error";
    case ErrorCode::Kind: return "kind error";
    case ErrorCode::Degenerate: return "degenerate error";
    case ErrorCode::Weight: return "weight error";
    case ErrorCode::Label: return "label error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Io: return "io error";
    case ErrorCode::UndefinedMetric: return "undefined-metric error";
    case ErrorCode::Placement: return "placement error";
    case ErrorCode::Aggregation: return "aggregation error";
    case ErrorCode::Internal: return "internal error";
    }
    return "unknown error";
}

Statevector Statevector::zero_state(std::size_t n_qubits) {
    if (n_qubits < 1 || n_qubits > kMaxQubits) {
        fail(ErrorCode::Size, "zero_state: n_qubits must be in [1, 24], got " +
                                  std::to_string(n_qubits));
    }
    std::vector<Complex> amps(std::size_t{1} << n_qubits, Complex{0.0, 0.0});
    amps[0] = 1.0;
    return Statevector(n_qubits, std::move(amps));
}

Statevector Statevector::from_amplitudes(std::vector<Complex> amplitudes) {
    const auto dim = amplitudes.size();
    if (dim < 2 || !std::has_single_bit(dim) || dim > (std::size_t{1} << kMaxQubits)) {
        fail(ErrorCode::Size, "from_amplitudes: length must be a power of two >= 2");
    }
    const auto n = static_cast<std::size_t>(std::countr_zero(dim));
    return Statevector(n, std::move(amplitudes));
}

void Statevector::check_qubit(std::size_t qubit) const {
    if (qubit >= n_qubits_) {
        fail(ErrorCode::Index, "qubit " + std::to_string(qubit) + " out of range for " +
                                   std::to_string(n_qubits_) + "-qubit state");
    }
}

Statevector &Statevector::apply_rotation(Axis axis, std::size_t qubit, double angle) {
    check_qubit(qubit);
    const double c = std::cos(angle / 2);
    const double s = std::sin(angle / 2);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t dim = amps_.size();

    if (axis == Axis::Z) {
        const Complex lo{c, -s};
        const Complex hi{c, s};
        for (std::size_t i = 0; i < dim; ++i) {
            amps_[i] *= (i & stride) ? hi : lo;
        }
        return *this;
    }

    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            Complex &a0 = amps_[base + off];
            Complex &a1 = amps_[base + off + stride];
            const Complex v0 = a0;
            const Complex v1 = a1;
            if (axis == Axis::X) {
                // [[c, -is], [-is, c]]
                a0 = c * v0 + Complex{0, -s} * v1;
                a1 = Complex{0, -s} * v0 + c * v1;
            } else {
                // [[c, -s], [s, c]]
                a0 = c * v0 - s * v1;
                a1 = s * v0 + c * v1;
            }
        }
    }
    return *this;
}

Statevector &Statevector::apply_hadamard(std::size_t qubit) {
    check_qubit(qubit);
    const double r = 1.0 / std::sqrt(2.0);
    const std::size_t stride = std::size_t{1} << qubit;
    const std::size_t dim = amps_.size();
    for (std::size_t base = 0; base < dim; base += 2 * stride) {
        for (std::size_t off = 0; off < stride; ++off) {
            Complex &a0 = amps_[base + off];
            Complex &a1 = amps_[base + off + stride];
            const Complex v0 = a0;
            a0 = r * (v0 + a1);
            a1 = r * (v0 - a1);
        }
    }
    return *this;
}

Statevector &Statevector::apply_zz(std::size_t p, std::size_t q, double angle) {
    check_qubit(p);
    check_qubit(q);
    if (p == q) {
        fail(ErrorCode::Argument, "apply_zz: qubits must differ");
    }
    const Complex same{std::cos(angle / 2), -std::sin(angle / 2)};
    const Complex diff = std::conj(same);
    const std::size_t mp = std::size_t{1} << p;
    const std::size_t mq = std::size_t{1} << q;
    const std::size_t dim = amps_.size();
    for (std::size_t i = 0; i < dim; ++i) {
        const bool bp = (i & mp) != 0;
        const bool bq = (i & mq) != 0;
        amps_[i] *= (bp == bq) ? same : diff;
    }
    return *this;
}

double Statevector::norm() const noexcept {
    double acc = 0.0;
    for (const auto &a : amps_) {
        acc += std::norm(a);
    }
    return std::sqrt(acc);
}

void Statevector::check_norm() const {
    const double n = norm();
    if (std::abs(n - 1.0) >= 1e-10) {
        fail(ErrorCode::Internal, "statevector norm drifted to " + std::to_string(n));
    }
}

Statevector apply_rotation(Statevector state, Axis axis, std::size_t qubit, double angle) {
    state.apply_rotation(axis, qubit, angle);
    return state;
}

Statevector apply_hadamard(Statevector state, std::size_t qubit) {
    state.apply_hadamard(qubit);
    return state;
}

Statevector apply_zz(Statevector state, std::size_t p, std::size_t q, double angle) {
    state.apply_zz(p, q, angle);
    return state;
}

Complex overlap(const Statevector &a, const Statevector &b) {
    if (a.n_qubits() != b.n_qubits()) {
        fail(ErrorCode::Dimension, "overlap: qubit counts differ");
    }
    const auto aa = a.amplitudes();
    const auto bb = b.amplitudes();
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < aa.size(); ++i) {
        // conj(b) * a
        re += bb[i].real() * aa[i].real() + bb[i].imag() * aa[i].imag();
        im += bb[i].real() * aa[i].imag() - bb[i].imag() * aa[i].real();
    }
    return {re, im};
}

double fidelity(const Statevector &a, const Statevector &b) {
    const double f = std::norm(overlap(a, b));
    return std::clamp(f, 0.0, 1.0);
}

} // namespace qmkl
