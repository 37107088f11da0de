#pragma once

/**
 * @file
 * Dense N-qubit pure-state simulation.
 *
 * Conventions:
 *  - qubit 0 is the least-significant bit of the basis index;
 *  - every rotation is exp(-i * angle * G / 2) with G one of X, Y, Z or Z(x)Z.
 *
 * Other simulators use different sign and ordering conventions, so states
 * built here are only comparable to external tools after checking both.
 */

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace qmkl {

using Complex = std::complex<double>;

enum class Axis { X, Y, Z };

inline constexpr std::size_t kMaxQubits = 24;

class Statevector {
  public:
    /// |0...0> on n_qubits qubits. Throws ErrorCode::Size outside [1, 24].
    static Statevector zero_state(std::size_t n_qubits);

    /// Wraps raw amplitudes; the length must be a power of two.
    static Statevector from_amplitudes(std::vector<Complex> amplitudes);

    [[nodiscard]] std::size_t n_qubits() const noexcept { return n_qubits_; }
    [[nodiscard]] std::size_t dimension() const noexcept { return amps_.size(); }
    [[nodiscard]] std::span<const Complex> amplitudes() const noexcept { return amps_; }
    [[nodiscard]] const Complex &operator[](std::size_t i) const { return amps_[i]; }

    Statevector &apply_rotation(Axis axis, std::size_t qubit, double angle);
    Statevector &apply_hadamard(std::size_t qubit);
    Statevector &apply_zz(std::size_t p, std::size_t q, double angle);

    [[nodiscard]] double norm() const noexcept;

    /// Throws ErrorCode::Internal if the norm has drifted more than 1e-10 from 1.
    void check_norm() const;

  private:
    Statevector(std::size_t n, std::vector<Complex> amps)
        : n_qubits_(n), amps_(std::move(amps)) {}

    void check_qubit(std::size_t qubit) const;

    std::size_t n_qubits_;
    std::vector<Complex> amps_;
};

/// Functional forms of the gates; each returns a transformed copy.
Statevector apply_rotation(Statevector state, Axis axis, std::size_t qubit, double angle);
Statevector apply_hadamard(Statevector state, std::size_t qubit);
Statevector apply_zz(Statevector state, std::size_t p, std::size_t q, double angle);

/// sum_i conj(b_i) * a_i
Complex overlap(const Statevector &a, const Statevector &b);

/// |overlap(a, b)|^2 clamped to [0, 1].
double fidelity(const Statevector &a, const Statevector &b);

} // namespace qmkl
