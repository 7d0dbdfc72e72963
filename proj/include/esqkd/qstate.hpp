// Dense statevector simulation for registers of at most eight qubits.
//
// Bit order: qubit q (0-based) is bit q of the amplitude index, so qubit 0 is
// the least significant bit. A two-qubit state addressed through a
// QubitPair{first, second} is a 4-vector indexed by 2 * bit(first) +
// bit(second), i.e. the first qubit of the pair is the left tensor factor.
#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>

#include "esqkd/errors.hpp"
#include "esqkd/random.hpp"

namespace esqkd {

inline constexpr int kMaxQubits = 8;
// Algebraic identities (norms, unitarity).
inline constexpr double kAlgebraTol = 1e-12;
// Composed or measured quantities (probability sums, overlaps).
inline constexpr double kMeasureTol = 1e-10;
// Below this every outcome is treated as impossible.
inline constexpr double kDegenerateProb = 1e-14;

template <typename Scalar>
using Complex = std::complex<Scalar>;

template <typename Scalar>
using Gate = Eigen::Matrix<Complex<Scalar>, 2, 2>;

template <typename Scalar>
using PairVector = Eigen::Matrix<Complex<Scalar>, 4, 1>;

template <typename Scalar>
using PairBasis = std::array<PairVector<Scalar>, 4>;

template <typename Scalar>
using OutcomeProbabilities = std::array<Scalar, 4>;

struct QubitPair {
  int first;
  int second;
};

template <typename Scalar = double>
class StateVector {
 public:
  using Amplitudes = Eigen::Matrix<Complex<Scalar>, Eigen::Dynamic, 1>;

  StateVector(int num_qubits, Amplitudes amplitudes)
      : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
    if (num_qubits < 1 || num_qubits > kMaxQubits) {
      throw InvalidArgument("qubit count must be in [1, 8], got " + std::to_string(num_qubits));
    }
    if (amplitudes_.size() != (Eigen::Index{1} << num_qubits)) {
      throw InvalidArgument("amplitude vector length must be 2^num_qubits");
    }
    if (!amplitudes_.allFinite()) {
      throw InvalidArgument("amplitudes must be finite");
    }
    if (std::abs(amplitudes_.norm() - Scalar(1)) >= Scalar(kAlgebraTol)) {
      throw InvalidArgument("state must have unit norm");
    }
  }

  int num_qubits() const noexcept { return num_qubits_; }
  Eigen::Index dimension() const noexcept { return amplitudes_.size(); }
  const Amplitudes& amplitudes() const noexcept { return amplitudes_; }
  Complex<Scalar> operator[](Eigen::Index i) const { return amplitudes_[i]; }
  Scalar norm() const { return amplitudes_.norm(); }

 private:
  int num_qubits_;
  Amplitudes amplitudes_;
};

template <typename Scalar>
struct Projection {
  Scalar probability;
  StateVector<Scalar> collapsed;
};

template <typename Scalar>
struct Measurement {
  int outcome;
  StateVector<Scalar> collapsed;
};

namespace detail {

inline void check_qubit(int qubit, int num_qubits) {
  if (qubit < 0 || qubit >= num_qubits) {
    throw InvalidArgument("qubit index " + std::to_string(qubit) + " out of range");
  }
}

inline void check_pair(QubitPair pair, int num_qubits) {
  check_qubit(pair.first, num_qubits);
  check_qubit(pair.second, num_qubits);
  if (pair.first == pair.second) {
    throw InvalidArgument("pair indices must be distinct");
  }
}

// Calls f(i00, i01, i10, i11) once per assignment of the qubits outside the
// pair; the four indices follow the local 2 * bit(first) + bit(second) order.
template <typename F>
void for_each_pair_block(Eigen::Index dimension, QubitPair pair, F&& f) {
  const Eigen::Index first_mask = Eigen::Index{1} << pair.first;
  const Eigen::Index second_mask = Eigen::Index{1} << pair.second;
  for (Eigen::Index r = 0; r < dimension; ++r) {
    if ((r & first_mask) != 0 || (r & second_mask) != 0) continue;
    f(r, r | second_mask, r | first_mask, r | first_mask | second_mask);
  }
}

}  // namespace detail

template <typename Scalar>
bool is_unitary(const Gate<Scalar>& gate, Scalar tol = Scalar(kAlgebraTol)) {
  return gate.allFinite() && (gate * gate.adjoint() - Gate<Scalar>::Identity()).norm() < tol;
}

// Orthonormality residual: max |<b_i|b_j> - delta_ij|.
template <typename Scalar>
Scalar orthonormality_residual(const PairBasis<Scalar>& basis) {
  Scalar worst = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const Complex<Scalar> expected = i == j ? Scalar(1) : Scalar(0);
      worst = std::max(worst, std::abs(basis[i].dot(basis[j]) - expected));
    }
  }
  return worst;
}

template <typename Scalar>
void validate_basis(const PairBasis<Scalar>& basis) {
  if (!(orthonormality_residual(basis) < Scalar(kMeasureTol))) {
    throw InvalidArgument("measurement basis is not orthonormal");
  }
}

// `bits` lists qubit values in register order: bits[0] is qubit 0, written
// left to right like a ket |q0 q1 ...>.
template <typename Scalar = double>
StateVector<Scalar> init_basis_state(int num_qubits, std::string_view bits) {
  if (static_cast<int>(bits.size()) != num_qubits) {
    throw InvalidArgument("bit string length does not match qubit count");
  }
  if (num_qubits < 1 || num_qubits > kMaxQubits) {
    throw InvalidArgument("qubit count must be in [1, 8]");
  }
  Eigen::Index index = 0;
  for (int q = 0; q < num_qubits; ++q) {
    if (bits[q] == '1') {
      index |= Eigen::Index{1} << q;
    } else if (bits[q] != '0') {
      throw InvalidArgument("bit string may only contain '0' and '1'");
    }
  }
  typename StateVector<Scalar>::Amplitudes amps =
      StateVector<Scalar>::Amplitudes::Zero(Eigen::Index{1} << num_qubits);
  amps[index] = Scalar(1);
  return StateVector<Scalar>(num_qubits, std::move(amps));
}

// Tensor product of two-qubit states on disjoint pairs that together cover
// the whole register.
template <typename Scalar>
StateVector<Scalar> product_of_pairs(
    int num_qubits, std::span<const std::pair<QubitPair, PairVector<Scalar>>> factors) {
  if (num_qubits < 1 || num_qubits > kMaxQubits || 2 * factors.size() != std::size_t(num_qubits)) {
    throw InvalidArgument("pair factors must cover the register exactly");
  }
  unsigned covered = 0;
  for (const auto& [pair, vec] : factors) {
    detail::check_pair(pair, num_qubits);
    const unsigned bits = (1u << pair.first) | (1u << pair.second);
    if ((covered & bits) != 0) throw InvalidArgument("pair factors overlap");
    covered |= bits;
  }
  const Eigen::Index dim = Eigen::Index{1} << num_qubits;
  typename StateVector<Scalar>::Amplitudes amps(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    Complex<Scalar> a = Scalar(1);
    for (const auto& [pair, vec] : factors) {
      const int local = int((i >> pair.first) & 1) * 2 + int((i >> pair.second) & 1);
      a *= vec[local];
    }
    amps[i] = a;
  }
  return StateVector<Scalar>(num_qubits, std::move(amps));
}

template <typename Scalar>
StateVector<Scalar> apply_gate(const StateVector<Scalar>& state, const Gate<Scalar>& gate, int qubit) {
  detail::check_qubit(qubit, state.num_qubits());
  if (!is_unitary(gate)) throw InvalidArgument("gate is not unitary");
  typename StateVector<Scalar>::Amplitudes out = state.amplitudes();
  const Eigen::Index mask = Eigen::Index{1} << qubit;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    if ((i & mask) != 0) continue;
    const Complex<Scalar> a0 = out[i];
    const Complex<Scalar> a1 = out[i | mask];
    out[i] = gate(0, 0) * a0 + gate(0, 1) * a1;
    out[i | mask] = gate(1, 0) * a0 + gate(1, 1) * a1;
  }
  return StateVector<Scalar>(state.num_qubits(), std::move(out));
}

template <typename Scalar>
OutcomeProbabilities<Scalar> basis_probabilities(const StateVector<Scalar>& state,
                                                 const PairBasis<Scalar>& basis, QubitPair pair) {
  detail::check_pair(pair, state.num_qubits());
  validate_basis(basis);
  OutcomeProbabilities<Scalar> p{};
  const auto& a = state.amplitudes();
  detail::for_each_pair_block(state.dimension(), pair, [&](auto i00, auto i01, auto i10, auto i11) {
    const PairVector<Scalar> local(a[i00], a[i01], a[i10], a[i11]);
    for (int k = 0; k < 4; ++k) p[k] += std::norm(basis[k].dot(local));
  });
  return p;
}

namespace detail {

template <typename Scalar>
StateVector<Scalar> collapse(const StateVector<Scalar>& state, const PairVector<Scalar>& target,
                             QubitPair pair, Scalar probability) {
  const Scalar scale = Scalar(1) / std::sqrt(probability);
  const auto& a = state.amplitudes();
  typename StateVector<Scalar>::Amplitudes out(state.dimension());
  for_each_pair_block(state.dimension(), pair, [&](auto i00, auto i01, auto i10, auto i11) {
    const PairVector<Scalar> local(a[i00], a[i01], a[i10], a[i11]);
    const Complex<Scalar> c = target.dot(local) * scale;
    out[i00] = target[0] * c;
    out[i01] = target[1] * c;
    out[i10] = target[2] * c;
    out[i11] = target[3] * c;
  });
  // Renormalize again so the collapsed norm is exact to rounding.
  out /= out.norm();
  return StateVector<Scalar>(state.num_qubits(), std::move(out));
}

}  // namespace detail

// Projects the pair onto basis state `outcome` and renormalizes.
template <typename Scalar>
Projection<Scalar> project(const StateVector<Scalar>& state, const PairBasis<Scalar>& basis,
                           QubitPair pair, int outcome) {
  if (outcome < 0 || outcome > 3) throw InvalidArgument("outcome must be in [0, 3]");
  const auto p = basis_probabilities(state, basis, pair);
  if (p[outcome] < Scalar(kDegenerateProb)) {
    throw NumericalDegeneracy("projection onto an outcome of vanishing probability");
  }
  return {p[outcome], detail::collapse(state, basis[outcome], pair, p[outcome])};
}

// As above with the outcome probabilities already computed for this pair.
template <typename Scalar>
Projection<Scalar> project(const StateVector<Scalar>& state, const PairBasis<Scalar>& basis,
                           QubitPair pair, int outcome, const OutcomeProbabilities<Scalar>& p) {
  if (outcome < 0 || outcome > 3) throw InvalidArgument("outcome must be in [0, 3]");
  if (p[outcome] < Scalar(kDegenerateProb)) {
    throw NumericalDegeneracy("projection onto an outcome of vanishing probability");
  }
  return {p[outcome], detail::collapse(state, basis[outcome], pair, p[outcome])};
}

// Inverse-CDF draw over four outcome probabilities.
template <typename Scalar>
int sample_outcome(const OutcomeProbabilities<Scalar>& p, double u) {
  const Scalar total = p[0] + p[1] + p[2] + p[3];
  if (!(total >= Scalar(kDegenerateProb))) {
    throw NumericalDegeneracy("all outcome probabilities vanish");
  }
  Scalar cumulative = 0;
  int last_possible = 0;
  for (int k = 0; k < 4; ++k) {
    if (p[k] < Scalar(kDegenerateProb)) continue;
    last_possible = k;
    cumulative += p[k];
    if (Scalar(u) * total < cumulative) return k;
  }
  return last_possible;
}

template <typename Scalar>
Measurement<Scalar> measure_in_basis(const StateVector<Scalar>& state, const PairBasis<Scalar>& basis,
                                     QubitPair pair, RandomSource& rng) {
  const auto p = basis_probabilities(state, basis, pair);
  const int k = sample_outcome(p, rng.uniform());
  return {k, detail::collapse(state, basis[k], pair, p[k])};
}

// |<a|b>|; equality up to global phase is overlap_modulus == 1.
template <typename Scalar>
Scalar overlap_modulus(const StateVector<Scalar>& a, const StateVector<Scalar>& b) {
  if (a.num_qubits() != b.num_qubits()) throw InvalidArgument("register sizes differ");
  return std::abs(a.amplitudes().dot(b.amplitudes()));
}

template <typename Scalar>
Scalar overlap_modulus(const PairVector<Scalar>& a, const PairVector<Scalar>& b) {
  return std::abs(a.dot(b));
}

}  // namespace esqkd
