// Bell-basis labeling, Bell measurement and the entanglement-swapping table.
//
// A BellConvention assigns the two-character labels "00", "01", "10", "11"
// to signed Bell states and fixes which factor of a labeled pair the
// single-qubit S and Z of the rotated-label identities act on:
//
//   S on the acting factor of |00>  ~  (|01> + |10>) / sqrt2      (|++>)
//   Z on the acting factor of |++>  ~  (|00> - |11>) / sqrt2      (|-+>)
//
// where "~" means equal up to a global phase and |xy> are Bell labels.
#pragma once

#include <array>
#include <compare>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esqkd/gates.hpp"
#include "esqkd/qstate.hpp"
#include "esqkd/random.hpp"

namespace esqkd {

class BellLabel {
 public:
  constexpr BellLabel() = default;
  constexpr explicit BellLabel(int value) : value_(static_cast<std::uint8_t>(value & 3)) {}
  constexpr BellLabel(int a, int b) : value_(static_cast<std::uint8_t>(((a & 1) << 1) | (b & 1))) {}

  constexpr int value() const noexcept { return value_; }
  constexpr int a() const noexcept { return value_ >> 1; }
  constexpr int b() const noexcept { return value_ & 1; }

  std::string str() const { return {char('0' + a()), char('0' + b())}; }
  static std::optional<BellLabel> parse(std::string_view s);

  constexpr auto operator<=>(const BellLabel&) const = default;

  // Label-wise XOR; the swap table of the frozen convention is closed under it.
  friend constexpr BellLabel operator^(BellLabel x, BellLabel y) {
    return BellLabel(x.value_ ^ y.value_);
  }

 private:
  std::uint8_t value_ = 0;
};

inline constexpr std::array<BellLabel, 4> kBellLabels = {BellLabel(0), BellLabel(1), BellLabel(2),
                                                         BellLabel(3)};

enum class BellState { PhiPlus, PhiMinus, PsiPlus, PsiMinus };

std::string_view bell_state_name(BellState s);

// Unlabeled textbook Bell vector in the pair's local |first second> order.
PairVector<double> canonical_bell_vector(BellState s);

enum class ActingFactor { First, Second };

struct BellConvention {
  std::array<BellState, 4> assignment;  // indexed by label value
  std::array<int, 4> signs;             // +1 or -1, indexed by label value
  ActingFactor acting_factor;

  PairVector<double> state(BellLabel label) const;
  PairBasis<double> basis() const;
  // Images of the four labeled states under S on the acting factor.
  PairBasis<double> rotated_basis() const;

  bool operator==(const BellConvention&) const = default;
};

// Applies a single-qubit gate to one tensor factor of a pair vector.
PairVector<double> apply_on_factor(const Gate<double>& gate, ActingFactor factor,
                                   const PairVector<double>& v);

struct ConventionCheck {
  BellConvention convention;
  double rotation_residual;  // 1 - |<S|00>, |++>>|
  double phase_residual;  // 1 - |<Z|++>, |-+>>|
  double orthonormality_residual;
  // Paulis I, Z, X, Y on the acting factor map |00> to |00>, |01>, |10>, |11>.
  bool pauli_frame;

  bool satisfied() const {
    return rotation_residual < kMeasureTol && phase_residual < kMeasureTol &&
           orthonormality_residual < kAlgebraTol;
  }
};

// Pauli carrying |00> to |label> in a Pauli-frame convention.
inline constexpr std::array<GateName, 4> kPauliFrame = {GateName::I, GateName::Z, GateName::X,
                                                        GateName::Y};

ConventionCheck check_convention(const BellConvention& conv);

// Every convention satisfying both rotated-label identities, in search order:
// acting factor (First, Second), then label->state assignments as
// permutations of (PhiPlus, PhiMinus, PsiPlus, PsiMinus) in lexicographic
// order, then sign vectors in lexicographic order with +1 before -1.
std::vector<ConventionCheck> enumerate_conventions();

// First entry of enumerate_conventions(); throws DerivationFailure if none.
BellConvention derive_convention();

// Committed result of derive_convention(): 00=Phi+, 01=Phi-, 10=Psi+,
// 11=-Psi-, S and Z acting on the first factor.
const BellConvention& frozen_convention();

std::string describe(const BellConvention& conv);

PairVector<double> bell_state(const BellConvention& conv, BellLabel label);

// The labeled state as a two-qubit register with pair (qubit 0, qubit 1).
StateVector<> bell_register(const BellConvention& conv, BellLabel label);

// Coefficients <label|v> for the four labels.
std::array<std::complex<double>, 4> bell_expansion(const BellConvention& conv,
                                                   const PairVector<double>& v);

struct BellOutcome {
  BellLabel label;
  StateVector<> collapsed;
};

BellOutcome bell_measure(const BellConvention& conv, const StateVector<>& state, QubitPair pair,
                         RandomSource& rng);

// |s1 s2> with s = true meaning '-'. |++> is S|00>, Z on the acting factor
// flips s1 and X flips s2, so |s1 s2> = S|ab> with a = s1, b = s2.
struct RotatedLabel {
  bool minus1 = false;
  bool minus2 = false;

  BellLabel underlying() const { return BellLabel(minus1 ? 1 : 0, minus2 ? 1 : 0); }
  std::string str() const { return {minus1 ? '-' : '+', minus2 ? '-' : '+'}; }
};

PairVector<double> rotated_state(const BellConvention& conv, RotatedLabel label);

// Pairs (1,2) in |a> and (3,4) in |b>; Bell-measuring (1,3) with outcome m
// leaves (2,4) in |r>. Every outcome has probability 1/4.
class SwapTable {
 public:
  BellLabel lookup(BellLabel a, BellLabel b, BellLabel m) const {
    return entries_[index(a, b, m)];
  }

 private:
  friend SwapTable derive_swap_table(const BellConvention& conv);
  static std::size_t index(BellLabel a, BellLabel b, BellLabel m) {
    return std::size_t(a.value()) * 16 + std::size_t(b.value()) * 4 + std::size_t(m.value());
  }
  std::array<BellLabel, 64> entries_{};
};

// Exhaustive simulation over all (a, b, m); throws DerivationFailure if an
// outcome distribution is not uniform or the result pair is not a labeled
// state.
SwapTable derive_swap_table(const BellConvention& conv);

}  // namespace esqkd
