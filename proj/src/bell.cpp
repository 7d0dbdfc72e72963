#include "esqkd/bell.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "esqkd/errors.hpp"

namespace esqkd {

namespace {

constexpr std::array<BellState, 4> kStateOrder = {BellState::PhiPlus, BellState::PhiMinus,
                                                  BellState::PsiPlus, BellState::PsiMinus};

double unit_overlap_residual(const PairVector<double>& a, const PairVector<double>& b) {
  return std::max(0.0, 1.0 - overlap_modulus(a, b));
}

}  // namespace

std::optional<BellLabel> BellLabel::parse(std::string_view s) {
  if (s.size() != 2) return std::nullopt;
  const auto bit = [](char c) -> int { return c == '0' ? 0 : c == '1' ? 1 : -1; };
  const int a = bit(s[0]);
  const int b = bit(s[1]);
  if (a < 0 || b < 0) return std::nullopt;
  return BellLabel(a, b);
}

std::string_view bell_state_name(BellState s) {
  switch (s) {
    case BellState::PhiPlus: return "Phi+";
    case BellState::PhiMinus: return "Phi-";
    case BellState::PsiPlus: return "Psi+";
    case BellState::PsiMinus: return "Psi-";
  }
  return "?";
}

PairVector<double> canonical_bell_vector(BellState s) {
  const double h = 1.0 / std::sqrt(2.0);
  switch (s) {
    case BellState::PhiPlus: return PairVector<double>(h, 0, 0, h);
    case BellState::PhiMinus: return PairVector<double>(h, 0, 0, -h);
    case BellState::PsiPlus: return PairVector<double>(0, h, h, 0);
    case BellState::PsiMinus: return PairVector<double>(0, h, -h, 0);
  }
  return PairVector<double>::Zero();
}

PairVector<double> BellConvention::state(BellLabel label) const {
  return double(signs[label.value()]) * canonical_bell_vector(assignment[label.value()]);
}

PairBasis<double> BellConvention::basis() const {
  PairBasis<double> out;
  for (BellLabel l : kBellLabels) out[l.value()] = state(l);
  return out;
}

PairBasis<double> BellConvention::rotated_basis() const {
  const Gate<double> s = gate_matrix(GateName::S);
  PairBasis<double> out;
  for (BellLabel l : kBellLabels) out[l.value()] = apply_on_factor(s, acting_factor, state(l));
  return out;
}

PairVector<double> apply_on_factor(const Gate<double>& gate, ActingFactor factor,
                                   const PairVector<double>& v) {
  Eigen::Matrix4cd op;
  const Gate<double> id = Gate<double>::Identity();
  // Local index is 2 * first + second, so the first factor is the left
  // Kronecker operand.
  const Gate<double>& left = factor == ActingFactor::First ? gate : id;
  const Gate<double>& right = factor == ActingFactor::First ? id : gate;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      op.block<2, 2>(2 * i, 2 * j) = left(i, j) * right;
    }
  }
  return op * v;
}

ConventionCheck check_convention(const BellConvention& conv) {
  const double h = 1.0 / std::sqrt(2.0);
  const BellLabel l00(0, 0), l01(0, 1), l10(1, 0), l11(1, 1);
  const PairVector<double> plus_plus = h * (conv.state(l01) + conv.state(l10));
  const PairVector<double> minus_plus = h * (conv.state(l00) - conv.state(l11));

  ConventionCheck check{conv, 0, 0, 0, true};
  check.rotation_residual = unit_overlap_residual(
      apply_on_factor(gate_matrix(GateName::S), conv.acting_factor, conv.state(l00)), plus_plus);
  check.phase_residual = unit_overlap_residual(
      apply_on_factor(gate_matrix(GateName::Z), conv.acting_factor, plus_plus), minus_plus);
  check.orthonormality_residual = orthonormality_residual(conv.basis());
  for (BellLabel l : kBellLabels) {
    const auto moved =
        apply_on_factor(gate_matrix(kPauliFrame[l.value()]), conv.acting_factor, conv.state(l00));
    check.pauli_frame = check.pauli_frame && unit_overlap_residual(moved, conv.state(l)) < kMeasureTol;
  }
  return check;
}

std::vector<ConventionCheck> enumerate_conventions() {
  std::vector<ConventionCheck> found;
  for (ActingFactor factor : {ActingFactor::First, ActingFactor::Second}) {
    std::array<int, 4> perm = {0, 1, 2, 3};
    do {
      for (int sign_bits = 0; sign_bits < 16; ++sign_bits) {
        BellConvention conv{};
        conv.acting_factor = factor;
        for (int i = 0; i < 4; ++i) {
          conv.assignment[i] = kStateOrder[perm[i]];
          // Most significant bit is label 00's sign, 0 meaning +1.
          conv.signs[i] = ((sign_bits >> (3 - i)) & 1) ? -1 : 1;
        }
        auto check = check_convention(conv);
        if (check.satisfied()) found.push_back(check);
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return found;
}

BellConvention derive_convention() {
  const auto all = enumerate_conventions();
  if (all.empty()) {
    throw DerivationFailure("no Bell-label convention satisfies the rotated-label identities");
  }
  return all.front().convention;
}

const BellConvention& frozen_convention() {
  static const BellConvention conv{
      {BellState::PhiPlus, BellState::PhiMinus, BellState::PsiPlus, BellState::PsiMinus},
      {1, 1, 1, -1},
      ActingFactor::First};
  return conv;
}

std::string describe(const BellConvention& conv) {
  std::string out;
  for (BellLabel l : kBellLabels) {
    out += fmt::format("|{}> = {}{}; ", l.str(), conv.signs[l.value()] < 0 ? "-" : "+",
                       bell_state_name(conv.assignment[l.value()]));
  }
  out += conv.acting_factor == ActingFactor::First ? "S/Z act on the first factor"
                                                   : "S/Z act on the second factor";
  return out;
}

PairVector<double> bell_state(const BellConvention& conv, BellLabel label) {
  return conv.state(label);
}

StateVector<> bell_register(const BellConvention& conv, BellLabel label) {
  const std::array<std::pair<QubitPair, PairVector<double>>, 1> factor = {
      std::pair{QubitPair{0, 1}, conv.state(label)}};
  return product_of_pairs<double>(2, factor);
}

std::array<std::complex<double>, 4> bell_expansion(const BellConvention& conv,
                                                   const PairVector<double>& v) {
  std::array<std::complex<double>, 4> c;
  for (BellLabel l : kBellLabels) c[l.value()] = conv.state(l).dot(v);
  return c;
}

BellOutcome bell_measure(const BellConvention& conv, const StateVector<>& state, QubitPair pair,
                         RandomSource& rng) {
  auto m = measure_in_basis(state, conv.basis(), pair, rng);
  return {BellLabel(m.outcome), std::move(m.collapsed)};
}

PairVector<double> rotated_state(const BellConvention& conv, RotatedLabel label) {
  return apply_on_factor(gate_matrix(GateName::S), conv.acting_factor,
                         conv.state(label.underlying()));
}

SwapTable derive_swap_table(const BellConvention& conv) {
  const PairBasis<double> basis = conv.basis();
  SwapTable table;
  for (BellLabel a : kBellLabels) {
    for (BellLabel b : kBellLabels) {
      const std::array<std::pair<QubitPair, PairVector<double>>, 2> factors = {
          std::pair{QubitPair{0, 1}, conv.state(a)}, std::pair{QubitPair{2, 3}, conv.state(b)}};
      const auto state = product_of_pairs<double>(4, factors);
      const auto p = basis_probabilities(state, basis, QubitPair{0, 2});
      for (BellLabel m : kBellLabels) {
        if (std::abs(p[m.value()] - 0.25) > kMeasureTol) {
          throw DerivationFailure(fmt::format("swap outcome {} for ({}, {}) is not uniform",
                                              m.str(), a.str(), b.str()));
        }
        const auto collapsed = project(state, basis, QubitPair{0, 2}, m.value()).collapsed;
        const auto q = basis_probabilities(collapsed, basis, QubitPair{1, 3});
        const auto it = std::find_if(q.begin(), q.end(),
                                     [](double x) { return std::abs(x - 1.0) < kMeasureTol; });
        if (it == q.end()) {
          throw DerivationFailure("swapped pair is not in a labeled Bell state");
        }
        table.entries_[SwapTable::index(a, b, m)] = BellLabel(int(it - q.begin()));
      }
    }
  }
  // m -> r must be a bijection for each (a, b).
  for (BellLabel a : kBellLabels) {
    for (BellLabel b : kBellLabels) {
      std::array<bool, 4> seen{};
      for (BellLabel m : kBellLabels) seen[table.lookup(a, b, m).value()] = true;
      if (!std::all_of(seen.begin(), seen.end(), [](bool x) { return x; })) {
        throw DerivationFailure("swap table is not bijective in the measured label");
      }
    }
  }
  return table;
}

}  // namespace esqkd
