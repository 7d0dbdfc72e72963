#pragma once

#include <array>
#include <optional>
#include <string_view>

#include "esqkd/qstate.hpp"

namespace esqkd {

// S is the 2x2 Hadamard-form rotation (1/sqrt2)[[1, 1], [1, -1]].
enum class GateName { I, X, Y, Z, S };

inline constexpr std::array<GateName, 5> kAllGates = {GateName::I, GateName::X, GateName::Y,
                                                      GateName::Z, GateName::S};
inline constexpr std::array<GateName, 4> kPaulis = {GateName::I, GateName::X, GateName::Y,
                                                    GateName::Z};

constexpr std::string_view gate_symbol(GateName g) {
  switch (g) {
    case GateName::I: return "I";
    case GateName::X: return "X";
    case GateName::Y: return "Y";
    case GateName::Z: return "Z";
    case GateName::S: return "S";
  }
  return "?";
}

constexpr std::optional<GateName> parse_gate(std::string_view s) {
  for (GateName g : kAllGates) {
    if (gate_symbol(g) == s) return g;
  }
  return std::nullopt;
}

constexpr bool is_pauli(GateName g) { return g != GateName::S; }

template <typename Scalar = double>
Gate<Scalar> gate_matrix(GateName g) {
  using C = Complex<Scalar>;
  Gate<Scalar> m;
  switch (g) {
    case GateName::I:
      m << C(1), C(0), C(0), C(1);
      break;
    case GateName::X:
      m << C(0), C(1), C(1), C(0);
      break;
    case GateName::Y:
      m << C(0), C(0, -1), C(0, 1), C(0);
      break;
    case GateName::Z:
      m << C(1), C(0), C(0), C(-1);
      break;
    case GateName::S: {
      const Scalar h = Scalar(1) / std::sqrt(Scalar(2));
      m << C(h), C(h), C(h), C(-h);
      break;
    }
  }
  return m;
}

}  // namespace esqkd
