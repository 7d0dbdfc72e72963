#include <chrono>

#include <gtest/gtest.h>

#include "esqkd/bell.hpp"
#include "esqkd/errors.hpp"
#include "oracle.hpp"

using namespace esqkd;

namespace {

const BellConvention& conv() { return frozen_convention(); }

}  // namespace

TEST(BellLabel, ParseAndFormat) {
  EXPECT_EQ(BellLabel::parse("10")->value(), 2);
  EXPECT_EQ(BellLabel(1, 1).str(), "11");
  EXPECT_FALSE(BellLabel::parse("2").has_value());
  EXPECT_FALSE(BellLabel::parse("1a").has_value());
  EXPECT_EQ((BellLabel(1, 0) ^ BellLabel(1, 1)).str(), "01");
}

TEST(Convention, DerivedEqualsFrozen) {
  const auto start = std::chrono::steady_clock::now();
  const auto all = enumerate_conventions();
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  EXPECT_LT(seconds, 1.0);
  ASSERT_FALSE(all.empty());
  EXPECT_TRUE(derive_convention() == frozen_convention());
  for (const auto& c : all) {
    EXPECT_LT(c.rotation_residual, kMeasureTol);
    EXPECT_LT(c.phase_residual, kMeasureTol);
    EXPECT_LT(c.orthonormality_residual, kMeasureTol);
  }
}

// The two identities leave 64 conventions; half of them also carry the
// I, Z, X, Y frame from |00> to |01>, |10>, |11>.
TEST(Convention, EnumerationStructure) {
  const auto all = enumerate_conventions();
  EXPECT_EQ(all.size(), 64u);
  std::size_t framed = 0;
  for (const auto& c : all) framed += c.pauli_frame;
  EXPECT_EQ(framed, 32u);
  EXPECT_TRUE(all.front().pauli_frame);
}

TEST(Convention, MatchesReferenceVectors) {
  for (BellLabel l : kBellLabels) {
    const auto ref = oracle::bell(l.value());
    const auto v = conv().state(l);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(v[i] - ref[i]), 0.0, kAlgebraTol);
  }
}

TEST(Rotated, SuperpositionsOfLabels) {
  const double h = 1.0 / std::sqrt(2.0);
  const auto s = [&](BellLabel l) { return conv().state(l); };
  const BellLabel l00(0), l01(1), l10(2), l11(3);
  // |++>, |+->, |-+>, |--> as sums of labelled states.
  EXPECT_NEAR(overlap_modulus(rotated_state(conv(), {false, false}), PairVector<double>(h * (s(l01) + s(l10)))), 1.0, kMeasureTol);
  EXPECT_NEAR(overlap_modulus(rotated_state(conv(), {true, false}), PairVector<double>(h * (s(l00) - s(l11)))), 1.0, kMeasureTol);
  for (bool a : {false, true}) {
    for (bool b : {false, true}) {
      EXPECT_EQ(RotatedLabel({a, b}).underlying(), BellLabel(a, b));
    }
  }
  EXPECT_EQ(RotatedLabel({true, false}).str(), "-+");
}

TEST(Swap, TableMatchesBruteForceAmplitudes) {
  const SwapTable t = derive_swap_table(conv());
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      for (int m = 0; m < 4; ++m) {
        // <m|_{13} <r|_{24} |a>_{12} |b>_{34}, qubits numbered 1..4.
        std::array<double, 4> p{};
        for (int r = 0; r < 4; ++r) {
          oracle::cd amp = 0;
          for (unsigned i = 0; i < 16; ++i) {
            amp += std::conj(oracle::local(oracle::bell(m), i, 1, 3) * oracle::local(oracle::bell(r), i, 2, 4)) *
                   oracle::local(oracle::bell(a), i, 1, 2) * oracle::local(oracle::bell(b), i, 3, 4);
          }
          p[r] = std::norm(amp);
        }
        const int r = t.lookup(BellLabel(a), BellLabel(b), BellLabel(m)).value();
        EXPECT_NEAR(p[r], 0.25, kMeasureTol);
        // The label-wise XOR rule holds for this convention.
        EXPECT_EQ(r, a ^ b ^ m);
      }
    }
  }
}

TEST(Swap, PairIsolationOnRegister) {
  const auto reg = bell_register(conv(), BellLabel(2));
  EXPECT_EQ(reg.num_qubits(), 2);
  const auto p = basis_probabilities(reg, conv().basis(), {0, 1});
  EXPECT_NEAR(p[2], 1.0, kMeasureTol);
  const auto c = bell_expansion(conv(), conv().state(BellLabel(3)));
  EXPECT_NEAR(std::abs(c[3]), 1.0, kAlgebraTol);
}

// Moving S and Z to the second factor breaks the frozen assignment; each
// factor admits its own 32 conventions.
TEST(Convention, ActingFactorMatters) {
  BellConvention c = frozen_convention();
  c.acting_factor = ActingFactor::Second;
  EXPECT_FALSE(check_convention(c).satisfied());
  std::size_t first = 0;
  for (const auto& k : enumerate_conventions()) first += k.convention.acting_factor == ActingFactor::First;
  EXPECT_EQ(first, 32u);
  EXPECT_NE(describe(frozen_convention()).find("first"), std::string::npos);
}
