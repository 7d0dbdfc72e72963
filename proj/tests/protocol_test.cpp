#include <gtest/gtest.h>

#include "esqkd/adversary.hpp"
#include "esqkd/errors.hpp"
#include "esqkd/protocol.hpp"
#include "oracle.hpp"

using namespace esqkd;

namespace {

const ProtocolContext& ctx() {
  static const ProtocolContext c;
  return c;
}

constexpr Procedure kProcedures[] = {Procedure::P_I, Procedure::P_II};
constexpr Protocol kProtocols[] = {Protocol::Six, Protocol::Four};

}  // namespace

TEST(Branches, ProbabilitiesSumToOne) {
  for (Protocol protocol : kProtocols) {
    for (Procedure procedure : kProcedures) {
      double total = 0;
      const auto branches = enumerate_branches(ctx().convention(), protocol, procedure);
      for (const auto& b : branches) total += b.probability;
      EXPECT_NEAR(total, 1.0, kMeasureTol);
      // Six-qubit: 4 keys x 4 public x 1 secret; four-qubit: 4 keys x 1.
      EXPECT_EQ(branches.size(), protocol == Protocol::Six ? 16u : 4u);
    }
  }
}

TEST(Branches, NoEavesdropperBobAlwaysRecoversKey) {
  for (Protocol protocol : kProtocols) {
    for (Procedure procedure : kProcedures) {
      const auto& table = ctx().inference(protocol, procedure);
      for (const auto& b : enumerate_branches(ctx().convention(), protocol, procedure)) {
        EXPECT_EQ(table.infer(b.outcome.public_result, b.outcome.bob_secret), b.outcome.key);
      }
    }
  }
}

TEST(Branches, SixQubitMatchesBruteForceDistribution) {
  for (Procedure procedure : kProcedures) {
    const auto ref = oracle::six_qubit_honest(procedure == Procedure::P_II);
    std::array<std::array<std::array<double, 4>, 4>, 4> got{};
    for (const auto& b : enumerate_branches(ctx().convention(), Protocol::Six, procedure)) {
      got[b.outcome.key.value()][b.outcome.public_result->value()][b.outcome.bob_secret.value()] += b.probability;
    }
    for (int k = 0; k < 4; ++k)
      for (int p = 0; p < 4; ++p)
        for (int s = 0; s < 4; ++s) EXPECT_NEAR(got[k][p][s], ref[k][p][s], kMeasureTol);
  }
}

TEST(Inference, TableSizes) {
  EXPECT_EQ(ctx().inference(Protocol::Six, Procedure::P_I).size(), 16u);
  EXPECT_EQ(ctx().inference(Protocol::Six, Procedure::P_II).size(), 16u);
  EXPECT_EQ(ctx().inference(Protocol::Four, Procedure::P_I).size(), 4u);
  EXPECT_FALSE(ctx().inference(Protocol::Six, Procedure::P_I).lookup(std::nullopt, BellLabel(0)).has_value());
}

TEST(Inference, ConflictingEntryIsAmbiguous) {
  InferenceTable t(Protocol::Six, Procedure::P_I);
  t.insert(BellLabel(0), BellLabel(1), BellLabel(2));
  EXPECT_NO_THROW(t.insert(BellLabel(0), BellLabel(1), BellLabel(2)));
  EXPECT_THROW(t.insert(BellLabel(0), BellLabel(1), BellLabel(3)), AmbiguityError);
  EXPECT_THROW(t.infer(BellLabel(3), BellLabel(3)), DerivationFailure);
}

// Reference rows versus an independent amplitude computation: the oracle
// reaches the same (public, secret) pairs with key 00 and the same inference.
TEST(Table1, ReproducesReferenceRows) {
  const auto rows = reproduce_table1(ctx());
  ASSERT_EQ(rows.size(), 8u);
  for (Procedure procedure : kProcedures) {
    const auto ref = oracle::six_qubit_honest(procedure == Procedure::P_II);
    std::size_t reachable = 0;
    for (int p = 0; p < 4; ++p) {
      for (int s = 0; s < 4; ++s) {
        if (ref[0][p][s] < kMeasureTol) continue;
        ++reachable;
        bool found = false;
        for (const auto& r : rows) {
          if (r.procedure == procedure && r.public_result.value() == p && r.secret.value() == s) {
            found = true;
            EXPECT_EQ(r.inferred, BellLabel(0));
          }
        }
        EXPECT_TRUE(found);
      }
    }
    EXPECT_EQ(reachable, 4u);
  }
}

TEST(Table1, AlternativeConventionsAreDiffed) {
  const auto all = enumerate_conventions();
  std::size_t reproducing = 0;
  for (const auto& c : all) {
    const ProtocolContext other(c.convention);
    try {
      reproduce_table1(other);
      ++reproducing;
    } catch (const ReproductionFailure& e) {
      EXPECT_FALSE(e.diff().empty());
    }
  }
  EXPECT_GE(reproducing, 1u);
}

TEST(Rounds, EventSequence) {
  RandomSource rng(5);
  const Adversary none;
  const auto t = run_round(ctx(), Protocol::Six, Procedure::P_II, none, rng);
  const std::vector<RoundEvent> want = {RoundEvent::Prepared,      RoundEvent::Transmitted,
                                        RoundEvent::AliceRotated,  RoundEvent::KeyMeasured,
                                        RoundEvent::PublicMeasured, RoundEvent::ProcedureAnnounced,
                                        RoundEvent::BobRotated,    RoundEvent::BobMeasured,
                                        RoundEvent::KeyInferred};
  EXPECT_EQ(t.events, want);
  EXPECT_FALSE(t.eve_record.has_value());
  EXPECT_FALSE(t.compared);
}

TEST(Rounds, InterceptAddsEvent) {
  RandomSource rng(6);
  const Adversary eve(ctx(), AttackStrategy::zlg());
  const auto t = run_round(ctx(), Protocol::Six, Procedure::P_I, eve, rng);
  ASSERT_GE(t.events.size(), 3u);
  EXPECT_EQ(t.events[2], RoundEvent::Intercepted);
  ASSERT_TRUE(t.eve_record.has_value());
  EXPECT_EQ(t.eve_record->inferred_keys, std::vector{t.key});
}

TEST(Rounds, WrongProtocolRejected) {
  RandomSource rng(7);
  const Adversary six(ctx(), AttackStrategy::zlg());
  EXPECT_THROW(run_round(ctx(), Protocol::Four, Procedure::P_I, six, rng), WrongProtocol);
  const Adversary four(ctx(), AttackStrategy::four_qubit_swap());
  EXPECT_THROW(run_round(ctx(), Protocol::Six, Procedure::P_I, four, rng), WrongProtocol);
}

TEST(Rounds, SameSeedSameTranscript) {
  const Adversary eve(ctx(), AttackStrategy::mixed());
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RandomSource a(seed), b(seed);
    const auto x = run_round(ctx(), Protocol::Six, Procedure::P_II, eve, a);
    const auto y = run_round(ctx(), Protocol::Six, Procedure::P_II, eve, b);
    EXPECT_EQ(x.key, y.key);
    EXPECT_EQ(x.bob_secret, y.bob_secret);
    EXPECT_EQ(x.eve_record->secret, y.eve_record->secret);
  }
}

TEST(Rounds, MarkComparedDetectsMismatch) {
  RoundTranscript t{};
  t.key = BellLabel(0);
  t.bob_inferred_key = BellLabel(3);
  mark_compared(t);
  EXPECT_TRUE(t.compared);
  EXPECT_TRUE(t.detected);
}

TEST(Labels, ProcedureNames) {
  EXPECT_EQ(procedure_label(Protocol::Six, Procedure::P_II), "(ii)");
  EXPECT_EQ(procedure_label(Protocol::Four, Procedure::P_I), "(I)");
  EXPECT_EQ(parse_protocol("four"), Protocol::Four);
  EXPECT_FALSE(parse_protocol("five").has_value());
}
