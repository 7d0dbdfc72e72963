#include <cmath>

#include <gtest/gtest.h>

#include "esqkd/errors.hpp"
#include "esqkd/harness.hpp"
#include "esqkd/serialize.hpp"

using namespace esqkd;

namespace {

const ProtocolContext& ctx() {
  static const ProtocolContext c;
  return c;
}

SimulationConfig config(Protocol protocol, AttackStrategy attack, std::size_t rounds, std::uint64_t seed) {
  SimulationConfig c;
  c.protocol = protocol;
  c.attack = std::move(attack);
  c.rounds = rounds;
  c.master_seed = seed;
  return c;
}

double sigma3(double p, std::size_t n) { return 3.0 * std::sqrt(p * (1.0 - p) / double(n)); }

}  // namespace

TEST(Config, Validation) {
  auto c = config(Protocol::Six, AttackStrategy::none(), 10, 0);
  EXPECT_NO_THROW(c.validate());
  c.rounds = 0;
  EXPECT_THROW(run_simulation(ctx(), c), InvalidArgument);
  c.rounds = 10;
  c.test_fraction = -0.1;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.test_fraction = 0.5;
  c.procedure_policy = 1.01;
  EXPECT_THROW(c.validate(), InvalidArgument);
  c.procedure_policy = 0.5;
  c.attack = AttackStrategy::four_qubit_swap();
  EXPECT_THROW(c.validate(), InvalidArgument);
}

TEST(Simulation, NoAdversaryNeverDetected) {
  for (Protocol protocol : {Protocol::Six, Protocol::Four}) {
    for (double policy : {0.0, 0.5, 1.0}) {
      for (double fraction : {0.0, 0.3, 1.0}) {
        auto c = config(protocol, AttackStrategy::none(), 500, 17);
        c.procedure_policy = policy;
        c.test_fraction = fraction;
        const auto r = run_simulation(ctx(), c);
        EXPECT_EQ(r.detections, 0u);
        EXPECT_FALSE(r.detected_any);
        EXPECT_DOUBLE_EQ(r.agreement_rate, 1.0);
        EXPECT_DOUBLE_EQ(r.eve_key_information, 0.0);
        EXPECT_LE(r.compared, r.rounds_run);
      }
    }
  }
}

TEST(Simulation, MatchedInterceptIsInvisible) {
  auto c = config(Protocol::Six, AttackStrategy::zlg(), 2000, 3);
  c.procedure_policy = 1.0;
  const auto r = run_simulation(ctx(), c);
  EXPECT_EQ(r.detections, 0u);
  EXPECT_DOUBLE_EQ(r.eve_key_information, 1.0);
}

TEST(Simulation, InterceptRateNearQuarter) {
  auto c = config(Protocol::Six, AttackStrategy::zlg(), 20000, 4);
  c.test_fraction = 1.0;
  const auto r = run_simulation(ctx(), c);
  EXPECT_EQ(r.compared, 20000u);
  EXPECT_NEAR(r.empirical_detection_prob, 0.25, sigma3(0.25, r.compared));
  EXPECT_NEAR(r.expected_detection_prob, 0.25, kMeasureTol);
  EXPECT_LE(r.ci95.low, r.empirical_detection_prob);
  EXPECT_GE(r.ci95.high, r.empirical_detection_prob);
}

TEST(Simulation, FourQubitSwapRateNearQuarter) {
  const auto r = run_simulation(ctx(), config(Protocol::Four, AttackStrategy::four_qubit_swap(), 10000, 3));
  EXPECT_NEAR(r.empirical_detection_prob, 0.25, sigma3(0.25, r.compared));
  EXPECT_NEAR(r.eve_key_information, 0.5, sigma3(0.5, r.rounds_run));
}

TEST(Simulation, ReportFieldsInRange) {
  const auto r = run_simulation(ctx(), config(Protocol::Six, AttackStrategy::mixed(), 300, 9));
  for (double x : {r.agreement_rate, r.empirical_detection_prob, r.theoretical_detection_prob,
                   r.expected_any_detection_prob, r.eve_key_information, r.ci95.low, r.ci95.high}) {
    EXPECT_GE(x, 0.0);
    EXPECT_LE(x, 1.0);
  }
  EXPECT_DOUBLE_EQ(r.key_bits_per_transmitted_qubit, 1.0);
  EXPECT_DOUBLE_EQ(r.theoretical_detection_prob, detection_formula(r.compared));
}

TEST(Simulation, DeterministicAcrossThreadCounts) {
  auto c = config(Protocol::Six, AttackStrategy::mixed(), 9000, 42);
  std::vector<std::string> serial_lines, threaded_lines;
  c.threads = 1;
  const auto a = run_simulation(ctx(), c, [&](std::size_t i, const RoundTranscript& t) {
    serial_lines.push_back(transcript_csv_line(i, t));
  });
  c.threads = 4;
  const auto b = run_simulation(ctx(), c, [&](std::size_t i, const RoundTranscript& t) {
    threaded_lines.push_back(transcript_csv_line(i, t));
  });
  EXPECT_EQ(to_json(a).dump(), to_json(b).dump());
  EXPECT_EQ(serial_lines, threaded_lines);
  c.master_seed = 43;
  EXPECT_NE(to_json(run_simulation(ctx(), c)).dump(), to_json(a).dump());
}

TEST(Curve, FormulaValues) {
  EXPECT_DOUBLE_EQ(detection_formula(0), 0.0);
  EXPECT_DOUBLE_EQ(detection_formula(1), 0.25);
  EXPECT_NEAR(detection_formula(4), 175.0 / 256.0, 1e-15);
}

TEST(Curve, ZeroComparedNeverDetects) {
  const auto c = config(Protocol::Six, AttackStrategy::mixed(), 1, 1);
  const auto pts = detection_curve(ctx(), c, {0, 1}, 200);
  EXPECT_DOUBLE_EQ(pts[0].empirical, 0.0);
  EXPECT_DOUBLE_EQ(pts[0].theoretical, 0.0);
  EXPECT_DOUBLE_EQ(pts[1].theoretical, 0.25);
}

TEST(Curve, MixedWithinBand) {
  auto c = config(Protocol::Six, AttackStrategy::mixed(), 1, 7);
  for (const auto& p : detection_curve(ctx(), c, {1, 2, 4, 8}, 4000)) {
    EXPECT_TRUE(p.within_band()) << "n=" << p.n << " empirical " << p.empirical;
    EXPECT_LE(p.ci_low, p.empirical);
    EXPECT_GE(p.ci_high, p.empirical);
  }
}

TEST(Curve, BitsForm) {
  const auto c = config(Protocol::Six, AttackStrategy::mixed(), 1, 7);
  const auto pts = bits_tested_curve(ctx(), c, {0, 2, 8}, 200);
  EXPECT_DOUBLE_EQ(pts[0].theoretical, 0.0);
  EXPECT_DOUBLE_EQ(pts[1].theoretical, 0.25);
  EXPECT_NEAR(pts[2].theoretical, 0.68359375, 1e-15);
  EXPECT_EQ(pts[2].bits, 8u);
  EXPECT_EQ(pts[2].n, 4u);
  EXPECT_THROW(bits_tested_curve(ctx(), c, {3}, 200), InvalidArgument);
  EXPECT_THROW(detection_curve(ctx(), c, {1}, 99), InvalidArgument);
}

TEST(Curve, SerialAndThreadedAgree) {
  auto c = config(Protocol::Six, AttackStrategy::mixed(), 1, 11);
  c.threads = 1;
  const auto a = detection_curve(ctx(), c, {3}, 500);
  c.threads = 3;
  const auto b = detection_curve(ctx(), c, {3}, 500);
  EXPECT_EQ(a[0].empirical, b[0].empirical);
}

TEST(ParallelFor, PropagatesException) {
  EXPECT_THROW(parallel_for(100, [](std::size_t i) { if (i == 37) throw InvalidArgument("x"); }, 4),
               InvalidArgument);
  std::vector<int> hit(1000, 0);
  parallel_for(hit.size(), [&](std::size_t i) { hit[i] = 1; }, 3);
  EXPECT_EQ(std::count(hit.begin(), hit.end(), 1), 1000);
}
