// Monte Carlo execution of many rounds and detection statistics.
//
// Round i of a simulation draws from RandomSource(derive_seed(master_seed, i))
// in this order: Alice's procedure, the adversary's per-round choice, the
// measurement outcomes, then whether the round is publicly compared. Curve
// experiment r at compared count n uses derive_seed(derive_seed(master_seed, n), r)
// as its master seed and compares every round.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "esqkd/adversary.hpp"
#include "esqkd/protocol.hpp"

namespace esqkd {

struct SimulationConfig {
  Protocol protocol = Protocol::Six;
  std::size_t rounds = 1000;
  AttackStrategy attack = AttackStrategy::none();
  double procedure_policy = 0.5;  // probability of P_I
  double test_fraction = 0.5;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;  // 0: hardware concurrency; results do not depend on it

  // Throws InvalidArgument.
  void validate() const;
};

struct Interval {
  double low = 0;
  double high = 0;
};

struct SimulationReport {
  std::size_t rounds_run = 0;
  std::size_t compared = 0;
  std::size_t detections = 0;
  double agreement_rate = 1;  // over all rounds
  bool detected_any = false;
  double empirical_detection_prob = 0;  // per compared round
  Interval ci95;
  double expected_detection_prob = 0;  // exact, per compared round
  double theoretical_detection_prob = 0;  // 1 - (3/4)^compared
  double expected_any_detection_prob = 0;  // 1 - (1 - expected)^compared
  double eve_key_information = 0;
  double key_bits_per_transmitted_qubit = 0;
};

using TranscriptSink = std::function<void(std::size_t round, const RoundTranscript&)>;

// Transcripts reach the sink in round order.
SimulationReport run_simulation(const ProtocolContext& ctx, const SimulationConfig& config,
                                const TranscriptSink& sink = {});

// 1 - (3/4)^n.
double detection_formula(std::size_t n);

struct CurvePoint {
  std::size_t n = 0;
  std::optional<std::size_t> bits;  // set by bits_tested_curve
  std::size_t repetitions = 0;
  double empirical = 0;
  double theoretical = 0;
  double ci_low = 0;
  double ci_high = 0;

  // |empirical - theoretical| <= 3 sqrt(theoretical (1 - theoretical) / repetitions).
  bool within_band() const;
};

inline constexpr std::size_t kMinRepetitions = 100;

// config.rounds and config.test_fraction are ignored: experiment n runs and
// compares exactly n rounds.
std::vector<CurvePoint> detection_curve(const ProtocolContext& ctx, const SimulationConfig& config,
                                        const std::vector<std::size_t>& n_values, std::size_t repetitions);
// N bits tested means N/2 compared rounds. Odd N throws InvalidArgument.
std::vector<CurvePoint> bits_tested_curve(const ProtocolContext& ctx, const SimulationConfig& config,
                                          const std::vector<std::size_t>& bit_counts,
                                          std::size_t repetitions);

// Runs body(i) for i in [0, count) on up to `threads` workers (0 means
// hardware concurrency). Rethrows the first exception.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads = 0);

}  // namespace esqkd
