#include "esqkd/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "esqkd/errors.hpp"

namespace esqkd {

namespace {

constexpr std::size_t kChunk = 4096;
constexpr double kZ95 = 1.959963984540054;

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

Interval normal_interval(double p, std::size_t trials) {
  if (trials == 0) return {0, 0};
  const double half = kZ95 * std::sqrt(p * (1.0 - p) / double(trials));
  return {std::max(0.0, p - half), std::min(1.0, p + half)};
}

RoundTranscript simulate_round(const ProtocolContext& ctx, const SimulationConfig& config,
                               const Adversary& adversary, std::uint64_t seed, bool force_compare) {
  RandomSource rng(seed);
  const Procedure procedure = rng.bernoulli(config.procedure_policy) ? Procedure::P_I : Procedure::P_II;
  RoundTranscript t = run_round(ctx, config.protocol, procedure, adversary, rng);
  const bool compare = rng.bernoulli(config.test_fraction);
  if (force_compare || compare) mark_compared(t);
  return t;
}

}  // namespace

void SimulationConfig::validate() const {
  if (rounds < 1) throw InvalidArgument("rounds must be at least 1");
  if (!is_probability(test_fraction)) throw InvalidArgument("test fraction must lie in [0, 1]");
  if (!is_probability(procedure_policy)) throw InvalidArgument("procedure probability must lie in [0, 1]");
  attack.validate();
  if (const auto target = attack.target(); target && *target != protocol) {
    throw InvalidArgument(fmt::format("attack '{}' does not apply to the {}-qubit protocol",
                                      attack_name(attack.kind), protocol_name(protocol)));
  }
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = unsigned(std::min<std::size_t>(threads, count));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> workers;
  for (unsigned w = 0; w < threads; ++w) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& w : workers) w.join();
  if (failure) std::rethrow_exception(failure);
}

SimulationReport run_simulation(const ProtocolContext& ctx, const SimulationConfig& config,
                                const TranscriptSink& sink) {
  config.validate();
  const Adversary adversary(ctx, config.attack);

  SimulationReport report;
  std::size_t agreed = 0;
  std::size_t eve_informed = 0;
  std::vector<RoundTranscript> chunk;
  for (std::size_t begin = 0; begin < config.rounds; begin += kChunk) {
    const std::size_t size = std::min(kChunk, config.rounds - begin);
    chunk.assign(size, RoundTranscript{});
    parallel_for(size, [&](std::size_t i) {
      chunk[i] = simulate_round(ctx, config, adversary, derive_seed(config.master_seed, begin + i), false);
    }, config.threads);
    for (std::size_t i = 0; i < size; ++i) {
      const RoundTranscript& t = chunk[i];
      if (sink) sink(begin + i, t);
      agreed += t.bob_inferred_key == t.key;
      if (t.eve_record && t.eve_record->inferred_keys == std::vector{t.key}) ++eve_informed;
      if (t.compared) {
        ++report.compared;
        report.detections += t.detected;
      }
    }
  }

  const double rounds = double(config.rounds);
  report.rounds_run = config.rounds;
  report.agreement_rate = double(agreed) / rounds;
  report.detected_any = report.detections > 0;
  report.empirical_detection_prob =
      report.compared ? double(report.detections) / double(report.compared) : 0.0;
  report.ci95 = normal_interval(report.empirical_detection_prob, report.compared);
  report.expected_detection_prob =
      expected_detection_rate(ctx, config.protocol, config.attack, config.procedure_policy);
  report.theoretical_detection_prob = detection_formula(report.compared);
  report.expected_any_detection_prob =
      1.0 - std::pow(1.0 - report.expected_detection_prob, double(report.compared));
  report.eve_key_information = double(eve_informed) / rounds;
  // Both protocols send two qubits per round and yield a two-bit key.
  report.key_bits_per_transmitted_qubit = (2.0 * rounds) / (2.0 * rounds);
  return report;
}

double detection_formula(std::size_t n) { return 1.0 - std::pow(0.75, double(n)); }

bool CurvePoint::within_band() const {
  const double band = 3.0 * std::sqrt(theoretical * (1.0 - theoretical) / double(repetitions));
  return std::abs(empirical - theoretical) <= band;
}

std::vector<CurvePoint> detection_curve(const ProtocolContext& ctx, const SimulationConfig& config,
                                        const std::vector<std::size_t>& n_values, std::size_t repetitions) {
  SimulationConfig checked = config;
  checked.rounds = 1;
  checked.validate();
  if (repetitions < kMinRepetitions) {
    throw InvalidArgument(fmt::format("repetitions must be at least {}", kMinRepetitions));
  }
  const Adversary adversary(ctx, config.attack);

  std::vector<CurvePoint> points;
  for (std::size_t n : n_values) {
    const std::uint64_t point_seed = derive_seed(config.master_seed, n);
    std::vector<char> detected(repetitions, 0);
    parallel_for(repetitions, [&](std::size_t r) {
      const std::uint64_t experiment = derive_seed(point_seed, r);
      for (std::size_t i = 0; i < n && !detected[r]; ++i) {
        detected[r] = simulate_round(ctx, config, adversary, derive_seed(experiment, i), true).detected;
      }
    }, config.threads);
    CurvePoint p;
    p.n = n;
    p.repetitions = repetitions;
    p.empirical = double(std::count(detected.begin(), detected.end(), 1)) / double(repetitions);
    p.theoretical = detection_formula(n);
    const Interval ci = normal_interval(p.empirical, repetitions);
    p.ci_low = ci.low;
    p.ci_high = ci.high;
    points.push_back(p);
  }
  return points;
}

std::vector<CurvePoint> bits_tested_curve(const ProtocolContext& ctx, const SimulationConfig& config,
                                          const std::vector<std::size_t>& bit_counts,
                                          std::size_t repetitions) {
  std::vector<std::size_t> n_values;
  for (std::size_t bits : bit_counts) {
    if (bits % 2 != 0) throw InvalidArgument(fmt::format("bit count {} is odd", bits));
    n_values.push_back(bits / 2);
  }
  auto points = detection_curve(ctx, config, n_values, repetitions);
  for (std::size_t i = 0; i < points.size(); ++i) points[i].bits = bit_counts[i];
  return points;
}

}  // namespace esqkd
