// Channel interception and eavesdropping strategies.
//
// Six-qubit intercept family: Eve keeps Alice's qubit 2 and Bob's qubit 6,
// sends her ancilla 7 to Bob, applies pre-unitaries to (6, 8), Bell-measures
// (6, 8) with result e, then applies forward_rotation followed by
// pauli_map[e] to qubit 2 and returns it to Alice in place of qubit 6.
// The plain intercept attack is the member with no rotations and the Pauli
// correction 00->I, 01->Z, 10->X, 11->Y.
//
// Four-qubit swap attack: Eve Bell-measures the in-flight pair (2, 4), in the
// plain basis when guessing P_I or with S on qubit 2 when guessing P_II, and
// forwards the collapsed pair.
#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esqkd/bell.hpp"
#include "esqkd/gates.hpp"
#include "esqkd/protocol.hpp"

namespace esqkd {

struct TailoredParams {
  std::array<GateName, 2> pre_unitaries = {GateName::I, GateName::I};  // on qubits 6 and 8
  GateName forward_rotation = GateName::I;                             // I or S, on qubit 2
  std::array<GateName, 4> pauli_map = kPauliFrame;                     // indexed by Eve's result

  bool operator==(const TailoredParams&) const = default;
};

inline constexpr TailoredParams kInterceptParams{};

// Committed output of derive_tailored_attack for the frozen convention.
const TailoredParams& frozen_tailored_params();

// Name of the gate applied to qubit 2: the Pauli alone, "S" alone, or e.g.
// "ZS" for S followed by Z.
std::string correction_name(const TailoredParams& params, BellLabel eve_secret);

enum class AttackKind { None, Zlg, Tailored, FourQubitSwap, Mixed };

std::string_view attack_name(AttackKind kind);
std::optional<AttackKind> parse_attack(std::string_view s);

struct AttackStrategy {
  AttackKind kind = AttackKind::None;
  TailoredParams tailored = frozen_tailored_params();
  double weight_zlg = 0.5;               // Mixed only
  std::optional<Procedure> guess;        // FourQubitSwap; fair coin per round when empty

  static AttackStrategy none() { return {}; }
  static AttackStrategy zlg();
  static AttackStrategy tailored_attack(TailoredParams params = frozen_tailored_params());
  static AttackStrategy four_qubit_swap(std::optional<Procedure> guess = std::nullopt);
  static AttackStrategy mixed(double weight_zlg = 0.5);

  // Throws InvalidArgument on out-of-range parameters.
  void validate() const;
  // Protocol the strategy attacks; empty for None.
  std::optional<Protocol> target() const;
};

// Attack operations on a round in progress. They throw WrongProtocol when
// applied to the other protocol and MalformedAdversary when the register
// lacks Eve's ancilla pair.
EveObservation tailored_attack(const BellConvention& conv, const TailoredParams& params,
                               RoundInProgress& round, OutcomeSource& outcomes);
EveObservation zlg_attack(const BellConvention& conv, RoundInProgress& round, OutcomeSource& outcomes);
EveObservation four_qubit_attack(const BellConvention& conv, RoundInProgress& round,
                                 OutcomeSource& outcomes, Procedure procedure_guess);

// One deterministic attack after per-round random choices are resolved.
struct ConcreteAttack {
  Protocol protocol;
  TailoredParams params;          // six-qubit
  Procedure guess = Procedure::P_I;  // four-qubit
  std::size_t component = 0;      // index into the owning Adversary's components
};

Interceptor make_interceptor(const BellConvention& conv, const ConcreteAttack& attack);

// (procedure, public result, Eve's secret) -> keys consistent with what Eve
// saw, built from exhaustive branch enumeration.
class EveInferenceTable {
 public:
  void add(Procedure procedure, std::optional<BellLabel> public_result, BellLabel secret, BellLabel key);
  std::vector<BellLabel> candidates(Procedure procedure, std::optional<BellLabel> public_result,
                                    BellLabel secret) const;

 private:
  static std::size_t slot(Procedure procedure, std::optional<BellLabel> public_result, BellLabel secret);
  std::array<std::uint8_t, 2 * 5 * 4> masks_{};
};

EveInferenceTable derive_eve_inference(const BellConvention& conv, const ConcreteAttack& attack);

class Adversary {
 public:
  Adversary() = default;
  Adversary(const ProtocolContext& ctx, AttackStrategy strategy);

  const AttackStrategy& strategy() const noexcept { return strategy_; }
  bool active() const noexcept { return strategy_.kind != AttackKind::None; }
  const std::vector<ConcreteAttack>& components() const noexcept { return components_; }
  // Probability that resolve() picks each component.
  std::vector<double> component_weights() const;

  // Draws the per-round choices (mixture component, procedure guess).
  const ConcreteAttack& resolve(RandomSource& rng) const;
  std::vector<BellLabel> infer(const ConcreteAttack& attack, Procedure procedure,
                               std::optional<BellLabel> public_result, BellLabel secret) const;

 private:
  AttackStrategy strategy_;
  std::vector<ConcreteAttack> components_;
  std::vector<EveInferenceTable> tables_;
};

struct AttackAnalysis {
  double detection_probability = 0;    // P(Bob's inferred key != key)
  double eve_informed_probability = 0; // P(Eve's candidates == {key})
  std::size_t min_candidates = 0;
  std::size_t max_candidates = 0;
  double total_probability = 0;
};

// Exhaustive branch analysis of one concrete attack (or none) under one
// procedure.
AttackAnalysis analyze_attack(const ProtocolContext& ctx, Protocol protocol, Procedure procedure,
                              const ConcreteAttack* attack);

// Exact per-compared-round detection probability of a strategy when Alice
// picks P_I with probability `procedure_policy`.
double expected_detection_rate(const ProtocolContext& ctx, Protocol protocol,
                               const AttackStrategy& strategy, double procedure_policy);

struct TailoredSearchResult {
  TailoredParams params;
  std::size_t candidates_examined = 0;  // including the hit
  std::size_t hits_with_pauli_corrections = 0;  // forward_rotation == I slice
  std::size_t candidates_per_slice = 6400;
  double detection_under_p1 = 0;
};

// Lexicographic search over (forward_rotation in {I, S}, pre_unitaries in
// {I,X,Y,Z,S}^2, pauli_map in {I,X,Y,Z}^4), gate order I, X, Y, Z, S. A hit
// leaves P_II rounds undetected with Eve holding the key and is detectable
// under P_I. Throws SearchFailure if nothing qualifies.
TailoredSearchResult derive_tailored_attack(const ProtocolContext& ctx);

struct Table2Row {
  Procedure procedure;
  BellLabel key;
  BellLabel public_result;
  BellLabel bob_secret;
  BellLabel bob_inferred;
  BellLabel eve_secret;
  std::string transformation;
  std::vector<BellLabel> eve_inferred;

  bool operator==(const Table2Row&) const = default;
};

// Intercept-attack rows with key 00 ordered by (procedure, Bob's secret,
// Eve's secret, public result).
std::vector<Table2Row> compute_table2(const ProtocolContext& ctx);
const std::vector<Table2Row>& expected_table2();
std::vector<Table2Row> reproduce_table2(const ProtocolContext& ctx);

std::string format_row(const Table2Row& row);
std::string format_candidates(const std::vector<BellLabel>& keys);

}  // namespace esqkd
