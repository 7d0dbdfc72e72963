// Round state machines for the six-qubit and four-qubit entanglement-swapping
// key distribution protocols.
//
// Qubits are named by their 1-based protocol numbers. Six-qubit round:
// Alice holds pairs (1,2) and (3,5), Bob holds (4,6), all in |00>. Qubit 2
// travels Alice->Bob and qubit 6 travels Bob->Alice. Alice's key is the Bell
// result on (1,3), her public result is on (5, received) and Bob's secret is
// on (received, 4). An eavesdropper owns (7,8), also prepared in |00>.
//
// Cross-walk to the alternative numbering used for the intercept attack:
// Alice's public pair (5,6) is (5,2) there and Bob's pair (2,4) is (7,4),
// because Eve forwards Alice's own qubit 2 back to her and sends her
// ancilla 7 to Bob.
//
// Four-qubit round: Alice holds (1,2) and (3,4) in |00> and sends 2 and 4
// to Bob; there is no public Bell result.
#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "esqkd/bell.hpp"
#include "esqkd/qstate.hpp"
#include "esqkd/random.hpp"

namespace esqkd {

enum class Protocol { Six, Four };

// P_I: six-qubit procedure (i) / four-qubit (I) "do nothing".
// P_II: Alice applies S (qubit 3 in the six-qubit round, qubit 1 in the
// four-qubit round) and Bob applies the matching S before his measurement.
enum class Procedure { P_I, P_II };

std::string_view protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view s);
// "(i)"/"(ii)" for the six-qubit protocol, "(I)"/"(II)" for the four-qubit one.
std::string procedure_label(Protocol protocol, Procedure procedure);

struct Qubit {
  int number;  // 1-based

  constexpr int index() const noexcept { return number - 1; }
  constexpr bool operator==(const Qubit&) const = default;
};

constexpr QubitPair as_pair(Qubit a, Qubit b) { return {a.index(), b.index()}; }

struct SixQubitWiring {
  static constexpr Qubit kAliceKeyHalf{1};    // paired with 2
  static constexpr Qubit kAliceToBob{2};
  static constexpr Qubit kAliceRotated{3};    // paired with 5, key pair with 1
  static constexpr Qubit kBobKept{4};         // paired with 6
  static constexpr Qubit kAlicePublicHalf{5};
  static constexpr Qubit kBobToAlice{6};
  static constexpr Qubit kEveForward{7};      // Eve's pair (7,8)
  static constexpr Qubit kEveKept{8};
  static constexpr int kHonestQubits = 6;
  static constexpr int kWithEavesdropper = 8;
};

struct FourQubitWiring {
  static constexpr Qubit kAliceRotated{1};  // paired with 2
  static constexpr Qubit kSentFirst{2};
  static constexpr Qubit kAliceKeyHalf{3};  // paired with 4
  static constexpr Qubit kSentSecond{4};
  static constexpr int kQubits = 4;
};

enum class RoundEvent {
  Prepared,
  Transmitted,
  Intercepted,
  AliceRotated,
  KeyMeasured,
  PublicMeasured,
  ProcedureAnnounced,
  BobRotated,
  BobMeasured,
  KeyInferred,
};

std::string_view event_name(RoundEvent e);

// What an eavesdropper can touch while qubits are in flight. The procedure
// choice is deliberately absent: it is announced only after interception.
struct RoundInProgress {
  Protocol protocol;
  StateVector<> state;
  // Qubits Bob measures: (received from Alice, Bob's own) for the six-qubit
  // round, (2, 4) for the four-qubit round.
  std::array<Qubit, 2> bob_pair;
  // Six-qubit only: (5, received from Bob).
  std::array<Qubit, 2> public_pair;
};

struct EveObservation {
  BellLabel secret;
  std::string transformation;
};

// Chooses measurement outcomes: by sampling for Monte Carlo rounds, by
// script for exhaustive branch enumeration.
class OutcomeSource {
 public:
  virtual ~OutcomeSource() = default;
  virtual int choose(const OutcomeProbabilities<double>& p) = 0;
};

class SampledOutcomes final : public OutcomeSource {
 public:
  explicit SampledOutcomes(RandomSource& rng) : rng_(rng) {}
  int choose(const OutcomeProbabilities<double>& p) override;

 private:
  RandomSource& rng_;
};

using Interceptor = std::function<EveObservation(RoundInProgress&, OutcomeSource&)>;

// Physics of one round without key inference.
struct RoundOutcome {
  Protocol protocol;
  Procedure procedure;
  BellLabel key;
  std::optional<BellLabel> public_result;
  BellLabel bob_secret;
  std::optional<EveObservation> eve;
  std::vector<RoundEvent> events;
  StateVector<> final_state;
};

RoundOutcome execute_six_qubit_round(const BellConvention& conv, Procedure procedure,
                                     const Interceptor& tap, OutcomeSource& outcomes);
RoundOutcome execute_four_qubit_round(const BellConvention& conv, Procedure procedure,
                                      const Interceptor& tap, OutcomeSource& outcomes);
RoundOutcome execute_round(const BellConvention& conv, Protocol protocol, Procedure procedure,
                           const Interceptor& tap, OutcomeSource& outcomes);

struct Branch {
  double probability;
  RoundOutcome outcome;
};

// Every measurement branch of a round with nonzero probability.
std::vector<Branch> enumerate_branches(const BellConvention& conv, Protocol protocol,
                                       Procedure procedure, const Interceptor& tap = {});

// (public result, Bob's secret) -> key. The four-qubit table ignores the
// public result.
class InferenceTable {
 public:
  InferenceTable(Protocol protocol, Procedure procedure) : protocol_(protocol), procedure_(procedure) {}

  Protocol protocol() const noexcept { return protocol_; }
  Procedure procedure() const noexcept { return procedure_; }

  std::optional<BellLabel> lookup(std::optional<BellLabel> public_result, BellLabel secret) const;
  // Throws DerivationFailure for an unreachable combination.
  BellLabel infer(std::optional<BellLabel> public_result, BellLabel secret) const;
  std::size_t size() const;
  // Throws AmbiguityError when a combination would map to a second key.
  void insert(std::optional<BellLabel> public_result, BellLabel secret, BellLabel key);

 private:
  std::size_t slot(std::optional<BellLabel> public_result, BellLabel secret) const;

  Protocol protocol_;
  Procedure procedure_;
  std::array<std::optional<BellLabel>, 16> entries_{};
};

InferenceTable derive_inference_table(const BellConvention& conv, Protocol protocol, Procedure procedure);

// A convention plus its derived inference tables; immutable and shareable.
class ProtocolContext {
 public:
  explicit ProtocolContext(BellConvention conv = frozen_convention());

  const BellConvention& convention() const noexcept { return conv_; }
  const InferenceTable& inference(Protocol protocol, Procedure procedure) const;

 private:
  BellConvention conv_;
  std::array<InferenceTable, 4> tables_;
};

struct EveRecord {
  BellLabel secret;
  std::string transformation;
  std::vector<BellLabel> inferred_keys;  // sorted, non-empty
};

struct RoundTranscript {
  Protocol protocol;
  Procedure procedure;
  BellLabel key;
  std::optional<BellLabel> public_result;
  BellLabel bob_secret;
  BellLabel bob_inferred_key;
  std::optional<EveRecord> eve_record;
  bool compared = false;
  bool detected = false;
  std::vector<RoundEvent> events;
};

// Publicly compares the round's key; detection means Bob's inference differs.
void mark_compared(RoundTranscript& t);

class Adversary;

RoundTranscript run_six_qubit_round(const ProtocolContext& ctx, Procedure procedure,
                                    const Adversary& adversary, RandomSource& rng);
RoundTranscript run_four_qubit_round(const ProtocolContext& ctx, Procedure procedure,
                                     const Adversary& adversary, RandomSource& rng);
RoundTranscript run_round(const ProtocolContext& ctx, Protocol protocol, Procedure procedure,
                          const Adversary& adversary, RandomSource& rng);

struct Table1Row {
  Procedure procedure;
  BellLabel key;
  BellLabel public_result;
  BellLabel secret;
  BellLabel inferred;

  bool operator==(const Table1Row&) const = default;
};

// Six-qubit rows with key 00, no eavesdropper, ordered by (procedure,
// secret, public).
std::vector<Table1Row> compute_table1(const ProtocolContext& ctx);
const std::vector<Table1Row>& expected_table1();
// Throws ReproductionFailure with a row-level diff on mismatch.
std::vector<Table1Row> reproduce_table1(const ProtocolContext& ctx);

std::string format_row(const Table1Row& row);

}  // namespace esqkd
