#include "esqkd/protocol.hpp"

#include <algorithm>
#include <span>
#include <tuple>
#include <utility>

#include <fmt/format.h>

#include "detail/row_diff.hpp"
#include "esqkd/adversary.hpp"
#include "esqkd/errors.hpp"
#include "esqkd/gates.hpp"

namespace esqkd {

namespace {

const BellLabel kLabel00(0);

struct Measured {
  BellLabel label;
  StateVector<> state;
};

Measured measure_pair(const StateVector<>& state, const PairBasis<double>& basis, QubitPair pair,
                      OutcomeSource& outcomes) {
  const auto p = basis_probabilities(state, basis, pair);
  const int k = outcomes.choose(p);
  return {BellLabel(k), project(state, basis, pair, k, p).collapsed};
}

StateVector<> rotate(const StateVector<>& state, Qubit q) {
  return apply_gate(state, gate_matrix(GateName::S), q.index());
}

void check_tampered_round(const RoundInProgress& round, int expected_qubits) {
  if (round.state.num_qubits() != expected_qubits) {
    throw MalformedAdversary("adversary changed the register size");
  }
  if (std::abs(round.state.norm() - 1.0) >= kAlgebraTol) {
    throw MalformedAdversary("adversary returned an unnormalized state");
  }
  for (const auto& pair : {round.bob_pair, round.public_pair}) {
    for (Qubit q : pair) {
      if (q.number < 1 || q.number > expected_qubits) {
        throw MalformedAdversary("adversary delivered a qubit outside the register");
      }
    }
    if (pair[0] == pair[1]) throw MalformedAdversary("adversary delivered a duplicated qubit");
  }
}

// Replays forced outcomes; an outcome of vanishing probability prunes the
// whole subtree.
struct BranchPruned {
  std::size_t position;
};

class ScriptedOutcomes final : public OutcomeSource {
 public:
  explicit ScriptedOutcomes(std::span<const int> script) : script_(script) {}

  int choose(const OutcomeProbabilities<double>& p) override {
    if (position_ >= script_.size()) throw DerivationFailure("round exceeded the enumeration depth");
    const int k = script_[position_];
    if (p[k] < kDegenerateProb) throw BranchPruned{position_};
    probability_ *= p[k];
    ++position_;
    return k;
  }

  std::size_t used() const noexcept { return position_; }
  double probability() const noexcept { return probability_; }

 private:
  std::span<const int> script_;
  std::size_t position_ = 0;
  double probability_ = 1.0;
};

// Advances `digits` to the next script that differs at or before `position`.
bool advance(std::vector<int>& digits, std::size_t position) {
  std::fill(digits.begin() + std::ptrdiff_t(position) + 1, digits.end(), 0);
  for (std::size_t i = position + 1; i-- > 0;) {
    if (++digits[i] < 4) return true;
    digits[i] = 0;
  }
  return false;
}

}  // namespace

std::string_view protocol_name(Protocol p) { return p == Protocol::Six ? "six" : "four"; }

std::optional<Protocol> parse_protocol(std::string_view s) {
  if (s == "six") return Protocol::Six;
  if (s == "four") return Protocol::Four;
  return std::nullopt;
}

std::string procedure_label(Protocol protocol, Procedure procedure) {
  const bool first = procedure == Procedure::P_I;
  if (protocol == Protocol::Six) return first ? "(i)" : "(ii)";
  return first ? "(I)" : "(II)";
}

std::string_view event_name(RoundEvent e) {
  switch (e) {
    case RoundEvent::Prepared: return "prepared";
    case RoundEvent::Transmitted: return "transmitted";
    case RoundEvent::Intercepted: return "intercepted";
    case RoundEvent::AliceRotated: return "alice_rotated";
    case RoundEvent::KeyMeasured: return "key_measured";
    case RoundEvent::PublicMeasured: return "public_measured";
    case RoundEvent::ProcedureAnnounced: return "procedure_announced";
    case RoundEvent::BobRotated: return "bob_rotated";
    case RoundEvent::BobMeasured: return "bob_measured";
    case RoundEvent::KeyInferred: return "key_inferred";
  }
  return "?";
}

int SampledOutcomes::choose(const OutcomeProbabilities<double>& p) {
  return sample_outcome(p, rng_.uniform());
}

RoundOutcome execute_six_qubit_round(const BellConvention& conv, Procedure procedure,
                                     const Interceptor& tap, OutcomeSource& outcomes) {
  using W = SixQubitWiring;
  const PairBasis<double> basis = conv.basis();
  const PairVector<double> phi = conv.state(kLabel00);
  const int n = tap ? W::kWithEavesdropper : W::kHonestQubits;

  std::vector<std::pair<QubitPair, PairVector<double>>> pairs = {
      {as_pair(W::kAliceKeyHalf, W::kAliceToBob), phi},
      {as_pair(W::kAliceRotated, W::kAlicePublicHalf), phi},
      {as_pair(W::kBobKept, W::kBobToAlice), phi}};
  if (tap) pairs.push_back({as_pair(W::kEveForward, W::kEveKept), phi});

  RoundOutcome out{Protocol::Six, procedure, {}, {}, {}, {}, {}, product_of_pairs<double>(n, pairs)};
  out.events.push_back(RoundEvent::Prepared);

  RoundInProgress round{Protocol::Six, std::move(out.final_state),
                        {W::kAliceToBob, W::kBobKept},
                        {W::kAlicePublicHalf, W::kBobToAlice}};
  out.events.push_back(RoundEvent::Transmitted);
  if (tap) {
    out.eve = tap(round, outcomes);
    check_tampered_round(round, n);
    out.events.push_back(RoundEvent::Intercepted);
  }

  StateVector<> state = std::move(round.state);
  if (procedure == Procedure::P_II) {
    state = rotate(state, W::kAliceRotated);
    out.events.push_back(RoundEvent::AliceRotated);
  }
  auto key = measure_pair(state, basis, as_pair(W::kAliceKeyHalf, W::kAliceRotated), outcomes);
  out.key = key.label;
  out.events.push_back(RoundEvent::KeyMeasured);

  auto pub = measure_pair(key.state, basis, as_pair(round.public_pair[0], round.public_pair[1]), outcomes);
  out.public_result = pub.label;
  out.events.push_back(RoundEvent::PublicMeasured);
  out.events.push_back(RoundEvent::ProcedureAnnounced);

  state = std::move(pub.state);
  if (procedure == Procedure::P_II) {
    state = rotate(state, W::kBobKept);
    out.events.push_back(RoundEvent::BobRotated);
  }
  auto bob = measure_pair(state, basis, as_pair(round.bob_pair[0], round.bob_pair[1]), outcomes);
  out.bob_secret = bob.label;
  out.events.push_back(RoundEvent::BobMeasured);
  out.final_state = std::move(bob.state);
  return out;
}

RoundOutcome execute_four_qubit_round(const BellConvention& conv, Procedure procedure,
                                      const Interceptor& tap, OutcomeSource& outcomes) {
  using W = FourQubitWiring;
  const PairBasis<double> basis = conv.basis();
  const PairVector<double> phi = conv.state(kLabel00);
  const std::array<std::pair<QubitPair, PairVector<double>>, 2> pairs = {
      std::pair{as_pair(W::kAliceRotated, W::kSentFirst), phi},
      std::pair{as_pair(W::kAliceKeyHalf, W::kSentSecond), phi}};

  RoundOutcome out{Protocol::Four, procedure, {}, {}, {}, {}, {},
                   product_of_pairs<double>(W::kQubits, pairs)};
  out.events.push_back(RoundEvent::Prepared);

  RoundInProgress round{Protocol::Four, std::move(out.final_state),
                        {W::kSentFirst, W::kSentSecond},
                        {W::kAliceRotated, W::kAliceKeyHalf}};
  out.events.push_back(RoundEvent::Transmitted);
  if (tap) {
    out.eve = tap(round, outcomes);
    check_tampered_round(round, W::kQubits);
    out.events.push_back(RoundEvent::Intercepted);
  }

  StateVector<> state = std::move(round.state);
  if (procedure == Procedure::P_II) {
    state = rotate(state, W::kAliceRotated);
    out.events.push_back(RoundEvent::AliceRotated);
  }
  auto key = measure_pair(state, basis, as_pair(W::kAliceRotated, W::kAliceKeyHalf), outcomes);
  out.key = key.label;
  out.events.push_back(RoundEvent::KeyMeasured);
  out.events.push_back(RoundEvent::ProcedureAnnounced);

  state = std::move(key.state);
  if (procedure == Procedure::P_II) {
    state = rotate(state, round.bob_pair[0]);
    out.events.push_back(RoundEvent::BobRotated);
  }
  auto bob = measure_pair(state, basis, as_pair(round.bob_pair[0], round.bob_pair[1]), outcomes);
  out.bob_secret = bob.label;
  out.events.push_back(RoundEvent::BobMeasured);
  out.final_state = std::move(bob.state);
  return out;
}

RoundOutcome execute_round(const BellConvention& conv, Protocol protocol, Procedure procedure,
                           const Interceptor& tap, OutcomeSource& outcomes) {
  return protocol == Protocol::Six ? execute_six_qubit_round(conv, procedure, tap, outcomes)
                                   : execute_four_qubit_round(conv, procedure, tap, outcomes);
}

std::vector<Branch> enumerate_branches(const BellConvention& conv, Protocol protocol,
                                       Procedure procedure, const Interceptor& tap) {
  constexpr std::size_t kMaxMeasurements = 4;
  std::vector<Branch> branches;
  std::vector<int> digits(kMaxMeasurements, 0);
  for (bool more = true; more;) {
    ScriptedOutcomes script(digits);
    std::size_t last;
    try {
      auto outcome = execute_round(conv, protocol, procedure, tap, script);
      branches.push_back({script.probability(), std::move(outcome)});
      last = script.used() - 1;
    } catch (const BranchPruned& pruned) {
      last = pruned.position;
    }
    more = advance(digits, last);
  }
  return branches;
}

std::size_t InferenceTable::slot(std::optional<BellLabel> public_result, BellLabel secret) const {
  const int pub = protocol_ == Protocol::Six && public_result ? public_result->value() : 0;
  return std::size_t(pub) * 4 + std::size_t(secret.value());
}

std::optional<BellLabel> InferenceTable::lookup(std::optional<BellLabel> public_result,
                                                BellLabel secret) const {
  if (protocol_ == Protocol::Six && !public_result) return std::nullopt;
  return entries_[slot(public_result, secret)];
}

BellLabel InferenceTable::infer(std::optional<BellLabel> public_result, BellLabel secret) const {
  const auto key = lookup(public_result, secret);
  if (!key) {
    throw DerivationFailure(fmt::format("no inference entry for secret {}", secret.str()));
  }
  return *key;
}

std::size_t InferenceTable::size() const {
  return std::size_t(std::count_if(entries_.begin(), entries_.end(),
                                   [](const auto& e) { return e.has_value(); }));
}

void InferenceTable::insert(std::optional<BellLabel> public_result, BellLabel secret, BellLabel key) {
  if (protocol_ == Protocol::Six && !public_result) {
    throw InvalidArgument("six-qubit inference needs the public result");
  }
  auto& entry = entries_[slot(public_result, secret)];
  if (entry && *entry != key) {
    throw AmbiguityError(fmt::format("secret {} is consistent with keys {} and {}", secret.str(),
                                     entry->str(), key.str()));
  }
  entry = key;
}

InferenceTable derive_inference_table(const BellConvention& conv, Protocol protocol, Procedure procedure) {
  InferenceTable table(protocol, procedure);
  for (const auto& b : enumerate_branches(conv, protocol, procedure)) {
    table.insert(b.outcome.public_result, b.outcome.bob_secret, b.outcome.key);
  }
  return table;
}

ProtocolContext::ProtocolContext(BellConvention conv)
    : conv_(conv),
      tables_{derive_inference_table(conv, Protocol::Six, Procedure::P_I),
              derive_inference_table(conv, Protocol::Six, Procedure::P_II),
              derive_inference_table(conv, Protocol::Four, Procedure::P_I),
              derive_inference_table(conv, Protocol::Four, Procedure::P_II)} {}

const InferenceTable& ProtocolContext::inference(Protocol protocol, Procedure procedure) const {
  return tables_[(protocol == Protocol::Six ? 0 : 2) + (procedure == Procedure::P_I ? 0 : 1)];
}

void mark_compared(RoundTranscript& t) {
  t.compared = true;
  t.detected = t.bob_inferred_key != t.key;
}

RoundTranscript run_round(const ProtocolContext& ctx, Protocol protocol, Procedure procedure,
                          const Adversary& adversary, RandomSource& rng) {
  if (const auto target = adversary.strategy().target(); target && *target != protocol) {
    throw WrongProtocol(fmt::format("attack '{}' does not apply to the {}-qubit protocol",
                                    attack_name(adversary.strategy().kind), protocol_name(protocol)));
  }
  const ConcreteAttack* attack = adversary.active() ? &adversary.resolve(rng) : nullptr;
  const Interceptor tap = attack ? make_interceptor(ctx.convention(), *attack) : Interceptor{};

  SampledOutcomes outcomes(rng);
  RoundOutcome raw = execute_round(ctx.convention(), protocol, procedure, tap, outcomes);

  RoundTranscript t;
  t.protocol = protocol;
  t.procedure = procedure;
  t.key = raw.key;
  t.public_result = raw.public_result;
  t.bob_secret = raw.bob_secret;
  t.bob_inferred_key = ctx.inference(protocol, procedure).infer(raw.public_result, raw.bob_secret);
  t.events = std::move(raw.events);
  t.events.push_back(RoundEvent::KeyInferred);
  if (attack && raw.eve) {
    t.eve_record = EveRecord{raw.eve->secret, raw.eve->transformation,
                             adversary.infer(*attack, procedure, raw.public_result, raw.eve->secret)};
  }
  return t;
}

RoundTranscript run_six_qubit_round(const ProtocolContext& ctx, Procedure procedure,
                                    const Adversary& adversary, RandomSource& rng) {
  return run_round(ctx, Protocol::Six, procedure, adversary, rng);
}

RoundTranscript run_four_qubit_round(const ProtocolContext& ctx, Procedure procedure,
                                     const Adversary& adversary, RandomSource& rng) {
  return run_round(ctx, Protocol::Four, procedure, adversary, rng);
}

std::vector<Table1Row> compute_table1(const ProtocolContext& ctx) {
  std::vector<Table1Row> rows;
  for (Procedure procedure : {Procedure::P_I, Procedure::P_II}) {
    const auto& table = ctx.inference(Protocol::Six, procedure);
    for (const auto& b : enumerate_branches(ctx.convention(), Protocol::Six, procedure)) {
      if (b.outcome.key != kLabel00) continue;
      rows.push_back({procedure, b.outcome.key, *b.outcome.public_result, b.outcome.bob_secret,
                      table.infer(b.outcome.public_result, b.outcome.bob_secret)});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Table1Row& x, const Table1Row& y) {
    return std::tie(x.procedure, x.secret, x.public_result) <
           std::tie(y.procedure, y.secret, y.public_result);
  });
  return rows;
}

const std::vector<Table1Row>& expected_table1() {
  static const std::vector<Table1Row> rows = [] {
    const auto L = [](const char* s) { return *BellLabel::parse(s); };
    std::vector<Table1Row> r;
    const char* body[8][4] = {{"00", "00", "00", "00"}, {"00", "01", "01", "00"},
                              {"00", "10", "10", "00"}, {"00", "11", "11", "00"},
                              {"00", "00", "00", "00"}, {"00", "10", "01", "00"},
                              {"00", "01", "10", "00"}, {"00", "11", "11", "00"}};
    for (int i = 0; i < 8; ++i) {
      r.push_back({i < 4 ? Procedure::P_I : Procedure::P_II, L(body[i][0]), L(body[i][1]),
                   L(body[i][2]), L(body[i][3])});
    }
    return r;
  }();
  return rows;
}

std::string format_row(const Table1Row& row) {
  return fmt::format("{} {} {} {} {}", procedure_label(Protocol::Six, row.procedure), row.key.str(),
                     row.public_result.str(), row.secret.str(), row.inferred.str());
}

std::vector<Table1Row> reproduce_table1(const ProtocolContext& ctx) {
  auto rows = compute_table1(ctx);
  auto diff = detail::row_diff(expected_table1(), rows);
  if (!diff.empty()) throw ReproductionFailure("table1 reproduction mismatch", std::move(diff));
  return rows;
}

}  // namespace esqkd
