#include "esqkd/adversary.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <tuple>
#include <utility>

#include <fmt/format.h>

#include "detail/row_diff.hpp"
#include "esqkd/errors.hpp"

namespace esqkd {

namespace {

const BellLabel kLabel00(0);

// Predicates use exact branch arithmetic; this only absorbs rounding.
constexpr double kZeroProbability = 1e-10;

}  // namespace

const TailoredParams& frozen_tailored_params() {
  static const TailoredParams params{{GateName::I, GateName::S}, GateName::S, kPauliFrame};
  return params;
}

std::string correction_name(const TailoredParams& params, BellLabel eve_secret) {
  const GateName pauli = params.pauli_map[eve_secret.value()];
  if (params.forward_rotation == GateName::I) return std::string(gate_symbol(pauli));
  if (pauli == GateName::I) return std::string(gate_symbol(params.forward_rotation));
  return fmt::format("{}{}", gate_symbol(pauli), gate_symbol(params.forward_rotation));
}

std::string_view attack_name(AttackKind kind) {
  switch (kind) {
    case AttackKind::None: return "none";
    case AttackKind::Zlg: return "zlg";
    case AttackKind::Tailored: return "tailored";
    case AttackKind::FourQubitSwap: return "four-swap";
    case AttackKind::Mixed: return "mixed";
  }
  return "?";
}

std::optional<AttackKind> parse_attack(std::string_view s) {
  for (AttackKind k : {AttackKind::None, AttackKind::Zlg, AttackKind::Tailored,
                       AttackKind::FourQubitSwap, AttackKind::Mixed}) {
    if (attack_name(k) == s) return k;
  }
  return std::nullopt;
}

AttackStrategy AttackStrategy::zlg() {
  AttackStrategy s;
  s.kind = AttackKind::Zlg;
  s.tailored = kInterceptParams;
  return s;
}

AttackStrategy AttackStrategy::tailored_attack(TailoredParams params) {
  AttackStrategy s;
  s.kind = AttackKind::Tailored;
  s.tailored = params;
  return s;
}

AttackStrategy AttackStrategy::four_qubit_swap(std::optional<Procedure> guess) {
  AttackStrategy s;
  s.kind = AttackKind::FourQubitSwap;
  s.guess = guess;
  return s;
}

AttackStrategy AttackStrategy::mixed(double weight_zlg) {
  AttackStrategy s;
  s.kind = AttackKind::Mixed;
  s.weight_zlg = weight_zlg;
  return s;
}

void AttackStrategy::validate() const {
  if (!(weight_zlg >= 0.0 && weight_zlg <= 1.0)) {
    throw InvalidArgument("mixture weight must lie in [0, 1]");
  }
  for (GateName g : tailored.pauli_map) {
    if (!is_pauli(g)) throw InvalidArgument("Pauli corrections must be drawn from I, X, Y, Z");
  }
  if (tailored.forward_rotation != GateName::I && tailored.forward_rotation != GateName::S) {
    throw InvalidArgument("forward rotation must be I or S");
  }
}

std::optional<Protocol> AttackStrategy::target() const {
  switch (kind) {
    case AttackKind::None: return std::nullopt;
    case AttackKind::FourQubitSwap: return Protocol::Four;
    default: return Protocol::Six;
  }
}

EveObservation tailored_attack(const BellConvention& conv, const TailoredParams& params,
                               RoundInProgress& round, OutcomeSource& outcomes) {
  using W = SixQubitWiring;
  if (round.protocol != Protocol::Six) {
    throw WrongProtocol("the intercept attack applies to the six-qubit protocol only");
  }
  if (round.state.num_qubits() != W::kWithEavesdropper) {
    throw MalformedAdversary("the intercept attack needs Eve's ancilla pair (7, 8)");
  }
  StateVector<> state = apply_gate(round.state, gate_matrix(params.pre_unitaries[0]), W::kBobToAlice.index());
  state = apply_gate(state, gate_matrix(params.pre_unitaries[1]), W::kEveKept.index());

  const PairBasis<double> basis = conv.basis();
  const QubitPair measured = as_pair(W::kBobToAlice, W::kEveKept);
  const auto p = basis_probabilities(state, basis, measured);
  const BellLabel secret(outcomes.choose(p));
  state = project(state, basis, measured, secret.value(), p).collapsed;

  state = apply_gate(state, gate_matrix(params.forward_rotation), W::kAliceToBob.index());
  state = apply_gate(state, gate_matrix(params.pauli_map[secret.value()]), W::kAliceToBob.index());

  round.state = std::move(state);
  round.bob_pair[0] = W::kEveForward;
  round.public_pair[1] = W::kAliceToBob;
  return {secret, correction_name(params, secret)};
}

EveObservation zlg_attack(const BellConvention& conv, RoundInProgress& round, OutcomeSource& outcomes) {
  return tailored_attack(conv, kInterceptParams, round, outcomes);
}

EveObservation four_qubit_attack(const BellConvention& conv, RoundInProgress& round,
                                 OutcomeSource& outcomes, Procedure procedure_guess) {
  using W = FourQubitWiring;
  if (round.protocol != Protocol::Four) {
    throw WrongProtocol("the swap attack applies to the four-qubit protocol only");
  }
  // Bob's correction acts on qubit 2, the first factor of (2, 4).
  PairBasis<double> basis = conv.basis();
  if (procedure_guess == Procedure::P_II) {
    for (auto& v : basis) v = apply_on_factor(gate_matrix(GateName::S), ActingFactor::First, v);
  }
  const QubitPair pair = as_pair(W::kSentFirst, W::kSentSecond);
  const auto p = basis_probabilities(round.state, basis, pair);
  const BellLabel secret(outcomes.choose(p));
  // The collapsed pair is exactly the re-prepared state Eve forwards.
  round.state = project(round.state, basis, pair, secret.value(), p).collapsed;
  return {secret, procedure_guess == Procedure::P_I ? "I" : "S"};
}

Interceptor make_interceptor(const BellConvention& conv, const ConcreteAttack& attack) {
  if (attack.protocol == Protocol::Six) {
    return [conv, params = attack.params](RoundInProgress& round, OutcomeSource& outcomes) {
      return tailored_attack(conv, params, round, outcomes);
    };
  }
  return [conv, guess = attack.guess](RoundInProgress& round, OutcomeSource& outcomes) {
    return four_qubit_attack(conv, round, outcomes, guess);
  };
}

std::size_t EveInferenceTable::slot(Procedure procedure, std::optional<BellLabel> public_result,
                                    BellLabel secret) {
  const std::size_t pub = public_result ? std::size_t(public_result->value()) + 1 : 0;
  return (procedure == Procedure::P_I ? 0 : 20) + pub * 4 + std::size_t(secret.value());
}

void EveInferenceTable::add(Procedure procedure, std::optional<BellLabel> public_result,
                            BellLabel secret, BellLabel key) {
  masks_[slot(procedure, public_result, secret)] |= std::uint8_t(1u << key.value());
}

std::vector<BellLabel> EveInferenceTable::candidates(Procedure procedure,
                                                     std::optional<BellLabel> public_result,
                                                     BellLabel secret) const {
  const std::uint8_t mask = masks_[slot(procedure, public_result, secret)];
  std::vector<BellLabel> out;
  for (BellLabel k : kBellLabels) {
    if (mask & (1u << k.value())) out.push_back(k);
  }
  return out;
}

EveInferenceTable derive_eve_inference(const BellConvention& conv, const ConcreteAttack& attack) {
  EveInferenceTable table;
  const Interceptor tap = make_interceptor(conv, attack);
  for (Procedure procedure : {Procedure::P_I, Procedure::P_II}) {
    for (const auto& b : enumerate_branches(conv, attack.protocol, procedure, tap)) {
      table.add(procedure, b.outcome.public_result, b.outcome.eve->secret, b.outcome.key);
    }
  }
  return table;
}

Adversary::Adversary(const ProtocolContext& ctx, AttackStrategy strategy) : strategy_(std::move(strategy)) {
  strategy_.validate();
  switch (strategy_.kind) {
    case AttackKind::None:
      break;
    case AttackKind::Zlg:
      components_.push_back({Protocol::Six, kInterceptParams});
      break;
    case AttackKind::Tailored:
      components_.push_back({Protocol::Six, strategy_.tailored});
      break;
    case AttackKind::Mixed:
      components_.push_back({Protocol::Six, kInterceptParams});
      components_.push_back({Protocol::Six, strategy_.tailored});
      break;
    case AttackKind::FourQubitSwap:
      if (strategy_.guess) {
        components_.push_back({Protocol::Four, {}, *strategy_.guess});
      } else {
        components_.push_back({Protocol::Four, {}, Procedure::P_I});
        components_.push_back({Protocol::Four, {}, Procedure::P_II});
      }
      break;
  }
  for (std::size_t i = 0; i < components_.size(); ++i) {
    components_[i].component = i;
    tables_.push_back(derive_eve_inference(ctx.convention(), components_[i]));
  }
}

std::vector<double> Adversary::component_weights() const {
  if (components_.size() == 2) {
    const double first = strategy_.kind == AttackKind::Mixed ? strategy_.weight_zlg : 0.5;
    return {first, 1.0 - first};
  }
  return std::vector<double>(components_.size(), 1.0);
}

const ConcreteAttack& Adversary::resolve(RandomSource& rng) const {
  if (components_.empty()) throw InvalidArgument("no attack to resolve");
  if (components_.size() == 1) return components_.front();
  return rng.uniform() < component_weights()[0] ? components_[0] : components_[1];
}

std::vector<BellLabel> Adversary::infer(const ConcreteAttack& attack, Procedure procedure,
                                        std::optional<BellLabel> public_result, BellLabel secret) const {
  return tables_.at(attack.component).candidates(procedure, public_result, secret);
}

AttackAnalysis analyze_attack(const ProtocolContext& ctx, Protocol protocol, Procedure procedure,
                              const ConcreteAttack* attack) {
  const Interceptor tap = attack ? make_interceptor(ctx.convention(), *attack) : Interceptor{};
  const auto branches = enumerate_branches(ctx.convention(), protocol, procedure, tap);
  const auto& bob = ctx.inference(protocol, procedure);

  // Eve's candidate sets from the same branch list.
  std::map<std::pair<int, int>, std::uint8_t> eve_sets;
  if (attack) {
    for (const auto& b : branches) {
      const int pub = b.outcome.public_result ? b.outcome.public_result->value() : -1;
      eve_sets[{pub, b.outcome.eve->secret.value()}] |= std::uint8_t(1u << b.outcome.key.value());
    }
  }

  AttackAnalysis a;
  a.min_candidates = 4;
  for (const auto& b : branches) {
    a.total_probability += b.probability;
    if (bob.infer(b.outcome.public_result, b.outcome.bob_secret) != b.outcome.key) {
      a.detection_probability += b.probability;
    }
    if (!attack) continue;
    const int pub = b.outcome.public_result ? b.outcome.public_result->value() : -1;
    const std::uint8_t mask = eve_sets[{pub, b.outcome.eve->secret.value()}];
    const auto count = std::size_t(std::popcount(unsigned(mask)));
    a.min_candidates = std::min(a.min_candidates, count);
    a.max_candidates = std::max(a.max_candidates, count);
    if (mask == (1u << b.outcome.key.value())) a.eve_informed_probability += b.probability;
  }
  if (!attack) a.min_candidates = 0;
  return a;
}

double expected_detection_rate(const ProtocolContext& ctx, Protocol protocol,
                               const AttackStrategy& strategy, double procedure_policy) {
  if (!(procedure_policy >= 0.0 && procedure_policy <= 1.0)) {
    throw InvalidArgument("procedure probability must lie in [0, 1]");
  }
  if (!strategy.target()) return 0.0;
  const Adversary adversary(ctx, strategy);
  const auto weights = adversary.component_weights();
  double rate = 0.0;
  for (const auto& c : adversary.components()) {
    const double p1 = analyze_attack(ctx, protocol, Procedure::P_I, &c).detection_probability;
    const double p2 = analyze_attack(ctx, protocol, Procedure::P_II, &c).detection_probability;
    rate += weights[c.component] * (procedure_policy * p1 + (1.0 - procedure_policy) * p2);
  }
  return rate;
}

namespace {

struct GroupedBranches {
  // Branches split by Eve's Bell result.
  std::array<std::vector<Branch>, 4> by_secret;
};

struct Predicate {
  double detection = 0;
  bool eve_informed = true;
};

// Detection probability and whether Eve always holds the key, for branches
// assembled from per-secret groups.
Predicate evaluate(const InferenceTable& bob, const std::array<const std::vector<Branch>*, 4>& groups) {
  Predicate out;
  for (const auto* group : groups) {
    std::array<std::uint8_t, 4> eve_sets{};  // by public result
    for (const auto& b : *group) eve_sets[b.outcome.public_result->value()] |= std::uint8_t(1u << b.outcome.key.value());
    for (const auto& b : *group) {
      if (bob.infer(b.outcome.public_result, b.outcome.bob_secret) != b.outcome.key) {
        out.detection += b.probability;
      }
      if (eve_sets[b.outcome.public_result->value()] != (1u << b.outcome.key.value())) {
        out.eve_informed = false;
      }
    }
  }
  return out;
}

}  // namespace

TailoredSearchResult derive_tailored_attack(const ProtocolContext& ctx) {
  const BellConvention& conv = ctx.convention();
  // A Pauli correction chosen per secret only touches that secret's branches,
  // so each candidate is assembled from runs with a uniform correction.
  std::map<std::tuple<GateName, GateName, GateName, GateName, Procedure>, GroupedBranches> cache;
  const auto groups_for = [&](GateName rotation, GateName pre6, GateName pre8, GateName pauli,
                              Procedure procedure) -> const GroupedBranches& {
    const auto key = std::tuple{rotation, pre6, pre8, pauli, procedure};
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    ConcreteAttack attack{Protocol::Six, {{pre6, pre8}, rotation, {pauli, pauli, pauli, pauli}}};
    GroupedBranches g;
    for (auto& b : enumerate_branches(conv, Protocol::Six, procedure, make_interceptor(conv, attack))) {
      const int secret = b.outcome.eve->secret.value();
      g.by_secret[secret].push_back(std::move(b));
    }
    return cache.emplace(key, std::move(g)).first->second;
  };

  const auto& bob1 = ctx.inference(Protocol::Six, Procedure::P_I);
  const auto& bob2 = ctx.inference(Protocol::Six, Procedure::P_II);

  TailoredSearchResult result;
  std::optional<TailoredParams> hit;
  for (GateName rotation : {GateName::I, GateName::S}) {
    for (GateName pre6 : kAllGates) {
      for (GateName pre8 : kAllGates) {
        for (int code = 0; code < 256; ++code) {
          std::array<GateName, 4> map;
          for (int e = 0; e < 4; ++e) map[e] = kPaulis[(code >> (2 * (3 - e))) & 3];
          if (!hit) ++result.candidates_examined;

          std::array<const std::vector<Branch>*, 4> groups2;
          for (int e = 0; e < 4; ++e) {
            groups2[e] = &groups_for(rotation, pre6, pre8, map[e], Procedure::P_II).by_secret[e];
          }
          const Predicate under_p2 = evaluate(bob2, groups2);
          if (under_p2.detection > kZeroProbability || !under_p2.eve_informed) continue;

          std::array<const std::vector<Branch>*, 4> groups1;
          for (int e = 0; e < 4; ++e) {
            groups1[e] = &groups_for(rotation, pre6, pre8, map[e], Procedure::P_I).by_secret[e];
          }
          const Predicate under_p1 = evaluate(bob1, groups1);
          if (under_p1.detection <= kZeroProbability) continue;

          if (rotation == GateName::I) ++result.hits_with_pauli_corrections;
          if (!hit) {
            hit = TailoredParams{{pre6, pre8}, rotation, map};
            result.detection_under_p1 = under_p1.detection;
          }
        }
      }
    }
    if (hit) break;
  }
  if (!hit) throw SearchFailure("no tailored attack found in the searched parameter space");
  result.params = *hit;
  return result;
}

std::vector<Table2Row> compute_table2(const ProtocolContext& ctx) {
  const Adversary adversary(ctx, AttackStrategy::zlg());
  const ConcreteAttack& attack = adversary.components().front();
  const Interceptor tap = make_interceptor(ctx.convention(), attack);
  std::vector<Table2Row> rows;
  for (Procedure procedure : {Procedure::P_I, Procedure::P_II}) {
    const auto& bob = ctx.inference(Protocol::Six, procedure);
    for (const auto& b : enumerate_branches(ctx.convention(), Protocol::Six, procedure, tap)) {
      const auto& o = b.outcome;
      if (o.key != kLabel00) continue;
      rows.push_back({procedure, o.key, *o.public_result, o.bob_secret,
                      bob.infer(o.public_result, o.bob_secret), o.eve->secret, o.eve->transformation,
                      adversary.infer(attack, procedure, o.public_result, o.eve->secret)});
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Table2Row& x, const Table2Row& y) {
    return std::tie(x.procedure, x.bob_secret, x.eve_secret, x.public_result) <
           std::tie(y.procedure, y.bob_secret, y.eve_secret, y.public_result);
  });
  return rows;
}

const std::vector<Table2Row>& expected_table2() {
  static const std::vector<Table2Row> rows = [] {
    const auto L = [](std::string_view s) { return *BellLabel::parse(s); };
    // procedure, public, bob secret, bob inferred, eve secret, transformation; key is 00.
    struct Raw {
      Procedure p;
      const char* pub;
      const char* bob;
      const char* inferred;
      const char* eve;
      const char* gate;
    };
    const Procedure p1 = Procedure::P_I, p2 = Procedure::P_II;
    const Raw raw[] = {
        {p1, "00", "00", "00", "00", "I"}, {p1, "01", "01", "00", "01", "Z"},
        {p1, "10", "10", "00", "10", "X"}, {p1, "11", "11", "00", "11", "Y"},
        {p2, "00", "00", "00", "01", "Z"}, {p2, "11", "00", "11", "01", "Z"},
        {p2, "00", "00", "00", "10", "X"}, {p2, "11", "00", "11", "10", "X"},
        {p2, "01", "01", "11", "00", "I"}, {p2, "10", "01", "00", "00", "I"},
        {p2, "01", "01", "11", "11", "Y"}, {p2, "10", "01", "00", "11", "Y"},
        {p2, "01", "10", "00", "00", "I"}, {p2, "10", "10", "11", "00", "I"},
        {p2, "01", "10", "00", "11", "Y"}, {p2, "10", "10", "11", "11", "Y"},
        {p2, "00", "11", "11", "01", "Z"}, {p2, "11", "11", "00", "01", "Z"},
        {p2, "00", "11", "11", "10", "X"}, {p2, "11", "11", "00", "10", "X"},
    };
    std::vector<Table2Row> r;
    for (const auto& x : raw) {
      std::vector<BellLabel> eve = x.p == p1 ? std::vector{L("00")} : std::vector{L("00"), L("11")};
      r.push_back({x.p, L("00"), L(x.pub), L(x.bob), L(x.inferred), L(x.eve), x.gate, std::move(eve)});
    }
    return r;
  }();
  return rows;
}

std::string format_candidates(const std::vector<BellLabel>& keys) {
  std::string out;
  for (std::size_t i = 0; i < keys.size(); ++i) {
    if (i) out += " or ";
    out += keys[i].str();
  }
  return out;
}

std::string format_row(const Table2Row& row) {
  return fmt::format("{} {} {} {} {} {} {} {}", procedure_label(Protocol::Six, row.procedure),
                     row.key.str(), row.public_result.str(), row.bob_secret.str(),
                     row.bob_inferred.str(), row.eve_secret.str(), row.transformation,
                     format_candidates(row.eve_inferred));
}

std::vector<Table2Row> reproduce_table2(const ProtocolContext& ctx) {
  auto rows = compute_table2(ctx);
  auto diff = detail::row_diff(expected_table2(), rows);
  if (!diff.empty()) throw ReproductionFailure("table2 reproduction mismatch", std::move(diff));
  return rows;
}

}  // namespace esqkd
