#include "esqkd/serialize.hpp"

#include <fmt/format.h>

#include "esqkd/errors.hpp"

namespace esqkd {

namespace {

// Shortest round-trip form, identical to the JSON encoding of doubles.
std::string num(double x) { return Json(x).dump(); }

std::string opt_label(const std::optional<BellLabel>& l) { return l ? l->str() : ""; }

GateName gate_from_json(const Json& j, const char* field) {
  if (!j.is_string()) throw InvalidArgument(fmt::format("'{}' must hold gate names", field));
  const auto g = parse_gate(j.get<std::string>());
  if (!g) throw InvalidArgument(fmt::format("unknown gate '{}' in '{}'", j.get<std::string>(), field));
  return *g;
}

}  // namespace

Json to_json(const ConventionCheck& check) {
  Json labels = Json::object();
  for (BellLabel l : kBellLabels) {
    labels[l.str()] = fmt::format("{}{}", check.convention.signs[l.value()] < 0 ? "-" : "+",
                                  bell_state_name(check.convention.assignment[l.value()]));
  }
  return Json{
      {"labels", labels},
      {"acting_factor", check.convention.acting_factor == ActingFactor::First ? "first" : "second"},
      {"rotation_residual", check.rotation_residual},
      {"phase_residual", check.phase_residual},
      {"orthonormality_residual", check.orthonormality_residual},
      {"pauli_frame", check.pauli_frame},
  };
}

Json to_json(const Table1Row& row) {
  return Json{{"procedure", procedure_label(Protocol::Six, row.procedure)},
              {"key", row.key.str()},
              {"public", row.public_result.str()},
              {"bob_secret", row.secret.str()},
              {"bob_inferred", row.inferred.str()}};
}

Json to_json(const Table2Row& row) {
  Json eve = Json::array();
  for (BellLabel k : row.eve_inferred) eve.push_back(k.str());
  return Json{{"procedure", procedure_label(Protocol::Six, row.procedure)},
              {"key", row.key.str()},
              {"public", row.public_result.str()},
              {"bob_secret", row.bob_secret.str()},
              {"bob_inferred", row.bob_inferred.str()},
              {"eve_secret", row.eve_secret.str()},
              {"transformation", row.transformation},
              {"eve_inferred", eve}};
}

Json to_json(const SimulationReport& r) {
  return Json{{"rounds_run", r.rounds_run},
              {"compared", r.compared},
              {"detections", r.detections},
              {"agreement_rate", r.agreement_rate},
              {"detected_any", r.detected_any},
              {"empirical_detection_prob", r.empirical_detection_prob},
              {"ci95", {r.ci95.low, r.ci95.high}},
              {"expected_detection_prob", r.expected_detection_prob},
              {"theoretical_detection_prob", r.theoretical_detection_prob},
              {"expected_any_detection_prob", r.expected_any_detection_prob},
              {"eve_key_information", r.eve_key_information},
              {"key_bits_per_transmitted_qubit", r.key_bits_per_transmitted_qubit}};
}

Json to_json(const CurvePoint& p) {
  Json j = Json::object();
  if (p.bits) j["bits"] = *p.bits;
  j["n"] = p.n;
  j["repetitions"] = p.repetitions;
  j["empirical"] = p.empirical;
  j["theoretical"] = p.theoretical;
  j["ci_low"] = p.ci_low;
  j["ci_high"] = p.ci_high;
  j["within_band"] = p.within_band();
  return j;
}

Json to_json(std::size_t round, const RoundTranscript& t) {
  Json j{{"round", round},
         {"protocol", protocol_name(t.protocol)},
         {"procedure", procedure_label(t.protocol, t.procedure)},
         {"key", t.key.str()},
         {"public", t.public_result ? Json(t.public_result->str()) : Json(nullptr)},
         {"bob_secret", t.bob_secret.str()},
         {"bob_inferred", t.bob_inferred_key.str()}};
  if (t.eve_record) {
    Json keys = Json::array();
    for (BellLabel k : t.eve_record->inferred_keys) keys.push_back(k.str());
    j["eve"] = Json{{"secret", t.eve_record->secret.str()},
                    {"transformation", t.eve_record->transformation},
                    {"inferred", keys}};
  } else {
    j["eve"] = nullptr;
  }
  j["compared"] = t.compared;
  j["detected"] = t.detected;
  Json events = Json::array();
  for (RoundEvent e : t.events) events.push_back(event_name(e));
  j["events"] = events;
  return j;
}

Json to_json(const TailoredParams& params) {
  Json map = Json::object();
  for (BellLabel l : kBellLabels) map[l.str()] = gate_symbol(params.pauli_map[l.value()]);
  return Json{{"pre_unitaries",
               {gate_symbol(params.pre_unitaries[0]), gate_symbol(params.pre_unitaries[1])}},
              {"forward_rotation", gate_symbol(params.forward_rotation)},
              {"pauli_map", map}};
}

TailoredParams tailored_params_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidArgument("attack parameters must be a JSON object");
  TailoredParams p;
  const auto pre = j.find("pre_unitaries");
  if (pre == j.end() || !pre->is_array() || pre->size() != 2) {
    throw InvalidArgument("'pre_unitaries' must be an array of two gate names");
  }
  p.pre_unitaries = {gate_from_json((*pre)[0], "pre_unitaries"), gate_from_json((*pre)[1], "pre_unitaries")};
  if (const auto fwd = j.find("forward_rotation"); fwd != j.end()) {
    p.forward_rotation = gate_from_json(*fwd, "forward_rotation");
  }
  const auto map = j.find("pauli_map");
  if (map == j.end() || !map->is_object() || map->size() != 4) {
    throw InvalidArgument("'pauli_map' must map each of 00, 01, 10, 11 to a Pauli");
  }
  for (BellLabel l : kBellLabels) {
    const auto it = map->find(l.str());
    if (it == map->end()) throw InvalidArgument(fmt::format("'pauli_map' lacks '{}'", l.str()));
    p.pauli_map[l.value()] = gate_from_json(*it, "pauli_map");
  }
  AttackStrategy::tailored_attack(p).validate();
  return p;
}

std::string table1_csv(const std::vector<Table1Row>& rows) {
  std::string out = "procedure,key,public,bob_secret,bob_inferred\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{}\n", procedure_label(Protocol::Six, r.procedure), r.key.str(),
                       r.public_result.str(), r.secret.str(), r.inferred.str());
  }
  return out;
}

std::string table2_csv(const std::vector<Table2Row>& rows) {
  std::string out = "procedure,key,public,bob_secret,bob_inferred,eve_secret,transformation,eve_inferred\n";
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{}\n", procedure_label(Protocol::Six, r.procedure),
                       r.key.str(), r.public_result.str(), r.bob_secret.str(), r.bob_inferred.str(),
                       r.eve_secret.str(), r.transformation, format_candidates(r.eve_inferred));
  }
  return out;
}

std::string curve_csv(const std::vector<CurvePoint>& points) {
  bool bits = false;
  for (const auto& p : points) bits = bits || p.bits.has_value();
  std::string out = bits ? "bits,n,empirical,theoretical,ci_low,ci_high\n"
                         : "n,empirical,theoretical,ci_low,ci_high\n";
  for (const auto& p : points) {
    if (bits) out += fmt::format("{},", p.bits.value_or(2 * p.n));
    out += fmt::format("{},{},{},{},{}\n", p.n, num(p.empirical), num(p.theoretical), num(p.ci_low),
                       num(p.ci_high));
  }
  return out;
}

std::string report_csv(const SimulationReport& r) {
  return fmt::format(
      "rounds_run,compared,detections,agreement_rate,detected_any,empirical_detection_prob,ci_low,ci_high,"
      "expected_detection_prob,theoretical_detection_prob,expected_any_detection_prob,eve_key_information,"
      "key_bits_per_transmitted_qubit\n"
      "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
      r.rounds_run, r.compared, r.detections, num(r.agreement_rate), r.detected_any ? "true" : "false",
      num(r.empirical_detection_prob), num(r.ci95.low), num(r.ci95.high), num(r.expected_detection_prob),
      num(r.theoretical_detection_prob), num(r.expected_any_detection_prob), num(r.eve_key_information),
      num(r.key_bits_per_transmitted_qubit));
}

std::string transcript_csv_header() {
  return "round,procedure,key,public,bob_secret,bob_inferred,eve_secret,transformation,eve_inferred,"
         "compared,detected\n";
}

std::string transcript_csv_line(std::size_t round, const RoundTranscript& t) {
  const auto& e = t.eve_record;
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", round, procedure_label(t.protocol, t.procedure),
                     t.key.str(), opt_label(t.public_result), t.bob_secret.str(), t.bob_inferred_key.str(),
                     e ? e->secret.str() : "", e ? e->transformation : "",
                     e ? format_candidates(e->inferred_keys) : "", t.compared ? 1 : 0, t.detected ? 1 : 0);
}

}  // namespace esqkd
