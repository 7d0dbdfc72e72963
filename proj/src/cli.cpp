#include "esqkd/cli.hpp"

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "detail/row_diff.hpp"
#include "esqkd/adversary.hpp"
#include "esqkd/errors.hpp"
#include "esqkd/harness.hpp"
#include "esqkd/serialize.hpp"

namespace esqkd {

namespace {

enum class Format { Human, Json, Csv };

struct Common {
  std::uint64_t seed = 0;
  Format format = Format::Human;
};

const std::map<std::string, Format> kFormats = {
    {"human", Format::Human}, {"json", Format::Json}, {"csv", Format::Csv}};
const std::map<std::string, Protocol> kProtocols = {{"six", Protocol::Six}, {"four", Protocol::Four}};
const std::map<std::string, AttackKind> kAttacks = {{"none", AttackKind::None},
                                                    {"zlg", AttackKind::Zlg},
                                                    {"tailored", AttackKind::Tailored},
                                                    {"four-swap", AttackKind::FourQubitSwap},
                                                    {"mixed", AttackKind::Mixed}};
const std::map<std::string, Procedure> kGuesses = {{"I", Procedure::P_I}, {"II", Procedure::P_II}};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--seed", c.seed, "64-bit master seed")->capture_default_str();
  sub->add_option("--format", c.format, "Output format: human, json or csv")
      ->transform(CLI::CheckedTransformer(kFormats, CLI::ignore_case))
      ->option_text("{human,json,csv} [human]");
}

struct AttackFlags {
  AttackKind kind = AttackKind::None;
  double weight_zlg = 0.5;
  std::optional<Procedure> guess;
  std::string params_path;

  void add(CLI::App* sub, const char* default_attack) {
    sub->add_option("--attack", kind, "none, zlg, tailored, four-swap or mixed")
        ->transform(CLI::CheckedTransformer(kAttacks, CLI::ignore_case))
        ->option_text(fmt::format("{{none,zlg,tailored,four-swap,mixed}} [{}]", default_attack));
    sub->add_option("--zlg-weight", weight_zlg, "Mixed: probability of the intercept attack")
        ->capture_default_str();
    sub->add_option("--guess", guess, "four-swap: fixed procedure guess I or II (default fair coin)")
        ->transform(CLI::CheckedTransformer(kGuesses))
        ->option_text("{I,II}");
    sub->add_option("--params", params_path, "Tailored parameters JSON (default: frozen)")
        ->check(CLI::ExistingFile);
  }

  AttackStrategy build() const {
    TailoredParams params = frozen_tailored_params();
    if (!params_path.empty()) {
      std::ifstream in(params_path);
      Json j = Json::parse(in, nullptr, false);
      if (j.is_discarded()) throw InvalidArgument(fmt::format("{} is not valid JSON", params_path));
      params = tailored_params_from_json(j);
    }
    AttackStrategy s;
    switch (kind) {
      case AttackKind::None: s = AttackStrategy::none(); break;
      case AttackKind::Zlg: s = AttackStrategy::zlg(); break;
      case AttackKind::Tailored: s = AttackStrategy::tailored_attack(params); break;
      case AttackKind::FourQubitSwap: s = AttackStrategy::four_qubit_swap(guess); break;
      case AttackKind::Mixed:
        s = AttackStrategy::mixed(weight_zlg);
        s.tailored = params;
        break;
    }
    return s;
  }
};

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string convention_line(const BellConvention& conv) {
  std::string out;
  for (BellLabel l : kBellLabels) {
    out += fmt::format("{}{}={}{}", l.value() ? " " : "", l.str(), conv.signs[l.value()] < 0 ? "-" : "+",
                       bell_state_name(conv.assignment[l.value()]));
  }
  return out;
}

BellConvention select_convention(int index) {
  if (index < 0) return derive_convention();
  const auto all = enumerate_conventions();
  if (std::size_t(index) >= all.size()) {
    throw InvalidArgument(fmt::format("--convention must be below {}", all.size()));
  }
  return all[std::size_t(index)].convention;
}

int cmd_validate(const Common& c, std::ostream& out) {
  const auto all = enumerate_conventions();
  if (all.empty()) throw DerivationFailure("no Bell-label convention satisfies the rotated-label identities");
  const ConventionCheck& chosen = all.front();
  std::size_t framed = 0;
  for (const auto& k : all) framed += k.pauli_frame;

  switch (c.format) {
    case Format::Json: {
      Json list = Json::array();
      for (const auto& k : all) list.push_back(to_json(k));
      out << Json{{"derived", to_json(chosen)},
                  {"conventions_found", all.size()},
                  {"pauli_frame_consistent", framed},
                  {"conventions", list}}
                 .dump(2)
          << "\n";
      break;
    }
    case Format::Csv:
      out << "index,00,01,10,11,acting_factor,rotation_residual,phase_residual,orthonormality_residual,pauli_frame\n";
      for (std::size_t i = 0; i < all.size(); ++i) {
        const Json j = to_json(all[i]);
        out << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", i, j["labels"]["00"].get<std::string>(),
                           j["labels"]["01"].get<std::string>(), j["labels"]["10"].get<std::string>(),
                           j["labels"]["11"].get<std::string>(), j["acting_factor"].get<std::string>(),
                           j["rotation_residual"].dump(), j["phase_residual"].dump(),
                           j["orthonormality_residual"].dump(), all[i].pauli_frame ? 1 : 0);
      }
      break;
    case Format::Human:
      out << "derived convention: " << convention_line(chosen.convention) << "\n";
      out << "S and Z act on the " << (chosen.convention.acting_factor == ActingFactor::First ? "first" : "second")
          << " qubit of the pair\n";
      out << fmt::format("residual S|00> vs |++>:  {:.3e}\n", chosen.rotation_residual);
      out << fmt::format("residual Z|++> vs |-+>:  {:.3e}\n", chosen.phase_residual);
      out << fmt::format("orthonormality residual: {:.3e}\n", chosen.orthonormality_residual);
      out << "Pauli frame I,Z,X,Y:     " << yes_no(chosen.pauli_frame) << "\n";
      out << fmt::format("conventions satisfying both identities: {} ({} Pauli-frame consistent)\n",
                         all.size(), framed);
      break;
  }
  return kExitOk;
}

template <class Row>
void print_rows(const std::vector<Row>& rows, const Common& c, std::ostream& out,
                const std::vector<std::string>& header, std::string (*csv)(const std::vector<Row>&)) {
  if (c.format == Format::Csv) {
    out << csv(rows);
    return;
  }
  if (c.format == Format::Json) {
    Json j = Json::array();
    for (const auto& r : rows) j.push_back(to_json(r));
    out << j.dump(2) << "\n";
    return;
  }
  // Aligned columns: one cell per header entry.
  std::vector<std::vector<std::string>> cells{header};
  for (const auto& r : rows) {
    const Json j = to_json(r);
    std::vector<std::string> line;
    for (const auto& [key, value] : j.items()) {
      if (value.is_array()) {
        std::vector<BellLabel> keys;
        for (const auto& k : value) keys.push_back(*BellLabel::parse(k.template get<std::string>()));
        line.push_back(format_candidates(keys));
      } else {
        line.push_back(value.template get<std::string>());
      }
    }
    cells.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  for (const auto& line : cells) {
    std::string s;
    for (std::size_t i = 0; i < line.size(); ++i) {
      s += i + 1 < line.size() ? fmt::format("{:<{}}  ", line[i], width[i]) : line[i];
    }
    out << s << "\n";
  }
}

template <class Row>
int cmd_reproduce(const Common& c, int convention, std::ostream& out, std::ostream& err,
                  std::vector<Row> (*compute)(const ProtocolContext&), const std::vector<Row>& (*expected)(),
                  const std::vector<std::string>& header, std::string (*csv)(const std::vector<Row>&),
                  const char* name) {
  const ProtocolContext ctx(select_convention(convention));
  const auto rows = compute(ctx);
  print_rows(rows, c, out, header, csv);
  const auto diff = detail::row_diff(expected(), rows);
  if (!diff.empty()) {
    err << name << " reproduction mismatch\n";
    for (const auto& d : diff) err << d << "\n";
    return kExitMismatch;
  }
  return kExitOk;
}

int cmd_simulate(const Common& c, SimulationConfig config, const AttackFlags& attack,
                 const std::string& transcripts, std::ostream& out) {
  config.master_seed = c.seed;
  config.attack = attack.build();
  config.validate();
  const ProtocolContext ctx;

  std::ofstream file;
  bool csv_transcripts = false;
  if (!transcripts.empty()) {
    file.open(transcripts);
    if (!file) throw InvalidArgument(fmt::format("cannot write {}", transcripts));
    csv_transcripts = transcripts.size() >= 4 && transcripts.compare(transcripts.size() - 4, 4, ".csv") == 0;
    if (csv_transcripts) file << transcript_csv_header();
  }
  TranscriptSink sink;
  if (file.is_open()) {
    sink = [&](std::size_t round, const RoundTranscript& t) {
      if (csv_transcripts) {
        file << transcript_csv_line(round, t);
      } else {
        file << to_json(round, t).dump() << "\n";
      }
    };
  }
  const SimulationReport r = run_simulation(ctx, config, sink);

  switch (c.format) {
    case Format::Json: out << to_json(r).dump(2) << "\n"; break;
    case Format::Csv: out << report_csv(r); break;
    case Format::Human:
      out << fmt::format("protocol:                        {}-qubit\n", protocol_name(config.protocol));
      out << fmt::format("attack:                          {}\n", attack_name(config.attack.kind));
      out << fmt::format("rounds:                          {}\n", r.rounds_run);
      out << fmt::format("compared:                        {}\n", r.compared);
      out << fmt::format("detections:                      {}\n", r.detections);
      out << fmt::format("agreement rate:                  {:.6f}\n", r.agreement_rate);
      out << fmt::format("detected:                        {}\n", yes_no(r.detected_any));
      out << fmt::format("detection rate per compared:     {:.6f} (95% CI {:.6f} to {:.6f})\n",
                         r.empirical_detection_prob, r.ci95.low, r.ci95.high);
      out << fmt::format("exact rate per compared:         {:.6f}\n", r.expected_detection_prob);
      out << fmt::format("1-(3/4)^n at n = compared:       {:.6f}\n", r.theoretical_detection_prob);
      out << fmt::format("exact P(any detection):          {:.6f}\n", r.expected_any_detection_prob);
      out << fmt::format("Eve holds the key:               {:.6f}\n", r.eve_key_information);
      out << fmt::format("key bits per transmitted qubit:  {:.6f}\n", r.key_bits_per_transmitted_qubit);
      break;
  }
  return kExitOk;
}

int cmd_curve(const Common& c, SimulationConfig config, const AttackFlags& attack,
              const std::vector<std::size_t>& n_values, const std::vector<std::size_t>& bits,
              std::size_t reps, std::ostream& out) {
  config.master_seed = c.seed;
  config.attack = attack.build();
  const ProtocolContext ctx;
  const auto points = bits.empty() ? detection_curve(ctx, config, n_values, reps)
                                   : bits_tested_curve(ctx, config, bits, reps);
  switch (c.format) {
    case Format::Csv: out << curve_csv(points); break;
    case Format::Json: {
      Json j = Json::array();
      for (const auto& p : points) j.push_back(to_json(p));
      out << j.dump(2) << "\n";
      break;
    }
    case Format::Human:
      out << fmt::format("{:>5}  {:>5}  {:>9}  {:>11}  {:>17}  {}\n", "bits", "n", "empirical", "theoretical",
                         "95% CI", "3-sigma band");
      for (const auto& p : points) {
        out << fmt::format("{:>5}  {:>5}  {:>9.4f}  {:>11.4f}  {:.4f} to {:.4f}  {}\n",
                           p.bits ? std::to_string(*p.bits) : "-", p.n, p.empirical, p.theoretical, p.ci_low,
                           p.ci_high, p.within_band() ? "inside" : "outside");
      }
      break;
  }
  return kExitOk;
}

int cmd_derive(const Common& c, const std::string& emit, std::ostream& out) {
  const ProtocolContext ctx;
  const TailoredSearchResult res = derive_tailored_attack(ctx);
  const Json params = to_json(res.params);
  if (!emit.empty()) {
    std::ofstream file(emit);
    if (!file) throw InvalidArgument(fmt::format("cannot write {}", emit));
    file << params.dump(2) << "\n";
  }
  const bool frozen = res.params == frozen_tailored_params();
  switch (c.format) {
    case Format::Json:
      out << Json{{"params", params},
                  {"candidates_examined", res.candidates_examined},
                  {"candidates_per_slice", res.candidates_per_slice},
                  {"hits_with_pauli_corrections", res.hits_with_pauli_corrections},
                  {"detection_under_p1", res.detection_under_p1},
                  {"matches_frozen", frozen}}
                 .dump(2)
          << "\n";
      break;
    case Format::Csv:
      out << "pre6,pre8,forward_rotation,map00,map01,map10,map11,candidates_examined,"
             "hits_with_pauli_corrections,detection_under_p1,matches_frozen\n";
      out << fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", gate_symbol(res.params.pre_unitaries[0]),
                         gate_symbol(res.params.pre_unitaries[1]), gate_symbol(res.params.forward_rotation),
                         gate_symbol(res.params.pauli_map[0]), gate_symbol(res.params.pauli_map[1]),
                         gate_symbol(res.params.pauli_map[2]), gate_symbol(res.params.pauli_map[3]),
                         res.candidates_examined, res.hits_with_pauli_corrections,
                         Json(res.detection_under_p1).dump(), frozen ? 1 : 0);
      break;
    case Format::Human:
      out << params.dump(2) << "\n";
      out << fmt::format("candidates examined: {} ({} per slice)\n", res.candidates_examined,
                         res.candidates_per_slice);
      out << fmt::format("hits using Pauli corrections alone: {}\n", res.hits_with_pauli_corrections);
      out << fmt::format("detection probability under P_I: {}\n", res.detection_under_p1);
      out << "matches frozen parameters: " << yes_no(frozen) << "\n";
      break;
  }
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Entanglement-swapping key distribution simulator", "esqkd"};
  app.require_subcommand(1);

  Common common;

  auto* validate = app.add_subcommand("validate-convention", "Derive the Bell-label convention");
  add_common(validate, common);

  int convention = -1;
  auto* table1 = app.add_subcommand("reproduce-table1", "Six-qubit rows with key 00, no eavesdropper");
  auto* table2 = app.add_subcommand("reproduce-table2", "Six-qubit rows with key 00 under the intercept attack");
  for (auto* sub : {table1, table2}) {
    add_common(sub, common);
    sub->add_option("--convention", convention, "Index into the enumerated conventions (default: derived)");
  }

  SimulationConfig config;
  AttackFlags attack;
  std::string transcripts;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of many rounds");
  add_common(simulate, common);
  simulate->add_option("--protocol", config.protocol, "six or four")
      ->transform(CLI::CheckedTransformer(kProtocols, CLI::ignore_case))
      ->option_text("{six,four} [six]");
  attack.add(simulate, "none");
  simulate->add_option("--rounds", config.rounds, "Number of rounds")->capture_default_str();
  simulate->add_option("--test-fraction", config.test_fraction, "Fraction of rounds publicly compared")
      ->capture_default_str();
  simulate->add_option("--procedure-prob", config.procedure_policy, "Probability Alice picks P_I")
      ->capture_default_str();
  simulate->add_option("--transcripts", transcripts, "Write per-round transcripts (JSONL, or CSV for *.csv)");

  SimulationConfig curve_config;
  AttackFlags curve_attack;
  curve_attack.kind = AttackKind::Mixed;
  std::vector<std::size_t> n_values = {1, 2, 4, 8, 16};
  std::vector<std::size_t> bits;
  std::size_t reps = 10000;
  auto* curve = app.add_subcommand("detection-curve", "Detection probability against compared rounds");
  add_common(curve, common);
  curve->add_option("--protocol", curve_config.protocol, "six or four")
      ->transform(CLI::CheckedTransformer(kProtocols, CLI::ignore_case))
      ->option_text("{six,four} [six]");
  curve_attack.add(curve, "mixed");
  auto* n_opt = curve->add_option("--n", n_values, "Compared-round counts")->delimiter(',');
  curve->add_option("--bits", bits, "Tested-bit counts (even)")->delimiter(',')->excludes(n_opt);
  curve->add_option("--reps", reps, "Experiments per point")->capture_default_str();
  curve->add_option("--procedure-prob", curve_config.procedure_policy, "Probability Alice picks P_I")
      ->capture_default_str();

  std::string emit;
  auto* derive = app.add_subcommand("derive-attack", "Search for the tailored intercept attack");
  add_common(derive, common);
  derive->add_option("--emit-params", emit, "Write the found parameters as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto parsed = app.get_subcommands();
    err << (parsed.empty() ? app.help() : parsed.front()->help());
    return kExitUsage;
  }

  try {
    if (validate->parsed()) return cmd_validate(common, out);
    if (table1->parsed()) {
      return cmd_reproduce<Table1Row>(common, convention, out, err, compute_table1, expected_table1,
                                      {"procedure", "key", "public", "bob_secret", "bob_inferred"},
                                      table1_csv, "table1");
    }
    if (table2->parsed()) {
      return cmd_reproduce<Table2Row>(common, convention, out, err, compute_table2, expected_table2,
                                      {"procedure", "key", "public", "bob_secret", "bob_inferred",
                                       "eve_secret", "transformation", "eve_inferred"},
                                      table2_csv, "table2");
    }
    if (simulate->parsed()) return cmd_simulate(common, config, attack, transcripts, out);
    if (curve->parsed()) return cmd_curve(common, curve_config, curve_attack, n_values, bits, reps, out);
    if (derive->parsed()) return cmd_derive(common, emit, out);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitMismatch;
  }
  return kExitUsage;
}

}  // namespace esqkd
