// JSON and CSV encodings. Column orders for table rows follow the published
// tables: procedure, key, public result, Bob's secret, Bob's inferred key,
// then Eve's result, her transformation and her inferred key. Schemas are in
// docs/schemas/.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "esqkd/adversary.hpp"
#include "esqkd/bell.hpp"
#include "esqkd/harness.hpp"
#include "esqkd/protocol.hpp"

namespace esqkd {

using Json = nlohmann::ordered_json;

Json to_json(const ConventionCheck& check);
Json to_json(const Table1Row& row);
Json to_json(const Table2Row& row);
Json to_json(const SimulationReport& report);
Json to_json(const CurvePoint& point);
Json to_json(std::size_t round, const RoundTranscript& t);

// {"pre_unitaries": ["I","S"], "forward_rotation": "S",
//  "pauli_map": {"00": "I", "01": "Z", "10": "X", "11": "Y"}}
Json to_json(const TailoredParams& params);
// Throws InvalidArgument on a malformed document.
TailoredParams tailored_params_from_json(const Json& j);

std::string table1_csv(const std::vector<Table1Row>& rows);
std::string table2_csv(const std::vector<Table2Row>& rows);
// Leading "bits" column when any point carries a bit count.
std::string curve_csv(const std::vector<CurvePoint>& points);
std::string report_csv(const SimulationReport& report);

std::string transcript_csv_header();
std::string transcript_csv_line(std::size_t round, const RoundTranscript& t);

}  // namespace esqkd
