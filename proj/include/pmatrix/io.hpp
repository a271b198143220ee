#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "pmatrix/forge.hpp"
#include "pmatrix/infotheory.hpp"
#include "pmatrix/matrix.hpp"
#include "pmatrix/minors.hpp"
#include "pmatrix/oracle.hpp"
#include "pmatrix/schurlab.hpp"

namespace pmatrix::io {

inline constexpr const char* kArtifactVersion = "0.1.0";

// Instance file: { "n": int, "m": [n*n row-major], "u": [n], "v": [n] }.
// u and v may be omitted for a bare base matrix (treated as zero).
nlohmann::json instance_to_json(const Instance& inst);
Instance instance_from_json(const nlohmann::json& j);
void save_instance(const Instance& inst, const std::filesystem::path& path);
Instance load_instance(const std::filesystem::path& path);

nlohmann::json violation_report_to_json(const ViolationReport& report);
nlohmann::json forge_result_to_json(const ForgeResult& result);
nlohmann::json first_hit_report_to_json(const FirstHitReport& report);
nlohmann::json info_report_to_json(const InfoReport& report);
nlohmann::json sign_report_to_json(const ConditionalSignReport& report);

// CSV renderings. Every table starts with '#' comment rows carrying the
// artifact version and the resolved configuration, then a column header.
std::string minors_csv(const std::vector<MinorRecord>& records, const std::string& config_line);
std::string histogram_csv(const FirstHitReport& report);
std::string sign_report_csv(const ConditionalSignReport& report);

// Deterministic shortest-round-trip double rendering (same as the JSON
// encoder uses), so CSV output is byte-stable.
std::string format_double(double x);

void write_text(const std::filesystem::path& path, const std::string& text);

} // namespace pmatrix::io
