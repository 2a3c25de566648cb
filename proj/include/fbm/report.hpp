#pragma once

// Text serialization of analysis records, stability reports and
// calibration results as "key = value" records.
//
// Band edges, widths and thresholds are printed with 4 decimals and EERs in
// the compact scientific style "4.08E-2" (3 significant digits). Widths are
// computed from the printed edges so every emitted record satisfies
// width == b - a at the printed precision.

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "fbm/analysis.hpp"
#include "fbm/config.hpp"
#include "fbm/experiment.hpp"
#include "fbm/noise.hpp"

namespace fbm {

std::string format_fixed4(double value);
// Scientific with `digits` significant digits, uppercase E, no exponent padding.
std::string format_sci(double value, int digits);

inline constexpr std::string_view kRecordHeader = "# fbm analysis record v1";
inline constexpr std::string_view kStabilityHeader = "# fbm stability report v1";
inline constexpr std::string_view kCalibrationHeader = "# fbm noise calibration v1";

const std::vector<std::string_view>& record_schema();
const std::vector<std::string_view>& stability_schema();

KeyValues record_fields(const AnalysisRecord& record);
AnalysisRecord record_from_fields(const KeyValues& fields);

KeyValues stability_fields(const StabilityReport& report);
StabilityReport stability_from_fields(const KeyValues& fields);

KeyValues calibration_fields(const CalibrationResult& result);
KeyValues noise_spec_fields(const NoiseSpec& spec);

// Rejects field sets that lack any key of `schema`; keys are emitted in
// schema order, extra keys after them.
std::string render_fields(std::string_view header, const KeyValues& fields,
                          const std::vector<std::string_view>& schema);

std::string render_record(const AnalysisRecord& record);
std::string render_stability(const StabilityReport& report);
std::string render_calibration(const CalibrationResult& result);

AnalysisRecord parse_record(std::string_view text);
StabilityReport parse_stability(std::string_view text);

void write_report(const AnalysisRecord& record, const std::filesystem::path& path);
void write_report(const StabilityReport& report, const std::filesystem::path& path);

}  // namespace fbm
