#pragma once

// Per-run analysis record: the band-narrowing and EER-threshold results for
// one ComparisonSet, with the run identity that produced it. The field set
// mirrors the columns of the published menagerie tables.

#include <cstdint>
#include <optional>
#include <string>

#include "fbm/menagerie.hpp"

namespace fbm {

struct AnalysisRecord {
  // Run identity.
  std::string encoder;
  std::string dims;
  std::string noise_kind = "none";
  double noise_intensity = 0.0;
  int run_index = 0;
  std::optional<std::uint64_t> seed;
  int max_shift = 8;
  int wolf_min = 3;
  int goat_min = 2;

  // Score space.
  std::size_t genuine_count = 0;
  std::size_t imposter_count = 0;
  bool consistent = false;

  // EER threshold setting.
  std::optional<EerPoint> eer;
  std::optional<TemplateFinding> last_wolf;
  std::optional<TemplateFinding> last_goat;

  // Band-narrowing setting. The band pairs the first-goat lower edge with
  // the first-wolf upper edge; an edge without a finding stays at the
  // maximal band.
  std::optional<Band> band;
  std::optional<TemplateFinding> first_wolf;
  std::optional<TemplateFinding> first_goat;
  std::optional<F3vdmReport> f3vdm;

  bool operator==(const AnalysisRecord&) const = default;
};

struct AnalysisSettings {
  bool band_narrowing = true;
  bool eer_threshold = true;
  int wolf_min = 3;
  int goat_min = 2;
};

// Fills the score-derived fields; identity fields are left to the caller.
AnalysisRecord analyze_comparisons(const ComparisonSet& set, const AnalysisSettings& settings);

}  // namespace fbm
