#include "fbm/analysis.hpp"

#include "fbm/error.hpp"

namespace fbm {

AnalysisRecord analyze_comparisons(const ComparisonSet& set, const AnalysisSettings& settings) {
  const auto split = split_comparisons(set);
  if (split.genuine.empty() || split.imposter.empty()) {
    throw ValidationError("analysis needs both genuine and imposter comparisons");
  }
  AnalysisRecord record;
  record.wolf_min = settings.wolf_min;
  record.goat_min = settings.goat_min;
  record.genuine_count = split.genuine.size();
  record.imposter_count = split.imposter.size();
  record.consistent = is_consistent(split.genuine, split.imposter);

  if (settings.eer_threshold) {
    const auto eer = find_eer(split.genuine, split.imposter);
    record.eer = eer;
    record.last_wolf = last_wolf(set, eer.threshold);
    record.last_goat = last_goat(set, eer.threshold);
  }

  if (settings.band_narrowing) {
    Band band = maximal_band(split.genuine, split.imposter).band;
    if (const auto wolf = first_wolf(set, settings.wolf_min)) {
      band.b = wolf->edge;
      record.first_wolf = TemplateFinding{wolf->template_id, wolf->count};
    }
    if (const auto goat = first_goat(set, settings.goat_min)) {
      band.a = goat->edge;
      record.first_goat = TemplateFinding{goat->template_id, goat->count};
    }
    record.band = band;
    if (band.a <= band.b) record.f3vdm = f3vdm_report(split.genuine, split.imposter, band);
  }
  return record;
}

}  // namespace fbm
