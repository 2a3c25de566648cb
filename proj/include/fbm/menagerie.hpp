#pragma once

// Menagerie analysis over a ComparisonSet: error rates, EER, safety bands,
// first/last wolf and goat templates, the four-class partition and the
// three-valent (accept / undecided / reject) band report.
//
// Violation rules:
//   Band [a, b]:   rejection iff genuine score < a, impersonation iff imposter score > b.
//   Threshold t:   accept iff score >= t, so rejection iff genuine < t and
//                  impersonation iff imposter >= t.

#include <optional>
#include <set>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "fbm/codespace.hpp"

namespace fbm {

struct Band {
  double a = 0.0;  // reject below
  double b = 0.0;  // accept above

  double width() const { return b - a; }
  bool operator==(const Band&) const = default;
};

struct Threshold {
  double t = 0.0;
  bool operator==(const Threshold&) const = default;
};

using SecuritySetting = std::variant<Threshold, Band>;

void validate_setting(const SecuritySetting& setting);

struct ErrorRates {
  double far = 0.0;
  double frr = 0.0;
};

ErrorRates error_rates(std::span<const double> genuine, std::span<const double> imposter, double t);

struct EerPoint {
  double threshold = 0.0;
  double eer = 0.0;
  bool operator==(const EerPoint&) const = default;
};

// Candidates: every distinct observed score plus one value above the maximum.
// Picks the smallest candidate minimizing |FAR - FRR|.
EerPoint find_eer(std::span<const double> genuine, std::span<const double> imposter);

struct MaximalBand {
  Band band;
  // max imposter < min genuine. The band then spans the gap [MIS, mGS].
  bool consistent = false;
};

// [min genuine, max imposter]: the widest band with no violations.
MaximalBand maximal_band(std::span<const double> genuine, std::span<const double> imposter);

struct EdgeFinding {
  double edge = 0.0;
  int template_id = 0;
  int count = 0;
  bool operator==(const EdgeFinding&) const = default;
};

// Lowers the upper band edge through the distinct imposter scores (not below
// the minimum genuine score) and stops at the first edge where some template
// has min_impersonations imposter scores >= edge.
std::optional<EdgeFinding> first_wolf(const ComparisonSet& set, int min_impersonations);

// Mirror of first_wolf: raises the lower edge through the distinct genuine
// scores (not above the maximum imposter score) and stops at the first edge
// where some template has min_rejections genuine scores <= edge.
std::optional<EdgeFinding> first_goat(const ComparisonSet& set, int min_rejections);

struct TemplateFinding {
  int template_id = 0;
  int count = 0;
  bool operator==(const TemplateFinding&) const = default;
};

// Template with most imposter scores >= t.
std::optional<TemplateFinding> last_wolf(const ComparisonSet& set, double t);
// Template with most genuine scores < t.
std::optional<TemplateFinding> last_goat(const ComparisonSet& set, double t);

struct TemplateCounts {
  int template_id = 0;
  int impersonations = 0;
  int rejections = 0;
  bool operator==(const TemplateCounts&) const = default;
};

struct MenageriePartition {
  std::set<int> wolves;
  std::set<int> goats;
  std::set<int> lambs;
  std::set<int> sheep;
  std::vector<TemplateCounts> per_template;  // in template order of the set

  bool operator==(const MenageriePartition&) const = default;
};

MenageriePartition fbm_partition(const ComparisonSet& set, const SecuritySetting& setting, int wolf_min,
                                 int goat_min);

struct F3vdmReport {
  Band band;
  double far_at_b = 0.0;
  double frr_at_a = 0.0;
  double genuine_discomfort = 0.0;
  double imposter_discomfort = 0.0;
  double total_discomfort = 0.0;

  bool operator==(const F3vdmReport&) const = default;
};

F3vdmReport f3vdm_report(std::span<const double> genuine, std::span<const double> imposter, const Band& band);

struct HistogramBin {
  double low = 0.0;
  double high = 0.0;
  int genuine = 0;
  int imposter = 0;
};

// Equal-width bins over [0, 1]; a score of exactly 1 lands in the last bin.
std::vector<HistogramBin> score_histogram(const ScoreSplit& split, int bins = 512);

}  // namespace fbm
