#include "fbm/menagerie.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <unordered_map>

#include "fbm/error.hpp"

namespace fbm {

namespace {

void require_scores(std::span<const double> genuine, std::span<const double> imposter, const char* what) {
  if (genuine.empty() || imposter.empty()) {
    throw ValidationError(std::string(what) + " needs non-empty genuine and imposter score lists");
  }
}

void check_unit(double v, const char* what) {
  if (!(v >= 0.0 && v <= 1.0)) throw ValidationError(std::string(what) + " must lie in [0, 1]");
}

std::vector<double> sorted_copy(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Template id -> position in set.templates.
std::unordered_map<int, std::size_t> index_of(const ComparisonSet& set) {
  std::unordered_map<int, std::size_t> index;
  index.reserve(set.templates.size());
  for (std::size_t k = 0; k < set.templates.size(); ++k) index.emplace(set.templates[k].template_id, k);
  return index;
}

std::vector<const Comparison*> of_kind(const ComparisonSet& set, ComparisonKind kind) {
  std::vector<const Comparison*> out;
  for (const auto& c : set.comparisons) {
    if (c.kind == kind) out.push_back(&c);
  }
  return out;
}

// Higher count first, then lower template id.
bool better(int count, int id, int best_count, int best_id) {
  return count > best_count || (count == best_count && id < best_id);
}

// Sweeps comparisons of one kind in edge order, crediting both endpoints,
// and stops at the first group of equal scores after which a template
// reaches `needed`. `admissible` bounds the edges that may be returned.
template <typename Order, typename Admissible>
std::optional<EdgeFinding> sweep_edges(const ComparisonSet& set, ComparisonKind kind, int needed, Order order,
                                       Admissible admissible) {
  auto pairs = of_kind(set, kind);
  std::stable_sort(pairs.begin(), pairs.end(),
                   [&](const Comparison* x, const Comparison* y) { return order(x->score, y->score); });
  const auto index = index_of(set);
  std::vector<int> counts(set.templates.size(), 0);
  std::size_t k = 0;
  while (k < pairs.size()) {
    const double edge = pairs[k]->score;
    if (!admissible(edge)) break;
    std::optional<EdgeFinding> found;
    for (; k < pairs.size() && pairs[k]->score == edge; ++k) {
      ++counts[index.at(pairs[k]->id_a)];
      ++counts[index.at(pairs[k]->id_b)];
    }
    for (std::size_t t = 0; t < counts.size(); ++t) {
      const int id = set.templates[t].template_id;
      if (counts[t] >= needed && (!found || better(counts[t], id, found->count, found->template_id))) {
        found = EdgeFinding{edge, id, counts[t]};
      }
    }
    if (found) return found;
  }
  return std::nullopt;
}

template <typename Violates>
std::optional<TemplateFinding> most_violations(const ComparisonSet& set, ComparisonKind kind, Violates violates) {
  const auto index = index_of(set);
  std::vector<int> counts(set.templates.size(), 0);
  for (const auto& c : set.comparisons) {
    if (c.kind == kind && violates(c.score)) {
      ++counts[index.at(c.id_a)];
      ++counts[index.at(c.id_b)];
    }
  }
  std::optional<TemplateFinding> best;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    const int id = set.templates[t].template_id;
    if (counts[t] > 0 && (!best || better(counts[t], id, best->count, best->template_id))) {
      best = TemplateFinding{id, counts[t]};
    }
  }
  return best;
}

}  // namespace

void validate_setting(const SecuritySetting& setting) {
  if (const auto* th = std::get_if<Threshold>(&setting)) {
    check_unit(th->t, "threshold");
  } else {
    const auto& band = std::get<Band>(setting);
    check_unit(band.a, "band edge a");
    check_unit(band.b, "band edge b");
    if (band.a > band.b) throw ValidationError("band needs a <= b");
  }
}

ErrorRates error_rates(std::span<const double> genuine, std::span<const double> imposter, double t) {
  require_scores(genuine, imposter, "error rates");
  const auto accepted = std::count_if(imposter.begin(), imposter.end(), [t](double s) { return s >= t; });
  const auto rejected = std::count_if(genuine.begin(), genuine.end(), [t](double s) { return s < t; });
  return {static_cast<double>(accepted) / static_cast<double>(imposter.size()),
          static_cast<double>(rejected) / static_cast<double>(genuine.size())};
}

EerPoint find_eer(std::span<const double> genuine, std::span<const double> imposter) {
  require_scores(genuine, imposter, "EER search");
  const auto g = sorted_copy(genuine);
  const auto im = sorted_copy(imposter);
  const auto n_g = static_cast<std::int64_t>(g.size());
  const auto n_i = static_cast<std::int64_t>(im.size());

  std::vector<double> candidates;
  candidates.reserve(g.size() + im.size() + 1);
  std::merge(g.begin(), g.end(), im.begin(), im.end(), std::back_inserter(candidates));
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
  candidates.push_back(std::nextafter(candidates.back(), std::numeric_limits<double>::infinity()));

  // |FAR - FRR| compared exactly as |fa * nG - fr * nI| over the common denominator.
  std::size_t gi = 0;
  std::size_t ii = 0;
  std::int64_t best_key = std::numeric_limits<std::int64_t>::max();
  EerPoint best;
  for (double t : candidates) {
    while (gi < g.size() && g[gi] < t) ++gi;
    while (ii < im.size() && im[ii] < t) ++ii;
    const auto fr = static_cast<std::int64_t>(gi);
    const auto fa = n_i - static_cast<std::int64_t>(ii);
    const std::int64_t key = std::llabs(fa * n_g - fr * n_i);
    if (key < best_key) {
      best_key = key;
      best = {t, (static_cast<double>(fa) / static_cast<double>(n_i) +
                  static_cast<double>(fr) / static_cast<double>(n_g)) /
                     2.0};
    }
  }
  return best;
}

MaximalBand maximal_band(std::span<const double> genuine, std::span<const double> imposter) {
  require_scores(genuine, imposter, "maximal band");
  const double min_genuine = *std::min_element(genuine.begin(), genuine.end());
  const double max_imposter = *std::max_element(imposter.begin(), imposter.end());
  if (max_imposter < min_genuine) return {Band{max_imposter, min_genuine}, true};
  return {Band{min_genuine, max_imposter}, false};
}

std::optional<EdgeFinding> first_wolf(const ComparisonSet& set, int min_impersonations) {
  if (min_impersonations < 1) throw ValidationError("wolf minimum must be >= 1");
  const auto split = split_comparisons(set);
  if (split.imposter.empty()) throw ValidationError("first wolf search needs imposter comparisons");
  const double floor = split.genuine.empty() ? -std::numeric_limits<double>::infinity()
                                             : *std::min_element(split.genuine.begin(), split.genuine.end());
  return sweep_edges(
      set, ComparisonKind::kImposter, min_impersonations, [](double x, double y) { return x > y; },
      [floor](double edge) { return edge >= floor; });
}

std::optional<EdgeFinding> first_goat(const ComparisonSet& set, int min_rejections) {
  if (min_rejections < 1) throw ValidationError("goat minimum must be >= 1");
  const auto split = split_comparisons(set);
  if (split.genuine.empty()) throw ValidationError("first goat search needs genuine comparisons");
  const double ceiling = split.imposter.empty() ? std::numeric_limits<double>::infinity()
                                                : *std::max_element(split.imposter.begin(), split.imposter.end());
  return sweep_edges(
      set, ComparisonKind::kGenuine, min_rejections, [](double x, double y) { return x < y; },
      [ceiling](double edge) { return edge <= ceiling; });
}

std::optional<TemplateFinding> last_wolf(const ComparisonSet& set, double t) {
  return most_violations(set, ComparisonKind::kImposter, [t](double s) { return s >= t; });
}

std::optional<TemplateFinding> last_goat(const ComparisonSet& set, double t) {
  return most_violations(set, ComparisonKind::kGenuine, [t](double s) { return s < t; });
}

MenageriePartition fbm_partition(const ComparisonSet& set, const SecuritySetting& setting, int wolf_min,
                                 int goat_min) {
  validate_setting(setting);
  if (wolf_min < 1 || goat_min < 1) throw ValidationError("wolf and goat minima must be >= 1");

  std::function<bool(double)> impersonates;
  double a = 0.0;
  if (const auto* th = std::get_if<Threshold>(&setting)) {
    const double t = th->t;
    a = t;
    impersonates = [t](double s) { return s >= t; };
  } else {
    const auto band = std::get<Band>(setting);
    a = band.a;
    impersonates = [b = band.b](double s) { return s > b; };
  }

  const auto index = index_of(set);
  MenageriePartition part;
  part.per_template.reserve(set.templates.size());
  for (const auto& t : set.templates) part.per_template.push_back({t.template_id, 0, 0});

  std::vector<std::pair<std::size_t, std::size_t>> impersonation_pairs;
  for (const auto& c : set.comparisons) {
    const std::size_t ia = index.at(c.id_a);
    const std::size_t ib = index.at(c.id_b);
    if (c.kind == ComparisonKind::kImposter && impersonates(c.score)) {
      ++part.per_template[ia].impersonations;
      ++part.per_template[ib].impersonations;
      impersonation_pairs.emplace_back(ia, ib);
    } else if (c.kind == ComparisonKind::kGenuine && c.score < a) {
      ++part.per_template[ia].rejections;
      ++part.per_template[ib].rejections;
    }
  }

  for (const auto& pt : part.per_template) {
    if (pt.impersonations >= wolf_min) part.wolves.insert(pt.template_id);
    if (pt.rejections >= goat_min) part.goats.insert(pt.template_id);
  }
  for (const auto& [ia, ib] : impersonation_pairs) {
    const int id_a = part.per_template[ia].template_id;
    const int id_b = part.per_template[ib].template_id;
    if (part.wolves.contains(id_a) && !part.wolves.contains(id_b)) part.lambs.insert(id_b);
    if (part.wolves.contains(id_b) && !part.wolves.contains(id_a)) part.lambs.insert(id_a);
  }
  for (const auto& pt : part.per_template) {
    const int id = pt.template_id;
    if (!part.wolves.contains(id) && !part.goats.contains(id) && !part.lambs.contains(id)) part.sheep.insert(id);
  }
  return part;
}

F3vdmReport f3vdm_report(std::span<const double> genuine, std::span<const double> imposter, const Band& band) {
  require_scores(genuine, imposter, "F3VDM report");
  validate_setting(band);
  const auto frac = [](std::span<const double> v, auto pred) {
    return static_cast<double>(std::count_if(v.begin(), v.end(), pred)) / static_cast<double>(v.size());
  };
  const auto inside = [&band](double s) { return s >= band.a && s <= band.b; };
  F3vdmReport r;
  r.band = band;
  r.far_at_b = frac(imposter, [&band](double s) { return s > band.b; });
  r.frr_at_a = frac(genuine, [&band](double s) { return s < band.a; });
  r.genuine_discomfort = frac(genuine, inside);
  r.imposter_discomfort = frac(imposter, inside);
  r.total_discomfort = r.genuine_discomfort + r.imposter_discomfort;
  return r;
}

std::vector<HistogramBin> score_histogram(const ScoreSplit& split, int bins) {
  if (bins < 1) throw ValidationError("histogram needs at least one bin");
  std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
  for (int k = 0; k < bins; ++k) {
    out[k].low = static_cast<double>(k) / bins;
    out[k].high = static_cast<double>(k + 1) / bins;
  }
  const auto bin_of = [bins](double s) {
    check_unit(s, "score");
    return std::min(static_cast<int>(s * bins), bins - 1);
  };
  for (double s : split.genuine) ++out[bin_of(s)].genuine;
  for (double s : split.imposter) ++out[bin_of(s)].imposter;
  return out;
}

}  // namespace fbm
