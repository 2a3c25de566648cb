#include "fbm/report.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "fbm/error.hpp"
#include "fbm/harness.hpp"

namespace fbm {

std::string format_fixed4(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4f", value);
  std::string s = buf;
  if (s == "-0.0000") s = "0.0000";
  return s;
}

std::string format_sci(double value, int digits) {
  if (digits < 1) throw ValidationError("scientific format needs at least one digit");
  if (value == 0.0) return "0." + std::string(static_cast<std::size_t>(digits - 1), '0') + "E0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*e", digits - 1, value);
  const std::string s = buf;
  const auto e = s.find('e');
  const int exponent = std::atoi(s.c_str() + e + 1);
  std::string mantissa = s.substr(0, e);
  if (digits == 1) {
    const auto dot = mantissa.find('.');
    if (dot != std::string::npos) mantissa.erase(dot);
  }
  return mantissa + "E" + std::to_string(exponent);
}

namespace {

constexpr std::string_view kNone = "none";

double round4(double v) { return parse_double(format_fixed4(v), "rounded value"); }

std::string opt_int(const std::optional<int>& v) { return v ? std::to_string(*v) : std::string(kNone); }

std::optional<int> parse_opt_int(const std::string& s, std::string_view what) {
  if (s == kNone) return std::nullopt;
  return parse_int(s, what);
}

std::optional<double> parse_opt_double(const std::string& s, std::string_view what) {
  if (s == kNone) return std::nullopt;
  return parse_double(s, what);
}

bool parse_bool(const std::string& s, std::string_view what) {
  if (s == "true") return true;
  if (s == "false") return false;
  throw ValidationError("bad boolean '" + s + "' for " + std::string(what));
}

void put_finding(KeyValues& kv, const std::string& prefix, const std::optional<TemplateFinding>& f) {
  kv.set(prefix + ".id", f ? std::to_string(f->template_id) : std::string(kNone));
  kv.set(prefix + ".count", f ? std::to_string(f->count) : std::string(kNone));
}

std::optional<TemplateFinding> get_finding(const KeyValues& kv, const std::string& prefix) {
  const auto id = parse_opt_int(kv.require(prefix + ".id"), prefix + ".id");
  const auto count = parse_opt_int(kv.require(prefix + ".count"), prefix + ".count");
  if (id.has_value() != count.has_value()) throw ValidationError(prefix + ": id and count must both be set");
  if (!id) return std::nullopt;
  return TemplateFinding{*id, *count};
}

KeyValues parse_body(std::string_view text, std::string_view header) {
  const auto nl = text.find('\n');
  if (text.substr(0, nl) != header) throw ValidationError("expected header '" + std::string(header) + "'");
  return KeyValues::parse(text, header);
}

void check_schema(const KeyValues& fields, const std::vector<std::string_view>& schema) {
  for (auto key : schema) {
    if (!fields.contains(key)) throw ValidationError("report is missing required field '" + std::string(key) + "'");
  }
}

}  // namespace

const std::vector<std::string_view>& record_schema() {
  static const std::vector<std::string_view> schema{
      "encoder",        "dims",           "noise_kind",        "noise_intensity",
      "run_index",      "seed",           "max_shift",         "wolf_min",
      "goat_min",       "genuine_count",  "imposter_count",    "consistent",
      "t_eer",          "eer",            "band.a",            "band.b",
      "band.width",     "first_wolf.id",  "first_wolf.count",  "first_goat.id",
      "first_goat.count", "last_wolf.id", "last_wolf.count",   "last_goat.id",
      "last_goat.count", "f3vdm.far_at_b", "f3vdm.frr_at_a",   "f3vdm.genuine_discomfort",
      "f3vdm.imposter_discomfort", "f3vdm.total_discomfort"};
  return schema;
}

const std::vector<std::string_view>& stability_schema() {
  static const std::vector<std::string_view> schema = [] {
    std::vector<std::string_view> s{"encoder", "dims", "noise_kind", "noise_intensity", "repetitions"};
    static const std::vector<std::string> role_keys = [] {
      std::vector<std::string> keys;
      for (Role r : kRoles) {
        for (const char* suffix : {".baseline", ".runs", ".distinct", ".agreement", ".verdict"}) {
          keys.push_back(std::string(to_string(r)) + suffix);
        }
      }
      return keys;
    }();
    for (const auto& k : role_keys) s.push_back(k);
    return s;
  }();
  return schema;
}

KeyValues record_fields(const AnalysisRecord& r) {
  KeyValues kv;
  kv.set("encoder", r.encoder);
  kv.set("dims", r.dims);
  kv.set("noise_kind", r.noise_kind);
  kv.set("noise_intensity", exact_decimal(r.noise_intensity));
  kv.set("run_index", std::to_string(r.run_index));
  kv.set("seed", r.seed ? std::to_string(*r.seed) : std::string(kNone));
  kv.set("max_shift", std::to_string(r.max_shift));
  kv.set("wolf_min", std::to_string(r.wolf_min));
  kv.set("goat_min", std::to_string(r.goat_min));
  kv.set("genuine_count", std::to_string(r.genuine_count));
  kv.set("imposter_count", std::to_string(r.imposter_count));
  kv.set("consistent", r.consistent ? "true" : "false");
  kv.set("t_eer", r.eer ? format_fixed4(r.eer->threshold) : std::string(kNone));
  kv.set("eer", r.eer ? format_sci(r.eer->eer, 3) : std::string(kNone));
  if (r.band) {
    const double a = round4(r.band->a);
    const double b = round4(r.band->b);
    kv.set("band.a", format_fixed4(a));
    kv.set("band.b", format_fixed4(b));
    kv.set("band.width", format_fixed4(b - a));
  } else {
    kv.set("band.a", std::string(kNone));
    kv.set("band.b", std::string(kNone));
    kv.set("band.width", std::string(kNone));
  }
  put_finding(kv, "first_wolf", r.first_wolf);
  put_finding(kv, "first_goat", r.first_goat);
  put_finding(kv, "last_wolf", r.last_wolf);
  put_finding(kv, "last_goat", r.last_goat);
  const auto rate = [&](double F3vdmReport::*field) {
    return r.f3vdm ? format_sci((*r.f3vdm).*field, 5) : std::string(kNone);
  };
  kv.set("f3vdm.far_at_b", rate(&F3vdmReport::far_at_b));
  kv.set("f3vdm.frr_at_a", rate(&F3vdmReport::frr_at_a));
  kv.set("f3vdm.genuine_discomfort", rate(&F3vdmReport::genuine_discomfort));
  kv.set("f3vdm.imposter_discomfort", rate(&F3vdmReport::imposter_discomfort));
  kv.set("f3vdm.total_discomfort", rate(&F3vdmReport::total_discomfort));
  return kv;
}

AnalysisRecord record_from_fields(const KeyValues& kv) {
  check_schema(kv, record_schema());
  AnalysisRecord r;
  r.encoder = kv.require("encoder");
  r.dims = kv.require("dims");
  r.noise_kind = kv.require("noise_kind");
  r.noise_intensity = parse_double(kv.require("noise_intensity"), "noise_intensity");
  r.run_index = parse_int(kv.require("run_index"), "run_index");
  if (kv.require("seed") != kNone) r.seed = parse_u64(kv.require("seed"), "seed");
  r.max_shift = parse_int(kv.require("max_shift"), "max_shift");
  r.wolf_min = parse_int(kv.require("wolf_min"), "wolf_min");
  r.goat_min = parse_int(kv.require("goat_min"), "goat_min");
  r.genuine_count = parse_u64(kv.require("genuine_count"), "genuine_count");
  r.imposter_count = parse_u64(kv.require("imposter_count"), "imposter_count");
  r.consistent = parse_bool(kv.require("consistent"), "consistent");
  const auto t = parse_opt_double(kv.require("t_eer"), "t_eer");
  const auto e = parse_opt_double(kv.require("eer"), "eer");
  if (t.has_value() != e.has_value()) throw ValidationError("t_eer and eer must both be set");
  if (t) r.eer = EerPoint{*t, *e};
  const auto a = parse_opt_double(kv.require("band.a"), "band.a");
  const auto b = parse_opt_double(kv.require("band.b"), "band.b");
  if (a.has_value() != b.has_value()) throw ValidationError("band.a and band.b must both be set");
  if (a) r.band = Band{*a, *b};
  r.first_wolf = get_finding(kv, "first_wolf");
  r.first_goat = get_finding(kv, "first_goat");
  r.last_wolf = get_finding(kv, "last_wolf");
  r.last_goat = get_finding(kv, "last_goat");
  const auto far = parse_opt_double(kv.require("f3vdm.far_at_b"), "f3vdm.far_at_b");
  if (far && r.band) {
    F3vdmReport f;
    f.band = *r.band;
    f.far_at_b = *far;
    f.frr_at_a = parse_double(kv.require("f3vdm.frr_at_a"), "f3vdm.frr_at_a");
    f.genuine_discomfort = parse_double(kv.require("f3vdm.genuine_discomfort"), "f3vdm.genuine_discomfort");
    f.imposter_discomfort = parse_double(kv.require("f3vdm.imposter_discomfort"), "f3vdm.imposter_discomfort");
    f.total_discomfort = parse_double(kv.require("f3vdm.total_discomfort"), "f3vdm.total_discomfort");
    r.f3vdm = f;
  }
  return r;
}

KeyValues stability_fields(const StabilityReport& s) {
  KeyValues kv;
  kv.set("encoder", s.encoder);
  kv.set("dims", s.dims);
  kv.set("noise_kind", s.noise_kind);
  kv.set("noise_intensity", exact_decimal(s.noise_intensity));
  kv.set("repetitions", std::to_string(s.repetitions));
  for (const auto& rs : s.roles) {
    const std::string p(to_string(rs.role));
    kv.set(p + ".baseline", opt_int(rs.baseline_id));
    std::string runs;
    for (std::size_t k = 0; k < rs.run_ids.size(); ++k) {
      if (k) runs += ",";
      runs += opt_int(rs.run_ids[k]);
    }
    kv.set(p + ".runs", runs);
    kv.set(p + ".distinct", std::to_string(rs.distinct_templates));
    kv.set(p + ".agreement", format_fixed4(rs.agreement_with_baseline));
    kv.set(p + ".verdict", std::string(to_string(rs.verdict)));
  }
  return kv;
}

StabilityReport stability_from_fields(const KeyValues& kv) {
  check_schema(kv, stability_schema());
  StabilityReport s;
  s.encoder = kv.require("encoder");
  s.dims = kv.require("dims");
  s.noise_kind = kv.require("noise_kind");
  s.noise_intensity = parse_double(kv.require("noise_intensity"), "noise_intensity");
  s.repetitions = parse_int(kv.require("repetitions"), "repetitions");
  for (Role role : kRoles) {
    auto& rs = s.roles[static_cast<std::size_t>(role)];
    const std::string p(to_string(role));
    rs.role = role;
    rs.baseline_id = parse_opt_int(kv.require(p + ".baseline"), p + ".baseline");
    const std::string& runs = kv.require(p + ".runs");
    std::size_t start = 0;
    while (start <= runs.size() && !runs.empty()) {
      const auto comma = runs.find(',', start);
      rs.run_ids.push_back(parse_opt_int(runs.substr(start, comma - start), p + ".runs"));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rs.distinct_templates = parse_int(kv.require(p + ".distinct"), p + ".distinct");
    rs.agreement_with_baseline = parse_double(kv.require(p + ".agreement"), p + ".agreement");
    const std::string& v = kv.require(p + ".verdict");
    if (v == "stable") {
      rs.verdict = Verdict::kStable;
    } else if (v == "unstable") {
      rs.verdict = Verdict::kUnstable;
    } else if (v == "not-exemplified") {
      rs.verdict = Verdict::kNotExemplified;
    } else {
      throw ValidationError("bad verdict '" + v + "'");
    }
  }
  return s;
}

KeyValues noise_spec_fields(const NoiseSpec& spec) {
  KeyValues kv;
  kv.set("noise.kind", std::string(to_string(spec.kind)));
  kv.set("noise.density", exact_decimal(spec.density));
  kv.set("noise.var_scale", exact_decimal(spec.variance_scale));
  kv.set("noise.blur_len", std::to_string(spec.blur_length));
  kv.set("noise.blur_angle", exact_decimal(spec.blur_angle_deg));
  kv.set("noise.blur_angle_jitter", exact_decimal(spec.blur_angle_jitter_deg));
  kv.set("noise.seed", std::to_string(spec.seed));
  return kv;
}

KeyValues calibration_fields(const CalibrationResult& result) {
  KeyValues kv = noise_spec_fields(result.spec);
  kv.set("calibration.intensity", exact_decimal(result.spec.intensity()));
  kv.set("calibration.measured_eer", format_sci(result.measured_eer, 3));
  kv.set("calibration.baseline_eer", format_sci(result.baseline_eer, 3));
  kv.set("calibration.bound", format_sci(result.bound, 3));
  kv.set("calibration.steps", std::to_string(result.trace.size()));
  for (std::size_t k = 0; k < result.trace.size(); ++k) {
    const auto& step = result.trace[k];
    kv.set("trace." + std::to_string(k + 1),
           exact_decimal(step.intensity) + " " + format_sci(step.eer, 3) + (step.within_bound ? " ok" : " exceeds"));
  }
  return kv;
}

std::string render_fields(std::string_view header, const KeyValues& fields,
                          const std::vector<std::string_view>& schema) {
  check_schema(fields, schema);
  std::ostringstream out;
  out << header << "\n";
  for (auto key : schema) out << key << " = " << *fields.find(key) << "\n";
  for (const auto& [k, v] : fields.entries()) {
    bool listed = false;
    for (auto key : schema) listed = listed || key == k;
    if (!listed) out << k << " = " << v << "\n";
  }
  return out.str();
}

std::string render_record(const AnalysisRecord& record) {
  return render_fields(kRecordHeader, record_fields(record), record_schema());
}

std::string render_stability(const StabilityReport& report) {
  return render_fields(kStabilityHeader, stability_fields(report), stability_schema());
}

std::string render_calibration(const CalibrationResult& result) {
  static const std::vector<std::string_view> schema{"noise.kind", "calibration.intensity",
                                                    "calibration.measured_eer", "calibration.baseline_eer"};
  return render_fields(kCalibrationHeader, calibration_fields(result), schema);
}

AnalysisRecord parse_record(std::string_view text) { return record_from_fields(parse_body(text, kRecordHeader)); }

StabilityReport parse_stability(std::string_view text) {
  return stability_from_fields(parse_body(text, kStabilityHeader));
}

void write_report(const AnalysisRecord& record, const std::filesystem::path& path) {
  write_text_file(path, render_record(record));
}

void write_report(const StabilityReport& report, const std::filesystem::path& path) {
  write_text_file(path, render_stability(report));
}

}  // namespace fbm
