#include "fbm/experiment.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "fbm/error.hpp"
#include "fbm/report.hpp"

namespace fbm {

namespace fs = std::filesystem;

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ValidationError("repetitions must be >= 1");
  if (!seeds.empty() && seeds.size() != static_cast<std::size_t>(repetitions)) {
    throw ValidationError("seeds must list exactly one seed per repetition");
  }
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ValidationError("seeds must be distinct");
  }
  if (wolf_min < 1 || goat_min < 1) throw ValidationError("wolf_min and goat_min must be >= 1");
  if (max_shift < 0) throw ValidationError("max_shift must be >= 0");
  if (!band_narrowing && !eer_threshold) throw ValidationError("at least one security setting is required");
  if (!shape.is_supported()) throw ValidationError("unsupported code shape " + shape.str());
  if (encoder == EncoderTag::kLogGabor && shape.rows % 2 != 0) {
    throw ValidationError("log-Gabor codes need an even row count");
  }
  encoder_params.validate();
  noise.validate();
  if (calibrate && noise.kind == NoiseKind::kNone) throw ValidationError("calibration needs a noise kind");
  if (calibrate && !(calibrate_max_ratio > 0.0)) throw ValidationError("calibrate.max_ratio must be > 0");
  if (!dataset_path) synth.validate();
}

AnalysisSettings ExperimentConfig::analysis_settings() const {
  return {band_narrowing, eer_threshold, wolf_min, goat_min};
}

namespace {

const std::vector<std::string_view> kConfigKeys{
    "name",     "dataset",    "dataset.", "synth.",   "encoder",  "encoder.", "dims",     "max_shift",
    "noise.",   "calibrate",  "calibrate.", "repetitions", "seeds", "settings", "wolf_min", "goat_min"};

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    const auto b = item.find_first_not_of(" \t");
    const auto e = item.find_last_not_of(" \t");
    if (b == std::string::npos) continue;
    seeds.push_back(parse_u64(item.substr(b, e - b + 1), "seeds"));
  }
  return seeds;
}

NoiseSpec run_noise(const ExperimentConfig& config, int run_index) {
  NoiseSpec spec = config.noise;
  if (spec.kind == NoiseKind::kNone) return spec;
  spec.seed = config.seeds.empty() ? static_cast<std::uint64_t>(run_index)
                                   : config.seeds.at(static_cast<std::size_t>(run_index - 1));
  return spec;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_key_values(const KeyValues& kv) {
  kv.check_known(kConfigKeys);
  ExperimentConfig c;
  c.name = kv.get_string("name", c.name);
  const std::string dataset = kv.get_string("dataset", "synthetic");
  if (dataset != "synthetic") {
    c.dataset_path = kv.get_string("dataset.path", dataset);
  } else if (kv.contains("dataset.path")) {
    c.dataset_path = kv.require("dataset.path");
  }
  c.name_pattern = kv.get_string("dataset.pattern", c.name_pattern);

  auto& s = c.synth;
  s.subjects = kv.get_int("synth.subjects", s.subjects);
  s.images_per_subject = kv.get_int("synth.images_per_subject", s.images_per_subject);
  s.width = kv.get_int("synth.width", s.width);
  s.height = kv.get_int("synth.height", s.height);
  s.seed = kv.get_u64("synth.seed", s.seed);
  s.shift_max = kv.get_int("synth.shift_max", s.shift_max);
  s.noise_sigma = kv.get_double("synth.noise_sigma", s.noise_sigma);
  s.sinusoids = kv.get_int("synth.sinusoids", s.sinusoids);
  s.max_angular_frequency = kv.get_int("synth.max_angular_frequency", s.max_angular_frequency);
  s.max_radial_frequency = kv.get_double("synth.max_radial_frequency", s.max_radial_frequency);

  c.encoder = parse_encoder_tag(kv.get_string("encoder", std::string(to_string(c.encoder))));
  c.shape = CodeShape::parse(kv.get_string("dims", c.shape.str()));
  c.encoder_params.wavelength_fraction =
      kv.get_double("encoder.wavelength_fraction", c.encoder_params.wavelength_fraction);
  c.encoder_params.sigma_ratio = kv.get_double("encoder.sigma_ratio", c.encoder_params.sigma_ratio);
  c.max_shift = kv.get_int("max_shift", c.max_shift);

  auto& n = c.noise;
  n.kind = parse_noise_kind(kv.get_string("noise.kind", "none"));
  n.density = kv.get_double("noise.density", n.density);
  n.variance_scale = kv.get_double("noise.var_scale", n.variance_scale);
  n.blur_length = kv.get_int("noise.blur_len", n.blur_length);
  n.blur_angle_deg = kv.get_double("noise.blur_angle", n.blur_angle_deg);
  n.blur_angle_jitter_deg = kv.get_double("noise.blur_angle_jitter", n.blur_angle_jitter_deg);

  c.calibrate = kv.get_bool("calibrate", c.calibrate);
  c.calibrate_max_ratio = kv.get_double("calibrate.max_ratio", c.calibrate_max_ratio);
  c.calibrate_seed = kv.get_u64("calibrate.seed", c.calibrate_seed);
  c.calibrate_iterations = kv.get_int("calibrate.iterations", c.calibrate_iterations);
  c.calibrate_upper = kv.get_double("calibrate.upper", c.calibrate_upper);

  c.repetitions = kv.get_int("repetitions", c.repetitions);
  if (auto seeds = kv.find("seeds")) c.seeds = parse_seeds(*seeds);
  if (auto settings = kv.find("settings")) {
    c.band_narrowing = settings->find("band") != std::string::npos;
    c.eer_threshold = settings->find("eer") != std::string::npos;
  }
  c.wolf_min = kv.get_int("wolf_min", c.wolf_min);
  c.goat_min = kv.get_int("goat_min", c.goat_min);
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const fs::path& path) { return from_key_values(KeyValues::load(path)); }

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv;
  kv.set("name", name);
  if (dataset_path) {
    kv.set("dataset", "directory");
    kv.set("dataset.path", *dataset_path);
    kv.set("dataset.pattern", name_pattern);
  } else {
    kv.set("dataset", "synthetic");
    kv.set("synth.subjects", std::to_string(synth.subjects));
    kv.set("synth.images_per_subject", std::to_string(synth.images_per_subject));
    kv.set("synth.width", std::to_string(synth.width));
    kv.set("synth.height", std::to_string(synth.height));
    kv.set("synth.seed", std::to_string(synth.seed));
    kv.set("synth.shift_max", std::to_string(synth.shift_max));
    kv.set("synth.noise_sigma", exact_decimal(synth.noise_sigma));
    kv.set("synth.sinusoids", std::to_string(synth.sinusoids));
    kv.set("synth.max_angular_frequency", std::to_string(synth.max_angular_frequency));
    kv.set("synth.max_radial_frequency", exact_decimal(synth.max_radial_frequency));
  }
  kv.set("encoder", std::string(to_string(encoder)));
  kv.set("dims", shape.str());
  kv.set("encoder.wavelength_fraction", exact_decimal(encoder_params.wavelength_fraction));
  kv.set("encoder.sigma_ratio", exact_decimal(encoder_params.sigma_ratio));
  kv.set("max_shift", std::to_string(max_shift));
  const KeyValues noise_kv = noise_spec_fields(noise);
  for (const auto& [k, v] : noise_kv.entries()) {
    if (k != "noise.seed") kv.set(k, v);
  }
  kv.set("calibrate", calibrate ? "true" : "false");
  kv.set("calibrate.max_ratio", exact_decimal(calibrate_max_ratio));
  kv.set("calibrate.seed", std::to_string(calibrate_seed));
  kv.set("calibrate.iterations", std::to_string(calibrate_iterations));
  kv.set("calibrate.upper", exact_decimal(calibrate_upper));
  kv.set("repetitions", std::to_string(repetitions));
  std::string s;
  for (std::size_t k = 0; k < seeds.size(); ++k) s += (k ? "," : "") + std::to_string(seeds[k]);
  if (!s.empty()) kv.set("seeds", s);
  kv.set("settings", std::string(band_narrowing ? "band" : "") + (band_narrowing && eer_threshold ? "," : "") +
                         (eer_threshold ? "eer" : ""));
  kv.set("wolf_min", std::to_string(wolf_min));
  kv.set("goat_min", std::to_string(goat_min));
  return kv;
}

Dataset load_or_synthesize(const ExperimentConfig& config) {
  Dataset ds = config.dataset_path ? load_dataset(*config.dataset_path, config.name_pattern)
                                   : synth_dataset(config.synth);
  ds.validate();
  if (ds.subjects.size() < 2) throw ValidationError("dataset needs at least 2 subjects for matching");
  return ds;
}

AnalysisRecord run_test(const ExperimentConfig& config, const Dataset& dataset, const NoiseSpec& noise,
                        int run_index) {
  try {
    const auto noisy = apply_noise_all(dataset.segments, noise);
    const auto codes = encode_all(config.encoder, noisy, config.shape, config.encoder_params);
    const auto set = score_matrix(codes, {.max_shift = config.max_shift});
    AnalysisRecord record = analyze_comparisons(set, config.analysis_settings());
    record.encoder = std::string(to_string(config.encoder));
    record.dims = config.shape.str();
    record.noise_kind = std::string(to_string(noise.kind));
    record.noise_intensity = noise.intensity();
    record.run_index = run_index;
    if (noise.kind != NoiseKind::kNone) record.seed = noise.seed;
    record.max_shift = config.max_shift;
    return record;
  } catch (const ValidationError& e) {
    throw ValidationError(config.name + " run " + std::to_string(run_index) + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(config.name + " run " + std::to_string(run_index) + ": " + e.what());
  }
}

AnalysisRecord run_test(const ExperimentConfig& config, const Dataset& dataset, int run_index) {
  if (run_index < 1 || run_index > config.repetitions) {
    throw ValidationError("run index " + std::to_string(run_index) + " outside 1.." +
                          std::to_string(config.repetitions));
  }
  return run_test(config, dataset, run_noise(config, run_index), run_index);
}

std::string_view to_string(Role role) {
  switch (role) {
    case Role::kFirstWolf:
      return "first_wolf";
    case Role::kFirstGoat:
      return "first_goat";
    case Role::kLastWolf:
      return "last_wolf";
    case Role::kLastGoat:
      return "last_goat";
  }
  return "unknown";
}

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::kStable:
      return "stable";
    case Verdict::kUnstable:
      return "unstable";
    case Verdict::kNotExemplified:
      return "not-exemplified";
  }
  return "unknown";
}

std::optional<int> role_template(const AnalysisRecord& record, Role role) {
  const std::optional<TemplateFinding>* f = nullptr;
  switch (role) {
    case Role::kFirstWolf:
      f = &record.first_wolf;
      break;
    case Role::kFirstGoat:
      f = &record.first_goat;
      break;
    case Role::kLastWolf:
      f = &record.last_wolf;
      break;
    case Role::kLastGoat:
      f = &record.last_goat;
      break;
  }
  if (!f || !f->has_value()) return std::nullopt;
  return (*f)->template_id;
}

StabilityReport stability_report(std::span<const AnalysisRecord> records, const AnalysisRecord& baseline) {
  if (records.empty()) throw ValidationError("stability report needs at least one run record");
  StabilityReport report;
  report.encoder = records.front().encoder;
  report.dims = records.front().dims;
  report.noise_kind = records.front().noise_kind;
  report.noise_intensity = records.front().noise_intensity;
  report.repetitions = static_cast<int>(records.size());
  for (Role role : kRoles) {
    RoleStability& rs = report.roles[static_cast<std::size_t>(role)];
    rs.role = role;
    rs.baseline_id = role_template(baseline, role);
    std::set<int> distinct;
    int agree = 0;
    bool any = rs.baseline_id.has_value();
    for (const auto& rec : records) {
      const auto id = role_template(rec, role);
      rs.run_ids.push_back(id);
      if (id) {
        distinct.insert(*id);
        any = true;
      }
      if (id == rs.baseline_id) ++agree;
    }
    rs.distinct_templates = static_cast<int>(distinct.size());
    rs.agreement_with_baseline = static_cast<double>(agree) / static_cast<double>(records.size());
    if (!any) {
      rs.verdict = Verdict::kNotExemplified;
    } else {
      rs.verdict = agree == static_cast<int>(records.size()) ? Verdict::kStable : Verdict::kUnstable;
    }
  }
  return report;
}

SeriesResult run_series(const ExperimentConfig& config, const std::optional<fs::path>& out_dir) {
  config.validate();
  SeriesResult result;
  result.config = config;
  const Dataset dataset = load_or_synthesize(config);

  const auto persist = [&](const std::string& file, const std::string& text) {
    if (out_dir) write_text_file(*out_dir / file, text);
  };

  result.baseline = run_test(config, dataset, NoiseSpec{}, 0);
  persist("baseline.txt", render_record(result.baseline));

  if (config.calibrate) {
    double baseline_eer = 0.0;
    if (result.baseline.eer) {
      baseline_eer = result.baseline.eer->eer;
    } else {
      baseline_eer = measure_eer(dataset.segments, NoiseSpec{}, config.encoder, config.shape, config.encoder_params,
                                 config.max_shift);
    }
    CalibrationOptions opts;
    opts.encoder = config.encoder;
    opts.shape = config.shape;
    opts.encoder_params = config.encoder_params;
    opts.max_shift = config.max_shift;
    opts.max_ratio = config.calibrate_max_ratio;
    opts.iterations = config.calibrate_iterations;
    opts.upper = config.calibrate_upper;
    opts.calibration_seed = config.calibrate_seed;
    opts.base = config.noise;
    result.calibration = calibrate_noise(dataset.segments, config.noise.kind, baseline_eer, opts);
    result.config.noise = result.calibration->spec;
    result.config.noise.seed = 0;
    result.config.calibrate = false;
    persist("calibration.txt", render_calibration(*result.calibration));
  }

  for (int k = 1; k <= config.repetitions; ++k) {
    result.runs.push_back(run_test(result.config, dataset, k));
    persist("run_" + std::to_string(k) + ".txt", render_record(result.runs.back()));
  }
  result.stability = stability_report(result.runs, result.baseline);
  persist("stability.txt", render_stability(result.stability));
  return result;
}

}  // namespace fbm
