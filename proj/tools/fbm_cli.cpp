// fbm: command-line front end for every pipeline stage.
//
// Exit codes: 0 success, 2 validation error, 3 I/O error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fbm/analysis.hpp"
#include "fbm/error.hpp"
#include "fbm/experiment.hpp"
#include "fbm/harness.hpp"
#include "fbm/menagerie.hpp"
#include "fbm/noise.hpp"
#include "fbm/report.hpp"

using namespace fbm;
namespace fs = std::filesystem;

namespace {

struct GlobalOptions {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> config;
  std::optional<std::string> out;
  std::optional<std::string> dims;
  std::optional<std::string> encoder;
  std::optional<int> wolf_min;
  std::optional<int> goat_min;
  std::optional<int> max_shift;
  std::optional<std::string> pattern;
  std::optional<double> wavelength_fraction;
  std::optional<double> sigma_ratio;
  unsigned threads = 0;
};

// Config file first, then explicit flags.
ExperimentConfig resolve(const GlobalOptions& g) {
  ExperimentConfig c = g.config ? ExperimentConfig::load(*g.config) : ExperimentConfig{};
  if (g.dims) c.shape = CodeShape::parse(*g.dims);
  if (g.encoder) c.encoder = parse_encoder_tag(*g.encoder);
  if (g.wolf_min) c.wolf_min = *g.wolf_min;
  if (g.goat_min) c.goat_min = *g.goat_min;
  if (g.max_shift) c.max_shift = *g.max_shift;
  if (g.pattern) c.name_pattern = *g.pattern;
  if (g.wavelength_fraction) c.encoder_params.wavelength_fraction = *g.wavelength_fraction;
  if (g.sigma_ratio) c.encoder_params.sigma_ratio = *g.sigma_ratio;
  c.validate();
  return c;
}

void emit(const std::optional<std::string>& out, const std::string& text) {
  if (out) {
    write_text_file(*out, text);
  } else {
    std::cout << text;
  }
}

const std::string& require_out(const GlobalOptions& g, std::string_view what) {
  if (!g.out) throw ValidationError(std::string(what) + " needs --out");
  return *g.out;
}

Dataset input_dataset(const std::optional<std::string>& in, const ExperimentConfig& c) {
  if (in) return load_dataset(*in, c.name_pattern);
  return load_or_synthesize(c);
}

void print_warnings(const Dataset& ds) {
  for (const auto& w : ds.warnings) std::cerr << "warning: " << w << "\n";
}

ComparisonSet input_scores(const std::string& path) {
  ComparisonSet set = load_scores(path);
  set.validate();
  return set;
}

std::string opt_id(const std::optional<TemplateFinding>& f) {
  return f ? std::to_string(f->template_id) + " (" + std::to_string(f->count) + ")" : "none";
}

std::string join_ids(const std::set<int>& ids) {
  if (ids.empty()) return "none";
  std::string s;
  for (int id : ids) s += (s.empty() ? "" : ",") + std::to_string(id);
  return s;
}

Band parse_band(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw ValidationError("band must be written a,b: " + text);
  const Band band{parse_double(text.substr(0, comma), "band"), parse_double(text.substr(comma + 1), "band")};
  validate_setting(band);
  return band;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fuzzy biometric menagerie toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Seed for the stage's random draws");
  app.add_option("--config", g.config, "Experiment config file supplying defaults");
  app.add_option("--out", g.out, "Output file or directory");
  app.add_option("--dims", g.dims, "Code shape RxC (4x64, 8x128, 16x256)");
  app.add_option("--encoder", g.encoder, "Encoder tag (log-gabor, haar-hilbert)");
  app.add_option("--wolf-min", g.wolf_min, "Impersonations that make a wolf");
  app.add_option("--goat-min", g.goat_min, "Rejections that make a goat");
  app.add_option("--max-shift", g.max_shift, "Circular column shifts tried per comparison");
  app.add_option("--pattern", g.pattern, "Segment file name regex");
  app.add_option("--wavelength-fraction", g.wavelength_fraction, "Log-Gabor wavelength as a fraction of the row");
  app.add_option("--sigma-ratio", g.sigma_ratio, "Log-Gabor sigma / f0");
  app.add_option("--threads", g.threads, "Worker threads (0 = all cores)");

  // synth
  auto* synth = app.add_subcommand("synth", "Write a synthetic segment dataset");
  std::optional<int> subjects, images, width, height, shift_max;
  std::optional<double> noise_sigma;
  synth->add_option("--subjects", subjects);
  synth->add_option("--images", images, "Images per subject");
  synth->add_option("--width", width);
  synth->add_option("--height", height);
  synth->add_option("--shift-max", shift_max);
  synth->add_option("--noise-sigma", noise_sigma);

  // encode
  auto* encode_cmd = app.add_subcommand("encode", "Encode a segment directory into an iris code file");
  std::optional<std::string> in;
  encode_cmd->add_option("--in", in, "Segment directory (default: the config's dataset)");

  // noise
  auto* noise_cmd = app.add_subcommand("noise", "Apply a noise model to a segment directory");
  std::string kind;
  std::optional<double> density, var_scale, blur_angle, blur_jitter;
  std::optional<int> blur_len;
  noise_cmd->add_option("--kind", kind, "saltpepper, localvar or motionblur")->required();
  noise_cmd->add_option("--density", density);
  noise_cmd->add_option("--var-scale", var_scale);
  noise_cmd->add_option("--blur-len", blur_len);
  noise_cmd->add_option("--blur-angle", blur_angle);
  noise_cmd->add_option("--blur-angle-jitter", blur_jitter);
  noise_cmd->add_option("--in", in, "Segment directory (default: the config's dataset)");

  // match
  auto* match = app.add_subcommand("match", "Exhaustively match an iris code file");
  std::string codes_path;
  std::optional<std::string> histogram;
  int bins = 512;
  match->add_option("--in", codes_path, "Iris code file")->required();
  match->add_option("--histogram", histogram, "Also write the score histogram CSV here");
  match->add_option("--bins", bins);

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Menagerie analysis of a score file");
  analyze->require_subcommand(1);
  std::string scores_path;
  std::optional<std::string> band_text;
  std::optional<double> threshold;
  auto* first = analyze->add_subcommand("first", "First wolf and first goat under band narrowing");
  auto* last = analyze->add_subcommand("last", "Last wolf and last goat at the EER threshold");
  auto* partition = analyze->add_subcommand("partition", "Wolves, goats, lambs and sheep");
  auto* f3vdm = analyze->add_subcommand("f3vdm", "Three-valent decision report for a band");
  for (auto* sub : {first, last, partition, f3vdm}) {
    sub->fallthrough();
    sub->add_option("--in", scores_path, "Score file")->required();
  }
  partition->add_option("--band", band_text, "Band a,b (default: the narrowed band)");
  partition->add_option("--threshold", threshold, "Threshold (overrides --band)");
  f3vdm->add_option("--band", band_text, "Band a,b (default: the narrowed band)");

  // calibrate
  auto* calibrate = app.add_subcommand("calibrate", "Find the largest noise intensity within the EER bound");
  std::string cal_kind;
  std::optional<double> baseline_eer, upper, blur_angle_cal;
  double max_ratio = 2.0;
  int iterations = 8;
  calibrate->add_option("--kind", cal_kind)->required();
  calibrate->add_option("--baseline-eer", baseline_eer, "Clean EER (default: measured)");
  calibrate->add_option("--max-ratio", max_ratio);
  calibrate->add_option("--iterations", iterations);
  calibrate->add_option("--upper", upper, "Upper end of the search bracket");
  calibrate->add_option("--blur-angle", blur_angle_cal);
  calibrate->add_option("--in", in, "Segment directory (default: the config's dataset)");

  // experiment
  auto* experiment = app.add_subcommand("experiment", "Run a baseline plus seeded noisy repetitions");

  // report
  auto* report = app.add_subcommand("report", "Analysis record from a score file, or re-check a report");
  std::string report_in;
  report->add_option("--in", report_in, "Score file, analysis record or stability report")->required();

  for (auto* sub : {synth, encode_cmd, noise_cmd, match, analyze, calibrate, experiment, report}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*synth) {
      auto c = resolve(g);
      if (subjects) c.synth.subjects = *subjects;
      if (images) c.synth.images_per_subject = *images;
      if (width) c.synth.width = *width;
      if (height) c.synth.height = *height;
      if (shift_max) c.synth.shift_max = *shift_max;
      if (noise_sigma) c.synth.noise_sigma = *noise_sigma;
      if (g.seed) c.synth.seed = *g.seed;
      const auto ds = synth_dataset(c.synth);
      save_dataset(ds, require_out(g, "synth"));
      std::cout << ds.segments.size() << " segments, " << ds.subjects.size() << " subjects\n";
    } else if (*encode_cmd) {
      const auto c = resolve(g);
      const auto ds = input_dataset(in, c);
      print_warnings(ds);
      Diagnostics diag;
      const auto codes = encode_all(c.encoder, ds.segments, c.shape, c.encoder_params, g.threads, &diag);
      for (const auto& d : diag) std::cerr << "note: " << d << "\n";
      save_codes(require_out(g, "encode"), codes);
      std::cout << codes.size() << " codes, " << to_string(c.encoder) << " " << c.shape.str() << "\n";
    } else if (*noise_cmd) {
      const auto c = resolve(g);
      NoiseSpec spec;
      spec.kind = parse_noise_kind(kind);
      if (density) spec.density = *density;
      if (var_scale) spec.variance_scale = *var_scale;
      if (blur_len) spec.blur_length = *blur_len;
      if (blur_angle) spec.blur_angle_deg = *blur_angle;
      if (blur_jitter) spec.blur_angle_jitter_deg = *blur_jitter;
      spec.seed = g.seed.value_or(0);
      spec.validate();
      const auto out_dir = require_out(g, "noise");
      auto ds = input_dataset(in, c);
      print_warnings(ds);
      ds.segments = apply_noise_all(ds.segments, spec, g.threads);
      save_dataset(ds, out_dir);
      std::cout << render_fields("# fbm noise spec v1", noise_spec_fields(spec), {});
    } else if (*match) {
      const auto c = resolve(g);
      const auto codes = load_codes(codes_path);
      if (codes.empty()) throw ValidationError("no codes in " + codes_path);
      const auto set = score_matrix(codes, {.max_shift = c.max_shift, .threads = g.threads});
      save_scores(set, require_out(g, "match"),
                  {std::string(to_string(codes.front().encoder())), codes.front().shape().str(), c.max_shift});
      if (histogram) {
        std::ostringstream csv;
        write_histogram(csv, score_histogram(split_comparisons(set), bins));
        write_text_file(*histogram, csv.str());
      }
      std::cout << set.comparisons.size() << " comparisons\n";
    } else if (*analyze) {
      const auto c = resolve(g);
      const auto set = input_scores(scores_path);
      const auto record = analyze_comparisons(set, c.analysis_settings());
      std::ostringstream text;
      if (*first) {
        text << "band = " << (record.band ? format_fixed4(record.band->a) + " " + format_fixed4(record.band->b) : "none")
             << "\nfirst_wolf = " << opt_id(record.first_wolf) << "\nfirst_goat = " << opt_id(record.first_goat)
             << "\n";
      } else if (*last) {
        if (!record.eer) throw ValidationError("the EER threshold setting is disabled");
        text << "t_eer = " << format_fixed4(record.eer->threshold) << "\neer = " << format_sci(record.eer->eer, 3)
             << "\nlast_wolf = " << opt_id(record.last_wolf) << "\nlast_goat = " << opt_id(record.last_goat) << "\n";
      } else if (*partition) {
        SecuritySetting setting = record.band.value_or(Band{});
        if (threshold) {
          setting = Threshold{*threshold};
        } else if (band_text) {
          setting = parse_band(*band_text);
        }
        const auto p = fbm_partition(set, setting, c.wolf_min, c.goat_min);
        text << "wolves = " << join_ids(p.wolves) << "\ngoats = " << join_ids(p.goats)
             << "\nlambs = " << join_ids(p.lambs) << "\nsheep = " << p.sheep.size() << "\n";
        for (const auto& t : p.per_template) {
          if (t.impersonations || t.rejections)
            text << "template." << t.template_id << " = " << t.impersonations << " " << t.rejections << "\n";
        }
      } else {
        const Band band = band_text ? parse_band(*band_text) : record.band.value_or(Band{});
        const auto split = split_comparisons(set);
        const auto r = f3vdm_report(split.genuine, split.imposter, band);
        text << "band = " << format_fixed4(band.a) << " " << format_fixed4(band.b)
             << "\nfar_at_b = " << format_sci(r.far_at_b, 5) << "\nfrr_at_a = " << format_sci(r.frr_at_a, 5)
             << "\ngenuine_discomfort = " << format_sci(r.genuine_discomfort, 5)
             << "\nimposter_discomfort = " << format_sci(r.imposter_discomfort, 5)
             << "\ntotal_discomfort = " << format_sci(r.total_discomfort, 5) << "\n";
      }
      emit(g.out, text.str());
    } else if (*calibrate) {
      const auto c = resolve(g);
      const auto ds = input_dataset(in, c);
      print_warnings(ds);
      CalibrationOptions opt;
      opt.encoder = c.encoder;
      opt.shape = c.shape;
      opt.encoder_params = c.encoder_params;
      opt.max_shift = c.max_shift;
      opt.max_ratio = max_ratio;
      opt.iterations = iterations;
      opt.upper = upper.value_or(0.0);
      opt.calibration_seed = g.seed.value_or(opt.calibration_seed);
      opt.base = c.noise;
      if (blur_angle_cal) opt.base.blur_angle_deg = *blur_angle_cal;
      const double base = baseline_eer ? *baseline_eer
                                       : measure_eer(ds.segments, NoiseSpec{}, c.encoder, c.shape, c.encoder_params,
                                                     c.max_shift);
      emit(g.out, render_calibration(calibrate_noise(ds.segments, parse_noise_kind(cal_kind), base, opt)));
    } else if (*experiment) {
      if (!g.config) throw ValidationError("experiment needs --config");
      const auto c = resolve(g);
      const auto result = run_series(c, g.out ? std::optional<fs::path>(*g.out) : std::nullopt);
      std::cout << render_stability(result.stability);
    } else if (*report) {
      const std::string text = read_text_file(report_in);
      if (text.starts_with(kRecordHeader)) {
        emit(g.out, render_record(parse_record(text)));
      } else if (text.starts_with(kStabilityHeader)) {
        emit(g.out, render_stability(parse_stability(text)));
      } else {
        const auto c = resolve(g);
        ScoreFileInfo info;
        std::istringstream scores(text);
        const auto set = read_scores(scores, &info);
        set.validate();
        auto record = analyze_comparisons(set, c.analysis_settings());
        record.encoder = info.encoder;
        record.dims = info.dims;
        record.max_shift = info.max_shift;
        record.wolf_min = c.wolf_min;
        record.goat_min = c.goat_min;
        emit(g.out, render_record(record));
      }
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
