#pragma once

// Series orchestration: a clean baseline plus N noisy repetitions of the
// same (encoder, dims, noise kind) cell, and per-role stability of the
// identified wolf/goat templates across them.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbm/analysis.hpp"
#include "fbm/config.hpp"
#include "fbm/harness.hpp"
#include "fbm/noise.hpp"

namespace fbm {

struct ExperimentConfig {
  std::string name = "experiment";

  // Dataset: a directory of segments, or the synthetic generator.
  std::optional<std::string> dataset_path;
  std::string name_pattern = kDefaultNamePattern;
  SynthSpec synth;

  EncoderTag encoder = EncoderTag::kLogGabor;
  CodeShape shape{4, 64};
  EncoderParams encoder_params;
  int max_shift = 8;

  // Intensity fields are ignored when calibrate is set.
  NoiseSpec noise;
  bool calibrate = false;
  double calibrate_max_ratio = 2.0;
  std::uint64_t calibrate_seed = 0x5eed;
  int calibrate_iterations = 8;
  double calibrate_upper = 0.0;

  int repetitions = 5;
  std::vector<std::uint64_t> seeds;  // one per repetition; default 1..repetitions

  bool band_narrowing = true;
  bool eer_threshold = true;
  int wolf_min = 3;
  int goat_min = 2;

  void validate() const;

  static ExperimentConfig from_key_values(const KeyValues& kv);
  static ExperimentConfig load(const std::filesystem::path& path);
  KeyValues to_key_values() const;

  AnalysisSettings analysis_settings() const;
};

Dataset load_or_synthesize(const ExperimentConfig& config);

// One exhaustive test: noise (with `noise.seed`), encode, match, analyze.
// run_index 0 is reserved for the clean baseline.
AnalysisRecord run_test(const ExperimentConfig& config, const Dataset& dataset, const NoiseSpec& noise,
                        int run_index);

// Seeded run `run_index` (1-based) of the configured series with a resolved
// noise intensity.
AnalysisRecord run_test(const ExperimentConfig& config, const Dataset& dataset, int run_index);

enum class Role { kFirstWolf, kFirstGoat, kLastWolf, kLastGoat };
inline constexpr std::array<Role, 4> kRoles{Role::kFirstWolf, Role::kFirstGoat, Role::kLastWolf, Role::kLastGoat};

std::string_view to_string(Role role);
std::optional<int> role_template(const AnalysisRecord& record, Role role);

enum class Verdict { kStable, kUnstable, kNotExemplified };
std::string_view to_string(Verdict verdict);

struct RoleStability {
  Role role = Role::kFirstWolf;
  std::optional<int> baseline_id;
  std::vector<std::optional<int>> run_ids;
  int distinct_templates = 0;
  double agreement_with_baseline = 0.0;
  Verdict verdict = Verdict::kNotExemplified;

  bool operator==(const RoleStability&) const = default;
};

struct StabilityReport {
  std::string encoder;
  std::string dims;
  std::string noise_kind;
  double noise_intensity = 0.0;
  int repetitions = 0;
  std::array<RoleStability, 4> roles;

  const RoleStability& role(Role r) const { return roles[static_cast<std::size_t>(r)]; }
  bool operator==(const StabilityReport&) const = default;
};

// Pure fold over the per-run records and the clean baseline.
StabilityReport stability_report(std::span<const AnalysisRecord> records, const AnalysisRecord& baseline);

struct SeriesResult {
  ExperimentConfig config;  // with the resolved noise intensity
  AnalysisRecord baseline;
  std::vector<AnalysisRecord> runs;
  std::optional<CalibrationResult> calibration;
  StabilityReport stability;
};

// Baseline, optional calibration against it, then the seeded repetitions.
// With out_dir set, every record is written as soon as it exists, so a
// failing run leaves the completed ones on disk.
SeriesResult run_series(const ExperimentConfig& config,
                        const std::optional<std::filesystem::path>& out_dir = std::nullopt);

}  // namespace fbm
