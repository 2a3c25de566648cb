#pragma once

// Dataset ingestion, the synthetic dataset generator, and persistence of
// iris codes, score matrices and score histograms.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fbm/codespace.hpp"
#include "fbm/encoders.hpp"
#include "fbm/menagerie.hpp"

namespace fbm {

struct Dataset {
  std::vector<IrisSegment> segments;
  std::set<std::string> subjects;
  std::string provenance;
  std::vector<std::string> warnings;

  void validate() const;
};

// Regex whose first two groups (subject, eye) form the subject id and whose
// third group is the image index. Files are ordered by (subject, eye, index).
inline constexpr const char* kDefaultNamePattern = R"(^([^_]+)_([^_]+)_([0-9]+)\.pgm$)";

Dataset load_dataset(const std::filesystem::path& dir, const std::string& name_pattern = kDefaultNamePattern);

struct SynthSpec {
  int subjects = 30;
  int images_per_subject = 5;
  int width = 256;
  int height = 32;
  std::uint64_t seed = 2012;
  int shift_max = 6;              // columns
  double noise_sigma = 0.10;      // intensity jitter, [0, 1] units
  int sinusoids = 12;
  int max_angular_frequency = 40;  // cycles per row
  double max_radial_frequency = 2.0;  // cycles over the segment height

  void validate() const;
};

// Subject k is eye (k % 2 ? R : L) of person k / 2 + 1, labelled "0001_L".
Dataset synth_dataset(const SynthSpec& spec);

// File name the loader maps back to the same subject, e.g. "0001_L_3.pgm".
std::string segment_file_name(const IrisSegment& segment, int index_within_subject);
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);

IrisSegment read_pgm(const std::filesystem::path& path, int image_id, std::string subject_id);
void write_pgm(const IrisSegment& segment, const std::filesystem::path& path);

// "iriscode v1 rows=R cols=C encoder=TAG count=N", then per code
// "templateId subjectId hexbits" (row-major, MSB first).
void write_codes(std::ostream& out, std::span<const IrisCode> codes);
std::vector<IrisCode> read_codes(std::istream& in, bool allow_any_shape = false);
void save_codes(const std::filesystem::path& path, std::span<const IrisCode> codes);
std::vector<IrisCode> load_codes(const std::filesystem::path& path, bool allow_any_shape = false);

struct ScoreFileInfo {
  std::string encoder = "unknown";
  std::string dims = "unknown";
  int max_shift = 0;
};

// CSV "idA,idB,kind,score" preceded by '#' header lines naming encoder,
// dims and max shift, and one "# template,<id>,<subject>" line per template.
void write_scores(std::ostream& out, const ComparisonSet& set, const ScoreFileInfo& info);
ComparisonSet read_scores(std::istream& in, ScoreFileInfo* info = nullptr);
void save_scores(const ComparisonSet& set, const std::filesystem::path& path, const ScoreFileInfo& info = {});
ComparisonSet load_scores(const std::filesystem::path& path, ScoreFileInfo* info = nullptr);

// "bin_low,bin_high,genuine_count,imposter_count".
void write_histogram(std::ostream& out, std::span<const HistogramBin> bins);

// Shortest decimal text that parses back to the same double.
std::string exact_decimal(double value);

// Writes to path.tmp then renames; throws IoError on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace fbm
