#pragma once

// Binary iris codes, rotation-compensated similarity and exhaustive
// all-to-all matching.
//
// Codes are bit matrices rows x cols (radial x angular). Each row is packed
// into 64-bit words most-significant bit first: column c of a row lives in
// word c / 64 at bit 63 - (c % 64). Padding bits at the tail of a row's last
// word are always zero so whole-word XOR/popcount never sees garbage.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace fbm {

enum class EncoderTag { kLogGabor, kHaarHilbert };

std::string_view to_string(EncoderTag tag);
EncoderTag parse_encoder_tag(std::string_view text);

struct CodeShape {
  int rows = 0;
  int cols = 0;

  bool operator==(const CodeShape&) const = default;

  // (4,64), (8,128) and (16,256).
  bool is_supported() const;
  // "RxC", e.g. "4x64".
  std::string str() const;
  static CodeShape parse(std::string_view text);
};

// Unpacked boolean grid, row-major. Used for construction and testing.
struct BitGrid {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> bits;

  BitGrid() = default;
  BitGrid(int rows, int cols, bool value = false);

  bool at(int r, int c) const { return bits[static_cast<std::size_t>(r) * cols + c] != 0; }
  void set(int r, int c, bool v) { bits[static_cast<std::size_t>(r) * cols + c] = v ? 1 : 0; }
  bool operator==(const BitGrid&) const = default;
};

class IrisCode {
 public:
  static constexpr int kWordBits = 64;

  // Rejects unsupported shapes unless allow_any_shape is set.
  static IrisCode pack(const BitGrid& grid, int template_id, std::string subject_id,
                       EncoderTag encoder, bool allow_any_shape = false);

  // Takes already-packed row words; validates length and zero padding.
  static IrisCode from_words(CodeShape shape, std::vector<std::uint64_t> words, int template_id,
                             std::string subject_id, EncoderTag encoder,
                             bool allow_any_shape = false);

  BitGrid unpack() const;

  int template_id() const { return template_id_; }
  const std::string& subject_id() const { return subject_id_; }
  EncoderTag encoder() const { return encoder_; }
  CodeShape shape() const { return shape_; }
  int rows() const { return shape_.rows; }
  int cols() const { return shape_.cols; }
  int words_per_row() const { return words_per_row_; }
  int bit_count() const { return shape_.rows * shape_.cols; }

  bool bit(int r, int c) const;
  int popcount() const;

  std::span<const std::uint64_t> words() const { return words_; }
  std::span<const std::uint64_t> row_words(int r) const;

  // Copy with a different identity; bits untouched.
  IrisCode relabeled(int template_id, std::string subject_id) const;

 private:
  IrisCode() = default;

  int template_id_ = 0;
  std::string subject_id_;
  EncoderTag encoder_ = EncoderTag::kLogGabor;
  CodeShape shape_;
  int words_per_row_ = 0;
  std::vector<std::uint64_t> words_;
};

// Circular column rotation: result(r, c) = code(r, (c - shift) mod cols).
IrisCode rotate_cols(const IrisCode& code, int shift);

// max over s in [-max_shift, max_shift] of 1 - HD(a, rotate_cols(b, s)) / (rows * cols).
double similarity(const IrisCode& a, const IrisCode& b, int max_shift);

enum class ComparisonKind { kGenuine, kImposter };

std::string_view to_string(ComparisonKind kind);

struct Comparison {
  int id_a = 0;
  int id_b = 0;
  ComparisonKind kind = ComparisonKind::kImposter;
  double score = 0.0;

  bool operator==(const Comparison&) const = default;
};

struct TemplateInfo {
  int template_id = 0;
  std::string subject_id;

  bool operator==(const TemplateInfo&) const = default;
};

struct ComparisonSet {
  std::vector<TemplateInfo> templates;
  std::vector<Comparison> comparisons;

  bool operator==(const ComparisonSet&) const = default;

  // Checks pair coverage, id ordering, label rule and score range.
  void validate() const;
};

struct MatchOptions {
  int max_shift = 8;
  // 0 = hardware concurrency.
  unsigned threads = 0;
};

// Exhaustive all-to-all matching. Comparisons are ordered by template
// position (i < j, lexicographic); the result does not depend on threads.
ComparisonSet score_matrix(std::span<const IrisCode> codes, const MatchOptions& options = {});

struct ScoreSplit {
  std::vector<double> genuine;
  std::vector<double> imposter;
};

ScoreSplit split_comparisons(const ComparisonSet& set);

// True iff max(imposter) < min(genuine). Both sides must be non-empty.
bool is_consistent(std::span<const double> genuine, std::span<const double> imposter);

}  // namespace fbm
