#include "fbm/codespace.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <limits>
#include <numeric>
#include <set>
#include <thread>
#include <unordered_map>

#include "fbm/error.hpp"

namespace fbm {

std::string_view to_string(EncoderTag tag) {
  switch (tag) {
    case EncoderTag::kLogGabor:
      return "log-gabor";
    case EncoderTag::kHaarHilbert:
      return "haar-hilbert";
  }
  return "unknown";
}

EncoderTag parse_encoder_tag(std::string_view text) {
  if (text == "log-gabor" || text == "lg") return EncoderTag::kLogGabor;
  if (text == "haar-hilbert" || text == "hh") return EncoderTag::kHaarHilbert;
  throw ValidationError("unknown encoder tag '" + std::string(text) +
                        "' (expected log-gabor or haar-hilbert)");
}

std::string_view to_string(ComparisonKind kind) {
  return kind == ComparisonKind::kGenuine ? "genuine" : "imposter";
}

bool CodeShape::is_supported() const {
  return (rows == 4 && cols == 64) || (rows == 8 && cols == 128) || (rows == 16 && cols == 256);
}

std::string CodeShape::str() const { return std::to_string(rows) + "x" + std::to_string(cols); }

CodeShape CodeShape::parse(std::string_view text) {
  const auto x = text.find_first_of("xX");
  CodeShape shape;
  if (x == std::string_view::npos) throw ValidationError("bad dims '" + std::string(text) + "' (expected RxC)");
  const auto r = std::from_chars(text.data(), text.data() + x, shape.rows);
  const auto c = std::from_chars(text.data() + x + 1, text.data() + text.size(), shape.cols);
  if (r.ec != std::errc{} || r.ptr != text.data() + x || c.ec != std::errc{} ||
      c.ptr != text.data() + text.size() || shape.rows < 1 || shape.cols < 1) {
    throw ValidationError("bad dims '" + std::string(text) + "' (expected RxC)");
  }
  return shape;
}

BitGrid::BitGrid(int r, int c, bool value)
    : rows(r), cols(c), bits(static_cast<std::size_t>(r) * c, value ? 1 : 0) {}

namespace {

int words_for(int cols) { return (cols + IrisCode::kWordBits - 1) / IrisCode::kWordBits; }

std::uint64_t mask_for_bit(int c) { return std::uint64_t{1} << (IrisCode::kWordBits - 1 - c % IrisCode::kWordBits); }

void check_shape(CodeShape shape, bool allow_any_shape) {
  if (shape.rows < 1 || shape.cols < 1) {
    throw ValidationError("code shape " + shape.str() + " is empty");
  }
  if (!allow_any_shape && !shape.is_supported()) {
    throw ValidationError("unsupported code shape " + shape.str() +
                          " (supported: 4x64, 8x128, 16x256; set override to allow others)");
  }
}

}  // namespace

IrisCode IrisCode::pack(const BitGrid& grid, int template_id, std::string subject_id, EncoderTag encoder,
                        bool allow_any_shape) {
  const CodeShape shape{grid.rows, grid.cols};
  check_shape(shape, allow_any_shape);
  if (grid.bits.size() != static_cast<std::size_t>(grid.rows) * grid.cols) {
    throw ValidationError("bit grid storage does not match its dimensions");
  }
  const int wpr = words_for(shape.cols);
  std::vector<std::uint64_t> words(static_cast<std::size_t>(wpr) * shape.rows, 0);
  for (int r = 0; r < shape.rows; ++r) {
    for (int c = 0; c < shape.cols; ++c) {
      if (grid.at(r, c)) words[static_cast<std::size_t>(r) * wpr + c / kWordBits] |= mask_for_bit(c);
    }
  }
  return from_words(shape, std::move(words), template_id, std::move(subject_id), encoder, allow_any_shape);
}

IrisCode IrisCode::from_words(CodeShape shape, std::vector<std::uint64_t> words, int template_id,
                              std::string subject_id, EncoderTag encoder, bool allow_any_shape) {
  check_shape(shape, allow_any_shape);
  if (template_id < 0) throw ValidationError("template id must be >= 0");
  const int wpr = words_for(shape.cols);
  if (words.size() != static_cast<std::size_t>(wpr) * shape.rows) {
    throw ValidationError("packed word count does not match shape " + shape.str());
  }
  const int tail = shape.cols % kWordBits;
  if (tail != 0) {
    const std::uint64_t pad = ~std::uint64_t{0} >> tail;
    for (int r = 0; r < shape.rows; ++r) {
      if (words[static_cast<std::size_t>(r) * wpr + wpr - 1] & pad) {
        throw ValidationError("non-zero padding bits in row " + std::to_string(r));
      }
    }
  }
  IrisCode code;
  code.template_id_ = template_id;
  code.subject_id_ = std::move(subject_id);
  code.encoder_ = encoder;
  code.shape_ = shape;
  code.words_per_row_ = wpr;
  code.words_ = std::move(words);
  return code;
}

BitGrid IrisCode::unpack() const {
  BitGrid grid(shape_.rows, shape_.cols);
  for (int r = 0; r < shape_.rows; ++r) {
    for (int c = 0; c < shape_.cols; ++c) grid.set(r, c, bit(r, c));
  }
  return grid;
}

bool IrisCode::bit(int r, int c) const {
  return (words_[static_cast<std::size_t>(r) * words_per_row_ + c / kWordBits] & mask_for_bit(c)) != 0;
}

int IrisCode::popcount() const {
  int n = 0;
  for (auto w : words_) n += std::popcount(w);
  return n;
}

std::span<const std::uint64_t> IrisCode::row_words(int r) const {
  return std::span<const std::uint64_t>(words_).subspan(static_cast<std::size_t>(r) * words_per_row_,
                                                        words_per_row_);
}

IrisCode IrisCode::relabeled(int template_id, std::string subject_id) const {
  IrisCode copy = *this;
  if (template_id < 0) throw ValidationError("template id must be >= 0");
  copy.template_id_ = template_id;
  copy.subject_id_ = std::move(subject_id);
  return copy;
}

namespace {

void rotate_into(const IrisCode& code, int shift, std::uint64_t* out) {
  const int cols = code.cols();
  const int wpr = code.words_per_row();
  int s = shift % cols;
  if (s < 0) s += cols;
  std::fill(out, out + static_cast<std::size_t>(wpr) * code.rows(), 0);
  for (int r = 0; r < code.rows(); ++r) {
    std::uint64_t* row = out + static_cast<std::size_t>(r) * wpr;
    for (int c = 0; c < cols; ++c) {
      int src = c - s;
      if (src < 0) src += cols;
      if (code.bit(r, src)) row[c / IrisCode::kWordBits] |= mask_for_bit(c);
    }
  }
}

// Distinct residues of [-max_shift, max_shift] modulo cols.
std::vector<int> shift_set(int max_shift, int cols) {
  if (max_shift < 0) throw ValidationError("max shift must be >= 0");
  std::vector<int> shifts;
  if (2L * max_shift + 1 >= cols) {
    shifts.resize(cols);
    std::iota(shifts.begin(), shifts.end(), 0);
  } else {
    for (int s = -max_shift; s <= max_shift; ++s) shifts.push_back(s);
  }
  return shifts;
}

void check_comparable(const IrisCode& a, const IrisCode& b) {
  if (a.shape() != b.shape()) {
    throw ValidationError("code shape mismatch: " + a.shape().str() + " vs " + b.shape().str());
  }
  if (a.encoder() != b.encoder()) {
    throw ValidationError("encoder mismatch: " + std::string(to_string(a.encoder())) + " vs " +
                          std::string(to_string(b.encoder())));
  }
}

int hamming(const std::uint64_t* a, const std::uint64_t* b, std::size_t n) {
  int d = 0;
  for (std::size_t w = 0; w < n; ++w) d += std::popcount(a[w] ^ b[w]);
  return d;
}

double score_from_distance(int distance, int bits) {
  return 1.0 - static_cast<double>(distance) / static_cast<double>(bits);
}

}  // namespace

IrisCode rotate_cols(const IrisCode& code, int shift) {
  std::vector<std::uint64_t> words(code.words().size());
  rotate_into(code, shift, words.data());
  return IrisCode::from_words(code.shape(), std::move(words), code.template_id(), code.subject_id(),
                              code.encoder(), true);
}

double similarity(const IrisCode& a, const IrisCode& b, int max_shift) {
  check_comparable(a, b);
  const auto shifts = shift_set(max_shift, a.cols());
  std::vector<std::uint64_t> rotated(b.words().size());
  int best = std::numeric_limits<int>::max();
  for (int s : shifts) {
    rotate_into(b, s, rotated.data());
    best = std::min(best, hamming(a.words().data(), rotated.data(), rotated.size()));
    if (best == 0) break;
  }
  return score_from_distance(best, a.bit_count());
}

void ComparisonSet::validate() const {
  const std::size_t n = templates.size();
  std::unordered_map<int, const std::string*> subject_of;
  for (const auto& t : templates) {
    if (t.template_id < 0) throw ValidationError("negative template id");
    if (!subject_of.emplace(t.template_id, &t.subject_id).second) {
      throw ValidationError("duplicate template id " + std::to_string(t.template_id));
    }
  }
  if (comparisons.size() != n * (n - (n > 0 ? 1 : 0)) / 2) {
    throw ValidationError("comparison count " + std::to_string(comparisons.size()) + " != N(N-1)/2 for N=" +
                          std::to_string(n));
  }
  std::set<std::pair<int, int>> seen;
  for (const auto& c : comparisons) {
    if (c.id_a >= c.id_b) throw ValidationError("comparison ids must satisfy idA < idB");
    const auto a = subject_of.find(c.id_a);
    const auto b = subject_of.find(c.id_b);
    if (a == subject_of.end() || b == subject_of.end()) {
      throw ValidationError("comparison references unknown template");
    }
    if (!(c.score >= 0.0 && c.score <= 1.0)) throw ValidationError("score outside [0,1]");
    const bool genuine = *a->second == *b->second;
    if (genuine != (c.kind == ComparisonKind::kGenuine)) {
      throw ValidationError("comparison kind disagrees with subject labels for pair (" +
                            std::to_string(c.id_a) + "," + std::to_string(c.id_b) + ")");
    }
    if (!seen.emplace(c.id_a, c.id_b).second) throw ValidationError("duplicate comparison pair");
  }
}

ComparisonSet score_matrix(std::span<const IrisCode> codes, const MatchOptions& options) {
  const std::size_t n = codes.size();
  if (n < 2) throw ValidationError("at least 2 templates are required for matching");
  {
    std::set<int> ids;
    std::set<std::string> subjects;
    for (const auto& c : codes) {
      if (!ids.insert(c.template_id()).second) {
        throw ValidationError("duplicate template id " + std::to_string(c.template_id()));
      }
      subjects.insert(c.subject_id());
      check_comparable(codes[0], c);
    }
    if (subjects.size() < 2) throw ValidationError("no imposter comparisons possible (fewer than 2 subjects)");
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return codes[x].template_id() < codes[y].template_id(); });

  const auto shifts = shift_set(options.max_shift, codes[0].cols());
  const std::size_t code_words = codes[0].words().size();
  const std::size_t per_code = shifts.size() * code_words;

  // Every code in every rotation; the kernel then only XORs and counts.
  std::vector<std::uint64_t> rotated(n * per_code);
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t s = 0; s < shifts.size(); ++s) {
      rotate_into(codes[order[k]], shifts[s], rotated.data() + k * per_code + s * code_words);
    }
  }

  ComparisonSet result;
  result.templates.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    result.templates.push_back({codes[order[k]].template_id(), codes[order[k]].subject_id()});
  }
  result.comparisons.resize(n * (n - 1) / 2);

  const int bits = codes[0].bit_count();
  auto row_offset = [n](std::size_t i) { return i * n - i * (i + 1) / 2; };
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      const std::uint64_t* a = codes[order[i]].words().data();
      const std::string& subject_a = result.templates[i].subject_id;
      Comparison* out = result.comparisons.data() + row_offset(i);
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::uint64_t* b = rotated.data() + j * per_code;
        int best = std::numeric_limits<int>::max();
        for (std::size_t s = 0; s < shifts.size() && best > 0; ++s) {
          best = std::min(best, hamming(a, b + s * code_words, code_words));
        }
        Comparison& c = out[j - i - 1];
        c.id_a = result.templates[i].template_id;
        c.id_b = result.templates[j].template_id;
        c.kind = subject_a == result.templates[j].subject_id ? ComparisonKind::kGenuine : ComparisonKind::kImposter;
        c.score = score_from_distance(best, bits);
      }
    }
  };

  unsigned threads = options.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.threads;
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  return result;
}

ScoreSplit split_comparisons(const ComparisonSet& set) {
  ScoreSplit split;
  for (const auto& c : set.comparisons) {
    (c.kind == ComparisonKind::kGenuine ? split.genuine : split.imposter).push_back(c.score);
  }
  return split;
}

bool is_consistent(std::span<const double> genuine, std::span<const double> imposter) {
  if (genuine.empty() || imposter.empty()) {
    throw ValidationError("consistency predicate needs non-empty genuine and imposter score lists");
  }
  return *std::max_element(imposter.begin(), imposter.end()) < *std::min_element(genuine.begin(), genuine.end());
}

}  // namespace fbm
