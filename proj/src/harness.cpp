#include "fbm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <regex>
#include <sstream>
#include <tuple>

#include "fbm/config.hpp"
#include "fbm/error.hpp"
#include "fbm/keyed_random.hpp"

namespace fbm {

namespace fs = std::filesystem;

void Dataset::validate() const {
  std::set<int> ids;
  for (const auto& s : segments) {
    s.validate();
    if (!ids.insert(s.image_id).second) throw ValidationError("duplicate image id " + std::to_string(s.image_id));
  }
}

std::string exact_decimal(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_text_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
  }
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out.flush()) throw IoError("write failed for " + path.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw IoError("cannot move " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

// ---------------------------------------------------------------- PGM

namespace {

// Next whitespace-delimited header token, skipping '#' comments.
std::string pgm_token(std::istream& in) {
  std::string tok;
  int ch;
  while ((ch = in.get()) != EOF) {
    if (ch == '#') {
      while ((ch = in.get()) != EOF && ch != '\n') {
      }
      continue;
    }
    if (std::isspace(ch)) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(static_cast<char>(ch));
  }
  return tok;
}

}  // namespace

IrisSegment read_pgm(const fs::path& path, int image_id, std::string subject_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read image " + path.string());
  const std::string magic = pgm_token(in);
  if (magic != "P5" && magic != "P2") throw IoError("unreadable image " + path.string() + " (not a PGM)");
  IrisSegment seg;
  seg.image_id = image_id;
  seg.subject_id = std::move(subject_id);
  int maxval = 0;
  try {
    seg.width = parse_int(pgm_token(in), "PGM width");
    seg.height = parse_int(pgm_token(in), "PGM height");
    maxval = parse_int(pgm_token(in), "PGM maxval");
  } catch (const ValidationError& e) {
    throw IoError("unreadable image " + path.string() + ": " + e.what());
  }
  if (seg.width < 1 || seg.height < 1 || maxval < 1 || maxval > 255) {
    throw IoError("unreadable image " + path.string() + " (unsupported size or depth)");
  }
  const std::size_t n = static_cast<std::size_t>(seg.width) * seg.height;
  seg.pixels.resize(n);
  if (magic == "P5") {
    in.read(reinterpret_cast<char*>(seg.pixels.data()), static_cast<std::streamsize>(n));
    if (in.gcount() != static_cast<std::streamsize>(n)) throw IoError("truncated image " + path.string());
  } else {
    for (std::size_t p = 0; p < n; ++p) {
      int v = -1;
      if (!(in >> v) || v < 0 || v > maxval) throw IoError("bad pixel data in " + path.string());
      seg.pixels[p] = static_cast<std::uint8_t>(v);
    }
  }
  if (maxval != 255) {
    for (auto& p : seg.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
  }
  return seg;
}

void write_pgm(const IrisSegment& segment, const fs::path& path) {
  segment.validate();
  std::string content = "P5\n" + std::to_string(segment.width) + " " + std::to_string(segment.height) + "\n255\n";
  content.append(reinterpret_cast<const char*>(segment.pixels.data()), segment.pixels.size());
  write_text_file(path, content);
}

// ---------------------------------------------------------------- datasets

Dataset load_dataset(const fs::path& dir, const std::string& name_pattern) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("dataset directory " + dir.string() + " does not exist");
  std::regex pattern;
  try {
    pattern = std::regex(name_pattern);
  } catch (const std::regex_error& e) {
    throw ValidationError("bad file name pattern '" + name_pattern + "': " + e.what());
  }

  struct Entry {
    std::string subject;
    long index;
    std::string name;
    fs::path path;
  };
  std::vector<Entry> entries;
  Dataset ds;
  std::vector<fs::path> files;
  for (const auto& de : fs::directory_iterator(dir)) {
    if (de.is_regular_file()) files.push_back(de.path());
  }
  std::sort(files.begin(), files.end());
  for (const auto& path : files) {
    const std::string name = path.filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern) || m.size() < 4) {
      ds.warnings.push_back("skipped " + name + " (name does not match pattern)");
      continue;
    }
    long index = 0;
    const std::string idx = m[3].str();
    const auto res = std::from_chars(idx.data(), idx.data() + idx.size(), index);
    if (res.ec != std::errc{}) index = 0;
    entries.push_back({m[1].str() + "_" + m[2].str(), index, name, path});
  }
  if (entries.empty()) throw ValidationError("no images matching the name pattern in " + dir.string());
  std::sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
    return std::tie(x.subject, x.index, x.name) < std::tie(y.subject, y.index, y.name);
  });
  for (std::size_t k = 0; k < entries.size(); ++k) {
    ds.segments.push_back(read_pgm(entries[k].path, static_cast<int>(k), entries[k].subject));
    ds.subjects.insert(entries[k].subject);
  }
  ds.provenance = "loaded(" + dir.string() + ")";
  return ds;
}

void SynthSpec::validate() const {
  if (subjects < 2) throw ValidationError("synthetic dataset needs at least 2 subjects");
  if (images_per_subject < 2) throw ValidationError("synthetic dataset needs at least 2 images per subject");
  if (width < 1 || height < 1) throw ValidationError("synthetic image size must be positive");
  if (shift_max < 0 || !(noise_sigma >= 0.0)) throw ValidationError("synthetic jitter parameters must be >= 0");
  if (sinusoids < 1 || max_angular_frequency < 1 || !(max_radial_frequency >= 0.0)) {
    throw ValidationError("synthetic texture parameters must be positive");
  }
}

namespace {

std::string synth_subject_label(int k) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%04d_%c", k / 2 + 1, k % 2 ? 'R' : 'L');
  return buf;
}

// Streams of the generator's keyed draws.
enum : std::uint64_t { kFreqX = 11, kFreqY, kPhase, kAmp, kShift, kJitter, kQuality };

}  // namespace

Dataset synth_dataset(const SynthSpec& spec) {
  spec.validate();
  Dataset ds;
  const double two_pi = 2.0 * std::numbers::pi;
  for (int s = 0; s < spec.subjects; ++s) {
    const auto subject = static_cast<std::uint64_t>(s);
    struct Wave {
      double fx, fy, phase, amp;
    };
    std::vector<Wave> waves;
    double amp_total = 0.0;
    for (int k = 0; k < spec.sinusoids; ++k) {
      const auto kk = static_cast<std::uint64_t>(k);
      Wave w;
      // Integer angular frequency keeps the texture periodic around the ring.
      w.fx = 1 + static_cast<int>(keyed_uniform(spec.seed, subject, kk, kFreqX) * spec.max_angular_frequency);
      w.fy = keyed_uniform(spec.seed, subject, kk, kFreqY) * spec.max_radial_frequency;
      w.phase = keyed_uniform(spec.seed, subject, kk, kPhase) * two_pi;
      w.amp = 0.5 + 0.5 * keyed_uniform(spec.seed, subject, kk, kAmp);
      amp_total += w.amp;
      waves.push_back(w);
    }
    std::vector<double> base(static_cast<std::size_t>(spec.width) * spec.height);
    for (int y = 0; y < spec.height; ++y) {
      for (int x = 0; x < spec.width; ++x) {
        double v = 0.0;
        for (const auto& w : waves) {
          v += w.amp * std::cos(two_pi * (w.fx * x / spec.width + w.fy * y / spec.height) + w.phase);
        }
        base[static_cast<std::size_t>(y) * spec.width + x] = 0.5 + 0.5 * v / amp_total;
      }
    }
    const std::string label = synth_subject_label(s);
    ds.subjects.insert(label);
    for (int j = 0; j < spec.images_per_subject; ++j) {
      IrisSegment seg;
      seg.image_id = s * spec.images_per_subject + j;
      seg.subject_id = label;
      seg.width = spec.width;
      seg.height = spec.height;
      seg.pixels.resize(base.size());
      const auto image = static_cast<std::uint64_t>(seg.image_id);
      const int span = 2 * spec.shift_max + 1;
      const int shift = static_cast<int>(keyed_uniform(spec.seed, subject, image, kShift) * span) - spec.shift_max;
      // Acquisition quality varies per image: jitter scaled into [0.5, 1.5] sigma.
      const double sigma = spec.noise_sigma * (0.5 + keyed_uniform(spec.seed, subject, image, kQuality));
      for (int y = 0; y < spec.height; ++y) {
        for (int x = 0; x < spec.width; ++x) {
          int src = (x - shift) % spec.width;
          if (src < 0) src += spec.width;
          const std::size_t p = static_cast<std::size_t>(y) * spec.width + x;
          double v = base[static_cast<std::size_t>(y) * spec.width + src];
          if (sigma > 0.0) v += sigma * keyed_gaussian(spec.seed, image, p, kJitter);
          seg.pixels[p] = static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
        }
      }
      ds.segments.push_back(std::move(seg));
    }
  }
  std::ostringstream prov;
  prov << "synthetic(subjects=" << spec.subjects << " images=" << spec.images_per_subject << " size="
       << spec.height << "x" << spec.width << " seed=" << spec.seed << ")";
  ds.provenance = prov.str();
  return ds;
}

std::string segment_file_name(const IrisSegment& segment, int index_within_subject) {
  return segment.subject_id + "_" + std::to_string(index_within_subject) + ".pgm";
}

void save_dataset(const Dataset& dataset, const fs::path& dir) {
  std::map<std::string, int> next_index;
  for (const auto& seg : dataset.segments) {
    if (seg.subject_id.find('_') == std::string::npos) {
      throw ValidationError("subject id '" + seg.subject_id + "' is not of the form <subject>_<eye>");
    }
    const int index = ++next_index[seg.subject_id];
    write_pgm(seg, dir / segment_file_name(seg, index));
  }
}

// ---------------------------------------------------------------- codes

namespace {

constexpr char kHex[] = "0123456789abcdef";

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

std::string header_field(const std::string& token, const std::string& key, std::size_t line) {
  if (!token.starts_with(key + "=")) {
    throw ValidationError("line " + std::to_string(line) + ": expected '" + key + "=' in code container header");
  }
  return token.substr(key.size() + 1);
}

}  // namespace

void write_codes(std::ostream& out, std::span<const IrisCode> codes) {
  if (codes.empty()) throw ValidationError("no codes to write");
  const auto& first = codes.front();
  out << "iriscode v1 rows=" << first.rows() << " cols=" << first.cols() << " encoder=" << to_string(first.encoder())
      << " count=" << codes.size() << "\n";
  const int nibbles = (first.cols() + 3) / 4;
  for (const auto& code : codes) {
    if (code.shape() != first.shape() || code.encoder() != first.encoder()) {
      throw ValidationError("code container needs uniform shape and encoder");
    }
    if (code.subject_id().empty() || code.subject_id().find_first_of(" \t\n") != std::string::npos) {
      throw ValidationError("subject id '" + code.subject_id() + "' cannot be stored (empty or has whitespace)");
    }
    out << code.template_id() << ' ' << code.subject_id() << ' ';
    for (int r = 0; r < code.rows(); ++r) {
      const auto words = code.row_words(r);
      for (int q = 0; q < nibbles; ++q) {
        const int bit = q * 4;
        const auto nib = (words[bit / 64] >> (60 - bit % 64)) & 0xF;
        out << kHex[nib];
      }
    }
    out << '\n';
  }
}

std::vector<IrisCode> read_codes(std::istream& in, bool allow_any_shape) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ValidationError("empty code container");
  std::istringstream head(line);
  std::string magic, version, rows_t, cols_t, enc_t, count_t;
  head >> magic >> version >> rows_t >> cols_t >> enc_t >> count_t;
  if (magic != "iriscode" || version != "v1") throw ValidationError("line 1: not an iriscode v1 container");
  CodeShape shape;
  EncoderTag encoder;
  std::size_t count = 0;
  try {
    shape.rows = parse_int(header_field(rows_t, "rows", line_no), "rows");
    shape.cols = parse_int(header_field(cols_t, "cols", line_no), "cols");
    encoder = parse_encoder_tag(header_field(enc_t, "encoder", line_no));
    count = parse_u64(header_field(count_t, "count", line_no), "count");
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("line 1: ") + e.what());
  }
  if (shape.rows < 1 || shape.cols < 1) throw ValidationError("line 1: bad code shape");
  const int nibbles = (shape.cols + 3) / 4;
  const int wpr = (shape.cols + 63) / 64;
  std::vector<IrisCode> codes;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream rec(line);
    int id = -1;
    std::string subject, hex;
    if (!(rec >> id >> subject >> hex)) throw ValidationError("line " + std::to_string(line_no) + ": malformed code record");
    if (hex.size() != static_cast<std::size_t>(nibbles) * shape.rows) {
      throw ValidationError("line " + std::to_string(line_no) + ": expected " + std::to_string(nibbles * shape.rows) +
                    " hex digits");
    }
    std::vector<std::uint64_t> words(static_cast<std::size_t>(wpr) * shape.rows, 0);
    for (int r = 0; r < shape.rows; ++r) {
      for (int q = 0; q < nibbles; ++q) {
        const int v = hex_value(hex[static_cast<std::size_t>(r) * nibbles + q]);
        if (v < 0) throw ValidationError("line " + std::to_string(line_no) + ": bad hex digit");
        const int bit = q * 4;
        words[static_cast<std::size_t>(r) * wpr + bit / 64] |= static_cast<std::uint64_t>(v) << (60 - bit % 64);
      }
    }
    try {
      codes.push_back(IrisCode::from_words(shape, std::move(words), id, subject, encoder, allow_any_shape));
    } catch (const ValidationError& e) {
      throw ValidationError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (codes.size() != count) {
    throw ValidationError("code container declares " + std::to_string(count) + " codes but holds " +
                  std::to_string(codes.size()));
  }
  return codes;
}

void save_codes(const fs::path& path, std::span<const IrisCode> codes) {
  std::ostringstream out;
  write_codes(out, codes);
  write_text_file(path, out.str());
}

std::vector<IrisCode> load_codes(const fs::path& path, bool allow_any_shape) {
  std::istringstream in(read_text_file(path));
  return read_codes(in, allow_any_shape);
}

// ---------------------------------------------------------------- scores

void write_scores(std::ostream& out, const ComparisonSet& set, const ScoreFileInfo& info) {
  out << "# fbm scores encoder=" << info.encoder << " dims=" << info.dims << " max_shift=" << info.max_shift << "\n";
  for (const auto& t : set.templates) {
    if (t.subject_id.find_first_of(",\n") != std::string::npos) {
      throw ValidationError("subject id '" + t.subject_id + "' cannot be stored in CSV");
    }
    out << "# template," << t.template_id << "," << t.subject_id << "\n";
  }
  out << "idA,idB,kind,score\n";
  for (const auto& c : set.comparisons) {
    out << c.id_a << ',' << c.id_b << ',' << to_string(c.kind) << ',' << exact_decimal(c.score) << '\n';
  }
}

ComparisonSet read_scores(std::istream& in, ScoreFileInfo* info) {
  ComparisonSet set;
  std::string line;
  std::size_t line_no = 0;
  bool seen_columns = false;
  const auto fail = [&line_no](const std::string& what) {
    return ValidationError("scores line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line.starts_with("# template,")) {
      const auto rest = line.substr(11);
      const auto comma = rest.find(',');
      if (comma == std::string::npos) throw fail("malformed template line");
      try {
        set.templates.push_back({parse_int(rest.substr(0, comma), "template id"), rest.substr(comma + 1)});
      } catch (const ValidationError& e) {
        throw fail(e.what());
      }
      continue;
    }
    if (line.starts_with("#")) {
      if (info && line.starts_with("# fbm scores")) {
        std::istringstream head(line.substr(12));
        std::string tok;
        while (head >> tok) {
          if (tok.starts_with("encoder=")) info->encoder = tok.substr(8);
          if (tok.starts_with("dims=")) info->dims = tok.substr(5);
          if (tok.starts_with("max_shift=")) info->max_shift = parse_int(tok.substr(10), "max_shift");
        }
      }
      continue;
    }
    if (!seen_columns) {
      if (line != "idA,idB,kind,score") throw fail("expected column header idA,idB,kind,score");
      seen_columns = true;
      continue;
    }
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
      const auto comma = line.find(',', start);
      cells.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cells.size() != 4) throw fail("expected 4 columns");
    Comparison c;
    try {
      c.id_a = parse_int(cells[0], "idA");
      c.id_b = parse_int(cells[1], "idB");
      c.score = parse_double(cells[3], "score");
    } catch (const ValidationError& e) {
      throw fail(e.what());
    }
    if (cells[2] == "genuine") {
      c.kind = ComparisonKind::kGenuine;
    } else if (cells[2] == "imposter") {
      c.kind = ComparisonKind::kImposter;
    } else {
      throw fail("kind must be genuine or imposter");
    }
    if (!(c.score >= 0.0 && c.score <= 1.0)) throw fail("score " + cells[3] + " outside [0,1]");
    set.comparisons.push_back(c);
  }
  if (!seen_columns) throw ValidationError("scores file has no column header");
  try {
    set.validate();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string("scores file inconsistent: ") + e.what());
  }
  return set;
}

void save_scores(const ComparisonSet& set, const fs::path& path, const ScoreFileInfo& info) {
  std::ostringstream out;
  write_scores(out, set, info);
  write_text_file(path, out.str());
}

ComparisonSet load_scores(const fs::path& path, ScoreFileInfo* info) {
  std::istringstream in(read_text_file(path));
  return read_scores(in, info);
}

void write_histogram(std::ostream& out, std::span<const HistogramBin> bins) {
  out << "bin_low,bin_high,genuine_count,imposter_count\n";
  for (const auto& b : bins) {
    out << exact_decimal(b.low) << ',' << exact_decimal(b.high) << ',' << b.genuine << ',' << b.imposter << '\n';
  }
}

}  // namespace fbm
