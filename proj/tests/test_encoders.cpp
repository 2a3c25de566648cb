#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "fbm/encoders.hpp"
#include "fbm/error.hpp"
#include "fbm/harness.hpp"

using namespace fbm;

namespace {

IrisSegment constant_segment(int w, int h, std::uint8_t v) {
  return {0, "s", w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, v)};
}

IrisSegment random_segment(std::mt19937_64& rng, int w, int h, int id = 0) {
  IrisSegment seg{id, "s", w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  std::uniform_int_distribution<int> level(0, 255);
  for (auto& p : seg.pixels) p = static_cast<std::uint8_t>(level(rng));
  return seg;
}

IrisSegment shift_columns(const IrisSegment& seg, int s) {
  IrisSegment out = seg;
  for (int y = 0; y < seg.height; ++y)
    for (int x = 0; x < seg.width; ++x)
      out.pixels[static_cast<std::size_t>(y) * seg.width + x] = seg.at(((x - s) % seg.width + seg.width) % seg.width, y);
  return out;
}

}  // namespace

TEST_CASE("normalize_segment examples") {
  const auto flat = normalize_segment(constant_segment(37, 11, 128), 4, 64);
  for (double v : flat.values) REQUIRE(v == doctest::Approx(128.0 / 255.0).epsilon(1e-12));

  std::mt19937_64 rng(1);
  const auto seg = random_segment(rng, 64, 8);
  const auto same = normalize_segment(seg, 8, 64);
  for (int r = 0; r < 8; ++r)
    for (int c = 0; c < 64; ++c) REQUIRE(same.at(r, c) == seg.at(c, r) / 255.0);

  const IrisSegment checker{0, "s", 2, 2, {0, 255, 255, 0}};
  const auto one = normalize_segment(checker, 1, 1);
  CHECK(one.at(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("normalize_segment rejects empty targets and reports upsampling") {
  const auto seg = constant_segment(8, 2, 10);
  CHECK_THROWS_AS(normalize_segment(seg, 0, 4), ValidationError);
  Diagnostics diag;
  normalize_segment(seg, 4, 64, &diag);
  CHECK(diag.size() == 1);
  diag.clear();
  normalize_segment(seg, 2, 8, &diag);
  CHECK(diag.empty());
}

TEST_CASE("segments are validated") {
  IrisSegment bad{0, "s", 4, 4, std::vector<std::uint8_t>(15)};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
  bad.pixels.resize(16);
  bad.width = 0;
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("haar_ll block formula") {
  Raster zero(4, 6);
  for (double v : haar_ll(zero).values) CHECK(v == 0.0);

  Raster flat(4, 4, 0.3);
  for (double v : haar_ll(flat).values) CHECK(v == doctest::Approx(0.6));

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Raster r(4, 4);
  for (auto& v : r.values) v = u(rng);
  const auto ll = haar_ll(r);
  REQUIRE(ll.rows == 2);
  REQUIRE(ll.cols == 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double block = r.at(2 * i, 2 * j) + r.at(2 * i, 2 * j + 1) + r.at(2 * i + 1, 2 * j) + r.at(2 * i + 1, 2 * j + 1);
      CHECK(ll.at(i, j) == doctest::Approx(block / 2.0).epsilon(1e-14));
    }

  CHECK_THROWS_AS(haar_ll(Raster(3, 4)), ValidationError);
  CHECK_THROWS_AS(haar_ll(Raster(4, 5)), ValidationError);
}

TEST_CASE("hilbert transform of a cosine is the sine") {
  constexpr int n = 64;
  std::vector<double> x(n);
  for (int k = 0; k < n; ++k) x[k] = std::cos(2.0 * std::numbers::pi * k / n);
  const auto h = hilbert_transform(x);
  const auto bits = hilbert_bits(x);
  for (int k = 0; k < n; ++k) {
    const double s = std::sin(2.0 * std::numbers::pi * k / n);
    CHECK(h[k] == doctest::Approx(s).epsilon(1e-12).scale(1.0));
    if (std::abs(s) > 1e-9) CHECK(bits[k] == (s >= 0.0 ? 1 : 0));
  }
}

TEST_CASE("hilbert bits edge cases") {
  const std::vector<double> zero(16, 0.0);
  for (auto b : hilbert_bits(zero)) CHECK(b == 1);
  CHECK_THROWS_AS(hilbert_bits(std::vector<double>{1.0}), ValidationError);
  CHECK_THROWS_AS(hilbert_transform(std::vector<double>{}), ValidationError);
}

TEST_CASE("negating the signal flips every strict-sign hilbert bit") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(32 + trial);
    for (auto& v : x) v = g(rng);
    std::vector<double> neg(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) neg[k] = -x[k];
    const auto h = hilbert_transform(x);
    const auto a = hilbert_bits(x);
    const auto b = hilbert_bits(neg);
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (std::abs(h[k]) > 1e-9) REQUIRE(a[k] != b[k]);
    }
  }
}

TEST_CASE("log-Gabor encoder basics") {
  std::mt19937_64 rng(4);
  const auto seg = random_segment(rng, 256, 32);
  const auto a = encode_log_gabor(seg, {4, 64});
  const auto b = encode_log_gabor(seg, {4, 64});
  CHECK(a.unpack() == b.unpack());
  CHECK(a.shape() == CodeShape{4, 64});
  CHECK(a.encoder() == EncoderTag::kLogGabor);

  const auto flat = encode_log_gabor(constant_segment(256, 32, 90), {8, 128});
  CHECK(flat.popcount() == flat.bit_count());

  CHECK_THROWS_AS(encode_log_gabor(seg, {3, 64}, {}, true), ValidationError);
  CHECK_THROWS_AS(encode_log_gabor(seg, {4, 60}), ValidationError);
}

TEST_CASE("log-Gabor row response is a one-sided analytic filter") {
  constexpr int n = 64;
  std::vector<double> x(n);
  // Centre wavelength n/16 samples, i.e. 16 cycles per row, where the gain is 1.
  for (int k = 0; k < n; ++k) x[k] = std::cos(2.0 * std::numbers::pi * 16 * k / n);
  const auto resp = log_gabor_row(x, {});
  for (int k = 0; k < n; ++k) {
    CHECK(resp.real[k] == doctest::Approx(0.5 * std::cos(2.0 * std::numbers::pi * 16 * k / n)).scale(1.0));
    CHECK(resp.imag[k] == doctest::Approx(0.5 * std::sin(2.0 * std::numbers::pi * 16 * k / n)).scale(1.0));
  }
}

TEST_CASE("encoder parameters are validated") {
  CHECK_THROWS_AS((EncoderParams{0.0, 0.5}).validate(), ValidationError);
  CHECK_THROWS_AS((EncoderParams{1.5, 0.5}).validate(), ValidationError);
  CHECK_THROWS_AS((EncoderParams{0.1, 1.0}).validate(), ValidationError);
  CHECK_NOTHROW((EncoderParams{1.0, 0.9}).validate());
}

TEST_CASE("log-Gabor is equivariant to circular column shifts") {
  std::mt19937_64 rng(5);
  for (const CodeShape shape : {CodeShape{4, 64}, CodeShape{8, 128}, CodeShape{16, 256}}) {
    // Identity size: the normalized raster is the segment itself.
    const auto seg = random_segment(rng, shape.cols, shape.rows / 2);
    const auto base = encode_log_gabor(seg, shape).unpack();
    for (int s : {1, 5, shape.cols / 2}) {
      const auto shifted = encode_log_gabor(shift_columns(seg, s), shape).unpack();
      for (int r = 0; r < shape.rows; ++r)
        for (int c = 0; c < shape.cols; ++c)
          REQUIRE(shifted.at(r, c) == base.at(r, ((c - s) % shape.cols + shape.cols) % shape.cols));
    }
  }
}

TEST_CASE("Haar-Hilbert encoder basics") {
  std::mt19937_64 rng(6);
  const auto seg = random_segment(rng, 256, 32);
  const auto a = encode_haar_hilbert(seg, {16, 256});
  CHECK(a.unpack() == encode_haar_hilbert(seg, {16, 256}).unpack());
  CHECK(a.shape() == CodeShape{16, 256});
  CHECK(a.encoder() == EncoderTag::kHaarHilbert);

  const auto flat = encode_haar_hilbert(constant_segment(100, 20, 200), {4, 64});
  CHECK(flat.popcount() == 256);
}

TEST_CASE("Haar-Hilbert bits follow the LL band") {
  std::mt19937_64 rng(7);
  const auto seg = random_segment(rng, 128, 8);
  const auto code = encode_haar_hilbert(seg, {4, 64}).unpack();
  const auto ll = haar_ll(normalize_segment(seg, 8, 128));
  for (int r = 0; r < 4; ++r) {
    std::vector<double> row(ll.values.begin() + r * 64, ll.values.begin() + (r + 1) * 64);
    const auto bits = hilbert_bits(row);
    for (int c = 0; c < 64; ++c) REQUIRE(code.at(r, c) == (bits[c] != 0));
  }
}

TEST_CASE("encode_all matches per-segment encoding for any thread count") {
  std::mt19937_64 rng(8);
  std::vector<IrisSegment> segs;
  for (int k = 0; k < 12; ++k) segs.push_back(random_segment(rng, 96, 20, k));
  for (auto tag : {EncoderTag::kLogGabor, EncoderTag::kHaarHilbert}) {
    const auto one = encode_all(tag, segs, {8, 128}, {}, 1);
    const auto many = encode_all(tag, segs, {8, 128}, {}, 5);
    REQUIRE(one.size() == segs.size());
    for (std::size_t k = 0; k < segs.size(); ++k) {
      CHECK(one[k].unpack() == many[k].unpack());
      CHECK(one[k].unpack() == encode(tag, segs[k], {8, 128}).unpack());
      CHECK(one[k].template_id() == segs[k].image_id);
    }
  }
}

TEST_CASE("genuine scores exceed imposter scores on the default synthetic dataset") {
  const auto ds = synth_dataset(SynthSpec{});
  for (auto tag : {EncoderTag::kLogGabor, EncoderTag::kHaarHilbert}) {
    const auto split = split_comparisons(score_matrix(encode_all(tag, ds.segments, {4, 64})));
    double g = 0.0;
    double i = 0.0;
    for (double s : split.genuine) g += s;
    for (double s : split.imposter) i += s;
    CHECK(g / split.genuine.size() > i / split.imposter.size() + 0.05);
  }
}
