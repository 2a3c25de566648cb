#include <cmath>
#include <random>

#include "doctest.h"
#include "fbm/error.hpp"
#include "fbm/harness.hpp"
#include "fbm/noise.hpp"

using namespace fbm;

namespace {

IrisSegment constant_segment(int w, int h, std::uint8_t v, int id = 0) {
  return {id, "s", w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h, v)};
}

IrisSegment random_segment(std::mt19937_64& rng, int w, int h, int id = 0) {
  IrisSegment seg{id, "s", w, h, std::vector<std::uint8_t>(static_cast<std::size_t>(w) * h)};
  std::uniform_int_distribution<int> level(0, 255);
  for (auto& p : seg.pixels) p = static_cast<std::uint8_t>(level(rng));
  return seg;
}

std::size_t changed(const IrisSegment& a, const IrisSegment& b) {
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.pixels.size(); ++k) n += a.pixels[k] != b.pixels[k];
  return n;
}

}  // namespace

TEST_CASE("noise kind names") {
  CHECK(parse_noise_kind("saltpepper") == NoiseKind::kSaltPepper);
  CHECK(parse_noise_kind("localvar") == NoiseKind::kLocalVar);
  CHECK(parse_noise_kind("motionblur") == NoiseKind::kMotionBlur);
  CHECK(parse_noise_kind("none") == NoiseKind::kNone);
  CHECK(to_string(NoiseKind::kMotionBlur) == "motionblur");
  CHECK_THROWS_AS(parse_noise_kind("gaussian"), ValidationError);
}

TEST_CASE("salt-pepper examples") {
  const auto gray = constant_segment(100, 100, 128);
  CHECK(salt_pepper(gray, 0.0, 1).pixels == gray.pixels);
  for (auto p : salt_pepper(gray, 1.0, 1).pixels) REQUIRE((p == 0 || p == 255));

  const double n = 10000.0;
  const double p = 0.05;
  const double sigma = std::sqrt(n * p * (1 - p));
  const auto count = static_cast<double>(changed(gray, salt_pepper(gray, p, 42)));
  CHECK(std::abs(count - n * p) <= 3 * sigma);

  CHECK_THROWS_AS(salt_pepper(gray, -0.1, 1), ValidationError);
  CHECK_THROWS_AS(salt_pepper(gray, 1.5, 1), ValidationError);
}

TEST_CASE("salt and pepper are balanced") {
  const auto gray = constant_segment(200, 100, 128);
  const auto out = salt_pepper(gray, 1.0, 7);
  std::size_t white = 0;
  for (auto v : out.pixels) white += v == 255;
  const double n = 20000.0;
  CHECK(std::abs(static_cast<double>(white) - n / 2) <= 3 * std::sqrt(n / 4));
}

TEST_CASE("noise is keyed by seed and image id") {
  const auto gray = constant_segment(64, 16, 128, 3);
  auto other_id = gray;
  other_id.image_id = 4;
  CHECK(salt_pepper(gray, 0.3, 5).pixels == salt_pepper(gray, 0.3, 5).pixels);
  CHECK(salt_pepper(gray, 0.3, 5).pixels != salt_pepper(gray, 0.3, 6).pixels);
  CHECK(salt_pepper(gray, 0.3, 5).pixels != salt_pepper(other_id, 0.3, 5).pixels);
  CHECK(localvar(gray, 0.01, 5).pixels == localvar(gray, 0.01, 5).pixels);
  CHECK(localvar(gray, 0.01, 5).pixels != localvar(gray, 0.01, 6).pixels);
}

TEST_CASE("localvar examples") {
  std::mt19937_64 rng(1);
  const auto seg = random_segment(rng, 64, 32);
  CHECK(localvar(seg, 0.0, 9).pixels == seg.pixels);

  const auto black = constant_segment(64, 32, 0);
  CHECK(localvar(black, 0.5, 9).pixels == black.pixels);

  CHECK_THROWS_AS(localvar(seg, -0.01, 9), ValidationError);
}

TEST_CASE("localvar variance follows the intensity model") {
  const auto gray = constant_segment(1000, 1000, 128);
  const auto out = localvar(gray, 0.01, 2024);
  double sum = 0.0;
  double sq = 0.0;
  for (std::size_t k = 0; k < out.pixels.size(); ++k) {
    const double d = (static_cast<double>(out.pixels[k]) - gray.pixels[k]) / 255.0;
    sum += d;
    sq += d * d;
  }
  const double n = static_cast<double>(out.pixels.size());
  const double var = sq / n - (sum / n) * (sum / n);
  const double model = 0.01 * 128.0 / 255.0;
  CHECK(std::abs(var - model) <= 0.05 * model);
}

TEST_CASE("motion blur kernels") {
  for (int len : {1, 2, 3, 5, 8, 17}) {
    for (double angle : {0.0, 22.5, 45.0, 90.0, 133.0, -60.0}) {
      const auto k = motion_blur_kernel(len, angle);
      REQUIRE(std::abs(k.sum() - 1.0) <= 1e-12);
      for (double w : k.weights) REQUIRE(w >= 0.0);
    }
  }
  const auto horiz = motion_blur_kernel(3, 0.0);
  REQUIRE(horiz.radius == 2);
  CHECK(horiz.at(-1, 0) == doctest::Approx(1.0 / 3));
  CHECK(horiz.at(0, 0) == doctest::Approx(1.0 / 3));
  CHECK(horiz.at(1, 0) == doctest::Approx(1.0 / 3));
  CHECK(horiz.at(0, 1) == 0.0);

  const auto unit = motion_blur_kernel(1, 37.0);
  CHECK(unit.at(0, 0) == 1.0);

  CHECK_THROWS_AS(motion_blur_kernel(0, 0.0), ValidationError);
}

TEST_CASE("motion blur examples") {
  std::mt19937_64 rng(2);
  const auto seg = random_segment(rng, 40, 20);
  CHECK(motion_blur(seg, 1, 30.0).pixels == seg.pixels);

  const auto flat = constant_segment(40, 20, 77);
  CHECK(motion_blur(flat, 3, 0.0).pixels == flat.pixels);
  CHECK(motion_blur(flat, 9, 33.0).pixels == flat.pixels);

  CHECK_THROWS_AS(motion_blur(seg, 0, 0.0), ValidationError);
}

TEST_CASE("vertical blur of a single white pixel is a 1/5 streak") {
  auto dot = constant_segment(21, 21, 0);
  dot.pixels[10 * 21 + 10] = 255;
  const auto out = motion_blur(dot, 5, 90.0);
  for (int y = 0; y < 21; ++y) {
    for (int x = 0; x < 21; ++x) {
      const bool on_streak = x == 10 && std::abs(y - 10) <= 2;
      REQUIRE(out.at(x, y) == (on_streak ? 51 : 0));
    }
  }
}

TEST_CASE("horizontal blur is a box average away from the edges") {
  std::mt19937_64 rng(3);
  const auto seg = random_segment(rng, 128, 64);
  const auto out = motion_blur(seg, 7, 0.0);
  for (int y = 0; y < 64; ++y) {
    for (int x = 3; x < 125; ++x) {
      double box = 0.0;
      for (int d = -3; d <= 3; ++d) box += seg.at(x + d, y);
      REQUIRE(std::abs(out.at(x, y) - box / 7.0) <= 0.5);
    }
  }
}

TEST_CASE("apply_noise dispatch and angle jitter") {
  std::mt19937_64 rng(4);
  const auto seg = random_segment(rng, 64, 16, 5);
  NoiseSpec none;
  CHECK(apply_noise(seg, none).pixels == seg.pixels);

  NoiseSpec blur{.kind = NoiseKind::kMotionBlur, .blur_length = 5, .blur_angle_deg = 20.0, .seed = 1};
  const auto fixed = apply_noise(seg, blur);
  blur.seed = 2;
  CHECK(apply_noise(seg, blur).pixels == fixed.pixels);
  blur.blur_angle_jitter_deg = 30.0;
  const auto j1 = apply_noise(seg, blur);
  blur.seed = 3;
  CHECK(apply_noise(seg, blur).pixels != j1.pixels);

  NoiseSpec bad{.kind = NoiseKind::kSaltPepper, .density = 2.0};
  CHECK_THROWS_AS(apply_noise(seg, bad), ValidationError);
}

TEST_CASE("apply_noise_all is thread independent") {
  std::mt19937_64 rng(5);
  std::vector<IrisSegment> segs;
  for (int k = 0; k < 20; ++k) segs.push_back(random_segment(rng, 50, 10, k));
  NoiseSpec spec{.kind = NoiseKind::kLocalVar, .variance_scale = 0.05, .seed = 11};
  const auto a = apply_noise_all(segs, spec, 1);
  const auto b = apply_noise_all(segs, spec, 6);
  for (std::size_t k = 0; k < segs.size(); ++k) {
    CHECK(a[k].pixels == b[k].pixels);
    CHECK(a[k].pixels == localvar(segs[k], 0.05, 11).pixels);
  }
}

TEST_CASE("NoiseSpec intensity accessors") {
  NoiseSpec s{.kind = NoiseKind::kSaltPepper};
  CHECK(s.with_intensity(0.25).density == 0.25);
  CHECK(s.with_intensity(0.25).intensity() == 0.25);
  s.kind = NoiseKind::kMotionBlur;
  CHECK(s.with_intensity(7.0).blur_length == 7);
  CHECK_THROWS_AS(s.with_intensity(0.0), ValidationError);
  s.kind = NoiseKind::kLocalVar;
  CHECK(s.with_intensity(0.5).variance_scale == 0.5);
}

TEST_CASE("calibration on a small synthetic dataset") {
  SynthSpec spec;
  spec.subjects = 12;
  spec.images_per_subject = 4;
  const auto ds = synth_dataset(spec);
  CalibrationOptions opt;
  const double baseline = measure_eer(ds.segments, NoiseSpec{}, opt.encoder, opt.shape, opt.encoder_params, 8);
  REQUIRE(baseline > 0.0);

  CHECK(measure_eer(ds.segments, NoiseSpec{.kind = NoiseKind::kSaltPepper, .density = 0.0, .seed = 3},
                    opt.encoder, opt.shape, opt.encoder_params, 8) == baseline);

  const auto result = calibrate_noise(ds.segments, NoiseKind::kSaltPepper, baseline, opt);
  CHECK(result.spec.kind == NoiseKind::kSaltPepper);
  CHECK(result.spec.density > 0.0);
  CHECK(result.measured_eer <= 2.0 * baseline);
  CHECK(result.bound == 2.0 * baseline);
  REQUIRE(!result.trace.empty());

  // Replay: the chosen intensity is the largest passing probe, and every
  // probe above it failed.
  for (const auto& step : result.trace) {
    CHECK(step.within_bound == (step.eer <= result.bound));
    if (step.within_bound) CHECK(step.intensity <= result.spec.density);
    if (step.intensity > result.spec.density) CHECK_FALSE(step.within_bound);
  }
  const double remeasured = measure_eer(ds.segments, result.spec, opt.encoder, opt.shape, opt.encoder_params, 8);
  CHECK(remeasured == result.measured_eer);
}

TEST_CASE("calibration rejects bad inputs") {
  SynthSpec spec;
  spec.subjects = 4;
  spec.images_per_subject = 3;
  const auto ds = synth_dataset(spec);
  CalibrationOptions opt;
  CHECK_THROWS_AS(calibrate_noise(ds.segments, NoiseKind::kSaltPepper, 0.0, opt), ValidationError);
  CHECK_THROWS_AS(calibrate_noise(ds.segments, NoiseKind::kNone, 0.1, opt), ValidationError);
  // A bound no noisy probe can meet.
  opt.max_ratio = 1e-9;
  opt.iterations = 2;
  CHECK_THROWS_WITH_AS(calibrate_noise(ds.segments, NoiseKind::kSaltPepper, 0.01, opt),
                       doctest::Contains("measured EER"), ValidationError);
}
