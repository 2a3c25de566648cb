#pragma once

// Seeded noise models for iris segments and the calibration search that
// ties noise intensity to a bound on the resulting EER.
//
// Random draws are keyed by (seed, image id, pixel index), never taken from
// a sequential stream, so noising a dataset is order- and thread-independent.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fbm/codespace.hpp"
#include "fbm/encoders.hpp"

namespace fbm {

enum class NoiseKind { kNone, kSaltPepper, kLocalVar, kMotionBlur };

std::string_view to_string(NoiseKind kind);
NoiseKind parse_noise_kind(std::string_view text);

struct NoiseSpec {
  NoiseKind kind = NoiseKind::kNone;
  double density = 0.0;         // salt-pepper
  double variance_scale = 0.0;  // localvar
  int blur_length = 1;          // motion-blur
  double blur_angle_deg = 0.0;  // motion-blur
  // Per-image angle offset drawn uniformly from [-jitter, +jitter] keyed by
  // (seed, image id). Zero keeps motion blur seed-independent.
  double blur_angle_jitter_deg = 0.0;
  std::uint64_t seed = 0;

  void validate() const;

  // The calibrated knob of this kind: density, variance scale or blur length.
  double intensity() const;
  NoiseSpec with_intensity(double value) const;
};

IrisSegment salt_pepper(const IrisSegment& segment, double density, std::uint64_t seed);

// Zero-mean Gaussian with variance variance_scale * I / 255 in [0, 1]
// intensity space, clamped and requantized.
IrisSegment localvar(const IrisSegment& segment, double variance_scale, std::uint64_t seed);

// Square kernel of odd side centred at (radius, radius), row-major.
struct BlurKernel {
  int radius = 0;
  std::vector<double> weights;

  int side() const { return 2 * radius + 1; }
  double at(int dx, int dy) const {
    return weights[static_cast<std::size_t>(dy + radius) * side() + (dx + radius)];
  }
  double sum() const;
};

// Line of `length` unit-spaced taps through the origin at `angle_deg`
// (counter-clockwise from +x, image y pointing down), bilinearly splatted.
BlurKernel motion_blur_kernel(int length, double angle_deg);

// Convolution with replicate padding; output rounded to nearest level.
IrisSegment motion_blur(const IrisSegment& segment, int length, double angle_deg);

IrisSegment apply_noise(const IrisSegment& segment, const NoiseSpec& spec);
std::vector<IrisSegment> apply_noise_all(std::span<const IrisSegment> segments, const NoiseSpec& spec,
                                         unsigned threads = 0);

struct CalibrationOptions {
  EncoderTag encoder = EncoderTag::kLogGabor;
  CodeShape shape{4, 64};
  EncoderParams encoder_params;
  int max_shift = 8;
  double max_ratio = 2.0;
  int iterations = 8;
  // Upper end of the search bracket; 0 picks the kind's default
  // (density 1, variance scale 1, blur length 32).
  double upper = 0.0;
  std::uint64_t calibration_seed = 0x5eed;
  // Template for kind-independent fields (blur angle, jitter).
  NoiseSpec base;
};

struct CalibrationStep {
  double intensity = 0.0;
  double eer = 0.0;
  bool within_bound = false;
};

struct CalibrationResult {
  NoiseSpec spec;
  double measured_eer = 0.0;
  double baseline_eer = 0.0;
  double bound = 0.0;
  std::vector<CalibrationStep> trace;
};

// EER of the dataset after noising with `spec` (no noise for kNone).
double measure_eer(std::span<const IrisSegment> segments, const NoiseSpec& spec, EncoderTag encoder,
                   CodeShape shape, const EncoderParams& params, int max_shift);

// Largest tested intensity with measured EER <= max_ratio * baseline_eer,
// by bracketed bisection from zero intensity up to options.upper.
// Throws ValidationError when no tested positive intensity satisfies the bound.
CalibrationResult calibrate_noise(std::span<const IrisSegment> segments, NoiseKind kind, double baseline_eer,
                                  const CalibrationOptions& options);

}  // namespace fbm
