#include "fbm/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <thread>

#include "fbm/error.hpp"
#include "fbm/keyed_random.hpp"

namespace fbm {

namespace {

// Stream ids keep the draws of different decisions independent.
constexpr std::uint64_t kStreamHit = 0;
constexpr std::uint64_t kStreamSalt = 1;
constexpr std::uint64_t kStreamGauss = 2;  // uses 4 and 5 under Box-Muller
constexpr std::uint64_t kStreamAngle = 7;

std::uint8_t quantize(double unit) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(unit, 0.0, 1.0) * 255.0));
}

// cos/sin that are exact on multiples of 90 degrees.
double snap(double v) {
  const double r = std::round(v);
  return std::abs(v - r) < 1e-9 ? r : v;
}

}  // namespace

std::string_view to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kNone:
      return "none";
    case NoiseKind::kSaltPepper:
      return "saltpepper";
    case NoiseKind::kLocalVar:
      return "localvar";
    case NoiseKind::kMotionBlur:
      return "motionblur";
  }
  return "unknown";
}

NoiseKind parse_noise_kind(std::string_view text) {
  if (text == "none") return NoiseKind::kNone;
  if (text == "saltpepper" || text == "salt-pepper") return NoiseKind::kSaltPepper;
  if (text == "localvar") return NoiseKind::kLocalVar;
  if (text == "motionblur" || text == "motion-blur") return NoiseKind::kMotionBlur;
  throw ValidationError("unknown noise kind '" + std::string(text) +
                        "' (expected none, saltpepper, localvar or motionblur)");
}

void NoiseSpec::validate() const {
  if (!(density >= 0.0 && density <= 1.0)) throw ValidationError("salt-pepper density must be in [0, 1]");
  if (!(variance_scale >= 0.0) || !std::isfinite(variance_scale)) {
    throw ValidationError("localvar variance scale must be >= 0");
  }
  if (blur_length < 1) throw ValidationError("motion blur length must be >= 1");
  if (!std::isfinite(blur_angle_deg) || !(blur_angle_jitter_deg >= 0.0)) {
    throw ValidationError("motion blur angle must be finite and its jitter >= 0");
  }
}

double NoiseSpec::intensity() const {
  switch (kind) {
    case NoiseKind::kSaltPepper:
      return density;
    case NoiseKind::kLocalVar:
      return variance_scale;
    case NoiseKind::kMotionBlur:
      return blur_length;
    case NoiseKind::kNone:
      break;
  }
  return 0.0;
}

NoiseSpec NoiseSpec::with_intensity(double value) const {
  NoiseSpec out = *this;
  switch (kind) {
    case NoiseKind::kSaltPepper:
      out.density = value;
      break;
    case NoiseKind::kLocalVar:
      out.variance_scale = value;
      break;
    case NoiseKind::kMotionBlur:
      out.blur_length = static_cast<int>(std::lround(value));
      break;
    case NoiseKind::kNone:
      break;
  }
  out.validate();
  return out;
}

IrisSegment salt_pepper(const IrisSegment& segment, double density, std::uint64_t seed) {
  segment.validate();
  if (!(density >= 0.0 && density <= 1.0)) throw ValidationError("salt-pepper density must be in [0, 1]");
  IrisSegment out = segment;
  const auto id = static_cast<std::uint64_t>(segment.image_id);
  for (std::size_t p = 0; p < out.pixels.size(); ++p) {
    if (keyed_uniform(seed, id, p, kStreamHit) < density) {
      out.pixels[p] = keyed_uniform(seed, id, p, kStreamSalt) < 0.5 ? 0 : 255;
    }
  }
  return out;
}

IrisSegment localvar(const IrisSegment& segment, double variance_scale, std::uint64_t seed) {
  segment.validate();
  if (!(variance_scale >= 0.0) || !std::isfinite(variance_scale)) {
    throw ValidationError("localvar variance scale must be >= 0");
  }
  IrisSegment out = segment;
  if (variance_scale == 0.0) return out;
  const auto id = static_cast<std::uint64_t>(segment.image_id);
  for (std::size_t p = 0; p < out.pixels.size(); ++p) {
    const double intensity = segment.pixels[p] / 255.0;
    const double variance = variance_scale * intensity;
    if (variance == 0.0) continue;
    const double noisy = intensity + std::sqrt(variance) * keyed_gaussian(seed, id, p, kStreamGauss);
    out.pixels[p] = quantize(noisy);
  }
  return out;
}

double BlurKernel::sum() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

BlurKernel motion_blur_kernel(int length, double angle_deg) {
  if (length < 1) throw ValidationError("motion blur length must be >= 1");
  if (!std::isfinite(angle_deg)) throw ValidationError("motion blur angle must be finite");
  const double theta = angle_deg * std::numbers::pi / 180.0;
  const double ux = std::cos(theta);
  const double uy = -std::sin(theta);

  BlurKernel kernel;
  kernel.radius = (length - 1) / 2 + 1;
  const int side = kernel.side();
  kernel.weights.assign(static_cast<std::size_t>(side) * side, 0.0);
  const double tap = 1.0 / length;
  for (int i = 0; i < length; ++i) {
    const double t = i - (length - 1) / 2.0;
    const double x = snap(t * ux);
    const double y = snap(t * uy);
    const int x0 = static_cast<int>(std::floor(x));
    const int y0 = static_cast<int>(std::floor(y));
    const double fx = x - x0;
    const double fy = y - y0;
    const auto add = [&](int dx, int dy, double w) {
      if (w == 0.0) return;
      kernel.weights[static_cast<std::size_t>(dy + kernel.radius) * side + (dx + kernel.radius)] += w;
    };
    add(x0, y0, tap * (1.0 - fx) * (1.0 - fy));
    add(x0 + 1, y0, tap * fx * (1.0 - fy));
    add(x0, y0 + 1, tap * (1.0 - fx) * fy);
    add(x0 + 1, y0 + 1, tap * fx * fy);
  }
  const double total = kernel.sum();
  for (auto& w : kernel.weights) w /= total;
  return kernel;
}

IrisSegment motion_blur(const IrisSegment& segment, int length, double angle_deg) {
  segment.validate();
  const BlurKernel kernel = motion_blur_kernel(length, angle_deg);
  if (length == 1) return segment;
  struct Tap {
    int dx, dy;
    double w;
  };
  std::vector<Tap> taps;
  for (int dy = -kernel.radius; dy <= kernel.radius; ++dy) {
    for (int dx = -kernel.radius; dx <= kernel.radius; ++dx) {
      if (const double w = kernel.at(dx, dy); w != 0.0) taps.push_back({dx, dy, w});
    }
  }
  IrisSegment out = segment;
  for (int y = 0; y < segment.height; ++y) {
    for (int x = 0; x < segment.width; ++x) {
      double acc = 0.0;
      for (const auto& tap : taps) {
        const int sx = std::clamp(x - tap.dx, 0, segment.width - 1);
        const int sy = std::clamp(y - tap.dy, 0, segment.height - 1);
        acc += tap.w * segment.at(sx, sy);
      }
      out.pixels[static_cast<std::size_t>(y) * segment.width + x] =
          static_cast<std::uint8_t>(std::lround(std::clamp(acc, 0.0, 255.0)));
    }
  }
  return out;
}

IrisSegment apply_noise(const IrisSegment& segment, const NoiseSpec& spec) {
  spec.validate();
  switch (spec.kind) {
    case NoiseKind::kNone:
      return segment;
    case NoiseKind::kSaltPepper:
      return salt_pepper(segment, spec.density, spec.seed);
    case NoiseKind::kLocalVar:
      return localvar(segment, spec.variance_scale, spec.seed);
    case NoiseKind::kMotionBlur: {
      double angle = spec.blur_angle_deg;
      if (spec.blur_angle_jitter_deg > 0.0) {
        const double u = keyed_uniform(spec.seed, static_cast<std::uint64_t>(segment.image_id), 0, kStreamAngle);
        angle += (2.0 * u - 1.0) * spec.blur_angle_jitter_deg;
      }
      return motion_blur(segment, spec.blur_length, angle);
    }
  }
  return segment;
}

std::vector<IrisSegment> apply_noise_all(std::span<const IrisSegment> segments, const NoiseSpec& spec,
                                         unsigned threads) {
  spec.validate();
  std::vector<IrisSegment> out(segments.size());
  std::vector<std::exception_ptr> errors(segments.size());
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < segments.size(); i += stride) {
      try {
        out[i] = apply_noise(segments[i], spec);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, segments.size())));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace fbm
