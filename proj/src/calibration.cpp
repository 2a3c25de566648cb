#include <cmath>
#include <sstream>

#include "fbm/error.hpp"
#include "fbm/menagerie.hpp"
#include "fbm/noise.hpp"

namespace fbm {

namespace {

double default_upper(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::kSaltPepper:
      return 1.0;
    case NoiseKind::kLocalVar:
      return 1.0;
    case NoiseKind::kMotionBlur:
      return 32.0;
    case NoiseKind::kNone:
      break;
  }
  throw ValidationError("calibration needs a noise kind other than none");
}

}  // namespace

double measure_eer(std::span<const IrisSegment> segments, const NoiseSpec& spec, EncoderTag encoder,
                   CodeShape shape, const EncoderParams& params, int max_shift) {
  const auto noisy = apply_noise_all(segments, spec);
  const auto codes = encode_all(encoder, noisy, shape, params);
  const auto split = split_comparisons(score_matrix(codes, {.max_shift = max_shift}));
  return find_eer(split.genuine, split.imposter).eer;
}

CalibrationResult calibrate_noise(std::span<const IrisSegment> segments, NoiseKind kind, double baseline_eer,
                                  const CalibrationOptions& options) {
  if (!(baseline_eer > 0.0)) throw ValidationError("calibration needs a baseline EER > 0");
  if (!(options.max_ratio > 0.0)) throw ValidationError("calibration max ratio must be > 0");
  if (options.iterations < 1) throw ValidationError("calibration needs at least one bisection iteration");
  const double upper = options.upper > 0.0 ? options.upper : default_upper(kind);
  const bool integral = kind == NoiseKind::kMotionBlur;
  if (kind == NoiseKind::kSaltPepper && upper > 1.0) throw ValidationError("salt-pepper density bracket exceeds 1");

  NoiseSpec base = options.base;
  base.kind = kind;
  base.seed = options.calibration_seed;

  CalibrationResult result;
  result.baseline_eer = baseline_eer;
  result.bound = options.max_ratio * baseline_eer;

  const auto probe = [&](double intensity) {
    const double eer = measure_eer(segments, base.with_intensity(intensity), options.encoder, options.shape,
                                   options.encoder_params, options.max_shift);
    result.trace.push_back({intensity, eer, eer <= result.bound});
    return result.trace.back();
  };

  // Zero intensity (blur length 1) reproduces the baseline and is never probed.
  double lo = integral ? 1.0 : 0.0;
  double hi = upper;
  std::optional<CalibrationStep> best;
  if (const auto top = probe(hi); top.within_bound) {
    best = top;
  } else {
    for (int it = 0; it < options.iterations; ++it) {
      double mid = (lo + hi) / 2.0;
      if (integral) {
        mid = std::floor(mid);
        if (mid <= lo) break;
      }
      const auto step = probe(mid);
      if (step.within_bound) {
        lo = mid;
        best = step;
      } else {
        hi = mid;
      }
    }
  }
  if (!best) {
    std::ostringstream msg;
    msg << "no tested " << to_string(kind) << " intensity keeps EER within " << result.bound
        << "; weakest tested intensity " << result.trace.back().intensity << " measured EER "
        << result.trace.back().eer;
    throw ValidationError(msg.str());
  }
  result.spec = base.with_intensity(best->intensity);
  result.measured_eer = best->eer;
  return result;
}

}  // namespace fbm
