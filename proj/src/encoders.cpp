#include "fbm/encoders.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <mutex>
#include <numeric>
#include <optional>
#include <thread>

#include "fbm/error.hpp"
#include "fft.hpp"

namespace fbm {

void IrisSegment::validate() const {
  if (width < 1 || height < 1) throw ValidationError("iris segment " + std::to_string(image_id) + " is empty");
  if (pixels.size() != static_cast<std::size_t>(width) * height) {
    throw ValidationError("iris segment " + std::to_string(image_id) + " pixel count does not match size");
  }
}

void EncoderParams::validate() const {
  if (!(wavelength_fraction > 0.0 && wavelength_fraction <= 1.0)) {
    throw ValidationError("encoder.wavelength_fraction must be in (0, 1]");
  }
  if (!(sigma_ratio > 0.0 && sigma_ratio < 1.0)) throw ValidationError("encoder.sigma_ratio must be in (0, 1)");
}

namespace {

// Fractional source coordinate for pixel-centre aligned resampling.
double source_coord(int dst, int dst_size, int src_size) {
  const double x = (dst + 0.5) * static_cast<double>(src_size) / dst_size - 0.5;
  return std::clamp(x, 0.0, static_cast<double>(src_size - 1));
}

// Mean-removed copy. Constant inputs become exact zeros.
std::vector<double> centered(std::span<const double> v) {
  std::vector<double> out(v.begin(), v.end());
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  if (*lo == *hi) {
    std::fill(out.begin(), out.end(), 0.0);
    return out;
  }
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  for (auto& x : out) x -= mean;
  return out;
}

std::vector<std::complex<double>> forward(const std::vector<double>& x) {
  std::vector<std::complex<double>> spectrum(x.begin(), x.end());
  detail::dft_inplace(spectrum, false);
  return spectrum;
}

void check_target(CodeShape shape, bool allow_any_shape) {
  if (shape.rows < 1 || shape.cols < 1) throw ValidationError("code shape " + shape.str() + " is empty");
  if (!allow_any_shape && !shape.is_supported()) {
    throw ValidationError("unsupported code shape " + shape.str() + " (supported: 4x64, 8x128, 16x256)");
  }
}

}  // namespace

Raster normalize_segment(const IrisSegment& segment, int target_rows, int target_cols, Diagnostics* diagnostics) {
  segment.validate();
  if (target_rows < 1 || target_cols < 1) throw ValidationError("normalization target must be at least 1x1");
  if (diagnostics && (segment.width < target_cols || segment.height < target_rows)) {
    diagnostics->push_back("segment " + std::to_string(segment.image_id) + " (" + std::to_string(segment.height) +
                           "x" + std::to_string(segment.width) + ") upsampled to " + std::to_string(target_rows) +
                           "x" + std::to_string(target_cols));
  }
  Raster out(target_rows, target_cols);
  for (int r = 0; r < target_rows; ++r) {
    const double y = source_coord(r, target_rows, segment.height);
    const int y0 = static_cast<int>(std::floor(y));
    const int y1 = std::min(y0 + 1, segment.height - 1);
    const double fy = y - y0;
    for (int c = 0; c < target_cols; ++c) {
      const double x = source_coord(c, target_cols, segment.width);
      const int x0 = static_cast<int>(std::floor(x));
      const int x1 = std::min(x0 + 1, segment.width - 1);
      const double fx = x - x0;
      double v = segment.at(x0, y0);
      if (fx != 0.0 || fy != 0.0) {
        v = (1.0 - fy) * ((1.0 - fx) * segment.at(x0, y0) + fx * segment.at(x1, y0)) +
            fy * ((1.0 - fx) * segment.at(x0, y1) + fx * segment.at(x1, y1));
      }
      out.at(r, c) = v / 255.0;
    }
  }
  return out;
}

Raster haar_ll(const Raster& raster) {
  if (raster.rows < 2 || raster.cols < 2 || raster.rows % 2 != 0 || raster.cols % 2 != 0) {
    throw ValidationError("Haar decomposition needs even, non-zero raster dimensions (got " +
                          std::to_string(raster.rows) + "x" + std::to_string(raster.cols) + ")");
  }
  Raster ll(raster.rows / 2, raster.cols / 2);
  for (int r = 0; r < ll.rows; ++r) {
    for (int c = 0; c < ll.cols; ++c) {
      // Row pass then column pass, each with 1/sqrt(2): net factor 1/2.
      ll.at(r, c) = (raster.at(2 * r, 2 * c) + raster.at(2 * r, 2 * c + 1) + raster.at(2 * r + 1, 2 * c) +
                     raster.at(2 * r + 1, 2 * c + 1)) /
                    2.0;
    }
  }
  return ll;
}

std::vector<double> hilbert_transform(std::span<const double> signal) {
  if (signal.size() < 2) throw ValidationError("Hilbert transform needs at least 2 samples");
  const auto n = signal.size();
  auto spectrum = forward(centered(signal));
  const std::complex<double> minus_i(0.0, -1.0);
  spectrum[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k == n) {
      spectrum[k] = 0.0;
    } else if (2 * k < n) {
      spectrum[k] *= minus_i;
    } else {
      spectrum[k] *= -minus_i;
    }
  }
  detail::dft_inplace(spectrum, true);
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = spectrum[k].real();
  return out;
}

std::vector<std::uint8_t> hilbert_bits(std::span<const double> signal) {
  const auto h = hilbert_transform(signal);
  std::vector<std::uint8_t> bits(h.size());
  for (std::size_t k = 0; k < h.size(); ++k) bits[k] = h[k] >= 0.0 ? 1 : 0;
  return bits;
}

LogGaborResponse log_gabor_row(std::span<const double> row, const EncoderParams& params) {
  params.validate();
  const auto n = row.size();
  if (n < 2) throw ValidationError("log-Gabor filtering needs at least 2 samples");
  auto spectrum = forward(centered(row));
  const double f0 = 1.0 / (static_cast<double>(n) * params.wavelength_fraction);
  const double denom = 2.0 * std::pow(std::log(params.sigma_ratio), 2);
  // One-sided filter: positive frequencies up to Nyquist, DC and negative bins zeroed.
  spectrum[0] = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    if (2 * k <= n) {
      const double f = static_cast<double>(k) / static_cast<double>(n);
      spectrum[k] *= std::exp(-std::pow(std::log(f / f0), 2) / denom);
    } else {
      spectrum[k] = 0.0;
    }
  }
  detail::dft_inplace(spectrum, true);
  LogGaborResponse response{std::vector<double>(n), std::vector<double>(n)};
  for (std::size_t k = 0; k < n; ++k) {
    response.real[k] = spectrum[k].real();
    response.imag[k] = spectrum[k].imag();
  }
  return response;
}

BitGrid log_gabor_bits(const Raster& normalized, const EncoderParams& params) {
  BitGrid grid(normalized.rows * 2, normalized.cols);
  for (int r = 0; r < normalized.rows; ++r) {
    std::span<const double> row(normalized.values.data() + static_cast<std::size_t>(r) * normalized.cols,
                                normalized.cols);
    const auto response = log_gabor_row(row, params);
    for (int c = 0; c < normalized.cols; ++c) {
      grid.set(2 * r, c, response.real[c] >= 0.0);
      grid.set(2 * r + 1, c, response.imag[c] >= 0.0);
    }
  }
  return grid;
}

BitGrid haar_hilbert_bits(const Raster& normalized) {
  const Raster ll = haar_ll(normalized);
  BitGrid grid(ll.rows, ll.cols);
  for (int r = 0; r < ll.rows; ++r) {
    std::span<const double> row(ll.values.data() + static_cast<std::size_t>(r) * ll.cols, ll.cols);
    const auto bits = hilbert_bits(row);
    for (int c = 0; c < ll.cols; ++c) grid.set(r, c, bits[c] != 0);
  }
  return grid;
}

IrisCode encode_log_gabor(const IrisSegment& segment, CodeShape shape, const EncoderParams& params,
                          bool allow_any_shape, Diagnostics* diagnostics) {
  check_target(shape, allow_any_shape);
  if (shape.rows % 2 != 0) {
    throw ValidationError("log-Gabor codes need an even row count (got " + shape.str() + ")");
  }
  params.validate();
  const Raster normalized = normalize_segment(segment, shape.rows / 2, shape.cols, diagnostics);
  return IrisCode::pack(log_gabor_bits(normalized, params), segment.image_id, segment.subject_id,
                        EncoderTag::kLogGabor, allow_any_shape);
}

IrisCode encode_haar_hilbert(const IrisSegment& segment, CodeShape shape, const EncoderParams& params,
                             bool allow_any_shape, Diagnostics* diagnostics) {
  check_target(shape, allow_any_shape);
  params.validate();
  const Raster normalized = normalize_segment(segment, 2 * shape.rows, 2 * shape.cols, diagnostics);
  return IrisCode::pack(haar_hilbert_bits(normalized), segment.image_id, segment.subject_id,
                        EncoderTag::kHaarHilbert, allow_any_shape);
}

IrisCode encode(EncoderTag encoder, const IrisSegment& segment, CodeShape shape, const EncoderParams& params,
                bool allow_any_shape, Diagnostics* diagnostics) {
  return encoder == EncoderTag::kLogGabor
             ? encode_log_gabor(segment, shape, params, allow_any_shape, diagnostics)
             : encode_haar_hilbert(segment, shape, params, allow_any_shape, diagnostics);
}

std::vector<IrisCode> encode_all(EncoderTag encoder, std::span<const IrisSegment> segments, CodeShape shape,
                                 const EncoderParams& params, unsigned threads, Diagnostics* diagnostics) {
  const std::size_t n = segments.size();
  std::vector<std::optional<IrisCode>> slots(n);
  std::vector<Diagnostics> notes(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t first, std::size_t stride) {
    for (std::size_t i = first; i < n; i += stride) {
      try {
        slots[i] = encode(encoder, segments[i], shape, params, false, diagnostics ? &notes[i] : nullptr);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::max<std::size_t>(1, std::min<std::size_t>(threads, n)));
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
  }
  std::vector<IrisCode> codes;
  codes.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) std::rethrow_exception(errors[i]);
    codes.push_back(std::move(*slots[i]));
    if (diagnostics) diagnostics->insert(diagnostics->end(), notes[i].begin(), notes[i].end());
  }
  return codes;
}

}  // namespace fbm
