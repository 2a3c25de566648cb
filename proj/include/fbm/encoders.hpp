#pragma once

// Iris texture encoders: unwrapped segment -> binary IrisCode.
//
// Both encoders quantize a real response by sign with the tie rule
// "value >= 0 -> bit 1", so flat inputs produce all-one codes.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fbm/codespace.hpp"

namespace fbm {

// Unwrapped iris region: rows are radial, columns angular (circular).
struct IrisSegment {
  int image_id = 0;
  std::string subject_id;
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, height x width

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  void validate() const;
};

// Real-valued raster, row-major.
struct Raster {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Raster() = default;
  Raster(int r, int c, double fill = 0.0) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, fill) {}

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
};

struct EncoderParams {
  // Log-Gabor centre wavelength as a fraction of the row length.
  double wavelength_fraction = 1.0 / 16.0;
  // Log-Gabor bandwidth sigma / f0.
  double sigma_ratio = 0.5;

  void validate() const;
};

// Free-form notes produced while encoding (e.g. upsampling warnings).
using Diagnostics = std::vector<std::string>;

// Bilinear resampling to target size, intensities scaled to [0, 1].
Raster normalize_segment(const IrisSegment& segment, int target_rows, int target_cols,
                         Diagnostics* diagnostics = nullptr);

// Orthonormal one-level 2D Haar approximation band.
Raster haar_ll(const Raster& raster);

// Discrete Hilbert transform of (signal - mean); DC and Nyquist removed.
std::vector<double> hilbert_transform(std::span<const double> signal);
std::vector<std::uint8_t> hilbert_bits(std::span<const double> signal);

struct LogGaborResponse {
  std::vector<double> real;
  std::vector<double> imag;
};

// One-sided log-Gabor filtering of a single (circular) row.
LogGaborResponse log_gabor_row(std::span<const double> row, const EncoderParams& params);

// Raster-level encoders; raster shape must be (rows/2) x cols for log-Gabor.
BitGrid log_gabor_bits(const Raster& normalized, const EncoderParams& params);
BitGrid haar_hilbert_bits(const Raster& normalized);

IrisCode encode_log_gabor(const IrisSegment& segment, CodeShape shape, const EncoderParams& params = {},
                          bool allow_any_shape = false, Diagnostics* diagnostics = nullptr);
IrisCode encode_haar_hilbert(const IrisSegment& segment, CodeShape shape, const EncoderParams& params = {},
                             bool allow_any_shape = false, Diagnostics* diagnostics = nullptr);

IrisCode encode(EncoderTag encoder, const IrisSegment& segment, CodeShape shape,
                const EncoderParams& params = {}, bool allow_any_shape = false,
                Diagnostics* diagnostics = nullptr);

// Encodes a batch; identical output for any thread count.
std::vector<IrisCode> encode_all(EncoderTag encoder, std::span<const IrisSegment> segments, CodeShape shape,
                                 const EncoderParams& params = {}, unsigned threads = 0,
                                 Diagnostics* diagnostics = nullptr);

}  // namespace fbm
