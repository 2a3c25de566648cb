#pragma once

#include <complex>
#include <vector>

namespace fbm::detail {

// In-place complex DFT of any length. The inverse is scaled by 1/n.
// Plans are created once per (length, direction) with FFTW_ESTIMATE, so a
// given input length always runs the same algorithm.
void dft_inplace(std::vector<std::complex<double>>& data, bool inverse);

}  // namespace fbm::detail
