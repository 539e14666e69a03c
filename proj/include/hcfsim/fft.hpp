#pragma once

#include <complex>
#include <vector>

namespace hcfsim {

/// In-place iterative radix-2 FFT. Length must be a power of two.
void fft(std::vector<std::complex<double>>& data, bool inverse);

std::size_t next_pow2(std::size_t n);

} // namespace hcfsim
