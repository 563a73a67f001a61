#pragma once

#include <complex>
#include <vector>

namespace strobe {

// Thin wrapper over FFTW with a process-wide plan cache. Plans are created
// once per transform size (FFTW_ESTIMATE, unaligned) so repeated execution is
// deterministic and safe to call from multiple threads.
namespace fft {

// In-place forward transform, unnormalised: X_k = sum_j x_j exp(-2*pi*i*j*k/n).
void forward(std::vector<std::complex<double>>& a);

// In-place inverse transform including the 1/n factor.
void inverse(std::vector<std::complex<double>>& a);

}  // namespace fft

}  // namespace strobe
