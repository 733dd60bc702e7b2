#pragma once

#include <complex>
#include <vector>

namespace zdiv {

using cplx = std::complex<double>;
using cvec = std::vector<cplx>;

// Convention: forward transform is unscaled, inverse carries the 1/n factor.
cvec fft(const cvec& x);
cvec ifft(const cvec& x);

// In-place variants operating on pre-sized buffers.
void fft_inplace(cvec& x);
void ifft_inplace(cvec& x);

// Baseband frequency of DFT bin k on an n-point grid sampled at fs Hz.
// Bins [0, n/2] map to [0, fs/2], the rest to negative frequencies.
double bin_frequency_hz(std::size_t k, std::size_t n, double fs_hz);

}  // namespace zdiv
