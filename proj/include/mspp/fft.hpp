#pragma once

#include <complex>
#include <vector>

namespace mspp {

using cplx = std::complex<double>;

// In-place mixed-radix Cooley-Tukey transform for any length >= 1
// (recursive split by the smallest prime factor, direct sum for primes).
// inverse=true applies the unnormalized conjugate transform scaled by 1/N,
// i.e. fft(ifft(x)) == x.
void fft_inplace(std::vector<cplx>& data, bool inverse);

std::vector<cplx> fft(const std::vector<cplx>& data);
std::vector<cplx> ifft(const std::vector<cplx>& data);

}  // namespace mspp
