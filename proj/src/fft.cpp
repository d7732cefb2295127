#include "mspp/fft.hpp"

#include <cmath>
#include <map>

namespace mspp {

namespace {

int smallest_prime_factor(int n) {
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) return p;
  return n;
}

// Cached forward roots of unity, w[j] = exp(-2 pi i j / n).
const std::vector<cplx>& roots_for(int n) {
  static thread_local std::map<int, std::vector<cplx>> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  std::vector<cplx> w(n);
  for (int j = 0; j < n; ++j)
    w[j] = std::polar(1.0, -2.0 * M_PI * j / n);
  return cache.emplace(n, std::move(w)).first->second;
}

// DFT of x[0], x[stride], ..., length n, into out[0..n).
void transform(const cplx* x, int stride, int n, bool inverse, cplx* out) {
  if (n == 1) {
    out[0] = x[0];
    return;
  }
  const auto& w = roots_for(n);
  const auto tw = [&](long long idx) {
    const cplx v = w[static_cast<size_t>(idx % n)];
    return inverse ? std::conj(v) : v;
  };

  const int p = smallest_prime_factor(n);
  if (p == n) {  // prime length: direct summation
    for (int k = 0; k < n; ++k) {
      cplx acc = 0.0;
      for (int j = 0; j < n; ++j)
        acc += x[static_cast<size_t>(j) * stride] * tw(static_cast<long long>(k) * j);
      out[k] = acc;
    }
    return;
  }

  const int m = n / p;
  for (int r = 0; r < p; ++r)
    transform(x + static_cast<size_t>(r) * stride, stride * p, m, inverse, out + static_cast<size_t>(r) * m);

  std::vector<cplx> mixed(n);
  for (int k = 0; k < n; ++k) {
    cplx acc = 0.0;
    for (int r = 0; r < p; ++r)
      acc += tw(static_cast<long long>(k) * r) * out[static_cast<size_t>(r) * m + k % m];
    mixed[k] = acc;
  }
  std::copy(mixed.begin(), mixed.end(), out);
}

}  // namespace

void fft_inplace(std::vector<cplx>& data, bool inverse) {
  if (data.empty()) return;
  const int n = static_cast<int>(data.size());
  std::vector<cplx> out(data.size());
  transform(data.data(), 1, n, inverse, out.data());
  if (inverse) {
    const double s = 1.0 / n;
    for (auto& v : out) v *= s;
  }
  data = std::move(out);
}

std::vector<cplx> fft(const std::vector<cplx>& data) {
  std::vector<cplx> a = data;
  fft_inplace(a, false);
  return a;
}

std::vector<cplx> ifft(const std::vector<cplx>& data) {
  std::vector<cplx> a = data;
  fft_inplace(a, true);
  return a;
}

}  // namespace mspp
