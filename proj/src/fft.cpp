#include "cdlab/fft.hpp"

#include <cmath>
#include <stdexcept>

namespace cdlab::fft {

void transform(std::vector<std::complex<double>>& a, bool inverse) {
  const std::size_t n = a.size();
  if (n == 0 || (n & (n - 1)) != 0) throw std::invalid_argument("fft size must be a power of two");
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  const double pi = 3.14159265358979323846264338327950288;
  for (std::size_t len = 2; len <= n; len <<= 1) {
    double ang = 2.0 * pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
    std::complex<double> wlen(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        std::complex<double> u = a[i + j];
        std::complex<double> v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wlen;
      }
    }
  }
  if (inverse) {
    double inv = 1.0 / static_cast<double>(n);
    for (auto& x : a) x *= inv;
  }
}

std::vector<double> convolve_sampled(const std::vector<double>& a,
                                     const std::vector<double>& kern_wrapped, double h) {
  const std::size_t n = a.size();
  const std::size_t m = kern_wrapped.size();
  if (m != 2 * n) throw std::invalid_argument("wrapped kernel must have length 2N");
  std::vector<std::complex<double>> fa(m), fk(m);
  for (std::size_t i = 0; i < n; ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < m; ++i) fk[i] = kern_wrapped[i];
  transform(fa, false);
  transform(fk, false);
  for (std::size_t i = 0; i < m; ++i) fa[i] *= fk[i];
  transform(fa, true);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = fa[i].real() * h;
  return out;
}

}  // namespace cdlab::fft
