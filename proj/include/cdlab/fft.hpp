#ifndef CDLAB_FFT_HPP
#define CDLAB_FFT_HPP

#include <complex>
#include <vector>

namespace cdlab::fft {

/// In-place iterative radix-2 FFT; size must be a power of two.
/// inverse = true applies the 1/N-normalized inverse transform.
void transform(std::vector<std::complex<double>>& a, bool inverse);

/// h-weighted discrete convolution of two real sequences sampled on a
/// uniform lattice: out[i] = h * sum_j a[j] * k[i - j], where `kern`
/// supplies k at signed offsets m in [-N, N). Zero padding to 2N makes the
/// circular product exact for the linear convolution.
std::vector<double> convolve_sampled(const std::vector<double>& a,
                                     const std::vector<double>& kern_wrapped, double h);

/// Lay out kernel samples k(m h) for m in [-N, N) in wrapped (circular)
/// order of length 2N, ready for convolve_sampled.
template <typename F>
std::vector<double> wrap_kernel(int n, F&& k_at_offset) {
  std::vector<double> out(static_cast<std::size_t>(2 * n), 0.0);
  for (int m = 0; m < n; ++m) out[static_cast<std::size_t>(m)] = k_at_offset(m);
  for (int m = -n; m < 0; ++m) out[static_cast<std::size_t>(2 * n + m)] = k_at_offset(m);
  return out;
}

}  // namespace cdlab::fft

#endif
