#ifndef HOMSIM_FFT_HPP
#define HOMSIM_FFT_HPP

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "homsim/units.hpp"

namespace homsim {

// In-place iterative radix-2 FFT. sign = -1 forward, +1 inverse (unscaled).
inline void fft_radix2(std::vector<std::complex<double>>& a, int sign) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: size must be a power of two");
    // bit reversal
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = sign * 2.0 * pi / static_cast<double>(len);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t j = 0; j < len / 2; ++j) {
                const std::complex<double> u = a[i + j];
                const std::complex<double> v = a[i + j + len / 2] * w;
                a[i + j] = u + v;
                a[i + j + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (sign > 0) {
        const double inv = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= inv;
    }
}

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Discrete Hilbert transform with the convention
//   hilbert(f)(x) = (1/pi) P.V. integral f(x') / (x' - x) dx'.
// The input is zero-order extended on both sides to at least pad_factor
// times its length to suppress circular-convolution leakage.
inline std::vector<double> hilbert_transform(const std::vector<double>& f,
                                             std::size_t pad_factor = 4) {
    const std::size_t n = f.size();
    if (n < 2) throw std::invalid_argument("hilbert_transform: need at least 2 samples");
    const std::size_t total = next_power_of_two(n * pad_factor);
    const std::size_t left = (total - n) / 2;

    std::vector<std::complex<double>> buf(total);
    for (std::size_t i = 0; i < left; ++i) buf[i] = f.front();
    for (std::size_t i = 0; i < n; ++i) buf[left + i] = f[i];
    for (std::size_t i = left + n; i < total; ++i) buf[i] = f.back();

    fft_radix2(buf, -1);
    // multiplier i*sgn(k): convolution kernel 1/(pi (x'-x)) has transfer i*sgn(k)
    // under the e^{-ikx} forward convention
    buf[0] = 0.0;
    buf[total / 2] = 0.0;
    const std::complex<double> iu(0.0, 1.0);
    for (std::size_t k = 1; k < total / 2; ++k) buf[k] *= iu;
    for (std::size_t k = total / 2 + 1; k < total; ++k) buf[k] *= -iu;
    fft_radix2(buf, +1);

    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = buf[left + i].real();
    return out;
}

} // namespace homsim

#endif
