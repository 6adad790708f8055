#pragma once

#include "umodem/error.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

namespace umodem {

constexpr bool is_power_of_two(std::size_t n) noexcept { return n != 0 && (n & (n - 1)) == 0; }

constexpr std::size_t next_power_of_two(std::size_t n) noexcept {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// In-place iterative radix-2 FFT. inverse=true computes the unscaled inverse.
inline void fft_inplace(std::span<std::complex<double>> data, bool inverse = false) {
    const std::size_t n = data.size();
    if (!is_power_of_two(n))
        throw ModemError(Errc::config, "fft size must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(data[i], data[j]);
    }

    const double sign = inverse ? 1.0 : -1.0;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const std::size_t half = len / 2;
        // twiddles computed directly per index keep the error at O(eps log n)
        std::vector<std::complex<double>> tw(half);
        for (std::size_t k = 0; k < half; ++k) {
            const double a = sign * 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(len);
            tw[k] = {std::cos(a), std::sin(a)};
        }
        for (std::size_t start = 0; start < n; start += len) {
            for (std::size_t k = 0; k < half; ++k) {
                const auto u = data[start + k];
                const auto v = data[start + k + half] * tw[k];
                data[start + k] = u + v;
                data[start + k + half] = u - v;
            }
        }
    }
}

inline std::vector<std::complex<double>> fft_real(std::span<const double> x) {
    std::vector<std::complex<double>> buf(x.begin(), x.end());
    fft_inplace(buf);
    return buf;
}

// out[d] = sum_k x[d + k] * h[k] for d in [0, max_lag], computed through the FFT.
// Requires x.size() >= h.size() + max_lag.
inline std::vector<double> cross_correlate(std::span<const double> x, std::span<const double> h,
                                           std::size_t max_lag) {
    if (h.empty() || x.size() < h.size() + max_lag)
        throw ModemError(Errc::insufficient_data, "cross-correlation input too short");

    const std::size_t used = h.size() + max_lag;
    const std::size_t n = next_power_of_two(used + h.size());
    std::vector<std::complex<double>> a(n), b(n);
    for (std::size_t k = 0; k < used; ++k) a[k] = x[k];
    for (std::size_t k = 0; k < h.size(); ++k) b[k] = h[k];
    fft_inplace(a);
    fft_inplace(b);
    for (std::size_t k = 0; k < n; ++k) a[k] *= std::conj(b[k]);
    fft_inplace(a, true);

    std::vector<double> out(max_lag + 1);
    for (std::size_t d = 0; d <= max_lag; ++d) out[d] = a[d].real() / static_cast<double>(n);
    return out;
}

} // namespace umodem
