#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace fastdeconv::detail {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline bool isPowerOfTwo(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t nextPowerOfTwo(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// Iterative radix-2 Cooley-Tukey; size must be a power of two.
inline void fftPow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * kPi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse) {
        const double scale = 1.0 / static_cast<double>(n);
        for (auto& x : a) x *= scale;
    }
}

// Bluestein's algorithm: DFT of arbitrary size as a power-of-two cyclic
// convolution with a chirp sequence. Forward transform only; the inverse is
// obtained by conjugation in fft() below.
inline void fftBluestein(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    const std::size_t m = nextPowerOfTwo(2 * n - 1);
    std::vector<std::complex<double>> chirp(n);
    for (std::size_t k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the angle small enough for accurate trig.
        const std::size_t sq = (k * k) % (2 * n);
        const double ang = -kPi * static_cast<double>(sq) / static_cast<double>(n);
        chirp[k] = std::complex<double>(std::cos(ang), std::sin(ang));
    }
    std::vector<std::complex<double>> b(m, {0.0, 0.0});
    std::vector<std::complex<double>> c(m, {0.0, 0.0});
    for (std::size_t k = 0; k < n; ++k) b[k] = a[k] * chirp[k];
    c[0] = std::conj(chirp[0]);
    for (std::size_t k = 1; k < n; ++k) c[k] = c[m - k] = std::conj(chirp[k]);
    fftPow2(b, false);
    fftPow2(c, false);
    for (std::size_t i = 0; i < m; ++i) b[i] *= c[i];
    fftPow2(b, true);
    for (std::size_t k = 0; k < n; ++k) a[k] = b[k] * chirp[k];
}

/// In-place DFT of arbitrary length (inverse includes the 1/n scale).
inline void fft(std::vector<std::complex<double>>& a, bool inverse) {
    if (a.size() <= 1) return;
    if (isPowerOfTwo(a.size())) {
        fftPow2(a, inverse);
        return;
    }
    if (!inverse) {
        fftBluestein(a);
        return;
    }
    for (auto& x : a) x = std::conj(x);
    fftBluestein(a);
    const double scale = 1.0 / static_cast<double>(a.size());
    for (auto& x : a) x = std::conj(x) * scale;
}

/// Row-column 2D DFT over a row-major width x height grid.
inline void fft2(std::vector<std::complex<double>>& grid, int width, int height, bool inverse) {
    std::vector<std::complex<double>> line;
    line.resize(static_cast<std::size_t>(width));
    for (int y = 0; y < height; ++y) {
        auto* row = grid.data() + static_cast<std::size_t>(y) * width;
        line.assign(row, row + width);
        fft(line, inverse);
        std::copy(line.begin(), line.end(), row);
    }
    line.resize(static_cast<std::size_t>(height));
    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y)
            line[static_cast<std::size_t>(y)] = grid[static_cast<std::size_t>(y) * width + x];
        fft(line, inverse);
        for (int y = 0; y < height; ++y)
            grid[static_cast<std::size_t>(y) * width + x] = line[static_cast<std::size_t>(y)];
    }
}

} // namespace fastdeconv::detail
