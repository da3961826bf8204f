#pragma once

// Shared helpers for the test suites: deterministic random images, an
// independent convolution oracle (clamped indexing, no shared code with the
// library operators), and a synthetic photographic test scene.

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "fastdeconv/image.hpp"
#include "fastdeconv/psf.hpp"

namespace testutil {

inline fastdeconv::Image randomImage(std::mt19937& rng, int w, int h, double lo = 0.0,
                                     double hi = 255.0) {
    std::uniform_real_distribution<double> dist(lo, hi);
    fastdeconv::Image img(w, h);
    for (double& v : img.data()) v = dist(rng);
    return img;
}

inline fastdeconv::Image randomIntegerImage(std::mt19937& rng, int w, int h, int lo = 0,
                                            int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    fastdeconv::Image img(w, h);
    for (double& v : img.data()) v = static_cast<double>(dist(rng));
    return img;
}

// Independent oracle: direct double loop with per-axis clamped indexing
// (replicate continuation), no padding buffer, no shared code with the
// operators under test.
inline fastdeconv::Image oracleConvolve(const fastdeconv::Image& img,
                                        const std::vector<fastdeconv::PsfTap>& taps) {
    const int w = img.width(), h = img.height();
    fastdeconv::Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (const fastdeconv::PsfTap& t : taps) {
                const int sx = std::clamp(x + t.dx, 0, w - 1);
                const int sy = std::clamp(y + t.dy, 0, h - 1);
                acc += t.w * img(sx, sy);
            }
            out(x, y) = acc;
        }
    return out;
}

// Cyclic counterpart with wrap-around indexing.
inline fastdeconv::Image oracleCyclicConvolve(const fastdeconv::Image& img,
                                              const std::vector<fastdeconv::PsfTap>& taps) {
    const int w = img.width(), h = img.height();
    const auto wrap = [](int v, int n) { return ((v % n) + n) % n; };
    fastdeconv::Image out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (const fastdeconv::PsfTap& t : taps)
                acc += t.w * img(wrap(x + t.dx, w), wrap(y + t.dy, h));
            out(x, y) = acc;
        }
    return out;
}

inline double maxAbsDiff(const fastdeconv::Image& a, const fastdeconv::Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.pixelCount(); ++i)
        m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

inline bool bitIdentical(const fastdeconv::Image& a, const fastdeconv::Image& b) {
    if (!a.sameSize(b)) return false;
    for (std::size_t i = 0; i < a.pixelCount(); ++i)
        if (a.data()[i] != b.data()[i]) return false;
    return true;
}

inline fastdeconv::Image transpose(const fastdeconv::Image& img) {
    fastdeconv::Image out(img.height(), img.width());
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            out(y, x) = img(x, y);
    return out;
}

// Deterministic synthetic scene with photographic structure: a smooth bright
// sky, a textured ground, a dark figure with hard edges, and fine grain.
// Values are integers in [0, 255] so the image survives PGM round trips.
inline fastdeconv::Image syntheticScene(int w, int h, unsigned seed = 42) {
    fastdeconv::Image img(w, h);
    const double horizon = 0.45 * h;

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v;
            if (y < horizon) {
                // sky: bright with a gentle diagonal ramp
                v = 205.0 - 20.0 * (static_cast<double>(y) / horizon) +
                    8.0 * (static_cast<double>(x) / w);
            } else {
                // ground: darker with mild undulation
                const double g = (y - horizon) / (h - horizon);
                v = 150.0 - 45.0 * g + 12.0 * std::sin(0.11 * x) * std::cos(0.07 * y);
            }
            img(x, y) = v;
        }

    // sun disc in the sky
    const double sunX = 0.76 * w, sunY = 0.17 * h, sunR = 0.07 * w;
    // dark standing figure: ellipse body plus head
    const double figX = 0.38 * w, figY = 0.66 * h;
    const double bodyRx = 0.055 * w, bodyRy = 0.17 * h;
    const double headR = 0.045 * w, headY = figY - bodyRy - 0.035 * h;

    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            const double sd = std::hypot(x - sunX, y - sunY);
            if (sd < sunR) img(x, y) = 245.0;
            const double bx = (x - figX) / bodyRx, by = (y - figY) / bodyRy;
            if (bx * bx + by * by < 1.0) img(x, y) = 32.0;
            if (std::hypot(x - figX, y - headY) < headR) img(x, y) = 38.0;
        }

    // thin dark mast to the right of the figure
    const int mastX = static_cast<int>(0.62 * w);
    for (int y = static_cast<int>(0.30 * h); y < static_cast<int>(0.82 * h); ++y)
        for (int x = mastX; x < mastX + std::max(1, w / 128); ++x)
            if (x < w) img(x, y) = 45.0;

    // fine deterministic grain on the ground only, smoothed to avoid
    // unnaturally white noise
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> grain(-14.0, 14.0);
    fastdeconv::Image noise(w, h, 0.0);
    for (double& v : noise.data()) v = grain(rng);
    for (int y = static_cast<int>(horizon); y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            int count = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int sx = std::clamp(x + dx, 0, w - 1);
                    const int sy = std::clamp(y + dy, 0, h - 1);
                    acc += noise(sx, sy);
                    ++count;
                }
            img(x, y) += acc / count;
        }

    for (double& v : img.data())
        v = std::clamp(std::round(v), 0.0, 255.0);
    return img;
}

} // namespace testutil
