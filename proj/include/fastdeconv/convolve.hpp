#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fastdeconv/fft.hpp"
#include "fastdeconv/image.hpp"
#include "fastdeconv/psf.hpp"

namespace fastdeconv {

/// Convolution strategies. All spatial operators implement the same
/// contract: out(x,y) = sum over taps w(dx,dy) * padded(x+dx, y+dy) with
/// replicate continuation of the input. Fourier computes the cyclic
/// (wrap-around) variant and exists for benchmark and blur-generation
/// parity, not for boundary-correct deconvolution.
enum class OperatorKind {
    Naive,
    List,
    GenericBox,
    Box2dSliding,
    Box2dCumulated,
    Box1dSliding,
    Box1dCumulated,
    Fourier,
    Auto, // resolved by dispatch(), never executed directly
};

inline std::string_view operatorName(OperatorKind kind) {
    switch (kind) {
        case OperatorKind::Naive: return "naive";
        case OperatorKind::List: return "list";
        case OperatorKind::GenericBox: return "generic-box";
        case OperatorKind::Box2dSliding: return "box2d-sliding";
        case OperatorKind::Box2dCumulated: return "box2d-cumul";
        case OperatorKind::Box1dSliding: return "box1d-sliding";
        case OperatorKind::Box1dCumulated: return "box1d-cumul";
        case OperatorKind::Fourier: return "fourier";
        case OperatorKind::Auto: return "auto";
    }
    return "unknown";
}

inline OperatorKind operatorKindFromName(std::string_view name) {
    for (OperatorKind k : {OperatorKind::Naive, OperatorKind::List, OperatorKind::GenericBox,
                           OperatorKind::Box2dSliding, OperatorKind::Box2dCumulated,
                           OperatorKind::Box1dSliding, OperatorKind::Box1dCumulated,
                           OperatorKind::Fourier, OperatorKind::Auto})
        if (operatorName(k) == name) return k;
    throw std::invalid_argument("unknown operator name: " + std::string(name));
}

/// Only the per-pixel operators can skip individual pixels.
inline bool supportsMasking(OperatorKind kind) {
    return kind == OperatorKind::Naive || kind == OperatorKind::List;
}

/// Work counters for the cost-model tests. setupOps covers per-line /
/// per-image preparation (window initialization, running sums), perPixelOps
/// the steady-state arithmetic attributable to individual output pixels.
struct ConvCounters {
    std::uint64_t pixels = 0;
    std::uint64_t perPixelOps = 0;
    std::uint64_t setupOps = 0;
};

/// Reusable buffers for repeated convolutions (one allocation instead of one
/// per call; an RL run applies hundreds of convolutions of equal shape).
struct ConvWorkspace {
    PaddedImage pad;
    std::vector<double> a;
    std::vector<double> b;
    std::vector<const double*> rows;
    std::vector<std::complex<double>> fa;
    std::vector<std::complex<double>> fb;
};

namespace detail {

inline void ensureSize(Image& out, int width, int height) {
    if (out.width() != width || out.height() != height) out = Image(width, height);
}

inline double denseWindowSum(const double* topLeft, std::size_t stride, const double* weights,
                             int mw, int mh) {
    double acc = 0.0;
    for (int iy = 0; iy < mh; ++iy) {
        const double* p = topLeft + static_cast<std::size_t>(iy) * stride;
        const double* w = weights + static_cast<std::size_t>(iy) * mw;
        for (int ix = 0; ix < mw; ++ix) acc += w[ix] * p[ix];
    }
    return acc;
}

// Tap offsets of a sparse PSF as linear displacements into a padded buffer.
struct ListKernel {
    std::vector<std::ptrdiff_t> offsets;
    std::vector<double> weights;

    ListKernel(const SparsePsf& psf, int paddedWidth) {
        offsets.reserve(psf.taps().size());
        weights.reserve(psf.taps().size());
        for (const PsfTap& t : psf.taps()) {
            offsets.push_back(static_cast<std::ptrdiff_t>(t.dy) * paddedWidth + t.dx);
            weights.push_back(t.w);
        }
    }

    double eval(const double* center) const {
        double acc = 0.0;
        for (std::size_t k = 0; k < offsets.size(); ++k)
            acc += weights[k] * center[offsets[k]];
        return acc;
    }
};

// ---------------------------------------------------------------------------
// Naive spatial convolution: direct summation over the axis-parallel
// rectangle enclosing the PSF support. Correctness oracle for all others.

inline void naiveInto(const Image& img, const DensePsf& psf, ConvWorkspace& ws, Image& out,
                      ConvCounters* counters) {
    const int nx = img.width(), ny = img.height();
    const int mw = psf.width(), mh = psf.height();
    ws.pad.assign(img, psf.anchorX(), mw - 1 - psf.anchorX(), psf.anchorY(),
                  mh - 1 - psf.anchorY());
    ensureSize(out, nx, ny);
    const std::size_t stride = static_cast<std::size_t>(ws.pad.width());
    const double* weights = psf.weights().data();
    for (int y = 0; y < ny; ++y) {
        const double* base = ws.pad.row(y);
        double* dst = out.row(y);
        for (int x = 0; x < nx; ++x)
            dst[x] = denseWindowSum(base + x, stride, weights, mw, mh);
        if (counters) {
            counters->pixels += static_cast<std::uint64_t>(nx);
            counters->perPixelOps += static_cast<std::uint64_t>(nx) * mw * mh;
        }
    }
}

// ---------------------------------------------------------------------------
// List filter: direct summation over the sparse tap list, M operations per
// pixel regardless of the bounding-box size.

inline void listInto(const Image& img, const SparsePsf& psf, ConvWorkspace& ws, Image& out,
                     ConvCounters* counters) {
    const int nx = img.width(), ny = img.height();
    const int l = std::max(0, -psf.minDx()), r = std::max(0, psf.maxDx());
    const int t = std::max(0, -psf.minDy()), b = std::max(0, psf.maxDy());
    ws.pad.assign(img, l, r, t, b);
    ensureSize(out, nx, ny);
    const ListKernel kernel(psf, ws.pad.width());
    for (int y = 0; y < ny; ++y) {
        const double* center = ws.pad.row(y + t) + l;
        double* dst = out.row(y);
        for (int x = 0; x < nx; ++x)
            dst[x] = kernel.eval(center + x);
        if (counters) {
            counters->pixels += static_cast<std::uint64_t>(nx);
            counters->perPixelOps += static_cast<std::uint64_t>(nx) * kernel.offsets.size();
        }
    }
}

// ---------------------------------------------------------------------------
// Generic box filter for row-convex uniform PSFs. Sliding the window one
// pixel right removes one pixel per support row and adds one: 2*My update
// operations per shift. The window sum is rebuilt at each scan-line start to
// stop accumulation drift.

inline void genericBoxInto(const Image& img, const UniformConvexPsf& psf, ConvWorkspace& ws,
                           Image& out, ConvCounters* counters) {
    const int nx = img.width(), ny = img.height();
    const auto& rows = psf.rows();
    const int l = std::max(0, -psf.minDx()), r = std::max(0, psf.maxDx());
    const int t = std::max(0, -psf.minDy()), b = std::max(0, psf.maxDy());
    ws.pad.assign(img, l, r, t, b);
    ensureSize(out, nx, ny);
    const double scale = psf.uniformWeight();
    const std::size_t nRows = rows.size();
    ws.rows.resize(nRows);
    for (int y = 0; y < ny; ++y) {
        for (std::size_t i = 0; i < nRows; ++i)
            ws.rows[i] = ws.pad.row(y + rows[i].dy + t);
        double sum = 0.0;
        for (std::size_t i = 0; i < nRows; ++i) {
            const double* p = ws.rows[i];
            for (int dx = rows[i].xMin; dx <= rows[i].xMax; ++dx)
                sum += p[dx + l];
        }
        double* dst = out.row(y);
        dst[0] = sum * scale;
        for (int x = 1; x < nx; ++x) {
            for (std::size_t i = 0; i < nRows; ++i) {
                const double* p = ws.rows[i];
                sum += p[x + rows[i].xMax + l] - p[x - 1 + rows[i].xMin + l];
            }
            dst[x] = sum * scale;
        }
        if (counters) {
            counters->pixels += static_cast<std::uint64_t>(nx);
            counters->setupOps += static_cast<std::uint64_t>(psf.supportCount());
            counters->perPixelOps += static_cast<std::uint64_t>(nx - 1) * 2 * nRows;
        }
    }
}

// ---------------------------------------------------------------------------
// 1D box filters for uniform horizontal lines.

inline void box1dSlidingInto(const Image& img, int length, int minDx, int dy, ConvWorkspace& ws,
                             Image& out, ConvCounters* counters) {
    const int nx = img.width(), ny = img.height();
    const int l = std::max(0, -minDx), r = std::max(0, minDx + length - 1);
    const int t = std::max(0, -dy), b = std::max(0, dy);
    ws.pad.assign(img, l, r, t, b);
    ensureSize(out, nx, ny);
    const int ox = minDx + l; // leftmost window column for output x=0
    const double scale = 1.0 / static_cast<double>(length);
    for (int y = 0; y < ny; ++y) {
        const double* p = ws.pad.row(y + dy + t);
        double* dst = out.row(y);
        double sum = 0.0;
        for (int k = 0; k < length; ++k) sum += p[ox + k];
        dst[0] = sum * scale;
        const double* enter = p + ox + length - 1;
        const double* leave = p + ox;
        for (int x = 1; x < nx; ++x) {
            sum += enter[x] - leave[x - 1];
            dst[x] = sum * scale;
        }
        if (counters) {
            counters->pixels += static_cast<std::uint64_t>(nx);
            counters->setupOps += static_cast<std::uint64_t>(length);
            counters->perPixelOps += static_cast<std::uint64_t>(nx - 1) * 2;
        }
    }
}

inline void box1dCumulatedInto(const Image& img, int length, int minDx, int dy, ConvWorkspace& ws,
                               Image& out, ConvCounters* counters) {
    const int nx = img.width(), ny = img.height();
    const int l = std::max(0, -minDx), r = std::max(0, minDx + length - 1);
    const int t = std::max(0, -dy), b = std::max(0, dy);
    ws.pad.assign(img, l, r, t, b);
    ensureSize(out, nx, ny);
    const int pw = ws.pad.width();
    const int ox = minDx + l;
    const double scale = 1.0 / static_cast<double>(length);
    ws.a.resize(static_cast<std::size_t>(pw));
    double* sums = ws.a.data();
    for (int y = 0; y < ny; ++y) {
        const double* p = ws.pad.row(y + dy + t);
        // cumulated sums over the padded scan line
        sums[0] = p[0];
        for (int i = 1; i < pw; ++i) sums[i] = sums[i - 1] + p[i];
        double* dst = out.row(y);
        const double* hi = sums + ox + length - 1;
        if (ox == 0) {
            dst[0] = hi[0] * scale;
            for (int x = 1; x < nx; ++x)
                dst[x] = (hi[x] - sums[x - 1]) * scale;
        } else {
            const double* lo = sums + ox - 1;
            for (int x = 0; x < nx; ++x)
                dst[x] = (hi[x] - lo[x]) * scale;
        }
        if (counters) {
            counters->pixels += static_cast<std::uint64_t>(nx);
            counters->setupOps += static_cast<std::uint64_t>(pw);
            counters->perPixelOps += static_cast<std::uint64_t>(nx) * 2;
        }
    }
}

// ---------------------------------------------------------------------------
// 2D box filters for uniform rectangles.

// Separable sliding-window box. The full 2D domain is replicate-padded once
// before the horizontal pass, so the vertical pass consumes true replicate
// values and the result matches naive replicate semantics exactly.
inline void box2dSlidingInto(const Image& img, int mx, int my, int minDx, int minDy,
                             ConvWorkspace& ws, Image& out, ConvCounters* counters) {
    const int nx = img.width(), ny = img.height();
    const int l = std::max(0, -minDx), r = std::max(0, minDx + mx - 1);
    const int t = std::max(0, -minDy), b = std::max(0, minDy + my - 1);
    ws.pad.assign(img, l, r, t, b);
    ensureSize(out, nx, ny);
    const int ph = ws.pad.height();
    const int ox = minDx + l;
    const int oy = minDy + t;
    const double scale = 1.0 / (static_cast<double>(mx) * static_cast<double>(my));

    // horizontal pass over every padded row
    ws.a.resize(static_cast<std::size_t>(nx) * ph);
    double* mid = ws.a.data();
    for (int py = 0; py < ph; ++py) {
        const double* p = ws.pad.row(py);
        double* m = mid + static_cast<std::size_t>(py) * nx;
        double sum = 0.0;
        for (int k = 0; k < mx; ++k) sum += p[ox + k];
        m[0] = sum;
        const double* enter = p + ox + mx - 1;
        const double* leave = p + ox;
        for (int x = 1; x < nx; ++x) {
            sum += enter[x] - leave[x - 1];
            m[x] = sum;
        }
        if (counters) {
            counters->setupOps += static_cast<std::uint64_t>(mx);
            counters->perPixelOps += static_cast<std::uint64_t>(nx - 1) * 2;
        }
    }

    // vertical pass with a per-column running sum
    ws.b.assign(static_cast<std::size_t>(nx), 0.0);
    double* colSum = ws.b.data();
    for (int k = 0; k < my; ++k) {
        const double* m = mid + static_cast<std::size_t>(oy + k) * nx;
        for (int x = 0; x < nx; ++x) colSum[x] += m[x];
    }
    if (counters) counters->setupOps += static_cast<std::uint64_t>(nx) * my;
    double* dst = out.row(0);
    for (int x = 0; x < nx; ++x) dst[x] = colSum[x] * scale;
    for (int y = 1; y < ny; ++y) {
        const double* enter = mid + static_cast<std::size_t>(y + oy + my - 1) * nx;
        const double* leave = mid + static_cast<std::size_t>(y - 1 + oy) * nx;
        dst = out.row(y);
        for (int x = 0; x < nx; ++x) {
            colSum[x] += enter[x] - leave[x];
            dst[x] = colSum[x] * scale;
        }
        if (counters) counters->perPixelOps += static_cast<std::uint64_t>(nx) * 2;
    }
    if (counters) counters->pixels += static_cast<std::uint64_t>(nx) * ny;
}

// Cumulated-sum (integral image) box: one summed-area table over the padded
// image, then four lookups and a scale per pixel, independent of mx, my.
inline void box2dCumulatedInto(const Image& img, int mx, int my, int minDx, int minDy,
                               ConvWorkspace& ws, Image& out, ConvCounters* counters) {
    const int nx = img.width(), ny = img.height();
    const int l = std::max(0, -minDx), r = std::max(0, minDx + mx - 1);
    const int t = std::max(0, -minDy), b = std::max(0, minDy + my - 1);
    ws.pad.assign(img, l, r, t, b);
    ensureSize(out, nx, ny);
    const int pw = ws.pad.width(), ph = ws.pad.height();
    const int ox = minDx + l;
    const int oy = minDy + t;
    const double scale = 1.0 / (static_cast<double>(mx) * static_cast<double>(my));

    // SAT with a zero top row and left column: sat(r,c) = sum of padded
    // pixels above and left of (r,c) exclusive.
    const std::size_t sw = static_cast<std::size_t>(pw) + 1;
    ws.a.resize(sw * (static_cast<std::size_t>(ph) + 1));
    double* sat = ws.a.data();
    std::fill(sat, sat + sw, 0.0);
    for (int py = 0; py < ph; ++py) {
        const double* p = ws.pad.row(py);
        const double* prev = sat + static_cast<std::size_t>(py) * sw;
        double* cur = sat + static_cast<std::size_t>(py + 1) * sw;
        cur[0] = 0.0;
        for (int px = 0; px < pw; ++px)
            cur[px + 1] = p[px] + prev[px + 1] + cur[px] - prev[px];
    }
    if (counters) counters->setupOps += static_cast<std::uint64_t>(pw) * ph * 3;

    for (int y = 0; y < ny; ++y) {
        const double* topRow = sat + static_cast<std::size_t>(y + oy) * sw;
        const double* botRow = sat + static_cast<std::size_t>(y + oy + my) * sw;
        double* dst = out.row(y);
        for (int x = 0; x < nx; ++x) {
            const int c0 = x + ox;
            const int c1 = x + ox + mx;
            dst[x] = (botRow[c1] - topRow[c1] - botRow[c0] + topRow[c0]) * scale;
        }
        if (counters) {
            counters->pixels += static_cast<std::uint64_t>(nx);
            counters->perPixelOps += static_cast<std::uint64_t>(nx) * 4;
        }
    }
}

// ---------------------------------------------------------------------------
// Fourier reference: cyclic convolution via forward transform, pointwise
// product, inverse transform. Boundary semantics are periodic, not replicate.

inline void fourierInto(const Image& img, const DensePsf& psf, ConvWorkspace& ws, Image& out) {
    const int nx = img.width(), ny = img.height();
    ws.fa.assign(img.pixelCount(), {0.0, 0.0});
    ws.fb.assign(img.pixelCount(), {0.0, 0.0});
    ensureSize(out, nx, ny);
    for (std::size_t i = 0; i < img.pixelCount(); ++i) ws.fa[i] = img.data()[i];

    const auto wrap = [](int v, int n) { return ((v % n) + n) % n; };
    for (int iy = 0; iy < psf.height(); ++iy)
        for (int ix = 0; ix < psf.width(); ++ix) {
            const double w = psf.weightAt(ix, iy);
            if (w == 0.0) continue;
            const int dx = wrap(ix - psf.anchorX(), nx);
            const int dy = wrap(iy - psf.anchorY(), ny);
            ws.fb[static_cast<std::size_t>(dy) * nx + dx] += w;
        }

    fft2(ws.fa, nx, ny, false);
    fft2(ws.fb, nx, ny, false);
    // out(x,y) = sum_d k(d) img(x+d, y+d) cyclically, i.e. correlation:
    // multiply by the conjugate spectrum.
    for (std::size_t i = 0; i < ws.fa.size(); ++i) ws.fa[i] *= std::conj(ws.fb[i]);
    fft2(ws.fa, nx, ny, true);
    for (std::size_t i = 0; i < out.pixelCount(); ++i) out.data()[i] = ws.fa[i].real();
}

// ---------------------------------------------------------------------------
// Masked evaluation: convolution value at active pixels, fallback elsewhere.
// Active pixels are processed in contiguous runs so the hot loop matches the
// unmasked operators instruction for instruction.

inline void checkMaskArgs(const Image& img, const std::vector<std::uint8_t>& active,
                          const Image& fallback) {
    if (!img.sameSize(fallback))
        throw std::invalid_argument("maskedConvolve: fallback dimensions differ from input");
    if (active.size() != img.pixelCount())
        throw std::invalid_argument("maskedConvolve: mask size differs from input");
}

inline void maskedNaiveInto(const Image& img, const DensePsf& psf,
                            const std::vector<std::uint8_t>& active, const Image& fallback,
                            ConvWorkspace& ws, Image& out, ConvCounters* counters) {
    checkMaskArgs(img, active, fallback);
    const int nx = img.width(), ny = img.height();
    const int mw = psf.width(), mh = psf.height();
    ws.pad.assign(img, psf.anchorX(), mw - 1 - psf.anchorX(), psf.anchorY(),
                  mh - 1 - psf.anchorY());
    ensureSize(out, nx, ny);
    const std::size_t stride = static_cast<std::size_t>(ws.pad.width());
    const double* weights = psf.weights().data();
    std::uint64_t visited = 0;
    for (int y = 0; y < ny; ++y) {
        const double* base = ws.pad.row(y);
        const double* fb = fallback.row(y);
        const std::uint8_t* act = active.data() + static_cast<std::size_t>(y) * nx;
        double* dst = out.row(y);
        int x = 0;
        while (x < nx) {
            if (act[x]) {
                int end = x + 1;
                while (end < nx && act[end]) ++end;
                for (int i = x; i < end; ++i)
                    dst[i] = denseWindowSum(base + i, stride, weights, mw, mh);
                visited += static_cast<std::uint64_t>(end - x);
                x = end;
            } else {
                int end = x + 1;
                while (end < nx && !act[end]) ++end;
                std::copy(fb + x, fb + end, dst + x);
                x = end;
            }
        }
    }
    if (counters) {
        counters->pixels += visited;
        counters->perPixelOps += visited * static_cast<std::uint64_t>(mw) * mh;
    }
}

inline void maskedListInto(const Image& img, const SparsePsf& psf,
                           const std::vector<std::uint8_t>& active, const Image& fallback,
                           ConvWorkspace& ws, Image& out, ConvCounters* counters) {
    checkMaskArgs(img, active, fallback);
    const int nx = img.width(), ny = img.height();
    const int l = std::max(0, -psf.minDx()), r = std::max(0, psf.maxDx());
    const int t = std::max(0, -psf.minDy()), b = std::max(0, psf.maxDy());
    ws.pad.assign(img, l, r, t, b);
    ensureSize(out, nx, ny);
    const ListKernel kernel(psf, ws.pad.width());
    std::uint64_t visited = 0;
    for (int y = 0; y < ny; ++y) {
        const double* center = ws.pad.row(y + t) + l;
        const double* fb = fallback.row(y);
        const std::uint8_t* act = active.data() + static_cast<std::size_t>(y) * nx;
        double* dst = out.row(y);
        int x = 0;
        while (x < nx) {
            if (act[x]) {
                int end = x + 1;
                while (end < nx && act[end]) ++end;
                for (int i = x; i < end; ++i)
                    dst[i] = kernel.eval(center + i);
                visited += static_cast<std::uint64_t>(end - x);
                x = end;
            } else {
                int end = x + 1;
                while (end < nx && !act[end]) ++end;
                std::copy(fb + x, fb + end, dst + x);
                x = end;
            }
        }
    }
    if (counters) {
        counters->pixels += visited;
        counters->perPixelOps += visited * kernel.offsets.size();
    }
}

} // namespace detail

// ---------------------------------------------------------------------------
// One-shot operator entry points.

inline Image naiveConvolve(const Image& img, const DensePsf& psf, ConvCounters* counters = nullptr) {
    ConvWorkspace ws;
    Image out;
    detail::naiveInto(img, psf, ws, out, counters);
    return out;
}

inline Image listConvolve(const Image& img, const SparsePsf& psf, ConvCounters* counters = nullptr) {
    ConvWorkspace ws;
    Image out;
    detail::listInto(img, psf, ws, out, counters);
    return out;
}

inline Image genericBoxConvolve(const Image& img, const UniformConvexPsf& psf,
                                ConvCounters* counters = nullptr) {
    ConvWorkspace ws;
    Image out;
    detail::genericBoxInto(img, psf, ws, out, counters);
    return out;
}

/// Sliding-window box filter for the horizontal uniform line PSF of the
/// given length (anchor floor(length/2), as makeLinePsf produces).
inline Image box1dSlidingConvolve(const Image& img, int length, ConvCounters* counters = nullptr) {
    if (length < 1) throw std::invalid_argument("box1dSlidingConvolve: length must be >= 1");
    ConvWorkspace ws;
    Image out;
    detail::box1dSlidingInto(img, length, -(length / 2), 0, ws, out, counters);
    return out;
}

/// Cumulated-sum variant: per-line prefix sums over the padded row, then one
/// subtraction per pixel.
inline Image box1dCumulatedConvolve(const Image& img, int length, ConvCounters* counters = nullptr) {
    if (length < 1) throw std::invalid_argument("box1dCumulatedConvolve: length must be >= 1");
    ConvWorkspace ws;
    Image out;
    detail::box1dCumulatedInto(img, length, -(length / 2), 0, ws, out, counters);
    return out;
}

/// Separable sliding-window box filter for the uniform mx x my rectangle
/// (anchors floor(mx/2), floor(my/2), as makeBoxPsf produces).
inline Image box2dSlidingConvolve(const Image& img, int mx, int my, ConvCounters* counters = nullptr) {
    if (mx < 1 || my < 1) throw std::invalid_argument("box2dSlidingConvolve: sizes must be >= 1");
    ConvWorkspace ws;
    Image out;
    detail::box2dSlidingInto(img, mx, my, -(mx / 2), -(my / 2), ws, out, counters);
    return out;
}

/// Integral-image box filter for the uniform mx x my rectangle.
inline Image box2dCumulatedConvolve(const Image& img, int mx, int my, ConvCounters* counters = nullptr) {
    if (mx < 1 || my < 1) throw std::invalid_argument("box2dCumulatedConvolve: sizes must be >= 1");
    ConvWorkspace ws;
    Image out;
    detail::box2dCumulatedInto(img, mx, my, -(mx / 2), -(my / 2), ws, out, counters);
    return out;
}

inline Image fourierConvolve(const Image& img, const DensePsf& psf) {
    ConvWorkspace ws;
    Image out;
    detail::fourierInto(img, psf, ws, out);
    return out;
}

inline Image maskedNaiveConvolve(const Image& img, const DensePsf& psf,
                                 const std::vector<std::uint8_t>& active, const Image& fallback,
                                 ConvCounters* counters = nullptr) {
    ConvWorkspace ws;
    Image out;
    detail::maskedNaiveInto(img, psf, active, fallback, ws, out, counters);
    return out;
}

inline Image maskedListConvolve(const Image& img, const SparsePsf& psf,
                                const std::vector<std::uint8_t>& active, const Image& fallback,
                                ConvCounters* counters = nullptr) {
    ConvWorkspace ws;
    Image out;
    detail::maskedListInto(img, psf, active, fallback, ws, out, counters);
    return out;
}

// ---------------------------------------------------------------------------
// Dispatch: maps a PSF (and an optional explicit preference) to the most
// specific applicable operator.

inline bool operatorAcceptsPsf(OperatorKind kind, const Psf& psf) {
    switch (kind) {
        case OperatorKind::Naive:
        case OperatorKind::List:
        case OperatorKind::Fourier:
            return true;
        case OperatorKind::GenericBox:
            return asUniformConvex(psf).has_value();
        case OperatorKind::Box2dSliding:
        case OperatorKind::Box2dCumulated:
            return asUniformRect(psf).has_value();
        case OperatorKind::Box1dSliding:
        case OperatorKind::Box1dCumulated:
            return asUniformLine(psf).has_value();
        case OperatorKind::Auto:
            return true;
    }
    return false;
}

inline OperatorKind dispatch(const Psf& psf, OperatorKind preference = OperatorKind::Auto) {
    if (preference == OperatorKind::Auto) {
        if (asUniformLine(psf)) return OperatorKind::Box1dCumulated;
        if (asUniformRect(psf)) return OperatorKind::Box2dCumulated;
        if (std::holds_alternative<UniformConvexPsf>(psf)) return OperatorKind::GenericBox;
        if (std::holds_alternative<SparsePsf>(psf)) return OperatorKind::List;
        return OperatorKind::Naive;
    }
    if (!operatorAcceptsPsf(preference, psf)) {
        const char* psfKind = std::holds_alternative<DensePsf>(psf)           ? "dense"
                              : std::holds_alternative<UniformConvexPsf>(psf) ? "uniform-convex"
                                                                              : "sparse";
        throw std::invalid_argument("operator '" + std::string(operatorName(preference)) +
                                    "' cannot handle this " + psfKind + " PSF");
    }
    return preference;
}

// ---------------------------------------------------------------------------
// ConvPlan binds a PSF to a resolved operator and its prepared
// representation, so repeated applications (one per RL iteration) skip
// re-classification. Plans are immutable; pass a workspace to reuse buffers.

class ConvPlan {
public:
    explicit ConvPlan(const Psf& psf, OperatorKind preference = OperatorKind::Auto)
        : kind_(dispatch(psf, preference)) {
        switch (kind_) {
            case OperatorKind::Naive:
            case OperatorKind::Fourier:
                dense_ = toDense(psf);
                break;
            case OperatorKind::List:
                sparse_ = toSparse(psf);
                break;
            case OperatorKind::GenericBox:
                convex_ = asUniformConvex(psf);
                break;
            case OperatorKind::Box1dSliding:
            case OperatorKind::Box1dCumulated:
                line_ = asUniformLine(psf);
                break;
            case OperatorKind::Box2dSliding:
            case OperatorKind::Box2dCumulated:
                rect_ = asUniformRect(psf);
                break;
            case OperatorKind::Auto:
                break; // unreachable: dispatch never returns Auto
        }
    }

    OperatorKind kind() const { return kind_; }

    void applyInto(const Image& img, ConvWorkspace& ws, Image& out,
                   ConvCounters* counters = nullptr) const {
        switch (kind_) {
            case OperatorKind::Naive:
                detail::naiveInto(img, *dense_, ws, out, counters);
                return;
            case OperatorKind::List:
                detail::listInto(img, *sparse_, ws, out, counters);
                return;
            case OperatorKind::GenericBox:
                detail::genericBoxInto(img, *convex_, ws, out, counters);
                return;
            case OperatorKind::Box1dSliding:
                detail::box1dSlidingInto(img, line_->length, line_->minDx, line_->dy, ws, out,
                                         counters);
                return;
            case OperatorKind::Box1dCumulated:
                detail::box1dCumulatedInto(img, line_->length, line_->minDx, line_->dy, ws, out,
                                           counters);
                return;
            case OperatorKind::Box2dSliding:
                detail::box2dSlidingInto(img, rect_->mx, rect_->my, rect_->minDx, rect_->minDy,
                                         ws, out, counters);
                return;
            case OperatorKind::Box2dCumulated:
                detail::box2dCumulatedInto(img, rect_->mx, rect_->my, rect_->minDx, rect_->minDy,
                                           ws, out, counters);
                return;
            case OperatorKind::Fourier:
                detail::fourierInto(img, *dense_, ws, out);
                return;
            case OperatorKind::Auto:
                break;
        }
        throw std::logic_error("ConvPlan: unresolved operator");
    }

    Image apply(const Image& img, ConvCounters* counters = nullptr) const {
        ConvWorkspace ws;
        Image out;
        applyInto(img, ws, out, counters);
        return out;
    }

    void applyMaskedInto(const Image& img, const std::vector<std::uint8_t>& active,
                         const Image& fallback, ConvWorkspace& ws, Image& out,
                         ConvCounters* counters = nullptr) const {
        if (kind_ == OperatorKind::Naive) {
            detail::maskedNaiveInto(img, *dense_, active, fallback, ws, out, counters);
            return;
        }
        if (kind_ == OperatorKind::List) {
            detail::maskedListInto(img, *sparse_, active, fallback, ws, out, counters);
            return;
        }
        throw std::invalid_argument("operator does not support masked evaluation");
    }

    Image applyMasked(const Image& img, const std::vector<std::uint8_t>& active,
                      const Image& fallback, ConvCounters* counters = nullptr) const {
        ConvWorkspace ws;
        Image out;
        applyMaskedInto(img, active, fallback, ws, out, counters);
        return out;
    }

private:
    OperatorKind kind_;
    std::optional<DensePsf> dense_;
    std::optional<SparsePsf> sparse_;
    std::optional<UniformConvexPsf> convex_;
    std::optional<LineShape> line_;
    std::optional<RectShape> rect_;
};

/// Convolve with an explicit or auto-dispatched operator.
inline Image convolve(const Image& img, const Psf& psf,
                      OperatorKind kind = OperatorKind::Auto, ConvCounters* counters = nullptr) {
    return ConvPlan(psf, kind).apply(img, counters);
}

/// Masked convolution: convolution value where active, fallback elsewhere.
inline Image maskedConvolve(const Image& img, const Psf& psf, OperatorKind kind,
                            const std::vector<std::uint8_t>& active, const Image& fallback,
                            ConvCounters* counters = nullptr) {
    if (kind == OperatorKind::Auto)
        kind = std::holds_alternative<SparsePsf>(psf) ? OperatorKind::List : OperatorKind::Naive;
    if (!supportsMasking(kind))
        throw std::invalid_argument("operator does not support masked evaluation");
    return ConvPlan(psf, kind).applyMasked(img, active, fallback, counters);
}

} // namespace fastdeconv
