#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastdeconv/convolve.hpp"
#include "fastdeconv/image.hpp"
#include "fastdeconv/psf.hpp"

namespace fastdeconv {

/// Richardson-Lucy parameters. The iteration count is the single tuning
/// parameter of the method; everything else is numerical plumbing.
struct RlConfig {
    int iterations = 100;
    OperatorKind op = OperatorKind::Auto;
    double epsilonDiv = 1e-8; // quotient guard: denominator max(v, epsilonDiv)
    bool clampNonNegative = true;
};

struct RlIterationRecord {
    int iteration = 0;           // 1-based
    double inactiveFraction = 0; // pixels excluded from this iteration's convolutions
    double maxAbsChange = 0;
    double seconds = 0;
};

struct RlTrace {
    std::vector<RlIterationRecord> records;

    /// Share of per-pixel convolution evaluations skipped across the run.
    /// Both convolutions of an iteration skip the same pixels, so this is
    /// the mean inactive fraction.
    double omittedPercent() const {
        if (records.empty()) return 0.0;
        double sum = 0.0;
        for (const RlIterationRecord& r : records) sum += r.inactiveFraction;
        return 100.0 * sum / static_cast<double>(records.size());
    }

    double totalSeconds() const {
        double sum = 0.0;
        for (const RlIterationRecord& r : records) sum += r.seconds;
        return sum;
    }
};

struct RlResult {
    Image image;
    RlTrace trace;
};

/// Per-pixel active flags plus the cached re-blurred image; inactive pixels
/// keep their previous re-blur value and iterate value until the periodic
/// full reactivation.
struct ActivityMask {
    std::vector<std::uint8_t> active;
    Image cachedV;
    double threshold = 0.0;
    int reactivationPeriod = 10;
};

enum class BoundaryMode { Cyclic, Replicate };

namespace detail {

inline void validateRlInputs(const Image& f, const RlConfig& cfg, const char* where) {
    if (f.empty())
        throw std::invalid_argument(std::string(where) + ": empty input image");
    if (cfg.iterations < 0)
        throw std::invalid_argument(std::string(where) + ": iterations must be >= 0");
    if (!(cfg.epsilonDiv > 0.0))
        throw std::invalid_argument(std::string(where) + ": epsilonDiv must be positive");
    for (double v : f.data()) {
        if (!std::isfinite(v))
            throw std::invalid_argument(std::string(where) + ": input image has non-finite pixels");
        if (v < 0.0)
            throw std::invalid_argument(std::string(where) + ": input image must be nonnegative");
    }
}

inline void quotientInto(const Image& f, const Image& v, double eps, Image& q) {
    ensureSize(q, f.width(), f.height());
    const double* fp = f.data().data();
    const double* vp = v.data().data();
    double* qp = q.data().data();
    const std::size_t n = f.pixelCount();
    for (std::size_t i = 0; i < n; ++i)
        qp[i] = fp[i] / std::max(vp[i], eps);
}

inline void throwNan(int iteration, const char* where) {
    throw std::runtime_error(std::string(where) + ": NaN in iterate at iteration " +
                             std::to_string(iteration));
}

inline Image rlStepPlanned(const Image& u, const Image& f, const ConvPlan& forward,
                           const ConvPlan& adjointPlan, const RlConfig& cfg,
                           double* maxAbsChange = nullptr) {
    ConvWorkspace ws;
    Image v, q, c;
    forward.applyInto(u, ws, v);
    quotientInto(f, v, cfg.epsilonDiv, q);
    adjointPlan.applyInto(q, ws, c);

    Image next(u.width(), u.height());
    const double* cp = c.data().data();
    const double* up = u.data().data();
    double* np = next.data().data();
    double maxChange = 0.0;
    const std::size_t n = u.pixelCount();
    for (std::size_t i = 0; i < n; ++i) {
        double value = cp[i] * up[i];
        if (cfg.clampNonNegative && value < 0.0) value = 0.0;
        np[i] = value;
        const double d = std::abs(value - up[i]);
        if (d > maxChange) maxChange = d;
    }
    if (maxAbsChange) *maxAbsChange = maxChange;
    return next;
}

} // namespace detail

/// One Richardson-Lucy multiplicative update of u given data f and PSF h:
/// u' = (h* * (f / (u*h))) . u, with replicate-boundary convolutions.
inline Image rlStep(const Image& u, const Image& f, const Psf& h, const RlConfig& cfg = {}) {
    if (!u.sameSize(f))
        throw std::invalid_argument("rlStep: image dimensions differ");
    const ConvPlan forward(h, cfg.op);
    const ConvPlan adjointPlan(adjoint(h), forward.kind());
    return detail::rlStepPlanned(u, f, forward, adjointPlan, cfg);
}

/// Standard Richardson-Lucy deconvolution starting from u0 = f.
inline RlResult rlDeconvolve(const Image& f, const Psf& h, const RlConfig& cfg = {}) {
    detail::validateRlInputs(f, cfg, "rlDeconvolve");
    const ConvPlan forward(h, cfg.op);
    const ConvPlan adjointPlan(adjoint(h), forward.kind());

    const std::size_t n = f.pixelCount();
    RlResult result;
    result.image = f;
    result.trace.records.reserve(static_cast<std::size_t>(cfg.iterations));

    ConvWorkspace ws;
    Image v, q, c;
    Image next(f.width(), f.height());
    for (int k = 1; k <= cfg.iterations; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        forward.applyInto(result.image, ws, v);
        detail::quotientInto(f, v, cfg.epsilonDiv, q);
        adjointPlan.applyInto(q, ws, c);

        const double* cp = c.data().data();
        const double* up = result.image.data().data();
        double* np = next.data().data();
        double maxChange = 0.0;
        double checkSum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double value = cp[i] * up[i];
            if (cfg.clampNonNegative && value < 0.0) value = 0.0;
            np[i] = value;
            const double d = std::abs(value - up[i]);
            if (d > maxChange) maxChange = d;
            checkSum += value;
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (std::isnan(checkSum)) detail::throwNan(k, "rlDeconvolve");
        std::swap(result.image, next);
        result.trace.records.push_back(
            {k, 0.0, maxChange, std::chrono::duration<double>(t1 - t0).count()});
    }
    return result;
}

/// Richardson-Lucy with selective convolution. Pixels whose absolute change
/// falls below `threshold` go inactive: they keep their re-blur value and
/// iterate value, and both convolutions skip them. Every `period` iterations
/// all pixels are reactivated for one full step. The quotient f/v is formed
/// over all pixels (with cached v at inactive ones) so active pixels see
/// their neighbours' data.
inline RlResult rlDeconvolveSelective(const Image& f, const Psf& h, const RlConfig& cfg,
                                      double threshold, int period = 10) {
    detail::validateRlInputs(f, cfg, "rlDeconvolveSelective");
    if (threshold < 0.0)
        throw std::invalid_argument("rlDeconvolveSelective: threshold must be >= 0");
    if (period < 1)
        throw std::invalid_argument("rlDeconvolveSelective: reactivation period must be >= 1");

    OperatorKind kind = cfg.op;
    if (kind == OperatorKind::Auto)
        kind = std::holds_alternative<SparsePsf>(h) ? OperatorKind::List : OperatorKind::Naive;
    if (!supportsMasking(kind))
        throw std::invalid_argument("operator does not support masked evaluation");
    const ConvPlan forward(h, kind);
    const ConvPlan adjointPlan(adjoint(h), kind);

    const int nx = f.width(), ny = f.height();
    const std::size_t n = f.pixelCount();

    RlResult result;
    result.image = f;
    result.trace.records.reserve(static_cast<std::size_t>(cfg.iterations));

    ActivityMask mask;
    mask.active.assign(n, 1);
    mask.cachedV = Image(nx, ny, 0.0);
    mask.threshold = threshold;
    mask.reactivationPeriod = period;

    ConvWorkspace ws;
    Image vNew(nx, ny), q, c;
    for (int k = 0; k < cfg.iterations; ++k) {
        if (k % period == 0)
            std::fill(mask.active.begin(), mask.active.end(), std::uint8_t{1});

        const auto t0 = std::chrono::steady_clock::now();
        std::size_t inactive = 0;
        for (std::uint8_t a : mask.active)
            if (!a) ++inactive;

        forward.applyMaskedInto(result.image, mask.active, mask.cachedV, ws, vNew);
        std::swap(mask.cachedV, vNew);
        detail::quotientInto(f, mask.cachedV, cfg.epsilonDiv, q);
        // correction values at inactive pixels are never read; q is just a
        // correctly-sized fallback
        adjointPlan.applyMaskedInto(q, mask.active, q, ws, c);

        const double* cp = c.data().data();
        double* up = result.image.data().data();
        std::uint8_t* act = mask.active.data();
        double maxChange = 0.0;
        double checkSum = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!act[i]) continue;
            double value = cp[i] * up[i];
            if (cfg.clampNonNegative && value < 0.0) value = 0.0;
            const double d = std::abs(value - up[i]);
            if (d > maxChange) maxChange = d;
            if (d < threshold) act[i] = 0;
            up[i] = value;
            checkSum += value;
        }
        const auto t1 = std::chrono::steady_clock::now();
        if (std::isnan(checkSum)) detail::throwNan(k + 1, "rlDeconvolveSelective");
        result.trace.records.push_back({k + 1,
                                        static_cast<double>(inactive) / static_cast<double>(n),
                                        maxChange,
                                        std::chrono::duration<double>(t1 - t0).count()});
    }
    return result;
}

/// Blur generator for experiments: cyclic mode wraps around (Fourier
/// semantics), replicate mode uses the dispatched spatial operator.
inline Image blurImage(const Image& g, const Psf& h, BoundaryMode mode) {
    if (mode == BoundaryMode::Cyclic)
        return fourierConvolve(g, toDense(h));
    return convolve(g, h, OperatorKind::Auto);
}

} // namespace fastdeconv
