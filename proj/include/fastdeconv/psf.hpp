#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace fastdeconv {

/// One support pixel of a PSF: column/row offset from the origin plus weight.
struct PsfTap {
    int dx = 0;
    int dy = 0;
    double w = 0.0;
};

/// PSF grid with an explicit anchor marking the origin pixel. Grid cell
/// (ix, iy) acts at offset (ix - anchorX, iy - anchorY). Weights are
/// normalized to unit mass on construction; zero weights are allowed.
class DensePsf {
public:
    DensePsf(int width, int height, int anchorX, int anchorY, std::vector<double> weights)
        : width_(width), height_(height), anchorX_(anchorX), anchorY_(anchorY),
          weights_(std::move(weights)) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("DensePsf: dimensions must be at least 1x1");
        if (anchorX < 0 || anchorX >= width || anchorY < 0 || anchorY >= height)
            throw std::invalid_argument("DensePsf: anchor must lie inside the grid");
        if (weights_.size() != static_cast<std::size_t>(width) * height)
            throw std::invalid_argument("DensePsf: weight count does not match dimensions");
        double sum = 0.0;
        for (double w : weights_) {
            if (!(w >= 0.0) || !std::isfinite(w))
                throw std::invalid_argument("DensePsf: weights must be finite and nonnegative");
            sum += w;
        }
        if (sum <= 0.0)
            throw std::invalid_argument("DensePsf: total weight must be positive");
        for (double& w : weights_) w /= sum;
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int anchorX() const { return anchorX_; }
    int anchorY() const { return anchorY_; }

    double weightAt(int ix, int iy) const {
        return weights_[static_cast<std::size_t>(iy) * width_ + ix];
    }
    const double* rowWeights(int iy) const {
        return weights_.data() + static_cast<std::size_t>(iy) * width_;
    }
    const std::vector<double>& weights() const { return weights_; }

    int minDx() const { return -anchorX_; }
    int maxDx() const { return width_ - 1 - anchorX_; }
    int minDy() const { return -anchorY_; }
    int maxDy() const { return height_ - 1 - anchorY_; }

private:
    int width_, height_;
    int anchorX_, anchorY_;
    std::vector<double> weights_;
};

/// Row-convex PSF of uniform intensity: per support row one contiguous
/// column interval, rows contiguous in dy. This is the shape class the
/// generic box filter requires.
class UniformConvexPsf {
public:
    struct Row {
        int dy;
        int xMin;
        int xMax;
    };

    explicit UniformConvexPsf(std::vector<Row> rows) : rows_(std::move(rows)) {
        if (rows_.empty())
            throw std::invalid_argument("UniformConvexPsf: at least one support row required");
        long count = 0;
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            if (rows_[i].xMin > rows_[i].xMax)
                throw std::invalid_argument("UniformConvexPsf: row interval is empty");
            if (i > 0 && rows_[i].dy != rows_[i - 1].dy + 1)
                throw std::invalid_argument(
                    "UniformConvexPsf: row offsets must be contiguous and increasing");
            count += rows_[i].xMax - rows_[i].xMin + 1;
        }
        supportCount_ = static_cast<int>(count);
        uniformWeight_ = 1.0 / static_cast<double>(supportCount_);
    }

    const std::vector<Row>& rows() const { return rows_; }
    int supportCount() const { return supportCount_; }
    double uniformWeight() const { return uniformWeight_; }

    int minDy() const { return rows_.front().dy; }
    int maxDy() const { return rows_.back().dy; }
    int minDx() const {
        int m = rows_.front().xMin;
        for (const Row& r : rows_) m = std::min(m, r.xMin);
        return m;
    }
    int maxDx() const {
        int m = rows_.front().xMax;
        for (const Row& r : rows_) m = std::max(m, r.xMax);
        return m;
    }

private:
    std::vector<Row> rows_;
    int supportCount_ = 0;
    double uniformWeight_ = 0.0;
};

/// Sparse PSF as a tap list; weights are arbitrary positive reals,
/// normalized to unit mass on construction.
class SparsePsf {
public:
    explicit SparsePsf(std::vector<PsfTap> taps) : taps_(std::move(taps)) {
        if (taps_.empty())
            throw std::invalid_argument("SparsePsf: at least one tap required");
        double sum = 0.0;
        for (const PsfTap& t : taps_) {
            if (!(t.w > 0.0) || !std::isfinite(t.w))
                throw std::invalid_argument("SparsePsf: weights must be finite and positive");
            sum += t.w;
        }
        std::vector<std::pair<int, int>> coords;
        coords.reserve(taps_.size());
        for (const PsfTap& t : taps_) coords.emplace_back(t.dy, t.dx);
        std::sort(coords.begin(), coords.end());
        if (std::adjacent_find(coords.begin(), coords.end()) != coords.end())
            throw std::invalid_argument("SparsePsf: duplicate tap coordinates");
        for (PsfTap& t : taps_) t.w /= sum;
    }

    const std::vector<PsfTap>& taps() const { return taps_; }
    int supportCount() const { return static_cast<int>(taps_.size()); }

    int minDx() const {
        int m = taps_.front().dx;
        for (const PsfTap& t : taps_) m = std::min(m, t.dx);
        return m;
    }
    int maxDx() const {
        int m = taps_.front().dx;
        for (const PsfTap& t : taps_) m = std::max(m, t.dx);
        return m;
    }
    int minDy() const {
        int m = taps_.front().dy;
        for (const PsfTap& t : taps_) m = std::min(m, t.dy);
        return m;
    }
    int maxDy() const {
        int m = taps_.front().dy;
        for (const PsfTap& t : taps_) m = std::max(m, t.dy);
        return m;
    }

private:
    std::vector<PsfTap> taps_;
};

/// Any of the three concrete PSF representations.
using Psf = std::variant<DensePsf, UniformConvexPsf, SparsePsf>;

// ---------------------------------------------------------------------------
// Generators

/// Horizontal motion-blur line of `length` pixels, anchor at floor(length/2).
inline DensePsf makeLinePsf(int length) {
    if (length < 1)
        throw std::invalid_argument("makeLinePsf: length must be at least 1");
    return DensePsf(length, 1, length / 2, 0, std::vector<double>(length, 1.0));
}

/// Axis-aligned uniform rectangle, anchor at (floor(mx/2), floor(my/2)).
inline DensePsf makeBoxPsf(int mx, int my) {
    if (mx < 1 || my < 1)
        throw std::invalid_argument("makeBoxPsf: dimensions must be at least 1");
    return DensePsf(mx, my, mx / 2, my / 2,
                    std::vector<double>(static_cast<std::size_t>(mx) * my, 1.0));
}

/// Defocus disc of the given diameter: a pixel belongs to the support iff
/// its center lies within Euclidean distance diameter/2 of the center of the
/// bounding d x d grid.
inline UniformConvexPsf makeDiscPsf(int diameter) {
    if (diameter < 1)
        throw std::invalid_argument("makeDiscPsf: diameter must be at least 1");
    const double center = diameter / 2.0;
    const double radiusSq = center * center;
    const int anchor = diameter / 2;
    std::vector<UniformConvexPsf::Row> rows;
    for (int j = 0; j < diameter; ++j) {
        const double yDist = (j + 0.5) - center;
        int lo = diameter, hi = -1;
        for (int i = 0; i < diameter; ++i) {
            const double xDist = (i + 0.5) - center;
            if (xDist * xDist + yDist * yDist <= radiusSq) {
                lo = std::min(lo, i);
                hi = std::max(hi, i);
            }
        }
        if (lo <= hi)
            rows.push_back({j - anchor, lo - anchor, hi - anchor});
    }
    return UniformConvexPsf(std::move(rows));
}

/// 45-degree diagonal line of `length` taps centered on the anchor.
inline SparsePsf makeDiagonalPsf(int length) {
    if (length < 1)
        throw std::invalid_argument("makeDiagonalPsf: length must be at least 1");
    std::vector<PsfTap> taps;
    taps.reserve(length);
    const int anchor = length / 2;
    for (int i = 0; i < length; ++i)
        taps.push_back({i - anchor, i - anchor, 1.0});
    return SparsePsf(std::move(taps));
}

// ---------------------------------------------------------------------------
// Sparse text format: one "dx dy weight" triple per line, '#' comment lines
// ignored, weights renormalized to unit mass on load.

inline SparsePsf parseSparsePsf(const std::string& text) {
    std::vector<PsfTap> taps;
    std::vector<std::pair<int, int>> seen;
    std::istringstream in(text);
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos || line[first] == '#') continue;
        std::istringstream ls(line);
        int dx, dy;
        double w;
        std::string extra;
        if (!(ls >> dx >> dy >> w) || (ls >> extra))
            throw std::runtime_error("sparse PSF: line " + std::to_string(lineNo) +
                                     ": expected 'dx dy weight'");
        if (!(w > 0.0) || !std::isfinite(w))
            throw std::runtime_error("sparse PSF: line " + std::to_string(lineNo) +
                                     ": weight must be positive");
        if (std::find(seen.begin(), seen.end(), std::make_pair(dx, dy)) != seen.end())
            throw std::runtime_error("sparse PSF: line " + std::to_string(lineNo) +
                                     ": duplicate tap (" + std::to_string(dx) + ", " +
                                     std::to_string(dy) + ")");
        seen.emplace_back(dx, dy);
        taps.push_back({dx, dy, w});
    }
    if (taps.empty())
        throw std::runtime_error("sparse PSF: no taps found");
    return SparsePsf(std::move(taps));
}

inline std::string formatSparsePsf(const SparsePsf& psf) {
    std::ostringstream out;
    out << "# dx dy weight\n";
    out.precision(17);
    for (const PsfTap& t : psf.taps())
        out << t.dx << ' ' << t.dy << ' ' << t.w << '\n';
    return out.str();
}

// ---------------------------------------------------------------------------
// Adjoint: reflect about the origin, tap (dx,dy) -> (-dx,-dy).

inline DensePsf adjoint(const DensePsf& psf) {
    const int w = psf.width(), h = psf.height();
    std::vector<double> weights(static_cast<std::size_t>(w) * h);
    for (int iy = 0; iy < h; ++iy)
        for (int ix = 0; ix < w; ++ix)
            weights[static_cast<std::size_t>(h - 1 - iy) * w + (w - 1 - ix)] = psf.weightAt(ix, iy);
    return DensePsf(w, h, w - 1 - psf.anchorX(), h - 1 - psf.anchorY(), std::move(weights));
}

inline UniformConvexPsf adjoint(const UniformConvexPsf& psf) {
    std::vector<UniformConvexPsf::Row> rows;
    rows.reserve(psf.rows().size());
    for (auto it = psf.rows().rbegin(); it != psf.rows().rend(); ++it)
        rows.push_back({-it->dy, -it->xMax, -it->xMin});
    return UniformConvexPsf(std::move(rows));
}

inline SparsePsf adjoint(const SparsePsf& psf) {
    std::vector<PsfTap> taps = psf.taps();
    for (PsfTap& t : taps) {
        t.dx = -t.dx;
        t.dy = -t.dy;
    }
    return SparsePsf(std::move(taps));
}

inline Psf adjoint(const Psf& psf) {
    return std::visit([](const auto& p) -> Psf { return adjoint(p); }, psf);
}

// ---------------------------------------------------------------------------
// Conversions between representations. The offset -> weight map is preserved;
// zero cells of a dense grid carry no taps.

inline SparsePsf toSparse(const DensePsf& psf) {
    std::vector<PsfTap> taps;
    for (int iy = 0; iy < psf.height(); ++iy)
        for (int ix = 0; ix < psf.width(); ++ix) {
            const double w = psf.weightAt(ix, iy);
            if (w > 0.0)
                taps.push_back({ix - psf.anchorX(), iy - psf.anchorY(), w});
        }
    return SparsePsf(std::move(taps));
}

inline SparsePsf toSparse(const UniformConvexPsf& psf) {
    std::vector<PsfTap> taps;
    taps.reserve(psf.supportCount());
    for (const UniformConvexPsf::Row& r : psf.rows())
        for (int dx = r.xMin; dx <= r.xMax; ++dx)
            taps.push_back({dx, r.dy, psf.uniformWeight()});
    return SparsePsf(std::move(taps));
}

inline SparsePsf toSparse(const SparsePsf& psf) { return psf; }

inline SparsePsf toSparse(const Psf& psf) {
    return std::visit([](const auto& p) { return toSparse(p); }, psf);
}

namespace detail {

// Builds a dense grid from taps. The grid always contains the origin so the
// anchor stays inside it even when all offsets are one-sided.
inline DensePsf denseFromTaps(const std::vector<PsfTap>& taps) {
    int minDx = 0, maxDx = 0, minDy = 0, maxDy = 0;
    for (const PsfTap& t : taps) {
        minDx = std::min(minDx, t.dx);
        maxDx = std::max(maxDx, t.dx);
        minDy = std::min(minDy, t.dy);
        maxDy = std::max(maxDy, t.dy);
    }
    const int w = maxDx - minDx + 1;
    const int h = maxDy - minDy + 1;
    std::vector<double> weights(static_cast<std::size_t>(w) * h, 0.0);
    for (const PsfTap& t : taps)
        weights[static_cast<std::size_t>(t.dy - minDy) * w + (t.dx - minDx)] += t.w;
    return DensePsf(w, h, -minDx, -minDy, std::move(weights));
}

} // namespace detail

inline DensePsf toDense(const DensePsf& psf) { return psf; }

inline DensePsf toDense(const UniformConvexPsf& psf) {
    return detail::denseFromTaps(toSparse(psf).taps());
}

inline DensePsf toDense(const SparsePsf& psf) { return detail::denseFromTaps(psf.taps()); }

inline DensePsf toDense(const Psf& psf) {
    return std::visit([](const auto& p) { return toDense(p); }, psf);
}

/// Tap list of any representation (normalized weights, deterministic order).
inline std::vector<PsfTap> psfTaps(const Psf& psf) { return toSparse(psf).taps(); }

// ---------------------------------------------------------------------------
// Shape classification. These inspect the actual tap set, so e.g. a sparse
// PSF that happens to be a uniform horizontal line still qualifies for the
// 1D box filters.

/// Uniform horizontal line: length plus the extents the operators need.
struct LineShape {
    int length;
    int minDx;
    int dy;
};

/// Uniform axis-aligned rectangle with its offset extents.
struct RectShape {
    int mx;
    int my;
    int minDx;
    int minDy;
};

namespace detail {

inline std::vector<PsfTap> sortedTaps(const Psf& psf) {
    std::vector<PsfTap> taps = psfTaps(psf);
    std::sort(taps.begin(), taps.end(), [](const PsfTap& a, const PsfTap& b) {
        return a.dy != b.dy ? a.dy < b.dy : a.dx < b.dx;
    });
    return taps;
}

inline bool uniformWeights(const std::vector<PsfTap>& taps) {
    const double expected = 1.0 / static_cast<double>(taps.size());
    for (const PsfTap& t : taps)
        if (std::abs(t.w - expected) > 1e-12) return false;
    return true;
}

} // namespace detail

inline std::optional<LineShape> asUniformLine(const Psf& psf) {
    const std::vector<PsfTap> taps = detail::sortedTaps(psf);
    if (!detail::uniformWeights(taps)) return std::nullopt;
    const int dy = taps.front().dy;
    for (std::size_t i = 0; i < taps.size(); ++i) {
        if (taps[i].dy != dy) return std::nullopt;
        if (i > 0 && taps[i].dx != taps[i - 1].dx + 1) return std::nullopt;
    }
    return LineShape{static_cast<int>(taps.size()), taps.front().dx, dy};
}

inline std::optional<RectShape> asUniformRect(const Psf& psf) {
    const std::vector<PsfTap> taps = detail::sortedTaps(psf);
    if (!detail::uniformWeights(taps)) return std::nullopt;
    const int minDx = taps.front().dx;
    const int minDy = taps.front().dy;
    const int maxDx = taps.back().dx;
    const int maxDy = taps.back().dy;
    const long mx = static_cast<long>(maxDx) - minDx + 1;
    const long my = static_cast<long>(maxDy) - minDy + 1;
    if (mx * my != static_cast<long>(taps.size())) return std::nullopt;
    std::size_t k = 0;
    for (int dy = minDy; dy <= maxDy; ++dy)
        for (int dx = minDx; dx <= maxDx; ++dx, ++k)
            if (taps[k].dx != dx || taps[k].dy != dy) return std::nullopt;
    return RectShape{static_cast<int>(mx), static_cast<int>(my), minDx, minDy};
}

inline std::optional<UniformConvexPsf> asUniformConvex(const Psf& psf) {
    if (const UniformConvexPsf* p = std::get_if<UniformConvexPsf>(&psf)) return *p;
    const std::vector<PsfTap> taps = detail::sortedTaps(psf);
    if (!detail::uniformWeights(taps)) return std::nullopt;
    std::vector<UniformConvexPsf::Row> rows;
    std::size_t i = 0;
    while (i < taps.size()) {
        const int dy = taps[i].dy;
        const int xMin = taps[i].dx;
        int xMax = xMin;
        ++i;
        while (i < taps.size() && taps[i].dy == dy) {
            if (taps[i].dx != xMax + 1) return std::nullopt; // gap inside a row
            xMax = taps[i].dx;
            ++i;
        }
        if (!rows.empty() && dy != rows.back().dy + 1) return std::nullopt; // gap between rows
        rows.push_back({dy, xMin, xMax});
    }
    return UniformConvexPsf(std::move(rows));
}

} // namespace fastdeconv
