#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace fastdeconv {

/// Row-major grid of real-valued grey levels. Nominal range is [0,255] but
/// values are only clamped at file boundaries, never while algorithms
/// iterate. (x, y) addresses column x of row y.
class Image {
public:
    Image() = default;

    Image(int width, int height, double fill = 0.0)
        : width_(width), height_(height) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("Image: dimensions must be at least 1x1");
        data_.assign(static_cast<std::size_t>(width) * height, fill);
    }

    Image(int width, int height, std::vector<double> data)
        : width_(width), height_(height), data_(std::move(data)) {
        if (width < 1 || height < 1)
            throw std::invalid_argument("Image: dimensions must be at least 1x1");
        if (data_.size() != static_cast<std::size_t>(width) * height)
            throw std::invalid_argument("Image: data length does not match dimensions");
    }

    int width() const { return width_; }
    int height() const { return height_; }
    std::size_t pixelCount() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double operator()(int x, int y) const { return data_[index(x, y)]; }
    double& operator()(int x, int y) { return data_[index(x, y)]; }

    const double* row(int y) const { return data_.data() + static_cast<std::size_t>(y) * width_; }
    double* row(int y) { return data_.data() + static_cast<std::size_t>(y) * width_; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool sameSize(const Image& other) const {
        return width_ == other.width_ && height_ == other.height_;
    }

    bool allFinite() const {
        for (double v : data_)
            if (!std::isfinite(v)) return false;
        return true;
    }

private:
    std::size_t index(int x, int y) const {
        return static_cast<std::size_t>(y) * width_ + x;
    }

    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// An image extended by replicate continuation: every pad pixel takes the
/// value of the nearest core pixel (coordinates clamped per axis, so corner
/// pads replicate the nearest corner). Default-constructed instances are
/// empty; assign() refills in place so iteration loops can reuse the buffer.
class PaddedImage {
public:
    PaddedImage() = default;

    PaddedImage(const Image& core, int left, int right, int top, int bottom) {
        assign(core, left, right, top, bottom);
    }

    void assign(const Image& core, int left, int right, int top, int bottom) {
        if (left < 0 || right < 0 || top < 0 || bottom < 0)
            throw std::invalid_argument("padReplicate: pad sizes must be nonnegative");
        if (core.empty())
            throw std::invalid_argument("padReplicate: empty image");
        coreWidth_ = core.width();
        coreHeight_ = core.height();
        left_ = left;
        right_ = right;
        top_ = top;
        bottom_ = bottom;
        width_ = coreWidth_ + left + right;
        height_ = coreHeight_ + top + bottom;
        data_.resize(static_cast<std::size_t>(width_) * height_);
        for (int py = 0; py < height_; ++py) {
            const double* src = core.row(clampIndex(py - top, coreHeight_));
            double* dst = row(py);
            std::fill(dst, dst + left, src[0]);
            std::copy(src, src + coreWidth_, dst + left);
            std::fill(dst + left + coreWidth_, dst + width_, src[coreWidth_ - 1]);
        }
    }

    int width() const { return width_; }
    int height() const { return height_; }
    int coreWidth() const { return coreWidth_; }
    int coreHeight() const { return coreHeight_; }
    int padLeft() const { return left_; }
    int padRight() const { return right_; }
    int padTop() const { return top_; }
    int padBottom() const { return bottom_; }

    /// Value at padded coordinates (0,0 is the top-left pad corner).
    double at(int px, int py) const {
        return data_[static_cast<std::size_t>(py) * width_ + px];
    }

    const double* row(int py) const { return data_.data() + static_cast<std::size_t>(py) * width_; }
    double* row(int py) { return data_.data() + static_cast<std::size_t>(py) * width_; }

    const std::vector<double>& data() const { return data_; }

    /// Crops the pads away again; bit-exact inverse of construction.
    Image core() const {
        Image out(coreWidth_, coreHeight_);
        for (int y = 0; y < coreHeight_; ++y) {
            const double* src = row(y + top_) + left_;
            std::copy(src, src + coreWidth_, out.row(y));
        }
        return out;
    }

private:
    static int clampIndex(int i, int n) { return std::clamp(i, 0, n - 1); }

    int coreWidth_ = 0;
    int coreHeight_ = 0;
    int left_ = 0, right_ = 0, top_ = 0, bottom_ = 0;
    int width_ = 0, height_ = 0;
    std::vector<double> data_;
};

inline PaddedImage padReplicate(const Image& img, int left, int right, int top, int bottom) {
    return PaddedImage(img, left, right, top, bottom);
}

/// Signal-to-noise ratio in decibels: 10*log10(sum(ref^2) / sum((ref-test)^2)).
/// Returns +infinity when the two images are identical.
inline double snrDb(const Image& reference, const Image& test) {
    if (!reference.sameSize(test))
        throw std::invalid_argument("snrDb: image dimensions differ");
    double signal = 0.0;
    double error = 0.0;
    const std::vector<double>& r = reference.data();
    const std::vector<double>& t = test.data();
    for (std::size_t i = 0; i < r.size(); ++i) {
        signal += r[i] * r[i];
        const double d = r[i] - t[i];
        error += d * d;
    }
    if (signal == 0.0)
        throw std::invalid_argument("snrDb: reference image is identically zero");
    if (error == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(signal / error);
}

} // namespace fastdeconv
