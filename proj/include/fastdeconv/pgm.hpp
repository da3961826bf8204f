#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "fastdeconv/image.hpp"

namespace fastdeconv {

/// Thrown on malformed PGM input; the message names the byte offset.
class PgmParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

class PgmCursor {
public:
    explicit PgmCursor(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::size_t offset() const { return pos_; }
    bool atEnd() const { return pos_ >= bytes_.size(); }
    std::uint8_t peek() const { return bytes_[pos_]; }
    std::uint8_t take() { return bytes_[pos_++]; }

    static bool isSpace(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
    }

    // PGM headers allow '#' comments running to end of line.
    void skipSpaceAndComments() {
        while (!atEnd()) {
            if (isSpace(peek())) {
                ++pos_;
            } else if (peek() == '#') {
                while (!atEnd() && peek() != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    long parseUint(const char* what) {
        skipSpaceAndComments();
        if (atEnd())
            throw PgmParseError(std::string("PGM: unexpected end of input at byte ") +
                                std::to_string(pos_) + " while reading " + what);
        if (peek() < '0' || peek() > '9')
            throw PgmParseError(std::string("PGM: expected ") + what + " at byte " +
                                std::to_string(pos_));
        long value = 0;
        while (!atEnd() && peek() >= '0' && peek() <= '9') {
            value = value * 10 + (take() - '0');
            if (value > 1000000000L)
                throw PgmParseError(std::string("PGM: ") + what + " out of range at byte " +
                                    std::to_string(pos_));
        }
        return value;
    }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Reads binary (P5) or ASCII (P2) PGM with maxval <= 255.
inline Image readPgm(const std::vector<std::uint8_t>& bytes) {
    detail::PgmCursor cur(bytes);
    if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '2' && bytes[1] != '5'))
        throw PgmParseError("PGM: expected magic 'P2' or 'P5' at byte 0");
    const bool binary = bytes[1] == '5';
    cur.take();
    cur.take();

    const long width = cur.parseUint("width");
    const long height = cur.parseUint("height");
    const long maxval = cur.parseUint("maxval");
    if (width < 1 || height < 1)
        throw PgmParseError("PGM: dimensions must be positive (at byte " +
                            std::to_string(cur.offset()) + ")");
    if (maxval < 1 || maxval > 255)
        throw PgmParseError("PGM: unsupported maxval " + std::to_string(maxval) +
                            " at byte " + std::to_string(cur.offset()) + " (expected <= 255)");

    const std::size_t count = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    std::vector<double> data(count);

    if (binary) {
        if (cur.atEnd() || !detail::PgmCursor::isSpace(cur.peek()))
            throw PgmParseError("PGM: expected single whitespace after maxval at byte " +
                                std::to_string(cur.offset()));
        cur.take();
        if (bytes.size() - cur.offset() < count)
            throw PgmParseError("PGM: truncated pixel data at byte " +
                                std::to_string(bytes.size()) + " (expected " +
                                std::to_string(count) + " bytes after byte " +
                                std::to_string(cur.offset()) + ")");
        for (std::size_t i = 0; i < count; ++i)
            data[i] = static_cast<double>(cur.take());
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = cur.parseUint("pixel value");
            if (v > maxval)
                throw PgmParseError("PGM: sample value " + std::to_string(v) +
                                    " exceeds maxval at byte " + std::to_string(cur.offset()));
            data[i] = static_cast<double>(v);
        }
    }
    return Image(static_cast<int>(width), static_cast<int>(height), std::move(data));
}

/// Writes binary (P5) PGM with maxval 255. Pixels are rounded to the nearest
/// integer and clamped to [0,255].
inline std::vector<std::uint8_t> writePgm(const Image& img) {
    if (img.empty())
        throw std::invalid_argument("writePgm: empty image");
    std::string header = "P5\n" + std::to_string(img.width()) + " " +
                         std::to_string(img.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + img.pixelCount());
    for (double v : img.data()) {
        if (!std::isfinite(v))
            throw std::invalid_argument("writePgm: non-finite pixel value");
        long q = std::lround(v);
        q = std::clamp(q, 0L, 255L);
        bytes.push_back(static_cast<std::uint8_t>(q));
    }
    return bytes;
}

inline Image readPgmFile(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open for reading: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return readPgm(bytes);
}

inline void writePgmFile(const std::string& path, const Image& img) {
    const std::vector<std::uint8_t> bytes = writePgm(img);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

} // namespace fastdeconv
