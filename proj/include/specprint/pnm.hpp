#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <variant>
#include <vector>

#include "specprint/common.hpp"
#include "specprint/image.hpp"

namespace specprint {

using ParsedImage = std::variant<ImageF, ImageRGB>;

namespace detail {

// Cursor over a byte buffer that remembers its offset for error reporting.
struct PnmCursor {
    const std::uint8_t* data = nullptr;
    std::size_t size = 0;
    std::size_t pos = 0;

    bool eof() const { return pos >= size; }
    int peek() const { return eof() ? -1 : data[pos]; }
    int get() { return eof() ? -1 : data[pos++]; }

    static bool is_space(int c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
    }

    // Whitespace and '#' comment lines may separate any header/ASCII tokens.
    void skip_separators() {
        while (!eof()) {
            const int c = peek();
            if (is_space(c)) {
                ++pos;
            } else if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    // Unsigned decimal token with an upper bound guarding overflow.
    long read_uint(const char* what, long max_value) {
        skip_separators();
        if (eof()) throw format_error(std::string("missing ") + what, pos);
        if (peek() < '0' || peek() > '9')
            throw format_error(std::string("expected digit for ") + what, pos);
        long v = 0;
        while (!eof() && peek() >= '0' && peek() <= '9') {
            v = v * 10 + (get() - '0');
            if (v > max_value)
                throw format_error(std::string(what) + " out of range", pos);
        }
        return v;
    }
};

inline std::vector<double> read_samples(PnmCursor& cur, std::size_t count, int maxval,
                                        bool binary) {
    std::vector<double> out(count);
    const double inv = 1.0 / static_cast<double>(maxval);
    if (binary) {
        const bool wide = maxval > 255;
        const std::size_t bytes_needed = count * (wide ? 2 : 1);
        if (cur.size - cur.pos < bytes_needed)
            throw format_error("truncated raster: need " + std::to_string(bytes_needed) +
                                   " bytes, have " + std::to_string(cur.size - cur.pos),
                               cur.size);
        for (std::size_t i = 0; i < count; ++i) {
            int v;
            if (wide) {
                // 16-bit samples are big-endian
                const int hi = cur.get();
                const int lo = cur.get();
                v = (hi << 8) | lo;
            } else {
                v = cur.get();
            }
            if (v > maxval)
                throw format_error("sample " + std::to_string(v) + " exceeds maxval", cur.pos - 1);
            out[i] = v * inv;
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const long v = cur.read_uint("sample", 65535);
            if (v > maxval)
                throw format_error("sample " + std::to_string(v) + " exceeds maxval", cur.pos);
            out[i] = static_cast<double>(v) * inv;
        }
    }
    return out;
}

} // namespace detail

// Parse a PGM/PPM byte buffer (magics P2, P3, P5, P6). Grayscale magics
// produce ImageF, color magics ImageRGB; samples are scaled to [0,1] by
// division by maxval. Any malformed input raises format_error with the
// offending byte offset.
inline ParsedImage parse_pnm(const std::vector<std::uint8_t>& bytes) {
    detail::PnmCursor cur{bytes.data(), bytes.size(), 0};
    if (bytes.size() < 2) throw format_error("missing magic", 0);
    const char m0 = static_cast<char>(cur.get());
    const char m1 = static_cast<char>(cur.get());
    if (m0 != 'P' || (m1 != '2' && m1 != '3' && m1 != '5' && m1 != '6'))
        throw format_error(std::string("unsupported magic '") + m0 + m1 + "'", 0);
    const bool color = (m1 == '3' || m1 == '6');
    const bool binary = (m1 == '5' || m1 == '6');

    const long width = cur.read_uint("width", 1000000);
    const long height = cur.read_uint("height", 1000000);
    const long maxval = cur.read_uint("maxval", 65535);
    if (width < 1) throw format_error("width must be >= 1", cur.pos);
    if (height < 1) throw format_error("height must be >= 1", cur.pos);
    if (maxval < 1) throw format_error("maxval must be in [1,65535]", cur.pos);

    if (binary) {
        // exactly one whitespace byte between maxval and the raster
        const int c = cur.get();
        if (c < 0 || !detail::PnmCursor::is_space(c))
            throw format_error("expected single whitespace before raster", cur.pos);
    }

    const std::size_t pixels = static_cast<std::size_t>(width) * static_cast<std::size_t>(height);
    if (color) {
        std::vector<double> flat =
            detail::read_samples(cur, pixels * 3, static_cast<int>(maxval), binary);
        ImageRGB img(static_cast<int>(width), static_cast<int>(height));
        for (std::size_t i = 0; i < pixels; ++i) {
            img.r[i] = flat[3 * i];
            img.g[i] = flat[3 * i + 1];
            img.b[i] = flat[3 * i + 2];
        }
        return img;
    }
    ImageF img(static_cast<int>(width), static_cast<int>(height));
    img.samples = detail::read_samples(cur, pixels, static_cast<int>(maxval), binary);
    return img;
}

namespace detail {

inline int quantize_sample(double v, int maxval) {
    v = v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v);
    return static_cast<int>(std::lround(v * maxval));
}

inline void append_sample(std::vector<std::uint8_t>& out, int q, bool wide) {
    if (wide) out.push_back(static_cast<std::uint8_t>((q >> 8) & 0xFF));
    out.push_back(static_cast<std::uint8_t>(q & 0xFF));
}

inline void append_header(std::vector<std::uint8_t>& out, const char* magic, int w, int h,
                          int maxval) {
    const std::string header = std::string(magic) + "\n" + std::to_string(w) + " " +
                               std::to_string(h) + "\n" + std::to_string(maxval) + "\n";
    out.insert(out.end(), header.begin(), header.end());
}

} // namespace detail

// Canonical binary PGM. Values clamped to [0,1], quantized by
// round(v * maxval); 16-bit samples written big-endian.
inline std::vector<std::uint8_t> write_pnm(const ImageF& img, int maxval = 255) {
    if (maxval < 1 || maxval > 65535) throw contract_error("maxval must be in [1,65535]");
    std::vector<std::uint8_t> out;
    const bool wide = maxval > 255;
    out.reserve(32 + img.size() * (wide ? 2 : 1));
    detail::append_header(out, "P5", img.width, img.height, maxval);
    for (double v : img.samples)
        detail::append_sample(out, detail::quantize_sample(v, maxval), wide);
    return out;
}

inline std::vector<std::uint8_t> write_pnm(const ImageRGB& img, int maxval = 255) {
    if (maxval < 1 || maxval > 65535) throw contract_error("maxval must be in [1,65535]");
    std::vector<std::uint8_t> out;
    const bool wide = maxval > 255;
    out.reserve(32 + img.size() * 3 * (wide ? 2 : 1));
    detail::append_header(out, "P6", img.width, img.height, maxval);
    for (std::size_t i = 0; i < img.size(); ++i) {
        detail::append_sample(out, detail::quantize_sample(img.r[i], maxval), wide);
        detail::append_sample(out, detail::quantize_sample(img.g[i], maxval), wide);
        detail::append_sample(out, detail::quantize_sample(img.b[i], maxval), wide);
    }
    return out;
}

inline std::vector<std::uint8_t> read_file_bytes(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw io_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file_bytes(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw io_error("cannot create " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw io_error("write failed for " + path);
}

inline ParsedImage load_pnm(const std::string& path) { return parse_pnm(read_file_bytes(path)); }

// Loaded image reduced to one channel (color inputs via BT.601 luma).
inline ImageF load_luminance(const std::string& path) {
    ParsedImage parsed = load_pnm(path);
    if (std::holds_alternative<ImageF>(parsed)) return std::get<ImageF>(std::move(parsed));
    return to_luminance(std::get<ImageRGB>(parsed));
}

inline void save_pnm(const std::string& path, const ImageF& img, int maxval = 255) {
    write_file_bytes(path, write_pnm(img, maxval));
}

} // namespace specprint
