#pragma once

// Binary PNM raster I/O: PGM (P5) and PPM (P6), 8-bit, maxval 255. The only
// raw-raster formats accepted; PPM loads land in the ycbcr444 working space.

#include <cstdint>
#include <string>
#include <vector>

#include "jfp/errors.hpp"
#include "jfp/io.hpp"
#include "jfp/planes.hpp"

namespace jfp {

namespace detail {

class PnmParser {
public:
    explicit PnmParser(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    std::size_t pos() const { return pos_; }

    char magic_letter() {
        if (bytes_.size() < 2 || bytes_[0] != 'P')
            throw parse_error("not a PNM file: missing 'P' magic", 0);
        const char kind = static_cast<char>(bytes_[1]);
        pos_ = 2;
        return kind;
    }

    // Whitespace and '#' comments separate header tokens.
    int header_number(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size())
            throw parse_error(std::string("unexpected end of header before ") + what, pos_);
        if (!is_digit(bytes_[pos_]))
            throw parse_error(std::string("expected digit for ") + what, pos_);
        long v = 0;
        while (pos_ < bytes_.size() && is_digit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > 1 << 30)
                throw parse_error(std::string(what) + " out of range", pos_);
            ++pos_;
        }
        return static_cast<int>(v);
    }

    // Exactly one whitespace byte separates maxval from the raster.
    void single_space() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_]))
            throw parse_error("expected single whitespace before raster data", pos_);
        ++pos_;
    }

    const std::uint8_t* raster(std::size_t need) {
        if (bytes_.size() - pos_ < need)
            throw parse_error("truncated raster data (need " + std::to_string(need) +
                                  " bytes, have " + std::to_string(bytes_.size() - pos_) + ")",
                              pos_);
        return bytes_.data() + pos_;
    }

private:
    static bool is_space(std::uint8_t c) {
        return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\v' || c == '\f';
    }
    static bool is_digit(std::uint8_t c) { return c >= '0' && c <= '9'; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;
};

}  // namespace detail

inline ImagePlanes load_pnm_bytes(const std::vector<std::uint8_t>& bytes) {
    detail::PnmParser p(bytes);
    const char kind = p.magic_letter();
    if (kind != '5' && kind != '6')
        throw parse_error(std::string("unsupported PNM type 'P") + kind +
                              "' (binary P5/P6 only)",
                          1);
    const int width = p.header_number("width");
    const int height = p.header_number("height");
    const int maxval = p.header_number("maxval");
    if (width <= 0 || height <= 0)
        throw parse_error("non-positive image dimensions", p.pos());
    if (maxval != 255)
        throw parse_error("unsupported maxval " + std::to_string(maxval) + " (must be 255)",
                          p.pos());
    p.single_space();

    const std::size_t pixels = static_cast<std::size_t>(width) * height;
    ImagePlanes img;
    img.original_width = width;
    img.original_height = height;
    if (kind == '5') {
        const std::uint8_t* data = p.raster(pixels);
        img.mode = ColorMode::grayscale;
        Plane plane(width, height);
        std::copy(data, data + pixels, plane.samples.begin());
        img.planes.push_back(std::move(plane));
        return img;
    }
    const std::uint8_t* data = p.raster(pixels * 3);
    img.mode = ColorMode::ycbcr444;
    img.planes.assign(3, Plane(width, height));
    for (std::size_t i = 0; i < pixels; ++i) {
        const Ycbcr c = rgb_to_ycbcr(data[3 * i], data[3 * i + 1], data[3 * i + 2]);
        img.planes[0].samples[i] = static_cast<std::uint8_t>(c.y);
        img.planes[1].samples[i] = static_cast<std::uint8_t>(c.cb);
        img.planes[2].samples[i] = static_cast<std::uint8_t>(c.cr);
    }
    return img;
}

inline ImagePlanes load_pnm(const std::string& path) { return load_pnm_bytes(read_file(path)); }

inline std::vector<std::uint8_t> store_pnm_bytes(const ImagePlanes& img) {
    img.check();
    const ImagePlanes& full = (img.mode == ColorMode::ycbcr420) ? to_ycbcr444(img) : img;
    const bool gray = full.mode == ColorMode::grayscale;
    const std::string header = std::string(gray ? "P5" : "P6") + "\n" +
                               std::to_string(full.width()) + " " +
                               std::to_string(full.height()) + "\n255\n";
    std::vector<std::uint8_t> out(header.begin(), header.end());
    const std::size_t pixels = full.planes[0].samples.size();
    if (gray) {
        out.insert(out.end(), full.planes[0].samples.begin(), full.planes[0].samples.end());
        return out;
    }
    out.reserve(out.size() + pixels * 3);
    for (std::size_t i = 0; i < pixels; ++i) {
        const Rgb c = ycbcr_to_rgb(full.planes[0].samples[i], full.planes[1].samples[i],
                                   full.planes[2].samples[i]);
        out.push_back(static_cast<std::uint8_t>(c.r));
        out.push_back(static_cast<std::uint8_t>(c.g));
        out.push_back(static_cast<std::uint8_t>(c.b));
    }
    return out;
}

inline void store_pnm(const ImagePlanes& img, const std::string& path) {
    write_file_atomic(path, store_pnm_bytes(img));
}

// Single plane as PGM (mask overlays, fixtures).
inline void store_pgm(const Plane& plane, const std::string& path) {
    ImagePlanes img;
    img.mode = ColorMode::grayscale;
    img.planes = {plane};
    img.original_width = plane.width;
    img.original_height = plane.height;
    store_pnm(img, path);
}

}  // namespace jfp
