#pragma once

// Baseline sequential JFIF serializer/parser: SOI/APP0/DQT/SOF0/DHT/SOS/EOI,
// standard Huffman tables, zigzag scan, byte-stuffed entropy data. Supports
// grayscale, 4:4:4 and the experimental 4:2:0 layout; no progressive,
// arithmetic, hierarchical or lossless modes, no restart markers.
//
// The coefficient path is shared with the block transform
// (quantize_to_indices / reconstruct_from_indices), so decoding a stream we
// emitted reproduces the in-memory transform bit for bit.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "jfp/block.hpp"
#include "jfp/errors.hpp"
#include "jfp/io.hpp"
#include "jfp/planes.hpp"

namespace jfp {

// Quantized DCT coefficients of one block in zigzag scan order.
using QuantizedBlock = std::array<int, kBlockSize>;

struct JfifStream {
    std::vector<std::uint8_t> bytes;
    bool operator==(const JfifStream&) const = default;
};

// ---------------------------------------------------------------------------
// Zigzag scan
// ---------------------------------------------------------------------------

// zigzag position -> raster index
inline constexpr std::array<int, kBlockSize> kZigzagOrder = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

template <typename T>
std::array<T, kBlockSize> to_zigzag(const std::array<T, kBlockSize>& raster) {
    std::array<T, kBlockSize> zz;
    for (int i = 0; i < kBlockSize; ++i) zz[i] = raster[kZigzagOrder[i]];
    return zz;
}

template <typename T>
std::array<T, kBlockSize> from_zigzag(const std::array<T, kBlockSize>& zz) {
    std::array<T, kBlockSize> raster;
    for (int i = 0; i < kBlockSize; ++i) raster[kZigzagOrder[i]] = zz[i];
    return raster;
}

// ---------------------------------------------------------------------------
// Quantization tables (Annex K bases + the de-facto quality scaling)
// ---------------------------------------------------------------------------

inline constexpr std::array<int, kBlockSize> kBaseLumaTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

inline constexpr std::array<int, kBlockSize> kBaseChromaTable = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

// quality 50 reproduces the base tables exactly; quality 100 is all ones.
inline std::pair<QuantTable, QuantTable> standard_tables(int quality) {
    if (quality < 1 || quality > 100)
        throw std::invalid_argument("quality must be in [1,100]");
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    auto scaled = [scale](const std::array<int, kBlockSize>& base) {
        QuantTable q;
        for (int i = 0; i < kBlockSize; ++i) {
            const int s = (base[i] * scale + 50) / 100;
            q.steps[i] = s < 1 ? 1 : (s > 255 ? 255 : s);
        }
        return q;
    };
    return {scaled(kBaseLumaTable), scaled(kBaseChromaTable)};
}

// ---------------------------------------------------------------------------
// Huffman tables (Annex K)
// ---------------------------------------------------------------------------

struct HuffSpec {
    std::array<std::uint8_t, 16> bits{};  // code count per length 1..16
    std::vector<std::uint8_t> vals;
};

namespace detail {

inline const HuffSpec& huff_dc_luma() {
    static const HuffSpec s{{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                            {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return s;
}

inline const HuffSpec& huff_dc_chroma() {
    static const HuffSpec s{{0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                            {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
    return s;
}

inline const HuffSpec& huff_ac_luma() {
    static const HuffSpec s{
        {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 0x7d},
        {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13,
         0x51, 0x61, 0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xa1, 0x08, 0x23, 0x42,
         0xb1, 0xc1, 0x15, 0x52, 0xd1, 0xf0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0a,
         0x16, 0x17, 0x18, 0x19, 0x1a, 0x25, 0x26, 0x27, 0x28, 0x29, 0x2a, 0x34, 0x35,
         0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49, 0x4a,
         0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66, 0x67,
         0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x83, 0x84,
         0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98,
         0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa, 0xb2, 0xb3,
         0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5, 0xc6, 0xc7,
         0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9, 0xda, 0xe1,
         0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf1, 0xf2, 0xf3, 0xf4,
         0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return s;
}

inline const HuffSpec& huff_ac_chroma() {
    static const HuffSpec s{
        {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 0x77},
        {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51,
         0x07, 0x61, 0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xa1, 0xb1,
         0xc1, 0x09, 0x23, 0x33, 0x52, 0xf0, 0x15, 0x62, 0x72, 0xd1, 0x0a, 0x16, 0x24,
         0x34, 0xe1, 0x25, 0xf1, 0x17, 0x18, 0x19, 0x1a, 0x26, 0x27, 0x28, 0x29, 0x2a,
         0x35, 0x36, 0x37, 0x38, 0x39, 0x3a, 0x43, 0x44, 0x45, 0x46, 0x47, 0x48, 0x49,
         0x4a, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5a, 0x63, 0x64, 0x65, 0x66,
         0x67, 0x68, 0x69, 0x6a, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7a, 0x82,
         0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8a, 0x92, 0x93, 0x94, 0x95, 0x96,
         0x97, 0x98, 0x99, 0x9a, 0xa2, 0xa3, 0xa4, 0xa5, 0xa6, 0xa7, 0xa8, 0xa9, 0xaa,
         0xb2, 0xb3, 0xb4, 0xb5, 0xb6, 0xb7, 0xb8, 0xb9, 0xba, 0xc2, 0xc3, 0xc4, 0xc5,
         0xc6, 0xc7, 0xc8, 0xc9, 0xca, 0xd2, 0xd3, 0xd4, 0xd5, 0xd6, 0xd7, 0xd8, 0xd9,
         0xda, 0xe2, 0xe3, 0xe4, 0xe5, 0xe6, 0xe7, 0xe8, 0xe9, 0xea, 0xf2, 0xf3, 0xf4,
         0xf5, 0xf6, 0xf7, 0xf8, 0xf9, 0xfa}};
    return s;
}

// Canonical code assignment (lengths walk from short to long, codes count up).
struct HuffEncoder {
    std::array<std::uint16_t, 256> code{};
    std::array<std::uint8_t, 256> size{};

    explicit HuffEncoder(const HuffSpec& spec) {
        std::uint16_t next = 0;
        std::size_t k = 0;
        for (int len = 1; len <= 16; ++len) {
            for (int i = 0; i < spec.bits[len - 1]; ++i) {
                const std::uint8_t symbol = spec.vals.at(k++);
                code[symbol] = next++;
                size[symbol] = static_cast<std::uint8_t>(len);
            }
            next = static_cast<std::uint16_t>(next << 1);
        }
    }
};

struct HuffDecoder {
    std::array<std::int32_t, 17> mincode{};
    std::array<std::int32_t, 17> maxcode{};  // -1 where no codes of that length
    std::array<std::int32_t, 17> valptr{};
    std::vector<std::uint8_t> vals;

    HuffDecoder() { maxcode.fill(-1); }

    explicit HuffDecoder(const HuffSpec& spec) : vals(spec.vals) {
        std::int32_t code = 0;
        std::int32_t k = 0;
        for (int len = 1; len <= 16; ++len) {
            if (spec.bits[len - 1] == 0) {
                maxcode[len] = -1;
            } else {
                valptr[len] = k;
                mincode[len] = code;
                k += spec.bits[len - 1];
                code += spec.bits[len - 1];
                maxcode[len] = code - 1;
            }
            code <<= 1;
        }
    }

    bool empty() const { return vals.empty(); }
};

inline int bit_length(int v) {
    int n = 0;
    while (v) {
        ++n;
        v >>= 1;
    }
    return n;
}

// ---------------------------------------------------------------------------
// Bit I/O over the entropy-coded segment
// ---------------------------------------------------------------------------

class BitWriter {
public:
    explicit BitWriter(std::vector<std::uint8_t>& out) : out_(out) {}

    void put(std::uint32_t bits, int count) {
        acc_ = (acc_ << count) | (bits & ((1u << count) - 1));
        n_ += count;
        while (n_ >= 8) {
            const std::uint8_t byte = static_cast<std::uint8_t>((acc_ >> (n_ - 8)) & 0xFF);
            out_.push_back(byte);
            if (byte == 0xFF) out_.push_back(0x00);  // stuffing
            n_ -= 8;
        }
    }

    // pad the final partial byte with 1-bits
    void flush() {
        if (n_ > 0) put(0xFF, 8 - n_);
    }

private:
    std::vector<std::uint8_t>& out_;
    std::uint32_t acc_ = 0;
    int n_ = 0;
};

class BitReader {
public:
    BitReader(const std::vector<std::uint8_t>& bytes, std::size_t pos)
        : bytes_(bytes), pos_(pos) {}

    int next_bit() {
        if (n_ == 0) {
            if (pos_ >= bytes_.size())
                throw parse_error("entropy data ends mid-scan (bit offset)", bit_offset());
            std::uint8_t byte = bytes_[pos_++];
            if (byte == 0xFF) {
                if (pos_ >= bytes_.size())
                    throw parse_error("entropy data ends after 0xFF (bit offset)", bit_offset());
                const std::uint8_t next = bytes_[pos_++];
                if (next == 0x00) {
                    // stuffed data byte
                } else if (next >= 0xD0 && next <= 0xD7) {
                    throw unsupported_error("restart markers (RSTn) are not supported");
                } else {
                    throw parse_error("marker inside entropy data (bit offset)", bit_offset());
                }
            }
            acc_ = byte;
            n_ = 8;
        }
        --n_;
        return (acc_ >> n_) & 1;
    }

    int receive(int count) {
        int v = 0;
        for (int i = 0; i < count; ++i) v = (v << 1) | next_bit();
        return v;
    }

    // terminate the scan: discard padding bits, return byte position
    std::size_t finish() {
        n_ = 0;
        return pos_;
    }

    std::size_t bit_offset() const { return pos_ * 8 - static_cast<std::size_t>(n_); }

private:
    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_;
    std::uint32_t acc_ = 0;
    int n_ = 0;
};

inline int decode_symbol(BitReader& br, const HuffDecoder& table) {
    std::int32_t code = br.next_bit();
    int len = 1;
    while (code > table.maxcode[len]) {
        if (++len > 16)
            throw parse_error("invalid Huffman code (bit offset)", br.bit_offset());
        code = (code << 1) | br.next_bit();
    }
    const std::int32_t idx = table.valptr[len] + code - table.mincode[len];
    if (idx < 0 || idx >= static_cast<std::int32_t>(table.vals.size()))
        throw parse_error("Huffman code indexes outside the value table (bit offset)",
                          br.bit_offset());
    return table.vals[static_cast<std::size_t>(idx)];
}

// sign-extend a `size`-bit magnitude (T.81 EXTEND)
inline int extend_value(int v, int size) {
    if (size == 0) return 0;
    return (v < (1 << (size - 1))) ? v - (1 << size) + 1 : v;
}

// ---------------------------------------------------------------------------
// Block-level entropy coding
// ---------------------------------------------------------------------------

inline void encode_block(BitWriter& bw, const QuantizedBlock& zz, int& dc_pred,
                         const HuffEncoder& dc, const HuffEncoder& ac) {
    const int diff = zz[0] - dc_pred;
    dc_pred = zz[0];
    const int dc_size = bit_length(diff < 0 ? -diff : diff);
    bw.put(dc.code[dc_size], dc.size[dc_size]);
    if (dc_size > 0)
        bw.put(static_cast<std::uint32_t>(diff < 0 ? diff - 1 : diff), dc_size);

    int run = 0;
    for (int k = 1; k < kBlockSize; ++k) {
        const int v = zz[k];
        if (v == 0) {
            ++run;
            continue;
        }
        while (run > 15) {
            bw.put(ac.code[0xF0], ac.size[0xF0]);  // ZRL
            run -= 16;
        }
        const int ac_size = bit_length(v < 0 ? -v : v);
        const int symbol = (run << 4) | ac_size;
        bw.put(ac.code[symbol], ac.size[symbol]);
        bw.put(static_cast<std::uint32_t>(v < 0 ? v - 1 : v), ac_size);
        run = 0;
    }
    if (run > 0) bw.put(ac.code[0x00], ac.size[0x00]);  // EOB
}

inline QuantizedBlock decode_block(BitReader& br, int& dc_pred, const HuffDecoder& dc,
                                   const HuffDecoder& ac) {
    QuantizedBlock zz{};
    const int dc_size = decode_symbol(br, dc);
    if (dc_size > 11)
        throw parse_error("DC category out of range (bit offset)", br.bit_offset());
    dc_pred += extend_value(br.receive(dc_size), dc_size);
    zz[0] = dc_pred;
    int k = 1;
    while (k < kBlockSize) {
        const int symbol = decode_symbol(br, ac);
        const int run = symbol >> 4;
        const int size = symbol & 0x0F;
        if (size == 0) {
            if (symbol == 0x00) break;  // EOB
            if (symbol == 0xF0) {       // ZRL
                k += 16;
                continue;
            }
            throw parse_error("invalid AC run/size symbol (bit offset)", br.bit_offset());
        }
        k += run;
        if (k >= kBlockSize)
            throw parse_error("AC run overflows the block (bit offset)", br.bit_offset());
        zz[static_cast<std::size_t>(k)] = extend_value(br.receive(size), size);
        ++k;
    }
    return zz;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Encoder
// ---------------------------------------------------------------------------

namespace detail {

inline void put16(std::vector<std::uint8_t>& out, unsigned v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
}

inline void put_marker(std::vector<std::uint8_t>& out, std::uint8_t marker) {
    out.push_back(0xFF);
    out.push_back(marker);
}

inline void put_app0_jfif(std::vector<std::uint8_t>& out) {
    put_marker(out, 0xE0);
    put16(out, 16);
    const char id[5] = {'J', 'F', 'I', 'F', '\0'};
    out.insert(out.end(), id, id + 5);
    out.push_back(1);  // version 1.01
    out.push_back(1);
    out.push_back(0);  // aspect-ratio units
    put16(out, 1);
    put16(out, 1);
    out.push_back(0);  // no thumbnail
    out.push_back(0);
}

inline void put_dqt(std::vector<std::uint8_t>& out, int id, const QuantTable& q) {
    put_marker(out, 0xDB);
    put16(out, 2 + 1 + kBlockSize);
    out.push_back(static_cast<std::uint8_t>(id));  // Pq=0 (8-bit), Tq=id
    std::array<int, kBlockSize> zz = to_zigzag(q.steps);
    for (int v : zz) out.push_back(static_cast<std::uint8_t>(v));
}

inline void put_dht(std::vector<std::uint8_t>& out, int tc, int th, const HuffSpec& spec) {
    put_marker(out, 0xC4);
    put16(out, static_cast<unsigned>(2 + 1 + 16 + spec.vals.size()));
    out.push_back(static_cast<std::uint8_t>((tc << 4) | th));
    for (std::uint8_t b : spec.bits) out.push_back(b);
    out.insert(out.end(), spec.vals.begin(), spec.vals.end());
}

struct ComponentLayout {
    int id;       // 1=Y, 2=Cb, 3=Cr
    int h, v;     // sampling factors
    int tq;       // quant table id
    int td, ta;   // huffman table ids
};

}  // namespace detail

inline JfifStream encode_baseline(const ImagePlanes& img, const QuantTable& q_luma,
                                  const QuantTable& q_chroma) {
    img.check();
    q_luma.check();
    const bool gray = img.mode == ColorMode::grayscale;
    if (!gray) q_chroma.check();
    const bool subsampled = img.mode == ColorMode::ycbcr420;
    const int width = img.width();
    const int height = img.height();
    if (width > 65500 || height > 65500)
        throw std::invalid_argument("image dimensions exceed 65500");

    std::vector<detail::ComponentLayout> comps;
    if (gray) {
        comps = {{1, 1, 1, 0, 0, 0}};
    } else if (subsampled) {
        comps = {{1, 2, 2, 0, 0, 0}, {2, 1, 1, 1, 1, 1}, {3, 1, 1, 1, 1, 1}};
    } else {
        comps = {{1, 1, 1, 0, 0, 0}, {2, 1, 1, 1, 1, 1}, {3, 1, 1, 1, 1, 1}};
    }
    const int hmax = subsampled ? 2 : 1;
    const int mcus_x = (width + 8 * hmax - 1) / (8 * hmax);
    const int mcus_y = (height + 8 * hmax - 1) / (8 * hmax);

    // per-component padded planes and quantized index grids
    std::vector<BlockGrid> grids(comps.size());
    for (std::size_t ci = 0; ci < comps.size(); ++ci) {
        const auto& comp = comps[ci];
        const Plane& src = img.planes[ci];
        const Plane padded =
            detail::pad_plane(src, mcus_x * comp.h * kBlockDim, mcus_y * comp.v * kBlockDim);
        grids[ci] = split_blocks(padded);
    }

    JfifStream stream;
    auto& out = stream.bytes;
    detail::put_marker(out, 0xD8);  // SOI
    detail::put_app0_jfif(out);
    detail::put_dqt(out, 0, q_luma);
    if (!gray) detail::put_dqt(out, 1, q_chroma);

    // SOF0
    detail::put_marker(out, 0xC0);
    detail::put16(out, static_cast<unsigned>(8 + 3 * comps.size()));
    out.push_back(8);  // precision
    detail::put16(out, static_cast<unsigned>(height));
    detail::put16(out, static_cast<unsigned>(width));
    out.push_back(static_cast<std::uint8_t>(comps.size()));
    for (const auto& comp : comps) {
        out.push_back(static_cast<std::uint8_t>(comp.id));
        out.push_back(static_cast<std::uint8_t>((comp.h << 4) | comp.v));
        out.push_back(static_cast<std::uint8_t>(comp.tq));
    }

    detail::put_dht(out, 0, 0, detail::huff_dc_luma());
    detail::put_dht(out, 1, 0, detail::huff_ac_luma());
    if (!gray) {
        detail::put_dht(out, 0, 1, detail::huff_dc_chroma());
        detail::put_dht(out, 1, 1, detail::huff_ac_chroma());
    }

    // SOS
    detail::put_marker(out, 0xDA);
    detail::put16(out, static_cast<unsigned>(6 + 2 * comps.size()));
    out.push_back(static_cast<std::uint8_t>(comps.size()));
    for (const auto& comp : comps) {
        out.push_back(static_cast<std::uint8_t>(comp.id));
        out.push_back(static_cast<std::uint8_t>((comp.td << 4) | comp.ta));
    }
    out.push_back(0);   // Ss
    out.push_back(63);  // Se
    out.push_back(0);   // Ah/Al

    const detail::HuffEncoder dc_luma(detail::huff_dc_luma());
    const detail::HuffEncoder ac_luma(detail::huff_ac_luma());
    const detail::HuffEncoder dc_chroma(detail::huff_dc_chroma());
    const detail::HuffEncoder ac_chroma(detail::huff_ac_chroma());

    detail::BitWriter bw(out);
    std::array<int, 3> dc_pred{};
    for (int my = 0; my < mcus_y; ++my) {
        for (int mx = 0; mx < mcus_x; ++mx) {
            for (std::size_t ci = 0; ci < comps.size(); ++ci) {
                const auto& comp = comps[ci];
                const QuantTable& q = comp.tq == 0 ? q_luma : q_chroma;
                const detail::HuffEncoder& dc = comp.td == 0 ? dc_luma : dc_chroma;
                const detail::HuffEncoder& ac = comp.ta == 0 ? ac_luma : ac_chroma;
                for (int by = 0; by < comp.v; ++by) {
                    for (int bx = 0; bx < comp.h; ++bx) {
                        const PixelBlock& block =
                            grids[ci].at(mx * comp.h + bx, my * comp.v + by);
                        const QuantizedBlock zz =
                            to_zigzag(quantize_to_indices(block, q));
                        detail::encode_block(bw, zz, dc_pred[ci], dc, ac);
                    }
                }
            }
        }
    }
    bw.flush();
    detail::put_marker(out, 0xD9);  // EOI
    return stream;
}

// ---------------------------------------------------------------------------
// Decoder
// ---------------------------------------------------------------------------

struct DecodeResult {
    ImagePlanes image;
    QuantTable q_luma;    // table of component 1
    QuantTable q_chroma;  // table of components 2/3 (== q_luma when grayscale)
    bool has_chroma = false;
};

namespace detail {

struct FrameComponent {
    int id = 0;
    int h = 1, v = 1;
    int tq = 0;
    int td = 0, ta = 0;
};

class JfifDecoder {
public:
    explicit JfifDecoder(const std::vector<std::uint8_t>& bytes) : bytes_(bytes) {}

    DecodeResult run() {
        if (read8("SOI") != 0xFF || read8("SOI") != 0xD8)
            throw parse_error("not a JFIF/JPEG stream: missing SOI", 0);
        for (;;) {
            const std::uint8_t marker = next_marker();
            switch (marker) {
                case 0xDB: read_dqt(); break;
                case 0xC4: read_dht(); break;
                case 0xC0: read_sof(); break;
                case 0xDA: return read_scan_and_finish();
                case 0xD9:
                    throw parse_error("EOI before any scan data", pos_ - 2);
                case 0xC1: case 0xC2: case 0xC3: case 0xC5: case 0xC6: case 0xC7:
                case 0xC9: case 0xCA: case 0xCB: case 0xCD: case 0xCE: case 0xCF:
                    throw unsupported_error("unsupported frame type marker SOF" +
                                            std::to_string(marker & 0x0F) +
                                            " (baseline sequential SOF0 only)");
                case 0xDD:
                    throw unsupported_error("restart interval (DRI) is not supported");
                case 0xDC:
                    throw unsupported_error("DNL marker is not supported");
                default:
                    if ((marker >= 0xE0 && marker <= 0xEF) || marker == 0xFE) {
                        skip_segment();  // APPn / COM
                    } else {
                        throw parse_error("unexpected marker 0x" + hex(marker), pos_ - 2);
                    }
            }
        }
    }

private:
    static std::string hex(std::uint8_t v) {
        static const char* digits = "0123456789ABCDEF";
        return {digits[v >> 4], digits[v & 0xF]};
    }

    std::uint8_t read8(const char* what) {
        if (pos_ >= bytes_.size())
            throw parse_error(std::string("unexpected end of stream in ") + what, pos_);
        return bytes_[pos_++];
    }

    unsigned read16(const char* what) {
        const unsigned hi = read8(what);
        return (hi << 8) | read8(what);
    }

    std::uint8_t next_marker() {
        std::uint8_t b = read8("marker");
        if (b != 0xFF) throw parse_error("expected marker byte 0xFF", pos_ - 1);
        std::uint8_t m = read8("marker");
        while (m == 0xFF) m = read8("marker");  // fill bytes
        return m;
    }

    std::size_t segment_end(const char* what) {
        const unsigned len = read16(what);
        if (len < 2) throw parse_error(std::string("segment length < 2 in ") + what, pos_ - 2);
        const std::size_t end = pos_ + len - 2;
        if (end > bytes_.size())
            throw parse_error(std::string("segment overruns stream in ") + what, pos_ - 2);
        return end;
    }

    void skip_segment() { pos_ = segment_end("APPn/COM"); }

    void read_dqt() {
        const std::size_t end = segment_end("DQT");
        while (pos_ < end) {
            const std::uint8_t pq_tq = read8("DQT");
            const int pq = pq_tq >> 4;
            const int tq = pq_tq & 0x0F;
            if (pq != 0)
                throw unsupported_error("16-bit quantization tables are not supported");
            if (tq > 3) throw parse_error("DQT table id out of range", pos_ - 1);
            std::array<int, kBlockSize> zz{};
            for (int i = 0; i < kBlockSize; ++i) {
                zz[i] = read8("DQT");
                if (zz[i] == 0)
                    throw parse_error("quantization step 0 in DQT", pos_ - 1);
            }
            qtables_[tq].steps = from_zigzag(zz);
            have_qtable_[tq] = true;
        }
        if (pos_ != end) throw parse_error("DQT segment length mismatch", pos_);
    }

    void read_dht() {
        const std::size_t end = segment_end("DHT");
        while (pos_ < end) {
            const std::uint8_t tc_th = read8("DHT");
            const int tc = tc_th >> 4;
            const int th = tc_th & 0x0F;
            if (tc > 1) throw unsupported_error("arithmetic coding tables are not supported");
            if (th > 3) throw parse_error("DHT table id out of range", pos_ - 1);
            HuffSpec spec;
            std::size_t total = 0;
            for (int i = 0; i < 16; ++i) {
                spec.bits[static_cast<std::size_t>(i)] = read8("DHT");
                total += spec.bits[static_cast<std::size_t>(i)];
            }
            if (total > 256) throw parse_error("DHT declares more than 256 codes", pos_);
            spec.vals.resize(total);
            for (std::size_t i = 0; i < total; ++i) spec.vals[i] = read8("DHT");
            if (tc == 0)
                dc_tables_[th] = HuffDecoder(spec);
            else
                ac_tables_[th] = HuffDecoder(spec);
        }
        if (pos_ != end) throw parse_error("DHT segment length mismatch", pos_);
    }

    void read_sof() {
        if (have_frame_) throw parse_error("multiple SOF markers", pos_);
        const std::size_t end = segment_end("SOF0");
        const int precision = read8("SOF0");
        if (precision != 8)
            throw unsupported_error("sample precision " + std::to_string(precision) +
                                    " (8-bit only)");
        height_ = static_cast<int>(read16("SOF0"));
        width_ = static_cast<int>(read16("SOF0"));
        if (width_ <= 0 || height_ <= 0)
            throw parse_error("frame with zero dimension", pos_);
        const int ncomp = read8("SOF0");
        if (ncomp != 1 && ncomp != 3)
            throw unsupported_error(std::to_string(ncomp) +
                                    "-component frames (1 or 3 only)");
        comps_.resize(static_cast<std::size_t>(ncomp));
        for (auto& c : comps_) {
            c.id = read8("SOF0");
            const std::uint8_t hv = read8("SOF0");
            c.h = hv >> 4;
            c.v = hv & 0x0F;
            c.tq = read8("SOF0");
            if (c.h < 1 || c.h > 4 || c.v < 1 || c.v > 4)
                throw parse_error("invalid sampling factors", pos_ - 2);
            if (c.tq > 3) throw parse_error("SOF quant table id out of range", pos_ - 1);
        }
        if (pos_ != end) throw parse_error("SOF0 segment length mismatch", pos_);
        validate_sampling();
        have_frame_ = true;
    }

    void validate_sampling() {
        if (comps_.size() == 1) {
            comps_[0].h = comps_[0].v = 1;
            mode_ = ColorMode::grayscale;
            return;
        }
        const bool all_111 = comps_[0].h == 1 && comps_[0].v == 1 && comps_[1].h == 1 &&
                             comps_[1].v == 1 && comps_[2].h == 1 && comps_[2].v == 1;
        const bool y_22 = comps_[0].h == 2 && comps_[0].v == 2 && comps_[1].h == 1 &&
                          comps_[1].v == 1 && comps_[2].h == 1 && comps_[2].v == 1;
        if (all_111)
            mode_ = ColorMode::ycbcr444;
        else if (y_22)
            mode_ = ColorMode::ycbcr420;
        else
            throw unsupported_error("sampling layout other than 4:4:4 or 4:2:0");
    }

    DecodeResult read_scan_and_finish() {
        if (!have_frame_) throw parse_error("SOS before SOF0", pos_);
        const std::size_t end = segment_end("SOS");
        const int ns = read8("SOS");
        if (ns != static_cast<int>(comps_.size()))
            throw unsupported_error("partial scans (scan components != frame components)");
        for (int i = 0; i < ns; ++i) {
            const int cs = read8("SOS");
            const std::uint8_t tdta = read8("SOS");
            bool found = false;
            for (auto& c : comps_) {
                if (c.id == cs) {
                    c.td = tdta >> 4;
                    c.ta = tdta & 0x0F;
                    found = true;
                }
            }
            if (!found) throw parse_error("SOS references unknown component", pos_ - 2);
        }
        const int ss = read8("SOS");
        const int se = read8("SOS");
        const int ahal = read8("SOS");
        if (ss != 0 || se != 63 || ahal != 0)
            throw parse_error("non-baseline scan parameters", pos_ - 3);
        if (pos_ != end) throw parse_error("SOS segment length mismatch", pos_);

        // check table availability
        for (const auto& c : comps_) {
            if (!have_qtable_[c.tq])
                throw parse_error("scan references missing quantization table", pos_);
            if (dc_tables_[c.td].empty() || ac_tables_[c.ta].empty())
                throw parse_error("scan references missing Huffman table", pos_);
        }

        const int hmax = comps_[0].h;  // validated: 1 or 2, chroma always 1
        const int vmax = comps_[0].v;
        const int mcus_x = (width_ + 8 * hmax - 1) / (8 * hmax);
        const int mcus_y = (height_ + 8 * vmax - 1) / (8 * vmax);

        std::vector<Plane> padded;
        padded.reserve(comps_.size());
        for (const auto& c : comps_)
            padded.emplace_back(mcus_x * c.h * kBlockDim, mcus_y * c.v * kBlockDim);

        BitReader br(bytes_, pos_);
        std::array<int, 3> dc_pred{};
        for (int my = 0; my < mcus_y; ++my) {
            for (int mx = 0; mx < mcus_x; ++mx) {
                for (std::size_t ci = 0; ci < comps_.size(); ++ci) {
                    const auto& c = comps_[ci];
                    for (int by = 0; by < c.v; ++by)
                        for (int bx = 0; bx < c.h; ++bx)
                            decode_one_block(br, ci, mx * c.h + bx, my * c.v + by,
                                             padded[ci], dc_pred[ci]);
                }
            }
        }
        pos_ = br.finish();

        const std::uint8_t m = next_marker();
        if (m != 0xD9)
            throw parse_error("expected EOI after scan, found 0x" + hex(m), pos_ - 2);

        DecodeResult res;
        res.image.mode = mode_;
        res.image.original_width = width_;
        res.image.original_height = height_;
        for (std::size_t ci = 0; ci < comps_.size(); ++ci) {
            const int pw = (ci == 0) ? width_ : (width_ + hmax - 1) / hmax;
            const int ph = (ci == 0) ? height_ : (height_ + vmax - 1) / vmax;
            res.image.planes.push_back(crop_plane(padded[ci], pw, ph));
        }
        res.q_luma = qtables_[comps_[0].tq];
        res.has_chroma = comps_.size() == 3;
        res.q_chroma = res.has_chroma ? qtables_[comps_[1].tq] : res.q_luma;
        res.image.check();
        return res;
    }

    void decode_one_block(BitReader& br, std::size_t ci, int bx, int by, Plane& plane,
                          int& dc_pred) {
        const auto& c = comps_[ci];
        const QuantTable& q = qtables_[c.tq];
        const QuantizedBlock zz = decode_block(br, dc_pred, dc_tables_[c.td], ac_tables_[c.ta]);
        const std::array<int, kBlockSize> idx = from_zigzag(zz);
        for (int i = 0; i < kBlockSize; ++i) {
            const long long mag = static_cast<long long>(idx[i]) * q.steps[i];
            if (mag > 2048 + q.steps[i] || mag < -(2048 + q.steps[i]))
                throw parse_error("dequantized coefficient out of range (bit offset)",
                                  br.bit_offset());
        }
        const PixelBlock block = reconstruct_from_indices(idx, q);
        for (int y = 0; y < kBlockDim; ++y)
            for (int x = 0; x < kBlockDim; ++x)
                plane.at(bx * kBlockDim + x, by * kBlockDim + y) =
                    block[static_cast<std::size_t>(y) * kBlockDim + x];
    }

    const std::vector<std::uint8_t>& bytes_;
    std::size_t pos_ = 0;

    std::array<QuantTable, 4> qtables_{};
    std::array<bool, 4> have_qtable_{};
    std::array<HuffDecoder, 4> dc_tables_{};
    std::array<HuffDecoder, 4> ac_tables_{};
    std::vector<FrameComponent> comps_;
    int width_ = 0, height_ = 0;
    ColorMode mode_ = ColorMode::grayscale;
    bool have_frame_ = false;
};

}  // namespace detail

inline DecodeResult decode_baseline(const std::vector<std::uint8_t>& bytes) {
    detail::JfifDecoder dec(bytes);
    return dec.run();
}

inline DecodeResult decode_baseline(const JfifStream& stream) {
    return decode_baseline(stream.bytes);
}

inline DecodeResult load_jfif(const std::string& path) {
    return decode_baseline(read_file(path));
}

inline void store_jfif(const JfifStream& stream, const std::string& path) {
    write_file_atomic(path, stream.bytes);
}

}  // namespace jfp
