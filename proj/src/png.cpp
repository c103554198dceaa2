#include <zlib.h>

#include "bcpc/error.hpp"
#include "bcpc/render.hpp"

namespace bcpc {

namespace {

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 24));
    out.push_back(static_cast<std::uint8_t>(v >> 16));
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v));
}

void put_chunk(std::vector<std::uint8_t>& out, const char (&type)[5],
               const std::vector<std::uint8_t>& data) {
    put_u32(out, static_cast<std::uint32_t>(data.size()));
    const std::size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), data.begin(), data.end());
    uLong crc = crc32(0L, Z_NULL, 0);
    crc = crc32(crc, out.data() + start, static_cast<uInt>(out.size() - start));
    put_u32(out, static_cast<std::uint32_t>(crc));
}

}  // namespace

std::vector<std::uint8_t> encode_png(const RgbaImage& image) {
    if (image.width == 0 || image.height == 0 || image.width > 0x7fffffff ||
        image.height > 0x7fffffff || image.pixels.size() != image.width * image.height * 4)
        throw Error(Errc::DimensionMismatch, "invalid image dimensions for PNG");

    std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

    std::vector<std::uint8_t> ihdr;
    put_u32(ihdr, static_cast<std::uint32_t>(image.width));
    put_u32(ihdr, static_cast<std::uint32_t>(image.height));
    ihdr.insert(ihdr.end(), {8, 6, 0, 0, 0});  // 8-bit RGBA, deflate, no interlace
    put_chunk(out, "IHDR", ihdr);

    const std::size_t stride = image.width * 4;
    std::vector<std::uint8_t> raw;
    raw.reserve((stride + 1) * image.height);
    for (std::size_t y = 0; y < image.height; ++y) {
        raw.push_back(0);
        const auto* row = image.pixels.data() + y * stride;
        raw.insert(raw.end(), row, row + stride);
    }
    uLongf size = compressBound(static_cast<uLong>(raw.size()));
    std::vector<std::uint8_t> idat(size);
    if (compress2(idat.data(), &size, raw.data(), static_cast<uLong>(raw.size()), 9) != Z_OK)
        throw Error(Errc::Io, "zlib compression failed");
    idat.resize(size);
    put_chunk(out, "IDAT", idat);
    put_chunk(out, "IEND", {});
    return out;
}

}  // namespace bcpc
