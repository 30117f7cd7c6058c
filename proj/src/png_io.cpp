#include "vf/png_io.hpp"

#include <cstdio>
#include <cstring>
#include <vector>

#include <zlib.h>

#include "vf/scenario.hpp"

namespace vf {

namespace {

void push_u32(std::vector<unsigned char>& out, std::uint32_t v) {
    out.push_back((v >> 24) & 0xff);
    out.push_back((v >> 16) & 0xff);
    out.push_back((v >> 8) & 0xff);
    out.push_back(v & 0xff);
}

void push_chunk(std::vector<unsigned char>& out, const char type[4],
                const std::vector<unsigned char>& payload) {
    push_u32(out, std::uint32_t(payload.size()));
    const size_t start = out.size();
    out.insert(out.end(), type, type + 4);
    out.insert(out.end(), payload.begin(), payload.end());
    const uLong crc = crc32(0, out.data() + start, uInt(out.size() - start));
    push_u32(out, std::uint32_t(crc));
}

}  // namespace

void write_label_png(const std::string& path, const LabelImage& img) {
    std::vector<unsigned char> png = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};

    std::vector<unsigned char> ihdr;
    push_u32(ihdr, LabelImage::width);
    push_u32(ihdr, LabelImage::height);
    ihdr.push_back(8);  // bit depth
    ihdr.push_back(3);  // palette color type
    ihdr.push_back(0);
    ihdr.push_back(0);
    ihdr.push_back(0);
    push_chunk(png, "IHDR", ihdr);

    std::vector<unsigned char> plte;
    for (const auto& c : class_palette()) {
        plte.push_back(c.r);
        plte.push_back(c.g);
        plte.push_back(c.b);
    }
    push_chunk(png, "PLTE", plte);

    // Filter byte 0 per scanline.
    std::vector<unsigned char> raw;
    raw.reserve((LabelImage::width + 1) * LabelImage::height);
    for (int row = 0; row < LabelImage::height; ++row) {
        raw.push_back(0);
        for (int col = 0; col < LabelImage::width; ++col) raw.push_back(img.at(col, row));
    }
    uLongf bound = compressBound(uLong(raw.size()));
    std::vector<unsigned char> idat(bound);
    if (compress2(idat.data(), &bound, raw.data(), uLong(raw.size()), 9) != Z_OK)
        throw IoError("png: deflate failed");
    idat.resize(bound);
    push_chunk(png, "IDAT", idat);
    push_chunk(png, "IEND", {});

    FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) throw IoError("png: cannot open " + path);
    const size_t written = std::fwrite(png.data(), 1, png.size(), f);
    std::fclose(f);
    if (written != png.size()) throw IoError("png: short write to " + path);
}

}  // namespace vf
