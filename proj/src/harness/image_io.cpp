#include "mvr/harness/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <regex>
#include <string>
#include <vector>

#include "mvr/core/binary_io.hpp"
#include "mvr/core/error.hpp"

namespace mvr::harness {

namespace {

struct PngPixels {
    int height = 0;
    int width = 0;
    std::vector<std::uint8_t> data;
};

PngPixels read_png(const std::filesystem::path& path, png_uint_32 format, int channels) {
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    if (!png_image_begin_read_from_file(&image, path.string().c_str())) {
        throw FormatError("cannot read PNG '" + path.string() + "': " + image.message);
    }
    image.format = format;
    PngPixels px;
    px.height = static_cast<int>(image.height);
    px.width = static_cast<int>(image.width);
    px.data.resize(static_cast<std::size_t>(image.height) * image.width * channels);
    if (!png_image_finish_read(&image, nullptr, px.data.data(), 0, nullptr)) {
        png_image_free(&image);
        throw FormatError("cannot decode PNG '" + path.string() + "': " + image.message);
    }
    return px;
}

void write_png(const std::filesystem::path& path, int height, int width, png_uint_32 format,
               const std::vector<std::uint8_t>& data) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    png_image image;
    std::memset(&image, 0, sizeof(image));
    image.version = PNG_IMAGE_VERSION;
    image.width = static_cast<png_uint_32>(width);
    image.height = static_cast<png_uint_32>(height);
    image.format = format;
    png_alloc_size_t size = 0;
    if (!png_image_write_get_memory_size(image, size, 0, data.data(), 0, nullptr)) {
        throw FormatError("cannot encode PNG '" + path.string() + "': " + image.message);
    }
    std::vector<std::uint8_t> buf(size);
    if (!png_image_write_to_memory(&image, buf.data(), &size, 0, data.data(), 0, nullptr)) {
        throw FormatError("cannot encode PNG '" + path.string() + "': " + image.message);
    }
    buf.resize(size);
    io::write_file(path, buf);
}

}  // namespace

BinaryMask read_mask_png(const std::filesystem::path& path) {
    const auto px = read_png(path, PNG_FORMAT_GRAY, 1);
    Grid<std::uint8_t> g(px.height, px.width);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = px.data[i] != 0 ? 1 : 0;
    return BinaryMask(std::move(g));
}

void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask) {
    std::vector<std::uint8_t> data(mask.size());
    for (std::size_t i = 0; i < mask.size(); ++i) data[i] = mask[i] ? 255 : 0;
    write_png(path, mask.height(), mask.width(), PNG_FORMAT_GRAY, data);
}

crf::GuideImage read_guide_png(const std::filesystem::path& path) {
    const auto px = read_png(path, PNG_FORMAT_RGB, 3);
    std::vector<float> rgb(px.data.begin(), px.data.end());
    return crf::GuideImage(px.height, px.width, std::move(rgb));
}

void write_guide_png(const std::filesystem::path& path, const crf::GuideImage& guide) {
    std::vector<std::uint8_t> data(guide.rgb().size());
    for (std::size_t i = 0; i < data.size(); ++i) {
        data[i] = static_cast<std::uint8_t>(std::clamp(std::lround(guide.rgb()[i]), 0L, 255L));
    }
    write_png(path, guide.height(), guide.width(), PNG_FORMAT_RGB, data);
}

void write_probability_npy(const std::filesystem::path& path, const ProbabilityMap& map) {
    std::string header = "{'descr': '<f4', 'fortran_order': False, 'shape': (" + std::to_string(map.height()) +
                         ", " + std::to_string(map.width()) + "), }";
    const std::size_t unpadded = 10 + header.size() + 1;
    header.append((64 - unpadded % 64) % 64, ' ');
    header.push_back('\n');
    io::ByteWriter w;
    w.bytes("\x93NUMPY", 6);
    w.u8(1);
    w.u8(0);
    w.u16(static_cast<std::uint16_t>(header.size()));
    w.bytes(header.data(), header.size());
    for (float v : map.values()) w.f32(v);
    io::write_file(path, w.buffer());
}

ProbabilityMap read_probability_npy(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    io::ByteReader r(bytes);
    char magic[6];
    std::uint8_t major = 0;
    std::uint8_t minor = 0;
    std::uint16_t header_len = 0;
    if (!r.bytes(magic, 6) || std::memcmp(magic, "\x93NUMPY", 6) != 0 || !r.u8(major) || !r.u8(minor) ||
        major != 1 || !r.u16(header_len)) {
        throw CorruptHeaderError("'" + path.string() + "' is not a version-1 .npy file");
    }
    std::string header(header_len, '\0');
    if (!r.bytes(header.data(), header_len)) throw CorruptHeaderError("truncated .npy header");
    static const std::regex descr(R"('descr':\s*'<f4')");
    static const std::regex fortran(R"('fortran_order':\s*False)");
    static const std::regex shape(R"('shape':\s*\((\d+),\s*(\d+)\))");
    std::smatch m;
    if (!std::regex_search(header, descr) || !std::regex_search(header, fortran) ||
        !std::regex_search(header, m, shape)) {
        throw CorruptHeaderError("'" + path.string() + "' is not a C-order float32 2-D array");
    }
    const int h = std::stoi(m[1].str());
    const int w = std::stoi(m[2].str());
    Grid<float> g(h, w);
    if (r.remaining() != g.size() * 4) throw TruncatedPayloadError("'" + path.string() + "' payload size mismatch");
    for (std::size_t i = 0; i < g.size(); ++i) r.f32(g[i]);
    return ProbabilityMap(std::move(g));
}

}  // namespace mvr::harness
