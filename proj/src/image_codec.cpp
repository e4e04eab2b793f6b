// Copyright 2026 The platedpm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "lpr/image_codec.hpp"

#include <csetjmp>
#include <cstdio>
#include <cstring>
#include <fstream>

#include <jpeglib.h>
#include <png.h>

#include "lpr/error.hpp"

namespace lpr {

namespace {

constexpr double kInv255 = 1.0 / 255.0;

bool is_png(const std::vector<std::uint8_t>& bytes) {
    static const std::uint8_t sig[8] = {0x89, 'P', 'N', 'G', 0x0d, 0x0a, 0x1a, 0x0a};
    return bytes.size() >= 8 && std::memcmp(bytes.data(), sig, 8) == 0;
}

bool is_jpeg(const std::vector<std::uint8_t>& bytes) {
    return bytes.size() >= 3 && bytes[0] == 0xff && bytes[1] == 0xd8 && bytes[2] == 0xff;
}

ImageBuffer from_bytes(const std::vector<std::uint8_t>& raw, int w, int h, int ch) {
    ImageBuffer img(w, h, ch);
    const std::size_t n = raw.size();
    for (std::size_t i = 0; i < n; ++i) img.pixels[i] = raw[i] * kInv255;
    return img;
}

// ---- PNG ----

struct PngReadSource {
    const std::uint8_t* data;
    std::size_t size;
    std::size_t pos;
};

void png_read_from_memory(png_structp png, png_bytep out, png_size_t count) {
    auto* src = static_cast<PngReadSource*>(png_get_io_ptr(png));
    if (src->pos + count > src->size)
        png_error(png, "read past end of stream");
    std::memcpy(out, src->data + src->pos, count);
    src->pos += count;
}

ImageBuffer decode_png_bytes(const std::vector<std::uint8_t>& bytes) {
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(ErrorKind::decode, "png reader allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        raise(ErrorKind::decode, "png info allocation failed");
    }

    // longjmp target for libpng errors; keep raw buffers only in this frame
    std::vector<std::uint8_t> raw;
    std::vector<png_bytep> rows;
    PngReadSource src{bytes.data(), bytes.size(), 0};
    int w = 0, h = 0, ch = 0;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorKind::decode, "malformed PNG stream");
    }

    png_set_read_fn(png, &src, png_read_from_memory);
    png_read_info(png, info);

    png_byte color = png_get_color_type(png, info);
    png_byte depth = png_get_bit_depth(png, info);
    if (depth == 16) png_set_strip_16(png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    w = static_cast<int>(png_get_image_width(png, info));
    h = static_cast<int>(png_get_image_height(png, info));
    ch = static_cast<int>(png_get_channels(png, info));
    if (w <= 0 || h <= 0) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorKind::decode, "PNG with degenerate dimensions");
    }
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        raise(ErrorKind::format, "unsupported PNG channel count " + std::to_string(ch));
    }

    raw.assign(static_cast<std::size_t>(w) * h * ch, 0);
    rows.resize(static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y)
        rows[static_cast<std::size_t>(y)] = raw.data() + static_cast<std::size_t>(y) * w * ch;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return from_bytes(raw, w, h, ch);
}

void png_write_to_vector(png_structp png, png_bytep data, png_size_t count) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + count);
}

void png_flush_noop(png_structp) {}

// ---- JPEG ----

struct JpegErrorJump {
    jpeg_error_mgr mgr;
    std::jmp_buf jump;
};

void jpeg_error_exit(j_common_ptr cinfo) {
    auto* err = reinterpret_cast<JpegErrorJump*>(cinfo->err);
    std::longjmp(err->jump, 1);
}

ImageBuffer decode_jpeg_bytes(const std::vector<std::uint8_t>& bytes) {
    jpeg_decompress_struct cinfo;
    JpegErrorJump err;
    cinfo.err = jpeg_std_error(&err.mgr);
    err.mgr.error_exit = jpeg_error_exit;

    std::vector<std::uint8_t> raw;
    int w = 0, h = 0, ch = 0;

    if (setjmp(err.jump)) {
        jpeg_destroy_decompress(&cinfo);
        raise(ErrorKind::decode, "malformed JPEG stream");
    }

    jpeg_create_decompress(&cinfo);
    jpeg_mem_src(&cinfo, bytes.data(), static_cast<unsigned long>(bytes.size()));
    jpeg_read_header(&cinfo, TRUE);
    jpeg_start_decompress(&cinfo);

    w = static_cast<int>(cinfo.output_width);
    h = static_cast<int>(cinfo.output_height);
    ch = static_cast<int>(cinfo.output_components);
    if (ch != 1 && ch != 3) {
        jpeg_destroy_decompress(&cinfo);
        raise(ErrorKind::format, "unsupported JPEG channel count " + std::to_string(ch));
    }

    raw.assign(static_cast<std::size_t>(w) * h * ch, 0);
    while (cinfo.output_scanline < cinfo.output_height) {
        JSAMPROW row = raw.data() + static_cast<std::size_t>(cinfo.output_scanline) * w * ch;
        jpeg_read_scanlines(&cinfo, &row, 1);
    }
    jpeg_finish_decompress(&cinfo);
    jpeg_destroy_decompress(&cinfo);
    return from_bytes(raw, w, h, ch);
}

} // namespace

ImageBuffer decode_image(const std::vector<std::uint8_t>& bytes) {
    if (is_png(bytes)) return decode_png_bytes(bytes);
    if (is_jpeg(bytes)) return decode_jpeg_bytes(bytes);
    raise(ErrorKind::decode, "stream is neither PNG nor JPEG");
}

ImageBuffer load_image(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorKind::io, "cannot open image file " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return decode_image(bytes);
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& img) {
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(ErrorKind::io, "png writer allocation failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        raise(ErrorKind::io, "png info allocation failed");
    }

    std::vector<std::uint8_t> out;
    std::vector<std::uint8_t> raw(img.pixels.size());
    std::vector<png_bytep> rows(static_cast<std::size_t>(img.height));
    for (std::size_t i = 0; i < img.pixels.size(); ++i) {
        double v = std::clamp(img.pixels[i], 0.0, 1.0);
        raw[i] = static_cast<std::uint8_t>(v * 255.0 + 0.5);
    }
    const std::size_t stride = static_cast<std::size_t>(img.width) * img.channels;
    for (int y = 0; y < img.height; ++y)
        rows[static_cast<std::size_t>(y)] = raw.data() + static_cast<std::size_t>(y) * stride;

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorKind::io, "png encode failed");
    }

    png_set_write_fn(png, &out, png_write_to_vector, png_flush_noop);
    png_set_IHDR(png, info, static_cast<png_uint_32>(img.width),
                 static_cast<png_uint_32>(img.height), 8,
                 img.channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

void save_png(const ImageBuffer& img, const std::string& path) {
    auto bytes = encode_png(img);
    std::ofstream outf(path, std::ios::binary);
    if (!outf) raise(ErrorKind::io, "cannot open " + path + " for writing");
    outf.write(reinterpret_cast<const char*>(bytes.data()),
               static_cast<std::streamsize>(bytes.size()));
    if (!outf) raise(ErrorKind::io, "short write to " + path);
}

} // namespace lpr
