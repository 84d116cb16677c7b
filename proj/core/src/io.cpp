#include "mlfe/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include "mlfe/errors.hpp"

namespace mlfe {
namespace {

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return ext;
}

// Skips whitespace and '#' comments between PNM header tokens.
int read_pnm_int(std::istream& in) {
    int c = in.peek();
    while (c != EOF) {
        if (c == '#') {
            std::string discard;
            std::getline(in, discard);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
        c = in.peek();
    }
    int value = -1;
    if (!(in >> value)) throw FormatError("malformed PNM header");
    return value;
}

GrayImage read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || (magic[1] != '5' && magic[1] != '2'))
        throw FormatError(path.string() + ": not a grayscale PGM");
    const int w = read_pnm_int(in);
    const int h = read_pnm_int(in);
    const int maxval = read_pnm_int(in);
    if (w <= 0 || h <= 0) throw FormatError(path.string() + ": zero-dimension image");
    if (maxval <= 0 || maxval > 255)
        throw FormatError(path.string() + ": only 8-bit PGM is supported");

    GrayImage img(w, h);
    auto px = img.pixels();
    if (magic[1] == '5') {
        in.get();  // single whitespace after maxval
        std::vector<unsigned char> bytes(px.size());
        in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
        if (in.gcount() != static_cast<std::streamsize>(bytes.size()))
            throw FormatError(path.string() + ": truncated PGM data");
        for (std::size_t i = 0; i < bytes.size(); ++i) px[i] = bytes[i];
    } else {
        for (auto& v : px) {
            int s = 0;
            if (!(in >> s)) throw FormatError(path.string() + ": truncated PGM data");
            v = s;
        }
    }
    if (maxval != 255) {
        for (auto& v : px) v = v * 255.0 / maxval;
    }
    return img;
}

struct PngReadHandle {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngReadHandle() { png_destroy_read_struct(&png, info ? &info : nullptr, nullptr); }
};

struct PngWriteHandle {
    png_structp png = nullptr;
    png_infop info = nullptr;
    ~PngWriteHandle() { png_destroy_write_struct(&png, info ? &info : nullptr); }
};

struct FileCloser {
    void operator()(std::FILE* f) const noexcept { std::fclose(f); }
};
using File = std::unique_ptr<std::FILE, FileCloser>;

GrayImage read_png(const std::filesystem::path& path) {
    File fp(std::fopen(path.string().c_str(), "rb"));
    if (!fp) throw IoError("cannot open " + path.string());
    unsigned char sig[8];
    if (std::fread(sig, 1, 8, fp.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        throw FormatError(path.string() + ": not a PNG file");

    PngReadHandle h;
    h.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!h.png) throw IoError("libpng initialization failed");
    h.info = png_create_info_struct(h.png);
    if (!h.info) throw IoError("libpng initialization failed");
    if (setjmp(png_jmpbuf(h.png))) throw FormatError(path.string() + ": corrupt PNG");

    png_init_io(h.png, fp.get());
    png_set_sig_bytes(h.png, 8);
    png_read_info(h.png, h.info);

    const auto w = png_get_image_width(h.png, h.info);
    const auto ht = png_get_image_height(h.png, h.info);
    const int depth = png_get_bit_depth(h.png, h.info);
    const int color = png_get_color_type(h.png, h.info);
    if (w == 0 || ht == 0) throw FormatError(path.string() + ": zero-dimension image");
    if (depth > 8) throw FormatError(path.string() + ": 16-bit PNG is not supported");

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(h.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(h.png);
    if (png_get_valid(h.png, h.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(h.png);
    png_set_strip_alpha(h.png);
    png_read_update_info(h.png, h.info);

    const int channels = png_get_channels(h.png, h.info);
    const auto stride = png_get_rowbytes(h.png, h.info);
    std::vector<png_byte> buffer(stride * ht);
    std::vector<png_bytep> rows(ht);
    for (png_uint_32 y = 0; y < ht; ++y) rows[y] = buffer.data() + y * stride;
    png_read_image(h.png, rows.data());

    GrayImage img(static_cast<int>(w), static_cast<int>(ht));
    for (png_uint_32 y = 0; y < ht; ++y) {
        auto out = img.row(static_cast<int>(y));
        const png_byte* in = rows[y];
        for (png_uint_32 x = 0; x < w; ++x) {
            if (channels >= 3) {
                const png_byte* p = in + x * channels;
                out[x] = 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
            } else {
                out[x] = in[x];
            }
        }
    }
    return img;
}

void write_pgm(const GrayImage& img, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << "P5\n" << img.width() << ' ' << img.height() << "\n255\n";
    std::vector<unsigned char> bytes(img.size());
    auto px = img.pixels();
    for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(px[i]);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

void write_png_raw(int w, int h, int channels, const std::uint8_t* data,
                   const std::filesystem::path& path) {
    File fp(std::fopen(path.string().c_str(), "wb"));
    if (!fp) throw IoError("cannot write " + path.string());
    PngWriteHandle hd;
    hd.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!hd.png) throw IoError("libpng initialization failed");
    hd.info = png_create_info_struct(hd.png);
    if (!hd.info) throw IoError("libpng initialization failed");
    if (setjmp(png_jmpbuf(hd.png))) throw IoError("PNG encoding failed: " + path.string());

    png_init_io(hd.png, fp.get());
    png_set_IHDR(hd.png, hd.info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8,
                 channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(hd.png, hd.info);
    for (int y = 0; y < h; ++y) {
        png_write_row(hd.png, const_cast<png_bytep>(data + static_cast<std::size_t>(y) * w * channels));
    }
    png_write_end(hd.png, nullptr);
}

}  // namespace

std::uint8_t to_byte(double v) noexcept {
    return static_cast<std::uint8_t>(std::round(std::clamp(v, 0.0, 255.0)));
}

GrayImage read_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("no such file: " + path.string());
    const std::string ext = lower_extension(path);
    if (ext == ".pgm" || ext == ".pnm") return read_pgm(path);
    if (ext == ".png") return read_png(path);
    throw FormatError(path.string() + ": unsupported image format '" + ext + "'");
}

void write_image(const GrayImage& img, const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (img.empty()) throw InvalidArgument("cannot write an empty image");
    if (ext == ".pgm") {
        write_pgm(img, path);
    } else if (ext == ".png") {
        std::vector<std::uint8_t> bytes(img.size());
        auto px = img.pixels();
        for (std::size_t i = 0; i < bytes.size(); ++i) bytes[i] = to_byte(px[i]);
        write_png_raw(img.width(), img.height(), 1, bytes.data(), path);
    } else {
        throw FormatError(path.string() + ": unsupported image format '" + ext + "'");
    }
}

void write_rgb(const RgbImage& img, const std::filesystem::path& path) {
    if (img.rgb.size() != static_cast<std::size_t>(img.width) * img.height * 3)
        throw InvalidArgument("RGB buffer size mismatch");
    const std::string ext = lower_extension(path);
    if (ext == ".png") {
        write_png_raw(img.width, img.height, 3, img.rgb.data(), path);
    } else if (ext == ".ppm") {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw IoError("cannot write " + path.string());
        out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
        out.write(reinterpret_cast<const char*>(img.rgb.data()),
                  static_cast<std::streamsize>(img.rgb.size()));
        if (!out) throw IoError("write failed: " + path.string());
    } else {
        throw FormatError(path.string() + ": unsupported image format '" + ext + "'");
    }
}

}  // namespace mlfe
