#include "topoedge/image.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <sstream>

namespace topoedge {

namespace {

// Skips whitespace and '#' comment lines in a PGM header.
int next_header_int(std::istream& in, const std::string& path) {
    while (in) {
        int c = in.peek();
        if (c == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(c)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    if (!in || value < 0) throw ImageError(path + ": malformed PGM header");
    return value;
}

Image load_pgm(const std::string& path, double h) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ImageError(path + ": cannot open file");
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || (magic[1] != '2' && magic[1] != '5'))
        throw ImageError(path + ": not a P2/P5 PGM");
    const bool binary = magic[1] == '5';
    const int width = next_header_int(in, path);
    const int height = next_header_int(in, path);
    const int maxval = next_header_int(in, path);
    if (width < 2 || height < 2) throw ImageError(path + ": image smaller than 2x2");
    if (maxval <= 0 || maxval > 65535) throw ImageError(path + ": unsupported maxval");

    Image img(width, height, h);
    const size_t n = img.data.size();
    if (binary) {
        in.get();  // single whitespace byte after maxval
        if (maxval < 256) {
            std::vector<std::uint8_t> raw(n);
            in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
            if (!in) throw ImageError(path + ": truncated pixel data");
            for (size_t i = 0; i < n; ++i) img.data[i] = raw[i] / double(maxval);
        } else {
            std::vector<std::uint8_t> raw(2 * n);
            in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(2 * n));
            if (!in) throw ImageError(path + ": truncated pixel data");
            for (size_t i = 0; i < n; ++i) {
                const int v = (raw[2 * i] << 8) | raw[2 * i + 1];  // big-endian per the PGM format
                img.data[i] = v / double(maxval);
            }
        }
    } else {
        for (size_t i = 0; i < n; ++i) {
            int v = -1;
            in >> v;
            if (!in || v < 0 || v > maxval) throw ImageError(path + ": bad ASCII sample");
            img.data[i] = v / double(maxval);
        }
    }
    return img;
}

Image load_png(const std::string& path, double h) {
    std::unique_ptr<std::FILE, int (*)(std::FILE*)> fp(std::fopen(path.c_str(), "rb"),
                                                       std::fclose);
    if (!fp) throw ImageError(path + ": cannot open file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) throw ImageError(path + ": libpng init failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        throw ImageError(path + ": libpng init failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError(path + ": PNG decode error");
    }
    png_init_io(png, fp.get());
    png_read_info(png, info);

    const png_uint_32 width = png_get_image_width(png, info);
    const png_uint_32 height = png_get_image_height(png, info);
    const int color = png_get_color_type(png, info);
    const int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    if (depth == 16) png_set_swap(png);  // read as host-endian 16-bit
    png_read_update_info(png, info);

    const int channels = png_get_channels(png, info);
    const int out_depth = png_get_bit_depth(png, info);
    if (channels != 1 && channels != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError(path + ": unsupported PNG channel count");
    }
    if (width < 2 || height < 2) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError(path + ": image smaller than 2x2");
    }

    const size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<std::uint8_t> buffer(rowbytes * height);
    std::vector<png_bytep> rows(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = buffer.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<int>(width), static_cast<int>(height), h);
    const double maxval = out_depth == 16 ? 65535.0 : 255.0;
    for (png_uint_32 y = 0; y < height; ++y) {
        for (png_uint_32 x = 0; x < width; ++x) {
            double v;
            if (out_depth == 16) {
                const auto* p = reinterpret_cast<const std::uint16_t*>(rows[y]) + x * channels;
                v = channels == 1 ? p[0] : 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
            } else {
                const std::uint8_t* p = rows[y] + x * channels;
                v = channels == 1 ? p[0] : 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
            }
            img.at(static_cast<int>(x), static_cast<int>(y)) = v / maxval;
        }
    }
    return img;
}

bool has_png_signature(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    unsigned char sig[8] = {0};
    in.read(reinterpret_cast<char*>(sig), 8);
    return in && png_sig_cmp(sig, 0, 8) == 0;
}

}  // namespace

Image load_image(const std::string& path, double h) {
    if (has_png_signature(path)) return load_png(path, h);
    return load_pgm(path, h);
}

void save_pgm8(const std::vector<std::uint8_t>& bytes, int width, int height,
               const std::string& path) {
    if (static_cast<size_t>(width) * height != bytes.size())
        throw ImageError(path + ": size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ImageError(path + ": cannot open for writing");
    out << "P5\n" << width << " " << height << "\n255\n";
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ImageError(path + ": write failed");
}

void save_mask(const std::vector<std::uint8_t>& covered, int width, int height,
               const std::string& path) {
    std::vector<std::uint8_t> bytes(covered.size());
    for (size_t i = 0; i < covered.size(); ++i) bytes[i] = covered[i] ? 255 : 0;
    save_pgm8(bytes, width, height, path);
}

void save_field(const std::vector<double>& values, int width, int height,
                const std::string& path) {
    std::vector<std::uint8_t> bytes(values.size());
    for (size_t i = 0; i < values.size(); ++i) {
        const double v = std::min(1.0, std::max(0.0, values[i]));
        bytes[i] = static_cast<std::uint8_t>(std::floor(v * 255.0 + 0.5));
    }
    save_pgm8(bytes, width, height, path);
}

}  // namespace topoedge
