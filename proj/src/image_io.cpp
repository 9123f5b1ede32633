#include "sdeconv/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <png.h>

namespace sdeconv {

namespace {

std::string lower_ext(const std::string& path) {
    auto dot = path.find_last_of('.');
    if (dot == std::string::npos)
        return "";
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

int quantize_to_depth(double v, int maxval) {
    v = std::clamp(v, 0.0, 1.0);
    return int(std::lround(v * maxval));
}

// ---- PNM (P5 grayscale / P6 color, binary) ----

int pnm_read_token(std::istream& in, const std::string& path) {
    // Skips whitespace and '#' comment lines, then reads one integer.
    for (;;) {
        int ch = in.peek();
        if (ch == '#') {
            std::string line;
            std::getline(in, line);
        } else if (std::isspace(ch)) {
            in.get();
        } else {
            break;
        }
    }
    int value = -1;
    in >> value;
    if (!in || value < 0)
        throw IoError("malformed PNM header in " + path);
    return value;
}

Image load_pnm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open image file " + path);
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw IoError("unsupported PNM magic in " + path + " (binary P5/P6 only)");
    const int channels = (m1 == '6') ? 3 : 1;
    const int w = pnm_read_token(in, path);
    const int h = pnm_read_token(in, path);
    const int maxval = pnm_read_token(in, path);
    if (w < 1 || h < 1 || (maxval != 255 && maxval != 65535))
        throw IoError("unsupported PNM geometry or maxval in " + path);
    in.get(); // single whitespace after maxval

    const std::size_t samples = std::size_t(w) * h * channels;
    const int bytes_per = maxval > 255 ? 2 : 1;
    std::vector<unsigned char> raw(samples * bytes_per);
    in.read(reinterpret_cast<char*>(raw.data()), std::streamsize(raw.size()));
    if (std::size_t(in.gcount()) != raw.size())
        throw IoError("truncated PNM payload in " + path);

    Image img(w, h, channels);
    const double scale = 1.0 / maxval;
    std::size_t pos = 0;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c) {
                int v;
                if (bytes_per == 2) {
                    v = (raw[pos] << 8) | raw[pos + 1]; // big-endian per PNM
                    pos += 2;
                } else {
                    v = raw[pos++];
                }
                img.at(x, y, c) = v * scale;
            }
    return img;
}

void save_pnm(const Image& img, const std::string& path, int bit_depth) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot create image file " + path);
    const int maxval = bit_depth == 16 ? 65535 : 255;
    out << (img.channels() == 3 ? "P6" : "P5") << "\n"
        << img.width() << " " << img.height() << "\n"
        << maxval << "\n";
    std::vector<unsigned char> raw;
    raw.reserve(img.value_count() * (bit_depth == 16 ? 2 : 1));
    for (int y = 0; y < img.height(); ++y)
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) {
                int v = quantize_to_depth(img.at(x, y, c), maxval);
                if (bit_depth == 16) {
                    raw.push_back((unsigned char)(v >> 8));
                    raw.push_back((unsigned char)(v & 0xff));
                } else {
                    raw.push_back((unsigned char)v);
                }
            }
    out.write(reinterpret_cast<const char*>(raw.data()), std::streamsize(raw.size()));
    if (!out)
        throw IoError("failed writing image file " + path);
}

// ---- PNG via libpng ----

Image load_png(const std::string& path) {
    std::FILE* fp = std::fopen(path.c_str(), "rb");
    if (!fp)
        throw IoError("cannot open image file " + path);
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png)
            png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("libpng initialization failed for " + path);
    }
    std::vector<png_bytep> rows;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        std::fclose(fp);
        throw IoError("failed decoding PNG file " + path);
    }
    png_init_io(png, fp);
    png_read_info(png, info);

    png_uint_32 w = png_get_image_width(png, info);
    png_uint_32 h = png_get_image_height(png, info);
    int color = png_get_color_type(png, info);
    int depth = png_get_bit_depth(png, info);

    if (color == PNG_COLOR_TYPE_PALETTE)
        png_set_palette_to_rgb(png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8)
        png_set_expand_gray_1_2_4_to_8(png);
    if (png_get_valid(png, info, PNG_INFO_tRNS))
        png_set_tRNS_to_alpha(png);
    if (color & PNG_COLOR_MASK_ALPHA)
        png_set_strip_alpha(png);
    png_read_update_info(png, info);

    color = png_get_color_type(png, info);
    depth = png_get_bit_depth(png, info);
    const int channels = (color == PNG_COLOR_TYPE_RGB) ? 3 : 1;
    const std::size_t rowbytes = png_get_rowbytes(png, info);
    std::vector<unsigned char> raw(rowbytes * h);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y)
        rows[y] = raw.data() + y * rowbytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    std::fclose(fp);

    Image img(int(w), int(h), channels);
    const int maxval = depth == 16 ? 65535 : 255;
    const double scale = 1.0 / maxval;
    for (png_uint_32 y = 0; y < h; ++y) {
        const unsigned char* row = raw.data() + y * rowbytes;
        std::size_t pos = 0;
        for (png_uint_32 x = 0; x < w; ++x)
            for (int c = 0; c < channels; ++c) {
                int v;
                if (depth == 16) {
                    v = (row[pos] << 8) | row[pos + 1];
                    pos += 2;
                } else {
                    v = row[pos++];
                }
                img.at(int(x), int(y), c) = v * scale;
            }
    }
    return img;
}

void save_png(const Image& img, const std::string& path, int bit_depth) {
    std::FILE* fp = std::fopen(path.c_str(), "wb");
    if (!fp)
        throw IoError("cannot create image file " + path);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        if (png)
            png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("libpng initialization failed for " + path);
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        std::fclose(fp);
        throw IoError("failed encoding PNG file " + path);
    }
    png_init_io(png, fp);
    const int color = img.channels() == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY;
    png_set_IHDR(png, info, png_uint_32(img.width()), png_uint_32(img.height()), bit_depth,
                 color, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);

    const int maxval = bit_depth == 16 ? 65535 : 255;
    const std::size_t rowbytes = std::size_t(img.width()) * img.channels() * (bit_depth / 8);
    std::vector<unsigned char> row(rowbytes);
    for (int y = 0; y < img.height(); ++y) {
        std::size_t pos = 0;
        for (int x = 0; x < img.width(); ++x)
            for (int c = 0; c < img.channels(); ++c) {
                int v = quantize_to_depth(img.at(x, y, c), maxval);
                if (bit_depth == 16) {
                    row[pos++] = (unsigned char)(v >> 8);
                    row[pos++] = (unsigned char)(v & 0xff);
                } else {
                    row[pos++] = (unsigned char)v;
                }
            }
        png_write_row(png, row.data());
    }
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

bool is_image_ext(const std::string& ext) {
    return ext == "pgm" || ext == "ppm" || ext == "pnm" || ext == "png";
}

} // namespace

Image load_image(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png")
        return load_png(path);
    if (ext == "pgm" || ext == "ppm" || ext == "pnm")
        return load_pnm(path);
    throw IoError("unsupported image format for " + path + " (use .pgm/.ppm/.pnm/.png)");
}

void save_image(const Image& img, const std::string& path, int bit_depth) {
    if (bit_depth != 8 && bit_depth != 16)
        throw std::invalid_argument("save_image: bit depth must be 8 or 16");
    const std::string ext = lower_ext(path);
    if (ext == "png") {
        save_png(img, path, bit_depth);
    } else if (ext == "pgm" || ext == "ppm" || ext == "pnm") {
        save_pnm(img, path, bit_depth);
    } else {
        throw IoError("unsupported image format for " + path + " (use .pgm/.ppm/.pnm/.png)");
    }
}

Kernel load_kernel(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (is_image_ext(ext)) {
        Image img = load_image(path);
        if (img.channels() != 1)
            throw std::invalid_argument("kernel image must be grayscale: " + path);
        std::vector<double> weights(img.data(), img.data() + img.value_count());
        return Kernel(img.width(), img.height(), std::move(weights));
    }

    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open kernel file " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        // ';' also separates rows, commas count as entry separators
        std::replace(line.begin(), line.end(), ',', ' ');
        std::stringstream row_stream(line);
        std::string segment;
        while (std::getline(row_stream, segment, ';')) {
            std::istringstream entries(segment);
            std::vector<double> row;
            double v;
            while (entries >> v)
                row.push_back(v);
            if (!entries.eof())
                throw std::invalid_argument("kernel file has a non-numeric entry: " + path);
            if (!row.empty())
                rows.push_back(std::move(row));
        }
    }
    if (rows.empty())
        throw std::invalid_argument("kernel file is empty: " + path);
    const std::size_t cols = rows.front().size();
    for (const auto& row : rows)
        if (row.size() != cols)
            throw std::invalid_argument("kernel rows have differing lengths: " + path);

    std::vector<double> weights;
    weights.reserve(rows.size() * cols);
    for (const auto& row : rows)
        weights.insert(weights.end(), row.begin(), row.end());
    return Kernel(int(cols), int(rows.size()), std::move(weights));
}

void save_kernel(const Kernel& k, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot create kernel file " + path);
    out.precision(17);
    for (int y = 0; y < k.height(); ++y) {
        for (int x = 0; x < k.width(); ++x)
            out << (x ? " " : "") << k.at(x, y);
        out << "\n";
    }
    if (!out)
        throw IoError("failed writing kernel file " + path);
}

} // namespace sdeconv
