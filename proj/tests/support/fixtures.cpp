#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <vector>

namespace fixtures {

using sdeconv::Image;
using sdeconv::Kernel;

Image synth_scene(int width, int height, int channels, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Image img(width, height, channels);

    for (int c = 0; c < channels; ++c) {
        const double gx = unit(rng) - 0.5;
        const double gy = unit(rng) - 0.5;

        struct Blob {
            double cx, cy, sx, sy, amp;
        };
        std::vector<Blob> blobs;
        for (int i = 0; i < 6; ++i) {
            Blob b;
            b.cx = unit(rng) * width;
            b.cy = unit(rng) * height;
            b.sx = width * (0.05 + 0.10 * unit(rng));
            b.sy = height * (0.05 + 0.10 * unit(rng));
            // three strong highlights, three gentle bumps either way
            b.amp = (i < 3) ? (1.2 + 0.8 * unit(rng)) : (0.8 * unit(rng) - 0.4);
            blobs.push_back(b);
        }

        struct Rect {
            int x0, y0, x1, y1;
            double amp;
        };
        std::vector<Rect> rects;
        for (int i = 0; i < 3; ++i) {
            Rect r;
            r.x0 = static_cast<int>(unit(rng) * width * 0.8);
            r.y0 = static_cast<int>(unit(rng) * height * 0.8);
            r.x1 = r.x0 + 2 + static_cast<int>(unit(rng) * width * 0.25);
            r.y1 = r.y0 + 2 + static_cast<int>(unit(rng) * height * 0.25);
            r.amp = (unit(rng) - 0.4) * 1.0;
            rects.push_back(r);
        }

        double lo = 1e300, hi = -1e300;
        for (int y = 0; y < height; ++y) {
            for (int x = 0; x < width; ++x) {
                double v = 0.3 + 0.5 * (gx * x / width + gy * y / height + 0.5);
                for (const Blob& b : blobs) {
                    const double dx = (x - b.cx) / b.sx;
                    const double dy = (y - b.cy) / b.sy;
                    v += b.amp * std::exp(-0.5 * (dx * dx + dy * dy));
                }
                for (const Rect& r : rects)
                    if (x >= r.x0 && x <= r.x1 && y >= r.y0 && y <= r.y1) v += r.amp;
                img.at(x, y, c) = v;
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
        }
        const double scale = (hi > lo) ? 1.0 / (hi - lo) : 1.0;
        for (int y = 0; y < height; ++y)
            for (int x = 0; x < width; ++x)
                img.at(x, y, c) = (img.at(x, y, c) - lo) * scale;
    }
    return img;
}

Image random_image(int width, int height, int channels, std::uint64_t seed, double lo,
                   double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(lo, hi);
    Image img(width, height, channels);
    for (std::size_t i = 0; i < img.value_count(); ++i)
        img.data()[i] = dist(rng);
    return img;
}

Kernel synth_motion_kernel(int size, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    std::vector<double> weights(static_cast<std::size_t>(size) * size, 0.0);
    double x = size / 2.0, y = size / 2.0;
    double vx = gauss(rng) * 0.6, vy = gauss(rng) * 0.6;
    const int steps = size * size * 4;
    for (int i = 0; i < steps; ++i) {
        vx = 0.85 * vx + 0.35 * gauss(rng);
        vy = 0.85 * vy + 0.35 * gauss(rng);
        x = std::clamp(x + 0.3 * vx, 0.0, size - 1.001);
        y = std::clamp(y + 0.3 * vy, 0.0, size - 1.001);
        // bilinear splat keeps the trajectory smooth
        const int ix = static_cast<int>(x), iy = static_cast<int>(y);
        const double fx = x - ix, fy = y - iy;
        weights[std::size_t(iy) * size + ix] += (1 - fx) * (1 - fy);
        if (ix + 1 < size) weights[std::size_t(iy) * size + ix + 1] += fx * (1 - fy);
        if (iy + 1 < size) weights[std::size_t(iy + 1) * size + ix] += (1 - fx) * fy;
        if (ix + 1 < size && iy + 1 < size)
            weights[std::size_t(iy + 1) * size + ix + 1] += fx * fy;
    }
    weights[std::size_t(size / 2) * size + size / 2] += 1.0; // center always covered
    return Kernel(size, size, std::move(weights));
}

Kernel gaussian_kernel(int size, double sigma) {
    std::vector<double> weights(static_cast<std::size_t>(size) * size);
    const double c = (size - 1) / 2.0;
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x)
            weights[std::size_t(y) * size + x] =
                std::exp(-((x - c) * (x - c) + (y - c) * (y - c)) / (2 * sigma * sigma));
    return Kernel(size, size, std::move(weights));
}

Kernel box_kernel(int size) {
    return Kernel(size, size, std::vector<double>(static_cast<std::size_t>(size) * size, 1.0));
}

TempDir::TempDir(const std::string& tag) {
    std::random_device rd;
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%08x%08x", rd(), rd());
    path = std::filesystem::temp_directory_path() / ("sdeconv_" + tag + "_" + buf);
    std::filesystem::create_directories(path);
}

TempDir::~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
}

namespace naive {

Image convolve(const Image& u, const Kernel& k) {
    const int ow = u.width() - k.width() + 1;
    const int oh = u.height() - k.height() + 1;
    if (ow < 1 || oh < 1) throw std::invalid_argument("naive convolve: image smaller than kernel");
    Image out(ow, oh, u.channels());
    for (int c = 0; c < u.channels(); ++c)
        for (int y = 0; y < oh; ++y)
            for (int x = 0; x < ow; ++x) {
                double sum = 0.0;
                for (int j = 0; j < k.height(); ++j)
                    for (int i = 0; i < k.width(); ++i)
                        sum += u.at(x + i, y + j, c) * k.at(k.width() - 1 - i, k.height() - 1 - j);
                out.at(x, y, c) = sum;
            }
    return out;
}

double tv(const Image& u) {
    double sum = 0.0;
    for (int c = 0; c < u.channels(); ++c)
        for (int y = 0; y < u.height(); ++y)
            for (int x = 0; x < u.width(); ++x) {
                const double dx = (x + 1 < u.width()) ? u.at(x + 1, y, c) - u.at(x, y, c) : 0.0;
                const double dy = (y + 1 < u.height()) ? u.at(x, y + 1, c) - u.at(x, y, c) : 0.0;
                sum += std::sqrt(dx * dx + dy * dy);
            }
    return sum;
}

double psnr_db(const Image& a, const Image& b, double peak) {
    double se = 0.0;
    for (std::size_t i = 0; i < a.value_count(); ++i) {
        const double d = a.data()[i] - b.data()[i];
        se += d * d;
    }
    return 10.0 * std::log10(peak * peak * static_cast<double>(a.value_count()) / se);
}

} // namespace naive
} // namespace fixtures
