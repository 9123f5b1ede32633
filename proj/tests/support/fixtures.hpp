#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "sdeconv/image.hpp"

namespace fixtures {

// Piecewise-smooth synthetic scene: gradient base, Gaussian highlights and
// a few sharp-edged rectangles, normalized per channel to exactly [0,1].
// The highlights put a meaningful fraction of pixels near 1 so clipping
// experiments have something to clip.
sdeconv::Image synth_scene(int width, int height, int channels, std::uint64_t seed);

// i.i.d. uniform values in [lo, hi].
sdeconv::Image random_image(int width, int height, int channels, std::uint64_t seed,
                            double lo = 0.0, double hi = 1.0);

// Random-walk motion blur trajectory rasterized into a size x size grid.
sdeconv::Kernel synth_motion_kernel(int size, std::uint64_t seed);

sdeconv::Kernel gaussian_kernel(int size, double sigma);
sdeconv::Kernel box_kernel(int size);

// Unique scratch directory, removed on destruction.
struct TempDir {
    explicit TempDir(const std::string& tag);
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path path;
    std::string file(const std::string& name) const { return (path / name).string(); }
};

// Deliberately naive re-implementations, written from the definitions and
// kept independent of the library internals, used as oracles.
namespace naive {

// True valid convolution via the flipped-kernel definition:
// out(x,y) = sum_{i,j} u(x+i, y+j) * k(kw-1-i, kh-1-j).
sdeconv::Image convolve(const sdeconv::Image& u, const sdeconv::Kernel& k);

// Isotropic TV with forward differences, zero past the last row/column.
double tv(const sdeconv::Image& u);

double psnr_db(const sdeconv::Image& a, const sdeconv::Image& b, double peak = 1.0);

} // namespace naive
} // namespace fixtures
