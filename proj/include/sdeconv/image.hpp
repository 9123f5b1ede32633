#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace sdeconv {

// Planar 2-D image, 1 or 3 channels, double precision.
// Values are nominally in [0,1] but are not clamped by the container;
// file export is responsible for clamping.
class Image {
public:
    Image() = default;
    Image(int width, int height, int channels = 1, double fill = 0.0);

    int width() const { return width_; }
    int height() const { return height_; }
    int channels() const { return channels_; }
    std::size_t pixel_count() const { return std::size_t(width_) * height_; }
    std::size_t value_count() const { return data_.size(); }

    double& at(int x, int y, int c = 0) {
        return data_[(std::size_t(c) * height_ + y) * width_ + x];
    }
    double at(int x, int y, int c = 0) const {
        return data_[(std::size_t(c) * height_ + y) * width_ + x];
    }

    // Raw planar storage, channel-major then row-major.
    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double* plane(int c) { return data_.data() + std::size_t(c) * pixel_count(); }
    const double* plane(int c) const { return data_.data() + std::size_t(c) * pixel_count(); }

    bool same_shape(const Image& o) const {
        return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
    }
    bool in_bounds(int x, int y) const {
        return x >= 0 && x < width_ && y >= 0 && y < height_;
    }

    // Throws std::invalid_argument if any value is NaN or infinite.
    void check_finite(const std::string& context) const;

private:
    int width_ = 0;
    int height_ = 0;
    int channels_ = 1;
    std::vector<double> data_;
};

// Normalized non-negative convolution kernel with odd dimensions.
// Construction validates and rescales the weights to sum to one, so any
// Kernel instance satisfies the invariants.
class Kernel {
public:
    // Row-major weights, size width*height. Throws std::invalid_argument on
    // even dimensions, negative entries or an all-zero matrix.
    Kernel(int width, int height, std::vector<double> weights);

    static Kernel identity() { return Kernel(1, 1, {1.0}); }

    int width() const { return width_; }
    int height() const { return height_; }
    int half_width() const { return width_ / 2; }
    int half_height() const { return height_ / 2; }

    double at(int kx, int ky) const { return weights_[std::size_t(ky) * width_ + kx]; }
    // Offset lookup relative to the kernel center, sx in [-hw,hw], sy in [-hh,hh].
    double at_offset(int sx, int sy) const {
        return weights_[std::size_t(sy + half_height()) * width_ + (sx + half_width())];
    }
    const std::vector<double>& weights() const { return weights_; }
    double max_weight() const;

private:
    int width_ = 1;
    int height_ = 1;
    std::vector<double> weights_;
};

// Geometry linking an observation to the padded latent domain. The latent
// image is larger by the kernel half extents on every side, so that the
// kernel footprint of each observation pixel lies fully inside it.
struct PaddedDomain {
    int obs_width = 0;
    int obs_height = 0;
    int margin_x = 0;
    int margin_y = 0;

    static PaddedDomain for_observation(int obs_w, int obs_h, const Kernel& k);

    int latent_width() const { return obs_width + 2 * margin_x; }
    int latent_height() const { return obs_height + 2 * margin_y; }
    // True for latent pixels that coincide with an observation pixel.
    bool is_observed(int lx, int ly) const {
        return lx >= margin_x && lx < margin_x + obs_width &&
               ly >= margin_y && ly < margin_y + obs_height;
    }
};

// True convolution (kernel flipped), valid region only: the output shrinks
// by kernel extent - 1 per axis. out(x,y) = sum_s k(s) * u(x+hw-sx, y+hh-sy)
// with s running over kernel offsets from the center. Channels are processed
// independently. Throws std::invalid_argument if u is smaller than k.
Image convolve_valid(const Image& u, const Kernel& k);

// Point evaluation of convolve_valid at output position (x, y), channel c.
double blur_at(const Image& u, const Kernel& k, int x, int y, int c = 0);

// Replicate-pad an image by the given margins on each side.
Image pad_replicate(const Image& img, int margin_x, int margin_y);

// Drop a margin on each side.
Image crop(const Image& img, int margin_x, int margin_y);

Image clamp01(const Image& img);

// Value below which the given fraction of samples lies; fraction in [0,1].
// Computed over all channels.
double percentile(const Image& img, double fraction);

double max_value(const Image& img);
double min_value(const Image& img);

} // namespace sdeconv
