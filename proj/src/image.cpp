#include "sdeconv/image.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdeconv {

Image::Image(int width, int height, int channels, double fill)
    : width_(width), height_(height), channels_(channels) {
    if (width < 1 || height < 1)
        throw std::invalid_argument("image dimensions must be at least 1x1");
    if (channels != 1 && channels != 3)
        throw std::invalid_argument("image must have 1 or 3 channels");
    data_.assign(std::size_t(width) * height * channels, fill);
}

void Image::check_finite(const std::string& context) const {
    for (double v : data_)
        if (!std::isfinite(v))
            throw std::invalid_argument(context + ": image contains a non-finite value");
}

Kernel::Kernel(int width, int height, std::vector<double> weights)
    : width_(width), height_(height), weights_(std::move(weights)) {
    if (width < 1 || height < 1 || width % 2 == 0 || height % 2 == 0)
        throw std::invalid_argument("kernel dimensions must be odd and positive");
    if (weights_.size() != std::size_t(width) * height)
        throw std::invalid_argument("kernel weight count does not match dimensions");
    double sum = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w))
            throw std::invalid_argument("kernel contains a non-finite weight");
        if (w < 0.0)
            throw std::invalid_argument("kernel contains a negative weight");
        sum += w;
    }
    if (sum <= 0.0)
        throw std::invalid_argument("kernel weights sum to zero");
    for (double& w : weights_)
        w /= sum;
}

double Kernel::max_weight() const {
    return *std::max_element(weights_.begin(), weights_.end());
}

PaddedDomain PaddedDomain::for_observation(int obs_w, int obs_h, const Kernel& k) {
    PaddedDomain d;
    d.obs_width = obs_w;
    d.obs_height = obs_h;
    d.margin_x = k.half_width();
    d.margin_y = k.half_height();
    return d;
}

Image convolve_valid(const Image& u, const Kernel& k) {
    if (u.width() < k.width() || u.height() < k.height())
        throw std::invalid_argument("convolve_valid: image smaller than kernel");
    const int ow = u.width() - k.width() + 1;
    const int oh = u.height() - k.height() + 1;
    const int hw = k.half_width();
    const int hh = k.half_height();
    Image out(ow, oh, u.channels());
    for (int c = 0; c < u.channels(); ++c) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = 0.0;
                for (int sy = -hh; sy <= hh; ++sy)
                    for (int sx = -hw; sx <= hw; ++sx)
                        acc += k.at_offset(sx, sy) * u.at(ox + hw - sx, oy + hh - sy, c);
                out.at(ox, oy, c) = acc;
            }
        }
    }
    return out;
}

double blur_at(const Image& u, const Kernel& k, int x, int y, int c) {
    const int ow = u.width() - k.width() + 1;
    const int oh = u.height() - k.height() + 1;
    if (x < 0 || y < 0 || x >= ow || y >= oh || c < 0 || c >= u.channels())
        throw std::invalid_argument("blur_at: position outside the valid region");
    const int hw = k.half_width();
    const int hh = k.half_height();
    double acc = 0.0;
    for (int sy = -hh; sy <= hh; ++sy)
        for (int sx = -hw; sx <= hw; ++sx)
            acc += k.at_offset(sx, sy) * u.at(x + hw - sx, y + hh - sy, c);
    return acc;
}

Image pad_replicate(const Image& img, int margin_x, int margin_y) {
    Image out(img.width() + 2 * margin_x, img.height() + 2 * margin_y, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x) {
                int sx = std::clamp(x - margin_x, 0, img.width() - 1);
                int sy = std::clamp(y - margin_y, 0, img.height() - 1);
                out.at(x, y, c) = img.at(sx, sy, c);
            }
    return out;
}

Image crop(const Image& img, int margin_x, int margin_y) {
    if (img.width() <= 2 * margin_x || img.height() <= 2 * margin_y)
        throw std::invalid_argument("crop: margins larger than image");
    Image out(img.width() - 2 * margin_x, img.height() - 2 * margin_y, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < out.height(); ++y)
            for (int x = 0; x < out.width(); ++x)
                out.at(x, y, c) = img.at(x + margin_x, y + margin_y, c);
    return out;
}

Image clamp01(const Image& img) {
    Image out = img;
    for (std::size_t i = 0; i < out.value_count(); ++i)
        out.data()[i] = std::clamp(out.data()[i], 0.0, 1.0);
    return out;
}

double percentile(const Image& img, double fraction) {
    if (fraction < 0.0 || fraction > 1.0)
        throw std::invalid_argument("percentile: fraction must be in [0,1]");
    std::vector<double> values(img.data(), img.data() + img.value_count());
    // Rank such that at most fraction*N samples lie at or below the result.
    std::size_t n = values.size();
    std::size_t rank = std::size_t(std::ceil(fraction * double(n)));
    if (rank == 0)
        rank = 1;
    if (rank > n)
        rank = n;
    std::nth_element(values.begin(), values.begin() + (rank - 1), values.end());
    return values[rank - 1];
}

double max_value(const Image& img) {
    return *std::max_element(img.data(), img.data() + img.value_count());
}

double min_value(const Image& img) {
    return *std::min_element(img.data(), img.data() + img.value_count());
}

} // namespace sdeconv
