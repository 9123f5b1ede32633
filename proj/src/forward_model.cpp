#include "sdeconv/forward_model.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <stdexcept>

#include "sdeconv/image_io.hpp"
#include "sdeconv/kv.hpp"

namespace fs = std::filesystem;

namespace sdeconv {

void DegradationParams::validate() const {
    if (saturation && (*saturation <= 0.0 || *saturation > 1.0))
        throw std::invalid_argument("saturation level must be in (0,1]");
    if (quant_step && (*quant_step <= 0.0 || *quant_step >= 1.0))
        throw std::invalid_argument("quant_step must be in (0,1)");
    if (!(gamma > 0.0))
        throw std::invalid_argument("gamma must be positive");
    if (sigma < 0.0)
        throw std::invalid_argument("sigma must be non-negative");
}

double saturate_value(double x, double c) {
    return std::min(c, x);
}

double quantize_value(double x, double q) {
    // std::round ties away from zero, which fixes the half-step behavior.
    return q * std::round(x / q);
}

double gamma_compress_value(double x, double g) {
    return std::pow(std::max(x, 0.0), 1.0 / g);
}

double gamma_expand_value(double x, double g) {
    return std::pow(std::max(x, 0.0), g);
}

namespace {

template <typename F>
Image map_pixels(const Image& img, F&& f) {
    Image out = img;
    double* p = out.data();
    for (std::size_t i = 0, n = out.value_count(); i < n; ++i)
        p[i] = f(p[i]);
    return out;
}

} // namespace

Image saturate(const Image& img, double c) {
    if (c <= 0.0 || c > 1.0)
        throw std::invalid_argument("saturate: level must be in (0,1]");
    return map_pixels(img, [c](double x) { return saturate_value(x, c); });
}

Image quantize(const Image& img, double q) {
    if (q <= 0.0 || q >= 1.0)
        throw std::invalid_argument("quantize: step must be in (0,1)");
    return map_pixels(img, [q](double x) { return quantize_value(x, q); });
}

Image gamma_compress(const Image& img, double g) {
    if (!(g > 0.0))
        throw std::invalid_argument("gamma_compress: gamma must be positive");
    return map_pixels(img, [g](double x) { return gamma_compress_value(x, g); });
}

Image gamma_expand(const Image& img, double g) {
    if (!(g > 0.0))
        throw std::invalid_argument("gamma_expand: gamma must be positive");
    return map_pixels(img, [g](double x) { return gamma_expand_value(x, g); });
}

Image add_noise(const Image& img, double sigma, std::uint64_t seed) {
    if (sigma < 0.0)
        throw std::invalid_argument("add_noise: sigma must be non-negative");
    if (sigma == 0.0)
        return img;
    Image out = img;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, sigma);
    double* p = out.data();
    for (std::size_t i = 0, n = out.value_count(); i < n; ++i)
        p[i] += gauss(rng);
    return out;
}

Image degrade(const Image& u, const Kernel& k, const DegradationParams& p) {
    p.validate();
    Image v = convolve_valid(u, k);
    if (p.saturation)
        v = saturate(v, *p.saturation);
    if (p.gamma != 1.0)
        v = gamma_compress(v, p.gamma);
    v = add_noise(v, p.sigma, p.seed);
    v = clamp01(v); // sensor readout range, applied before the quantizer
    if (p.quant_step)
        v = quantize(v, *p.quant_step);
    v.check_finite("degrade");
    return v;
}

Image downsample2(const Image& img) {
    const int w = img.width() / 2;
    const int h = img.height() / 2;
    if (w < 1 || h < 1)
        throw std::invalid_argument("downsample2: image too small");
    Image out(w, h, img.channels());
    for (int c = 0; c < img.channels(); ++c)
        for (int y = 0; y < h; ++y)
            for (int x = 0; x < w; ++x)
                out.at(x, y, c) = 0.25 * (img.at(2 * x, 2 * y, c) + img.at(2 * x + 1, 2 * y, c) +
                                          img.at(2 * x, 2 * y + 1, c) +
                                          img.at(2 * x + 1, 2 * y + 1, c));
    return out;
}

// ---- Dataset ----

DatasetRecipe::DatasetRecipe() {
    base.gamma = 2.2;
    base.sigma = std::sqrt(5.0) / 255.0; // variance 5 on the 8-bit scale
    base.quant_step = 1.0 / 256.0;
    base.seed = 0;
}

namespace {

void write_entry_params(KeyValueFile& kv, const std::string& prefix,
                        const DegradationParams& p) {
    kv.set(prefix + "saturation", p.saturation ? format_double(*p.saturation) : "none");
    kv.set(prefix + "quant_step", p.quant_step ? format_double(*p.quant_step) : "none");
    kv.set_double(prefix + "gamma", p.gamma);
    kv.set_double(prefix + "sigma", p.sigma);
    kv.set_uint(prefix + "seed", p.seed);
}

DegradationParams read_entry_params(const KeyValueFile& kv, const std::string& prefix) {
    DegradationParams p;
    if (auto s = kv.get(prefix + "saturation"); s && *s != "none")
        p.saturation = kv.require_double(prefix + "saturation");
    if (auto s = kv.get(prefix + "quant_step"); s && *s != "none")
        p.quant_step = kv.require_double(prefix + "quant_step");
    p.gamma = kv.require_double(prefix + "gamma");
    p.sigma = kv.require_double(prefix + "sigma");
    p.seed = kv.require_uint(prefix + "seed");
    return p;
}

} // namespace

void DatasetManifest::save(const std::string& path) const {
    KeyValueFile kv;
    kv.set("format", "sdeconv-dataset");
    kv.set_int("count", std::int64_t(entries.size()));
    const fs::path base = fs::path(path).parent_path();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const DatasetEntry& e = entries[i];
        const std::string prefix = "entry." + std::to_string(i) + ".";
        kv.set(prefix + "id", e.id);
        kv.set(prefix + "truth", fs::relative(e.truth_path, base).string());
        kv.set(prefix + "observed", fs::relative(e.observed_path, base).string());
        kv.set(prefix + "kernel", fs::relative(e.kernel_path, base).string());
        write_entry_params(kv, prefix, e.params);
    }
    kv.save(path);
}

DatasetManifest DatasetManifest::load(const std::string& path) {
    KeyValueFile kv = KeyValueFile::load(path);
    if (kv.get("format").value_or("") != "sdeconv-dataset")
        throw std::invalid_argument("not a dataset manifest: " + path);
    const fs::path base = fs::path(path).parent_path();
    DatasetManifest m;
    const auto count = kv.require_int("count");
    for (std::int64_t i = 0; i < count; ++i) {
        const std::string prefix = "entry." + std::to_string(i) + ".";
        DatasetEntry e;
        e.id = kv.require(prefix + "id");
        e.truth_path = (base / kv.require(prefix + "truth")).string();
        e.observed_path = (base / kv.require(prefix + "observed")).string();
        e.kernel_path = (base / kv.require(prefix + "kernel")).string();
        e.params = read_entry_params(kv, prefix);
        m.entries.push_back(std::move(e));
    }
    return m;
}

DatasetManifest make_dataset(const std::vector<std::string>& source_paths,
                             const std::vector<std::string>& kernel_paths,
                             const DatasetRecipe& recipe,
                             const std::string& out_dir) {
    if (source_paths.empty() || kernel_paths.empty())
        throw std::invalid_argument("make_dataset: need at least one source image and one kernel");
    recipe.base.validate();
    if (recipe.clip_percentile <= 0.0 || recipe.clip_percentile > 1.0)
        throw std::invalid_argument("make_dataset: clip percentile must be in (0,1]");

    fs::create_directories(out_dir);
    DatasetManifest manifest;
    std::uint64_t entry_index = 0;

    for (std::size_t si = 0; si < source_paths.size(); ++si) {
        const Image source = load_image(source_paths[si]);
        // Sources are stored in display space; work in linear light and
        // halve the resolution to wash out their own quantization/noise.
        const Image linear = downsample2(gamma_expand(source, recipe.base.gamma));

        for (std::size_t ki = 0; ki < kernel_paths.size(); ++ki, ++entry_index) {
            const Kernel kernel = load_kernel(kernel_paths[ki]);

            Image blurred = convolve_valid(linear, kernel);
            const double clip = percentile(blurred, recipe.clip_percentile);

            DegradationParams params = recipe.base;
            params.saturation = clip;
            params.seed = recipe.base.seed + entry_index;

            Image observed = saturate(blurred, clip);
            observed = gamma_compress(observed, params.gamma);
            observed = add_noise(observed, params.sigma, params.seed);
            observed = clamp01(observed);
            if (params.quant_step)
                observed = quantize(observed, *params.quant_step);

            // Sharp reference cropped to the observation extent, display space.
            Image truth = gamma_compress(
                crop(linear, kernel.half_width(), kernel.half_height()), params.gamma);

            DatasetEntry e;
            e.id = fs::path(source_paths[si]).stem().string() + "_" +
                   fs::path(kernel_paths[ki]).stem().string();
            e.truth_path = (fs::path(out_dir) / (e.id + "_truth.png")).string();
            e.observed_path = (fs::path(out_dir) / (e.id + "_observed.png")).string();
            e.kernel_path = (fs::path(out_dir) / (e.id + "_kernel.txt")).string();
            e.params = params;

            save_image(truth, e.truth_path, recipe.bit_depth);
            save_image(observed, e.observed_path, recipe.bit_depth);
            save_kernel(kernel, e.kernel_path);
            manifest.entries.push_back(std::move(e));
        }
    }

    manifest.save((fs::path(out_dir) / "manifest.txt").string());
    return manifest;
}

} // namespace sdeconv
