#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sdeconv/image.hpp"

namespace sdeconv {

// Parameters of the degradation pipeline. A disabled stage is expressed by
// an empty optional (saturation, quantization) or the neutral value
// (gamma = 1, sigma = 0).
struct DegradationParams {
    std::optional<double> saturation;  // clip level c in (0,1]
    std::optional<double> quant_step;  // step q in (0,1)
    double gamma = 1.0;                // display exponent, 1 = linear
    double sigma = 0.0;                // Gaussian noise std in [0,1] units
    std::uint64_t seed = 0;

    void validate() const; // throws std::invalid_argument
};

// Per-pixel primitives. The *_value forms are shared with the energy terms
// so that forward simulation and energy evaluation agree bitwise.
double saturate_value(double x, double c);
double quantize_value(double x, double q); // q*round(x/q), ties away from zero
double gamma_compress_value(double x, double g); // max(x,0)^(1/g)
double gamma_expand_value(double x, double g);   // max(x,0)^g

Image saturate(const Image& img, double c);
Image quantize(const Image& img, double q);
Image gamma_compress(const Image& img, double g);
Image gamma_expand(const Image& img, double g);

// Adds i.i.d. zero-mean Gaussian noise, deterministic for a given seed.
// Output is not clamped.
Image add_noise(const Image& img, double sigma, std::uint64_t seed);

// Full acquisition pipeline: blur (valid region), clip, gamma-compress,
// add noise, clamp to [0,1], quantize. Stages whose parameter is disabled
// are skipped; the order is fixed.
Image degrade(const Image& u, const Kernel& k, const DegradationParams& p);

// 2x box-average downsampling; odd trailing row/column is dropped.
Image downsample2(const Image& img);

// ---- Dataset generation ----

struct DatasetEntry {
    std::string id;
    std::string truth_path;    // sharp reference, display space
    std::string observed_path; // degraded observation
    std::string kernel_path;
    DegradationParams params;  // saturation holds the per-image clip level
};

struct DatasetManifest {
    std::vector<DatasetEntry> entries;

    // Plain-text key/value schema; paths stored relative to the manifest.
    void save(const std::string& path) const;
    static DatasetManifest load(const std::string& path);
};

struct DatasetRecipe {
    // base.gamma/sigma/quant_step/seed configure the pipeline; the
    // saturation level is computed per entry from clip_percentile.
    DegradationParams base;
    double clip_percentile = 0.98;
    int bit_depth = 16;

    DatasetRecipe();
};

// For every (source image, kernel) pair: expand to linear space, downsample
// by 2, blur, clip at the per-image percentile of the blurred linear image,
// compress back to display space, add noise, quantize; writes the cropped
// sharp reference (display space), the observation, the kernel and a
// manifest recording every parameter and seed. Per-entry noise seeds are
// base.seed + entry index.
DatasetManifest make_dataset(const std::vector<std::string>& source_paths,
                             const std::vector<std::string>& kernel_paths,
                             const DatasetRecipe& recipe,
                             const std::string& out_dir);

} // namespace sdeconv
