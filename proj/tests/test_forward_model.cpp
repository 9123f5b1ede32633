#include "doctest.h"

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "sdeconv/forward_model.hpp"
#include "sdeconv/image_io.hpp"
#include "support/fixtures.hpp"

using namespace sdeconv;
using fixtures::TempDir;

namespace {

bool bitwise_equal(const Image& a, const Image& b) {
    return a.same_shape(b) &&
           std::memcmp(a.data(), b.data(), a.value_count() * sizeof(double)) == 0;
}

} // namespace

TEST_CASE("saturate clips at the level and nowhere else") {
    const Image img = fixtures::random_image(16, 16, 1, 1);
    CHECK(bitwise_equal(saturate(img, 1.0), img));

    Image one(1, 1, 1, 0.8);
    CHECK(saturate(one, 0.5).at(0, 0) == 0.5);

    const double c = percentile(img, 0.98);
    const Image clipped = saturate(img, c);
    int changed = 0;
    for (std::size_t i = 0; i < img.value_count(); ++i)
        if (clipped.data()[i] != img.data()[i]) ++changed;
    CHECK(changed == 5); // 256 values, ceil(0.98*256) = 251 at or below c
}

TEST_CASE("saturate is monotone and 1-Lipschitz") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(-0.5, 1.5);
    for (int i = 0; i < 1000; ++i) {
        const double x = unit(rng), y = unit(rng), c = 0.25 + 0.5 * std::abs(unit(rng));
        if (x <= y) CHECK(saturate_value(x, c) <= saturate_value(y, c));
        CHECK(std::abs(saturate_value(x, c) - saturate_value(y, c)) <= std::abs(x - y));
    }
}

TEST_CASE("quantize maps to multiples of q within half a step") {
    CHECK(quantize_value(0.0, 1.0 / 256) == 0.0);
    CHECK(quantize_value(0.26, 0.1) == doctest::Approx(0.3).epsilon(1e-12));
    // ties round away from zero; dyadic values keep this exact
    CHECK(quantize_value(0.125, 0.25) == 0.25);
    CHECK(quantize_value(-0.125, 0.25) == -0.25);

    const Image img = fixtures::random_image(16, 16, 1, 3);
    const double q = 1.0 / 64;
    const Image out = quantize(img, q);
    for (std::size_t i = 0; i < img.value_count(); ++i) {
        const double n = out.data()[i] / q;
        CHECK(std::abs(n - std::round(n)) <= 1e-9);
        CHECK(std::abs(out.data()[i] - img.data()[i]) <= q / 2 + 1e-15);
    }
    CHECK(bitwise_equal(quantize(out, q), out)); // idempotence
}

TEST_CASE("gamma compress and expand are inverse") {
    const Image img = fixtures::random_image(16, 16, 3, 4);
    CHECK(bitwise_equal(gamma_compress(img, 1.0), img));
    CHECK(bitwise_equal(gamma_expand(img, 1.0), img));

    CHECK(gamma_compress_value(0.25, 2.0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(gamma_compress_value(-0.5, 2.2) == 0.0); // negatives clamp before the power
    CHECK(gamma_expand_value(-0.5, 2.2) == 0.0);

    const Image round = gamma_expand(gamma_compress(img, 2.2), 2.2);
    for (std::size_t i = 0; i < img.value_count(); ++i)
        CHECK(std::abs(round.data()[i] - img.data()[i]) <= 1e-12);
}

TEST_CASE("add_noise is deterministic, zero-mean, and inert at sigma 0") {
    const Image img = fixtures::random_image(256, 256, 1, 5);
    CHECK(bitwise_equal(add_noise(img, 0.0, 9), img));

    const Image n1 = add_noise(img, 0.05, 9);
    const Image n2 = add_noise(img, 0.05, 9);
    CHECK(bitwise_equal(n1, n2));
    const Image n3 = add_noise(img, 0.05, 10);
    CHECK_FALSE(bitwise_equal(n1, n3));

    double mean = 0.0;
    for (std::size_t i = 0; i < img.value_count(); ++i)
        mean += n1.data()[i] - img.data()[i];
    mean /= static_cast<double>(img.value_count());
    CHECK(std::abs(mean) <= 3 * 0.05 / 256); // 3 sigma / sqrt(N), N = 256^2
}

TEST_CASE("degrade with everything disabled is plain valid convolution") {
    const Image u = fixtures::synth_scene(24, 20, 1, 6);
    const Kernel k = fixtures::synth_motion_kernel(5, 7);
    DegradationParams p; // all neutral
    CHECK(bitwise_equal(degrade(u, k, p), convolve_valid(u, k)));
}

TEST_CASE("degrade keeps the noiseless observation within half a quantization step") {
    const Image u = fixtures::synth_scene(24, 20, 1, 8);
    const Kernel k = fixtures::synth_motion_kernel(5, 9);
    DegradationParams p;
    p.saturation = 0.8;
    p.quant_step = 1.0 / 256;
    p.gamma = 2.2;
    p.sigma = 0.0;
    const Image v = degrade(u, k, p);
    const Image ideal = gamma_compress(saturate(convolve_valid(u, k), 0.8), 2.2);
    REQUIRE(v.same_shape(ideal));
    for (std::size_t i = 0; i < v.value_count(); ++i)
        CHECK(std::abs(v.data()[i] - ideal.data()[i]) <= p.quant_step.value() / 2);
}

TEST_CASE("degrade is deterministic given the seed") {
    const Image u = fixtures::synth_scene(24, 20, 3, 10);
    const Kernel k = fixtures::synth_motion_kernel(5, 11);
    DegradationParams p;
    p.saturation = 0.85;
    p.quant_step = 1.0 / 256;
    p.gamma = 2.2;
    p.sigma = std::sqrt(5.0) / 255;
    p.seed = 42;
    CHECK(bitwise_equal(degrade(u, k, p), degrade(u, k, p)));
    DegradationParams p2 = p;
    p2.seed = 43;
    CHECK_FALSE(bitwise_equal(degrade(u, k, p), degrade(u, k, p2)));
}

TEST_CASE("degrade regression checksum") {
    // Golden value from the first run of this implementation; guards the
    // stage order and every numeric convention in the pipeline.
    const Image u = fixtures::synth_scene(32, 32, 1, 12);
    const Kernel k = fixtures::synth_motion_kernel(5, 13);
    DegradationParams p;
    p.saturation = 200.0 / 255.0;
    p.quant_step = 1.0 / 256;
    p.gamma = 2.2;
    p.sigma = std::sqrt(5.0) / 255;
    p.seed = 99;
    const Image v = degrade(u, k, p);
    double sum = 0.0, sumsq = 0.0;
    for (std::size_t i = 0; i < v.value_count(); ++i) {
        sum += v.data()[i];
        sumsq += v.data()[i] * v.data()[i];
    }
    CHECK(sum == doctest::Approx(302.015625).epsilon(1e-12));
    CHECK(sumsq == doctest::Approx(154.19418334960938).epsilon(1e-12));
}

TEST_CASE("degrade parameter validation") {
    DegradationParams p;
    p.saturation = 1.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.saturation = 0.8;
    p.quant_step = 1.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.quant_step = 1.0 / 256;
    p.gamma = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.gamma = 2.2;
    p.sigma = -0.1;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p.sigma = 0.0;
    CHECK_NOTHROW(p.validate());
}

TEST_CASE("downsample2 box-averages quads and drops odd remainders") {
    Image img(4, 4, 1);
    for (int y = 0; y < 4; ++y)
        for (int x = 0; x < 4; ++x)
            img.at(x, y) = y * 4 + x;
    const Image half = downsample2(img);
    REQUIRE(half.width() == 2);
    REQUIRE(half.height() == 2);
    CHECK(half.at(0, 0) == doctest::Approx((0 + 1 + 4 + 5) / 4.0));
    CHECK(half.at(1, 1) == doctest::Approx((10 + 11 + 14 + 15) / 4.0));

    const Image odd = fixtures::random_image(5, 5, 1, 14);
    const Image oddhalf = downsample2(odd);
    CHECK(oddhalf.width() == 2);
    CHECK(oddhalf.height() == 2);
}

TEST_CASE("make_dataset writes a reproducible, self-consistent dataset") {
    TempDir tmp("dataset");
    const Image source = fixtures::synth_scene(64, 64, 1, 15);
    const Kernel kernel = fixtures::synth_motion_kernel(5, 16);
    save_image(source, tmp.file("src.png"), 16);
    save_kernel(kernel, tmp.file("k.txt"));

    DatasetRecipe recipe; // realistic defaults

    SUBCASE("single pair produces one reproducible entry") {
        const DatasetManifest m1 =
            make_dataset({tmp.file("src.png")}, {tmp.file("k.txt")}, recipe, tmp.file("out1"));
        REQUIRE(m1.entries.size() == 1);
        const DatasetEntry& e = m1.entries[0];
        CHECK(std::filesystem::exists(e.truth_path));
        CHECK(std::filesystem::exists(e.observed_path));
        CHECK(std::filesystem::exists(e.kernel_path));
        CHECK(e.params.sigma == doctest::Approx(std::sqrt(5.0) / 255).epsilon(1e-12));
        CHECK(e.params.gamma == 2.2);
        CHECK(e.params.quant_step.value() == 1.0 / 256);

        // recorded clip level = 98th percentile of the blurred linear image
        const Image loaded = load_image(tmp.file("src.png"));
        const Image linear = downsample2(gamma_expand(loaded, 2.2));
        const Image blurred = convolve_valid(linear, load_kernel(tmp.file("k.txt")));
        CHECK(e.params.saturation.value() ==
              doctest::Approx(percentile(blurred, 0.98)).epsilon(1e-12));

        const DatasetManifest m2 =
            make_dataset({tmp.file("src.png")}, {tmp.file("k.txt")}, recipe, tmp.file("out2"));
        const Image v1 = load_image(m1.entries[0].observed_path);
        const Image v2 = load_image(m2.entries[0].observed_path);
        CHECK(bitwise_equal(v1, v2));

        // truth is the cropped sharp reference in display space, same extent
        // as the observation
        const Image truth = load_image(e.truth_path);
        CHECK(truth.same_shape(v1));
    }

    SUBCASE("manifest round trips through its file") {
        const DatasetManifest m =
            make_dataset({tmp.file("src.png")}, {tmp.file("k.txt")}, recipe, tmp.file("out3"));
        const DatasetManifest back =
            DatasetManifest::load((std::filesystem::path(tmp.file("out3")) / "manifest.txt").string());
        REQUIRE(back.entries.size() == m.entries.size());
        const DatasetEntry& a = m.entries[0];
        const DatasetEntry& b = back.entries[0];
        CHECK(a.id == b.id);
        CHECK(std::filesystem::equivalent(a.observed_path, b.observed_path));
        CHECK(a.params.saturation.value() == b.params.saturation.value());
        CHECK(a.params.quant_step.value() == b.params.quant_step.value());
        CHECK(a.params.gamma == b.params.gamma);
        CHECK(a.params.sigma == b.params.sigma);
        CHECK(a.params.seed == b.params.seed);
    }

    SUBCASE("two sources x two kernels yield four entries with distinct seeds") {
        const Image source2 = fixtures::synth_scene(64, 64, 1, 17);
        const Kernel kernel2 = fixtures::gaussian_kernel(5, 1.0);
        save_image(source2, tmp.file("src2.png"), 16);
        save_kernel(kernel2, tmp.file("k2.txt"));
        DatasetRecipe r = recipe;
        r.base.seed = 100;
        const DatasetManifest m = make_dataset({tmp.file("src.png"), tmp.file("src2.png")},
                                               {tmp.file("k.txt"), tmp.file("k2.txt")}, r,
                                               tmp.file("out4"));
        REQUIRE(m.entries.size() == 4);
        for (std::size_t i = 0; i < 4; ++i)
            CHECK(m.entries[i].params.seed == 100 + i);
        CHECK(m.entries[0].id != m.entries[1].id);
    }
}
