#include "doctest.h"

#include <cmath>
#include <cstring>
#include <random>
#include <vector>

#include "sdeconv/energy.hpp"
#include "support/fixtures.hpp"

using namespace sdeconv;

namespace {

Image single(double value) {
    Image img(1, 1, 1);
    img.at(0, 0) = value;
    return img;
}

// Straight-line transcriptions of the residual definitions, kept separate
// from the library's evaluation code.
double naive_data(DataTerm term, const Image& b, const Image& v, const DegradationParams& p) {
    double total = 0.0;
    for (int c = 0; c < b.channels(); ++c)
        for (int y = 0; y < b.height(); ++y)
            for (int x = 0; x < b.width(); ++x) {
                const double bx = b.at(x, y, c);
                const double vx = v.at(x, y, c);
                double r = 0.0;
                switch (term) {
                case DataTerm::Simple: r = bx - vx; break;
                case DataTerm::Saturation: r = std::min(*p.saturation, bx) - vx; break;
                case DataTerm::QuantForward:
                    r = *p.quant_step * std::round(bx / *p.quant_step) - vx;
                    break;
                case DataTerm::QuantConvex: {
                    double e = std::fabs(bx - vx) - 0.5 * *p.quant_step;
                    total += e > 0.0 ? e * e : 0.0;
                    continue;
                }
                case DataTerm::GammaInverse:
                    r = bx - std::pow(std::max(vx, 0.0), p.gamma);
                    break;
                case DataTerm::Gamma:
                    r = std::pow(std::max(bx, 0.0), 1.0 / p.gamma) - vx;
                    break;
                case DataTerm::Full: {
                    double g = std::pow(std::max(std::min(*p.saturation, bx), 0.0), 1.0 / p.gamma);
                    double e = std::fabs(g - vx) - 0.5 * *p.quant_step;
                    total += e > 0.0 ? e * e : 0.0;
                    continue;
                }
                }
                total += r * r;
            }
    return total;
}

const DataTerm kAllTerms[] = {DataTerm::Simple,       DataTerm::Saturation,
                              DataTerm::QuantForward, DataTerm::QuantConvex,
                              DataTerm::GammaInverse, DataTerm::Gamma,
                              DataTerm::Full};

DegradationParams full_params() {
    DegradationParams p;
    p.saturation = 0.8;
    p.quant_step = 1.0 / 64;
    p.gamma = 2.2;
    return p;
}

} // namespace

TEST_CASE("data terms match their defining sums on random inputs") {
    const Image b = fixtures::random_image(16, 12, 3, 20, -0.2, 1.4);
    const Image v = fixtures::random_image(16, 12, 3, 21);
    const DegradationParams p = full_params();

    CHECK(data_simple(b, v) == doctest::Approx(naive_data(DataTerm::Simple, b, v, p)).epsilon(1e-12));
    CHECK(data_saturation(b, v, *p.saturation) ==
          doctest::Approx(naive_data(DataTerm::Saturation, b, v, p)).epsilon(1e-12));
    CHECK(data_quant_forward(b, v, *p.quant_step) ==
          doctest::Approx(naive_data(DataTerm::QuantForward, b, v, p)).epsilon(1e-12));
    CHECK(data_quant_convex(b, v, *p.quant_step) ==
          doctest::Approx(naive_data(DataTerm::QuantConvex, b, v, p)).epsilon(1e-12));
    CHECK(data_gamma_inverse(b, v, p.gamma) ==
          doctest::Approx(naive_data(DataTerm::GammaInverse, b, v, p)).epsilon(1e-12));
    CHECK(data_gamma(b, v, p.gamma) ==
          doctest::Approx(naive_data(DataTerm::Gamma, b, v, p)).epsilon(1e-12));
    CHECK(data_full(b, v, p) == doctest::Approx(naive_data(DataTerm::Full, b, v, p)).epsilon(1e-12));

    EnergyConfig cfg;
    cfg.params = p;
    for (DataTerm t : kAllTerms) {
        cfg.data_term = t;
        CHECK(data_term_energy(cfg, b, v) == doctest::Approx(naive_data(t, b, v, p)).epsilon(1e-12));
    }
}

TEST_CASE("data term spot values") {
    CHECK(data_simple(single(0.7), single(0.4)) == doctest::Approx(0.09).epsilon(1e-12));
    CHECK(data_simple(single(0.4), single(0.4)) == 0.0);

    // clipped highlight explained exactly by the clip
    CHECK(data_saturation(single(1.2), single(0.8), 0.8) == 0.0);
    CHECK(data_saturation(single(1.2), single(0.7), 0.8) == doctest::Approx(0.01).epsilon(1e-12));

    // piecewise constant: any b inside the same quantization cell scores the same
    CHECK(data_quant_forward(single(0.26), single(0.3), 0.1) ==
          data_quant_forward(single(0.27), single(0.3), 0.1));
    CHECK(data_quant_forward(single(0.26), single(0.3), 0.1) == doctest::Approx(0.0).epsilon(1e-20));

    // dead zone of half a step on each side
    CHECK(data_quant_convex(single(0.33), single(0.3), 0.1) == 0.0);
    CHECK(data_quant_convex(single(0.45), single(0.3), 0.1) ==
          doctest::Approx(0.01).epsilon(1e-9));

    CHECK(data_gamma_inverse(single(0.25), single(0.5), 2.0) == 0.0);
    CHECK(data_gamma(single(0.25), single(0.5), 2.0) == 0.0);

    DegradationParams p;
    p.saturation = 0.5;
    p.quant_step = 0.1;
    p.gamma = 2.0;
    // min(0.5, 0.9)^(1/2) ~ 0.7071, within half a step of 0.75
    CHECK(data_full(single(0.9), single(0.75), p) == 0.0);
}

TEST_CASE("data term reductions") {
    const Image b = fixtures::random_image(10, 8, 1, 22); // in [0,1]
    const Image v = fixtures::random_image(10, 8, 1, 23);

    SUBCASE("gamma terms at gamma 1 are the simple term") {
        CHECK(data_gamma(b, v, 1.0) == doctest::Approx(data_simple(b, v)).epsilon(1e-12));
        CHECK(data_gamma_inverse(b, v, 1.0) == doctest::Approx(data_simple(b, v)).epsilon(1e-12));
    }
    SUBCASE("saturation with an inactive clip is the simple term") {
        CHECK(data_saturation(b, v, 1.0) == data_simple(b, v));
    }
    SUBCASE("quant_convex never exceeds the simple term") {
        for (double q : {1.0 / 256, 1.0 / 16, 0.5})
            CHECK(data_quant_convex(b, v, q) <= data_simple(b, v) * (1 + 1e-12));
    }
}

TEST_CASE("total variation spot values and oracle agreement") {
    Image two(2, 1, 1);
    two.at(0, 0) = 0.0;
    two.at(1, 0) = 1.0;
    CHECK(reg_tv(two) == 1.0);

    Image cols(2, 2, 1);
    cols.at(0, 0) = 0.0;
    cols.at(1, 0) = 1.0;
    cols.at(0, 1) = 0.0;
    cols.at(1, 1) = 1.0;
    CHECK(reg_tv(cols) == 2.0);

    CHECK(reg_tv(Image(7, 5, 3, 0.42)) == 0.0);

    const Image img = fixtures::random_image(13, 9, 3, 24);
    CHECK(reg_tv(img) == doctest::Approx(fixtures::naive::tv(img)).epsilon(1e-12));

    // 1-homogeneous
    Image scaled = img;
    for (std::size_t i = 0; i < scaled.value_count(); ++i)
        scaled.data()[i] *= 2.0;
    CHECK(reg_tv(scaled) == doctest::Approx(2.0 * reg_tv(img)).epsilon(1e-12));

    CHECK(reg_tv_gamma(img, 1.0) == reg_tv(img));
    CHECK(reg_tv_gamma(img, 2.2) ==
          doctest::Approx(fixtures::naive::tv(gamma_compress(img, 2.2))).epsilon(1e-12));
}

TEST_CASE("energy config validation and helpers") {
    EnergyConfig cfg;
    cfg.lambda = 0.01;
    CHECK_NOTHROW(cfg.validate());
    cfg.lambda = -1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.lambda = std::nan("");
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.lambda = 0.01;

    cfg.data_term = DataTerm::Saturation;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument); // no level set
    cfg.params.saturation = 0.8;
    CHECK_NOTHROW(cfg.validate());

    cfg.data_term = DataTerm::QuantConvex;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument); // no step set
    cfg.params.quant_step = 1.0 / 256;
    CHECK_NOTHROW(cfg.validate());

    cfg.data_term = DataTerm::Full;
    CHECK_NOTHROW(cfg.validate());

    cfg.params.gamma = 2.2;
    CHECK(cfg.latent_gamma() == 2.2); // full fits a linear latent
    cfg.data_term = DataTerm::Gamma;
    CHECK(cfg.latent_gamma() == 2.2);
    cfg.data_term = DataTerm::GammaInverse;
    CHECK(cfg.latent_gamma() == 2.2);
    cfg.data_term = DataTerm::Saturation;
    CHECK(cfg.latent_gamma() == 1.0); // display-space fit regardless of params
    cfg.data_term = DataTerm::Simple;
    CHECK(cfg.latent_gamma() == 1.0);

    cfg.data_term = DataTerm::Full;
    cfg.regularizer = RegTerm::TvGamma;
    CHECK(cfg.id() == "full+tv_gamma");
}

TEST_CASE("term names round trip") {
    for (DataTerm t : kAllTerms)
        CHECK(parse_data_term(to_string(t)) == t);
    CHECK(parse_reg_term("tv") == RegTerm::Tv);
    CHECK(parse_reg_term("tv_gamma") == RegTerm::TvGamma);
    CHECK_THROWS_AS(parse_data_term("poisson"), std::invalid_argument);
    CHECK_THROWS_AS(parse_reg_term("tikhonov"), std::invalid_argument);
}

TEST_CASE("energy state caches agree with fresh evaluation") {
    const Image v = fixtures::random_image(12, 10, 3, 25);
    const Kernel k = fixtures::synth_motion_kernel(3, 26);
    const Image u = fixtures::random_image(14, 12, 3, 27);

    for (DataTerm t : kAllTerms) {
        for (RegTerm r : {RegTerm::Tv, RegTerm::TvGamma}) {
            CAPTURE(to_string(t));
            CAPTURE(to_string(r));
            EnergyConfig cfg;
            cfg.data_term = t;
            cfg.regularizer = r;
            cfg.lambda = 0.3;
            cfg.params = full_params();
            EnergyState state(u, v, k, cfg);

            CHECK(state.total_energy() ==
                  state.data_energy() + cfg.lambda * state.reg_energy());
            CHECK(state.data_energy() ==
                  doctest::Approx(state.recompute_data_energy()).epsilon(1e-12));
            CHECK(state.reg_energy() ==
                  doctest::Approx(state.recompute_reg_energy()).epsilon(1e-12));
            CHECK(state.max_blur_cache_error() == 0.0);

            CHECK(state.interior().same_shape(v));
            CHECK(state.interior().at(0, 0) == u.at(1, 1));
        }
    }
}

TEST_CASE("zero step never changes the energy") {
    const Image v = fixtures::random_image(8, 8, 1, 28);
    const Kernel k = fixtures::synth_motion_kernel(3, 29);
    EnergyConfig cfg;
    cfg.data_term = DataTerm::Full;
    cfg.regularizer = RegTerm::TvGamma;
    cfg.lambda = 0.1;
    cfg.params = full_params();
    EnergyState state(fixtures::random_image(10, 10, 1, 30), v, k, cfg);
    for (int y = 0; y < 10; ++y)
        for (int x = 0; x < 10; ++x)
            CHECK(state.delta_energy(x, y, 0, 0.0) == 0.0);
}

TEST_CASE("delta evaluation is side-effect free and repeatable") {
    const Image v = fixtures::random_image(8, 8, 1, 31);
    const Kernel k = fixtures::synth_motion_kernel(3, 32);
    EnergyConfig cfg;
    cfg.lambda = 0.2;
    EnergyState state(fixtures::random_image(10, 10, 1, 33), v, k, cfg);

    const double before = state.total_energy();
    const double d1 = state.delta_energy(4, 5, 0, 0.07);
    const double d2 = state.delta_energy(4, 5, 0, 0.07);
    CHECK(d1 == d2);
    CHECK(state.total_energy() == before);
    CHECK(state.max_blur_cache_error() == 0.0);
}

TEST_CASE("predicted deltas match full recomputation for every term pair") {
    const Image v = fixtures::random_image(10, 9, 1, 34);
    const Kernel k = fixtures::synth_motion_kernel(3, 35);
    std::mt19937_64 rng(36);
    std::uniform_real_distribution<double> step_dist(-0.2, 0.2);

    for (DataTerm t : kAllTerms) {
        for (RegTerm r : {RegTerm::Tv, RegTerm::TvGamma}) {
            CAPTURE(to_string(t));
            CAPTURE(to_string(r));
            EnergyConfig cfg;
            cfg.data_term = t;
            cfg.regularizer = r;
            cfg.lambda = 0.25;
            cfg.params = full_params();
            EnergyState state(fixtures::random_image(12, 11, 1, 37), v, k, cfg);

            std::uniform_int_distribution<int> px(0, 11), py(0, 10);
            for (int i = 0; i < 30; ++i) {
                const int x = px(rng), y = py(rng);
                const double s = step_dist(rng);
                const double before = state.total_energy();
                const double predicted = state.delta_energy(x, y, 0, s);
                const double applied = state.apply_mutation(x, y, 0, s);
                CHECK(applied == predicted);
                const double fresh = state.recompute_total_energy();
                const double scale = std::max({1.0, std::fabs(before), std::fabs(fresh)});
                CHECK(std::fabs(before + predicted - fresh) <= 1e-9 * scale);
            }
        }
    }
}

TEST_CASE("caches stay tight over a long mutation stream") {
    const Image v = fixtures::random_image(12, 12, 1, 38);
    const Kernel k = fixtures::synth_motion_kernel(5, 39);
    EnergyConfig cfg;
    cfg.data_term = DataTerm::Full;
    cfg.regularizer = RegTerm::TvGamma;
    cfg.lambda = 0.05;
    cfg.params = full_params();
    EnergyState state(fixtures::random_image(16, 16, 1, 40), v, k, cfg);

    std::mt19937_64 rng(41);
    std::uniform_int_distribution<int> pos(0, 15);
    std::uniform_real_distribution<double> step_dist(-0.05, 0.05);
    for (int i = 0; i < 10000; ++i)
        state.apply_mutation(pos(rng), pos(rng), 0, step_dist(rng));

    CHECK(state.max_blur_cache_error() <= 1e-10);
    const double fresh = state.recompute_total_energy();
    CHECK(std::fabs(state.total_energy() - fresh) <= 1e-7 * std::max(1.0, std::fabs(fresh)));
}

TEST_CASE("energy state rejects malformed inputs") {
    const Image v = fixtures::random_image(8, 8, 1, 42);
    const Kernel k = fixtures::synth_motion_kernel(3, 43);
    EnergyConfig cfg;

    CHECK_THROWS_AS(EnergyState(fixtures::random_image(8, 8, 1, 44), v, k, cfg),
                    std::invalid_argument); // latent lacks the margins
    CHECK_THROWS_AS(EnergyState(fixtures::random_image(10, 10, 3, 44), v, k, cfg),
                    std::invalid_argument); // channel mismatch

    cfg.data_term = DataTerm::Full; // missing saturation and quant parameters
    CHECK_THROWS_AS(EnergyState(fixtures::random_image(10, 10, 1, 44), v, k, cfg),
                    std::invalid_argument);

    cfg = EnergyConfig();
    EnergyState state(fixtures::random_image(10, 10, 1, 45), v, k, cfg);
    CHECK_THROWS_AS(state.delta_energy(-1, 0, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(state.delta_energy(0, 10, 0, 0.1), std::invalid_argument);
    CHECK_THROWS_AS(state.delta_energy(0, 0, 1, 0.1), std::invalid_argument);
}
