#pragma once

#include <string>

#include "sdeconv/forward_model.hpp"
#include "sdeconv/image.hpp"

namespace sdeconv {

// Data-fitting terms. All of them compare the blurred latent estimate b
// against the observation v, each modeling a different part of the
// acquisition pipeline:
//   simple        |b - v|^2
//   saturation    |min(c, b) - v|^2
//   quant_forward |Q_q(b) - v|^2              (piecewise constant)
//   quant_convex  |(|b - v| - q/2)+|^2        (zero inside the quantization interval)
//   gamma_inverse |b - v^gamma|^2             (fit in linear space)
//   gamma         |b^(1/gamma) - v|^2         (fit in display space)
//   full          |(|min(c,b)^(1/gamma) - v| - q/2)+|^2
enum class DataTerm {
    Simple,
    Saturation,
    QuantForward,
    QuantConvex,
    GammaInverse,
    Gamma,
    Full,
};

enum class RegTerm {
    Tv,      // isotropic total variation, forward differences
    TvGamma, // total variation of the gamma-compressed image
};

std::string to_string(DataTerm t);
std::string to_string(RegTerm t);
DataTerm parse_data_term(const std::string& name);
RegTerm parse_reg_term(const std::string& name);

struct EnergyConfig {
    DataTerm data_term = DataTerm::Simple;
    RegTerm regularizer = RegTerm::Tv;
    double lambda = 0.0;
    DegradationParams params; // saturation/quant_step/gamma as used by the terms

    // Throws std::invalid_argument when a parameter required by the
    // selected terms is missing or out of range.
    void validate() const;

    // Exponent mapping the latent estimate to the observation's stored
    // space. Terms that fit a linear-light latent through a gamma curve
    // return params.gamma; the others compare latent and observation in
    // the same space.
    double latent_gamma() const;

    std::string id() const; // "<data_term>+<regularizer>"
};

// Full (non-incremental) evaluations, one per term. b is the blurred
// estimate over the observation extent.
double data_simple(const Image& b, const Image& v);
double data_saturation(const Image& b, const Image& v, double c);
double data_quant_forward(const Image& b, const Image& v, double q);
double data_quant_convex(const Image& b, const Image& v, double q);
double data_gamma_inverse(const Image& b, const Image& v, double gamma);
double data_gamma(const Image& b, const Image& v, double gamma);
double data_full(const Image& b, const Image& v, const DegradationParams& p);
double data_term_energy(const EnergyConfig& cfg, const Image& b, const Image& v);

// Sum over pixels of sqrt(dx^2 + dy^2) with forward differences and
// replicate boundary (zero difference past the last row/column), summed
// over channels.
double reg_tv(const Image& u);
double reg_tv_gamma(const Image& u, double gamma);
double reg_energy(const EnergyConfig& cfg, const Image& u);

// Latent estimate with all caches needed for O(kernel area + stencil)
// single-pixel energy differences: the blurred image b = u * k over the
// observation extent, per-pixel data contributions, the running data and
// regularizer totals, and the gamma-compressed latent when the
// regularizer needs it.
//
// Single writer: mutations and delta evaluations on one state must be
// externally serialized; independent states are safe to use in parallel.
class EnergyState {
public:
    // latent extent must equal the observation extent plus twice the
    // kernel half extent on each axis.
    EnergyState(Image latent, Image observed, Kernel kernel, EnergyConfig cfg);

    const Image& latent() const { return u_; }
    const Image& observed() const { return v_; }
    const Image& blurred() const { return b_; }
    const Kernel& kernel() const { return k_; }
    const EnergyConfig& config() const { return cfg_; }
    const PaddedDomain& domain() const { return dom_; }

    double total_energy() const { return total_; }
    double data_energy() const { return data_total_; }
    double reg_energy() const { return reg_total_; }

    // Energy change from adding step to latent pixel (lx, ly, ch), without
    // applying it. Touches only the kernel footprint and the regularizer
    // stencil. Throws std::invalid_argument outside the latent domain.
    double delta_energy(int lx, int ly, int ch, double step) const;

    // Commits the mutation and incrementally updates every cache. Returns
    // the applied energy change, bit-identical to what delta_energy
    // reported for the same arguments.
    double apply_mutation(int lx, int ly, int ch, double step);

    // Interior (observation extent) portion of the latent estimate.
    Image interior() const { return crop(u_, dom_.margin_x, dom_.margin_y); }

    // Fresh non-incremental recomputations, for cache verification.
    double recompute_data_energy() const;
    double recompute_reg_energy() const;
    double recompute_total_energy() const;
    double max_blur_cache_error() const;

private:
    double pixel_contrib(double b, double target) const;
    double tv_term(const Image& img, int x, int y, int ch) const;
    double tv_term_shifted(const Image& img, int x, int y, int ch, int mx, int my,
                           double mutated) const;
    double mutation_delta(int lx, int ly, int ch, double step, bool commit);

    Image u_;       // latent on the padded domain
    Image v_;       // observation
    Image target_;  // v, or v^gamma for the linear-space fit
    Image b_;       // cached u * k over the observation extent
    Image contrib_; // cached per-pixel data contributions
    Image ug_;      // gamma-compressed latent (TvGamma only)
    Kernel k_;
    EnergyConfig cfg_;
    PaddedDomain dom_;
    bool use_ug_ = false;
    double inv_gamma_data_ = 1.0;
    double inv_gamma_reg_ = 1.0;
    double sat_level_ = 0.0;
    double half_step_ = 0.0; // q/2
    double quant_step_q_ = 0.0;
    double data_total_ = 0.0;
    double reg_total_ = 0.0;
    double total_ = 0.0;
};

} // namespace sdeconv
