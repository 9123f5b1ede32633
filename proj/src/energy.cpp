#include "sdeconv/energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sdeconv {

std::string to_string(DataTerm t) {
    switch (t) {
    case DataTerm::Simple: return "simple";
    case DataTerm::Saturation: return "saturation";
    case DataTerm::QuantForward: return "quant_forward";
    case DataTerm::QuantConvex: return "quant_convex";
    case DataTerm::GammaInverse: return "gamma_inverse";
    case DataTerm::Gamma: return "gamma";
    case DataTerm::Full: return "full";
    }
    return "?";
}

std::string to_string(RegTerm t) {
    return t == RegTerm::Tv ? "tv" : "tv_gamma";
}

DataTerm parse_data_term(const std::string& name) {
    if (name == "simple") return DataTerm::Simple;
    if (name == "saturation") return DataTerm::Saturation;
    if (name == "quant_forward") return DataTerm::QuantForward;
    if (name == "quant_convex") return DataTerm::QuantConvex;
    if (name == "gamma_inverse") return DataTerm::GammaInverse;
    if (name == "gamma") return DataTerm::Gamma;
    if (name == "full") return DataTerm::Full;
    throw std::invalid_argument("unknown data term '" + name + "'");
}

RegTerm parse_reg_term(const std::string& name) {
    if (name == "tv") return RegTerm::Tv;
    if (name == "tv_gamma") return RegTerm::TvGamma;
    throw std::invalid_argument("unknown regularizer '" + name + "'");
}

void EnergyConfig::validate() const {
    if (!(lambda >= 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("lambda must be a finite non-negative number");
    params.validate();
    const bool needs_c = data_term == DataTerm::Saturation || data_term == DataTerm::Full;
    const bool needs_q = data_term == DataTerm::QuantForward ||
                         data_term == DataTerm::QuantConvex || data_term == DataTerm::Full;
    if (needs_c && !params.saturation)
        throw std::invalid_argument("data term '" + to_string(data_term) +
                                    "' requires the saturation level");
    if (needs_q && !params.quant_step)
        throw std::invalid_argument("data term '" + to_string(data_term) +
                                    "' requires the quantization step");
}

double EnergyConfig::latent_gamma() const {
    switch (data_term) {
    case DataTerm::GammaInverse:
    case DataTerm::Gamma:
    case DataTerm::Full:
        return params.gamma;
    default:
        return 1.0;
    }
}

std::string EnergyConfig::id() const {
    return to_string(data_term) + "+" + to_string(regularizer);
}

// ---- Full evaluations ----

namespace {

void check_same_shape(const Image& a, const Image& b, const char* what) {
    if (!a.same_shape(b))
        throw std::invalid_argument(std::string(what) + ": image shapes differ");
}

template <typename F>
double sum_residuals(const Image& b, const Image& v, F&& residual_sq) {
    check_same_shape(b, v, "data term");
    double total = 0.0;
    const double* pb = b.data();
    const double* pv = v.data();
    for (std::size_t i = 0, n = b.value_count(); i < n; ++i)
        total += residual_sq(pb[i], pv[i]);
    return total;
}

} // namespace

double data_simple(const Image& b, const Image& v) {
    return sum_residuals(b, v, [](double x, double o) {
        double d = x - o;
        return d * d;
    });
}

double data_saturation(const Image& b, const Image& v, double c) {
    return sum_residuals(b, v, [c](double x, double o) {
        double d = std::min(c, x) - o;
        return d * d;
    });
}

double data_quant_forward(const Image& b, const Image& v, double q) {
    return sum_residuals(b, v, [q](double x, double o) {
        double d = quantize_value(x, q) - o;
        return d * d;
    });
}

double data_quant_convex(const Image& b, const Image& v, double q) {
    const double half = 0.5 * q;
    return sum_residuals(b, v, [half](double x, double o) {
        double e = std::fabs(x - o) - half;
        return e > 0.0 ? e * e : 0.0;
    });
}

double data_gamma_inverse(const Image& b, const Image& v, double gamma) {
    return data_simple(b, gamma_expand(v, gamma));
}

double data_gamma(const Image& b, const Image& v, double gamma) {
    const double inv = 1.0 / gamma;
    return sum_residuals(b, v, [inv](double x, double o) {
        double d = std::pow(std::max(x, 0.0), inv) - o;
        return d * d;
    });
}

double data_full(const Image& b, const Image& v, const DegradationParams& p) {
    if (!p.saturation || !p.quant_step)
        throw std::invalid_argument("data_full requires saturation level and quantization step");
    const double c = *p.saturation;
    const double half = 0.5 * *p.quant_step;
    const double inv = 1.0 / p.gamma;
    return sum_residuals(b, v, [c, half, inv](double x, double o) {
        double g = std::pow(std::max(std::min(c, x), 0.0), inv);
        double e = std::fabs(g - o) - half;
        return e > 0.0 ? e * e : 0.0;
    });
}

double data_term_energy(const EnergyConfig& cfg, const Image& b, const Image& v) {
    const DegradationParams& p = cfg.params;
    switch (cfg.data_term) {
    case DataTerm::Simple: return data_simple(b, v);
    case DataTerm::Saturation: return data_saturation(b, v, *p.saturation);
    case DataTerm::QuantForward: return data_quant_forward(b, v, *p.quant_step);
    case DataTerm::QuantConvex: return data_quant_convex(b, v, *p.quant_step);
    case DataTerm::GammaInverse: return data_gamma_inverse(b, v, p.gamma);
    case DataTerm::Gamma: return data_gamma(b, v, p.gamma);
    case DataTerm::Full: return data_full(b, v, p);
    }
    throw std::invalid_argument("unknown data term");
}

double reg_tv(const Image& u) {
    double total = 0.0;
    for (int c = 0; c < u.channels(); ++c)
        for (int y = 0; y < u.height(); ++y)
            for (int x = 0; x < u.width(); ++x) {
                double here = u.at(x, y, c);
                double dx = x + 1 < u.width() ? u.at(x + 1, y, c) - here : 0.0;
                double dy = y + 1 < u.height() ? u.at(x, y + 1, c) - here : 0.0;
                total += std::sqrt(dx * dx + dy * dy);
            }
    return total;
}

double reg_tv_gamma(const Image& u, double gamma) {
    return reg_tv(gamma_compress(u, gamma));
}

double reg_energy(const EnergyConfig& cfg, const Image& u) {
    return cfg.regularizer == RegTerm::Tv ? reg_tv(u) : reg_tv_gamma(u, cfg.params.gamma);
}

// ---- Incremental state ----

EnergyState::EnergyState(Image latent, Image observed, Kernel kernel, EnergyConfig cfg)
    : u_(std::move(latent)), v_(std::move(observed)), k_(std::move(kernel)),
      cfg_(std::move(cfg)) {
    cfg_.validate();
    dom_ = PaddedDomain::for_observation(v_.width(), v_.height(), k_);
    if (u_.width() != dom_.latent_width() || u_.height() != dom_.latent_height() ||
        u_.channels() != v_.channels())
        throw std::invalid_argument(
            "latent extent must equal observation extent plus kernel margins");
    u_.check_finite("energy latent");
    v_.check_finite("energy observation");

    const DegradationParams& p = cfg_.params;
    inv_gamma_data_ = 1.0 / p.gamma;
    inv_gamma_reg_ = 1.0 / p.gamma;
    sat_level_ = p.saturation.value_or(0.0);
    quant_step_q_ = p.quant_step.value_or(0.0);
    half_step_ = 0.5 * quant_step_q_;

    b_ = convolve_valid(u_, k_);
    target_ = cfg_.data_term == DataTerm::GammaInverse ? gamma_expand(v_, p.gamma) : v_;

    contrib_ = Image(v_.width(), v_.height(), v_.channels());
    data_total_ = 0.0;
    for (std::size_t i = 0, n = contrib_.value_count(); i < n; ++i) {
        double ci = pixel_contrib(b_.data()[i], target_.data()[i]);
        contrib_.data()[i] = ci;
        data_total_ += ci;
    }

    use_ug_ = cfg_.regularizer == RegTerm::TvGamma;
    if (use_ug_)
        ug_ = gamma_compress(u_, p.gamma);
    reg_total_ = reg_tv(use_ug_ ? ug_ : u_);
    total_ = data_total_ + cfg_.lambda * reg_total_;
}

double EnergyState::pixel_contrib(double b, double target) const {
    switch (cfg_.data_term) {
    case DataTerm::Simple:
    case DataTerm::GammaInverse: {
        double d = b - target;
        return d * d;
    }
    case DataTerm::Saturation: {
        double d = std::min(sat_level_, b) - target;
        return d * d;
    }
    case DataTerm::QuantForward: {
        double d = quantize_value(b, quant_step_q_) - target;
        return d * d;
    }
    case DataTerm::QuantConvex: {
        double e = std::fabs(b - target) - half_step_;
        return e > 0.0 ? e * e : 0.0;
    }
    case DataTerm::Gamma: {
        double d = std::pow(std::max(b, 0.0), inv_gamma_data_) - target;
        return d * d;
    }
    case DataTerm::Full: {
        double g = std::pow(std::max(std::min(sat_level_, b), 0.0), inv_gamma_data_);
        double e = std::fabs(g - target) - half_step_;
        return e > 0.0 ? e * e : 0.0;
    }
    }
    return 0.0;
}

double EnergyState::tv_term(const Image& img, int x, int y, int ch) const {
    double here = img.at(x, y, ch);
    double dx = x + 1 < img.width() ? img.at(x + 1, y, ch) - here : 0.0;
    double dy = y + 1 < img.height() ? img.at(x, y + 1, ch) - here : 0.0;
    return std::sqrt(dx * dx + dy * dy);
}

// TV term at (x, y) with the value at (mx, my) replaced by `mutated`.
double EnergyState::tv_term_shifted(const Image& img, int x, int y, int ch, int mx, int my,
                                    double mutated) const {
    auto value = [&](int px, int py) {
        return (px == mx && py == my) ? mutated : img.at(px, py, ch);
    };
    double here = value(x, y);
    double dx = x + 1 < img.width() ? value(x + 1, y) - here : 0.0;
    double dy = y + 1 < img.height() ? value(x, y + 1) - here : 0.0;
    return std::sqrt(dx * dx + dy * dy);
}

double EnergyState::mutation_delta(int lx, int ly, int ch, double step, bool commit) {
    if (lx < 0 || lx >= u_.width() || ly < 0 || ly >= u_.height() || ch < 0 ||
        ch >= u_.channels())
        throw std::invalid_argument("mutation position outside the latent domain");

    const int mx = dom_.margin_x;
    const int my = dom_.margin_y;

    // Data part: observation pixels whose kernel footprint contains (lx, ly).
    double delta_data = 0.0;
    const int ox0 = std::max(0, lx - 2 * mx);
    const int ox1 = std::min(dom_.obs_width - 1, lx);
    const int oy0 = std::max(0, ly - 2 * my);
    const int oy1 = std::min(dom_.obs_height - 1, ly);
    for (int oy = oy0; oy <= oy1; ++oy) {
        for (int ox = ox0; ox <= ox1; ++ox) {
            const double w = k_.at_offset(ox + mx - lx, oy + my - ly);
            if (w == 0.0)
                continue;
            const double b_new = b_.at(ox, oy, ch) + step * w;
            const double c_new = pixel_contrib(b_new, target_.at(ox, oy, ch));
            delta_data += c_new - contrib_.at(ox, oy, ch);
            if (commit) {
                b_.at(ox, oy, ch) = b_new;
                contrib_.at(ox, oy, ch) = c_new;
            }
        }
    }

    // Regularizer part: forward-difference terms that reference (lx, ly).
    const Image& reg_img = use_ug_ ? ug_ : u_;
    const double mutated_u = u_.at(lx, ly, ch) + step;
    const double mutated =
        use_ug_ ? std::pow(std::max(mutated_u, 0.0), inv_gamma_reg_) : mutated_u;
    double delta_reg = 0.0;
    const int stencil[3][2] = {{lx, ly}, {lx - 1, ly}, {lx, ly - 1}};
    for (const auto& t : stencil) {
        if (t[0] < 0 || t[1] < 0)
            continue;
        delta_reg += tv_term_shifted(reg_img, t[0], t[1], ch, lx, ly, mutated) -
                     tv_term(reg_img, t[0], t[1], ch);
    }

    const double delta = delta_data + cfg_.lambda * delta_reg;
    if (commit) {
        u_.at(lx, ly, ch) = mutated_u;
        if (use_ug_)
            ug_.at(lx, ly, ch) = mutated;
        data_total_ += delta_data;
        reg_total_ += delta_reg;
        total_ += delta;
    }
    return delta;
}

double EnergyState::delta_energy(int lx, int ly, int ch, double step) const {
    // The evaluation path does not touch the caches; sharing one
    // implementation with apply_mutation keeps the two bit-identical.
    return const_cast<EnergyState*>(this)->mutation_delta(lx, ly, ch, step, false);
}

double EnergyState::apply_mutation(int lx, int ly, int ch, double step) {
    return mutation_delta(lx, ly, ch, step, true);
}

double EnergyState::recompute_data_energy() const {
    return data_term_energy(cfg_, convolve_valid(u_, k_), v_);
}

double EnergyState::recompute_reg_energy() const {
    return sdeconv::reg_energy(cfg_, u_);
}

double EnergyState::recompute_total_energy() const {
    return recompute_data_energy() + cfg_.lambda * recompute_reg_energy();
}

double EnergyState::max_blur_cache_error() const {
    Image fresh = convolve_valid(u_, k_);
    double worst = 0.0;
    for (std::size_t i = 0, n = fresh.value_count(); i < n; ++i)
        worst = std::max(worst, std::fabs(fresh.data()[i] - b_.data()[i]));
    return worst;
}

} // namespace sdeconv
