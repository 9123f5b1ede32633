#include "sdeconv/solver.hpp"

#include <algorithm>
#include <chrono>
#include <stdexcept>

#include "sdeconv/kv.hpp"

namespace sdeconv {

void SolverConfig::validate() const {
    if (!(delta_min > 0.0) || !(delta_init > delta_min))
        throw std::invalid_argument("solver requires 0 < delta_min < delta_init");
    if (!(anneal_factor > 0.0) || !(anneal_factor < 1.0))
        throw std::invalid_argument("anneal_factor must be in (0,1)");
    if (accept_window < 0)
        throw std::invalid_argument("accept_window must be non-negative");
    if (!(accept_threshold >= 0.0) || !(accept_threshold <= 1.0))
        throw std::invalid_argument("accept_threshold must be in [0,1]");
    if (!(p_chain >= 0.0) || !(p_chain <= 1.0))
        throw std::invalid_argument("p_chain must be in [0,1]");
    if (chain_radius < 1)
        throw std::invalid_argument("chain_radius must be at least 1");
    if (max_iters < 1)
        throw std::invalid_argument("max_iters must be positive");
    if (trace_stride < 0)
        throw std::invalid_argument("trace_stride must be non-negative");
}

void SolverReport::save(const std::string& path) const {
    KeyValueFile kv;
    kv.set("format", "sdeconv-report");
    kv.set_int("iterations", iterations);
    kv.set_int("accepted", accepted);
    kv.set_double("initial_energy", initial_energy);
    kv.set_double("final_energy", final_energy);
    kv.set_double("final_delta", final_delta);
    kv.set_double("seconds", seconds);
    kv.set_int("trace_count", std::int64_t(trace.size()));
    for (std::size_t i = 0; i < trace.size(); ++i)
        kv.set("trace." + std::to_string(i),
               std::to_string(trace[i].first) + " " + format_double(trace[i].second));
    kv.save(path);
}

EnergyState initialize(const Image& v, const Kernel& k, const EnergyConfig& cfg) {
    cfg.validate();
    v.check_finite("initialize");
    Image u0 = clamp01(v);
    const double g = cfg.latent_gamma();
    if (g != 1.0)
        u0 = gamma_expand(u0, g);
    u0 = pad_replicate(u0, k.half_width(), k.half_height());
    return EnergyState(std::move(u0), v, k, cfg);
}

namespace {

int draw_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

} // namespace

StepResult step(EnergyState& state, SamplerState& sampler, const SolverConfig& cfg) {
    const Image& u = state.latent();
    const int w = u.width();
    const int h = u.height();
    const int channels = u.channels();

    StepResult result;
    bool chained = false;
    if (sampler.has_anchor && cfg.p_chain > 0.0) {
        chained = std::uniform_real_distribution<double>(0.0, 1.0)(sampler.rng) < cfg.p_chain;
    }
    if (chained) {
        const int r = cfg.chain_radius;
        result.x = draw_int(sampler.rng, std::max(0, sampler.anchor_x - r),
                            std::min(w - 1, sampler.anchor_x + r));
        result.y = draw_int(sampler.rng, std::max(0, sampler.anchor_y - r),
                            std::min(h - 1, sampler.anchor_y + r));
        result.channel = sampler.anchor_c;
    } else {
        result.x = draw_int(sampler.rng, 0, w - 1);
        result.y = draw_int(sampler.rng, 0, h - 1);
        result.channel = channels > 1 ? draw_int(sampler.rng, 0, channels - 1) : 0;
    }

    const double up = state.delta_energy(result.x, result.y, result.channel, +sampler.delta);
    const double down = state.delta_energy(result.x, result.y, result.channel, -sampler.delta);

    double chosen = 0.0;
    if (up <= down && up < 0.0)
        chosen = +sampler.delta;
    else if (down < 0.0)
        chosen = -sampler.delta;

    if (chosen != 0.0) {
        result.delta_e = state.apply_mutation(result.x, result.y, result.channel, chosen);
        result.accepted = true;
        sampler.has_anchor = true;
        sampler.anchor_x = result.x;
        sampler.anchor_y = result.y;
        sampler.anchor_c = result.channel;
    }
    return result;
}

std::pair<Image, SolverReport> solve(const Image& v, const Kernel& k,
                                     const EnergyConfig& energy_cfg,
                                     const SolverConfig& solver_cfg) {
    solver_cfg.validate();
    EnergyState state = initialize(v, k, energy_cfg);
    SamplerState sampler(solver_cfg.seed, solver_cfg.delta_init);

    const std::int64_t window = solver_cfg.accept_window > 0
                                    ? solver_cfg.accept_window
                                    : std::int64_t(10) * std::int64_t(state.latent().value_count());
    const std::int64_t stride =
        solver_cfg.trace_stride > 0 ? solver_cfg.trace_stride : window;

    SolverReport report;
    report.initial_energy = state.total_energy();
    report.trace.emplace_back(0, report.initial_energy);

    const auto start = std::chrono::steady_clock::now();
    std::int64_t iters = 0;
    std::int64_t window_accepts = 0;
    while (sampler.delta >= solver_cfg.delta_min && iters < solver_cfg.max_iters) {
        const StepResult r = step(state, sampler, solver_cfg);
        ++iters;
        if (r.accepted) {
            ++window_accepts;
            ++report.accepted;
        }
        if (iters % stride == 0)
            report.trace.emplace_back(iters, state.total_energy());
        if (iters % window == 0) {
            const double rate = double(window_accepts) / double(window);
            window_accepts = 0;
            if (rate < solver_cfg.accept_threshold)
                sampler.delta *= solver_cfg.anneal_factor;
        }
    }
    const auto stop = std::chrono::steady_clock::now();

    if (report.trace.back().first != iters)
        report.trace.emplace_back(iters, state.total_energy());
    report.iterations = iters;
    report.final_energy = state.total_energy();
    report.final_delta = sampler.delta;
    report.seconds = std::chrono::duration<double>(stop - start).count();
    return {clamp01(state.interior()), std::move(report)};
}

} // namespace sdeconv
