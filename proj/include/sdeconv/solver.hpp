#pragma once

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "sdeconv/energy.hpp"

namespace sdeconv {

struct SolverConfig {
    double delta_init = 0.1;            // initial mutation magnitude
    double delta_min = 1.0 / 512.0;     // stop once delta falls below this
    double anneal_factor = 0.5;         // delta multiplier on a stalled window
    std::int64_t accept_window = 0;     // iterations per annealing check, 0 = 10x latent values
    double accept_threshold = 0.05;     // acceptance-rate floor for keeping delta
    double p_chain = 0.5;               // probability of sampling near the last accepted pixel
    int chain_radius = 2;
    std::int64_t max_iters = 100000000; // hard cap
    std::int64_t trace_stride = 0;      // energy-trace sampling period, 0 = accept_window
    std::uint64_t seed = 0;

    void validate() const;
};

struct SolverReport {
    std::int64_t iterations = 0;
    std::int64_t accepted = 0;
    double initial_energy = 0.0;
    double final_energy = 0.0;
    double final_delta = 0.0;
    double seconds = 0.0;
    std::vector<std::pair<std::int64_t, double>> trace; // (iteration, total energy)

    void save(const std::string& path) const; // key/value text
};

// Random state of one minimization run: the generator, the current
// mutation magnitude and the chain anchor (last accepted position).
struct SamplerState {
    explicit SamplerState(std::uint64_t seed, double delta)
        : rng(seed), delta(delta) {}

    std::mt19937_64 rng;
    double delta;
    bool has_anchor = false;
    int anchor_x = 0;
    int anchor_y = 0;
    int anchor_c = 0;
};

struct StepResult {
    bool accepted = false;
    int x = 0;
    int y = 0;
    int channel = 0;
    double delta_e = 0.0;
};

// Builds the initial state for an observation: the latent starts as the
// observation mapped into the latent space (v^gamma for terms that fit a
// linear-light latent), replicate-padded by the kernel half extents.
EnergyState initialize(const Image& v, const Kernel& k, const EnergyConfig& cfg);

// One mutation attempt: draw a pixel (chained near the anchor with
// probability p_chain, else uniform over the latent domain), evaluate the
// energy change of +delta and -delta, and greedily apply the more negative
// one if it decreases the energy. Ties prefer +delta. Never increases the
// total energy.
StepResult step(EnergyState& state, SamplerState& sampler, const SolverConfig& cfg);

// Full minimization: runs steps, shrinking delta by anneal_factor whenever
// an accept_window finishes with an acceptance rate below the threshold,
// until delta < delta_min or max_iters. Returns the interior latent
// estimate clamped to [0,1] together with the run report.
std::pair<Image, SolverReport> solve(const Image& v, const Kernel& k,
                                     const EnergyConfig& energy_cfg,
                                     const SolverConfig& solver_cfg);

} // namespace sdeconv
