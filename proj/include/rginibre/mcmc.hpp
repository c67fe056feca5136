#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rginibre/core.hpp"
#include "rginibre/erfc.hpp"
#include "rginibre/gasdyn.hpp"
#include "rginibre/potential.hpp"

// Metropolis-Hastings sampling of the joint eigenvalue law at fixed (n, k).
// The unnormalized log density is -n Phi, with Phi the gas energy, so the
// chain and the gas dynamics share one stationary family. Moves perturb a
// single particle; the change in log density touches only that particle's
// interaction row and is accumulated incrementally.

namespace rginibre {

struct ProposalScales {
    double real_scale = 0.1;
    double upper_scale = 0.1;
};

struct ChainState {
    SpectralConfiguration config;
    double log_target = 0.0;
    long proposed_real = 0;
    long accepted_real = 0;
    long proposed_upper = 0;
    long accepted_upper = 0;

    double acceptance_real() const {
        return proposed_real > 0 ? static_cast<double>(accepted_real) / proposed_real : 0.0;
    }
    double acceptance_upper() const {
        return proposed_upper > 0 ? static_cast<double>(accepted_upper) / proposed_upper : 0.0;
    }
};

// log of the joint eigenvalue density up to its normalization constant;
// collisions have zero density and report as -infinity
inline double log_target_density(const SpectralConfiguration& config, int n, int k) {
    if (config.n() != n || config.k() != k)
        throw std::invalid_argument("configuration does not match the requested (n, k)");
    try {
        return -static_cast<double>(n) * total_energy(config).total;
    } catch (const numerical_error&) {
        return -std::numeric_limits<double>::infinity();
    }
}

namespace detail {

// all log-density terms involving real particle i placed at x; each pair
// term appears exactly once here, so a move changes the target by the
// difference of two such rows
inline double real_row_weight(const SpectralConfiguration& cfg, int i, double x) {
    const int n = cfg.n();
    double w = -0.5 * n * x * x;
    for (int j = 0; j < cfg.k(); ++j) {
        if (j == i) continue;
        const double d = std::abs(x - cfg.reals[static_cast<std::size_t>(j)]);
        if (d < kCollisionEps) return -std::numeric_limits<double>::infinity();
        w += std::log(d);
    }
    for (const Point& z : cfg.uppers) {
        const double d2 = sq(x - z.x) + sq(z.y);
        if (d2 < kCollisionEps * kCollisionEps) return -std::numeric_limits<double>::infinity();
        w += std::log(d2);  // the pair and its mirror, each at distance sqrt(d2)
    }
    return w;
}

// all log-density terms involving upper particle m placed at z (and,
// implicitly, its mirror copy)
inline double upper_row_weight(const SpectralConfiguration& cfg, int m, Point z) {
    const int n = cfg.n();
    if (!(z.y > 0.0)) return -std::numeric_limits<double>::infinity();
    double w = -2.0 * n * confinement(z, n) + std::log(2.0 * z.y);
    for (double x : cfg.reals) {
        const double d2 = sq(x - z.x) + sq(z.y);
        if (d2 < kCollisionEps * kCollisionEps) return -std::numeric_limits<double>::infinity();
        w += std::log(d2);
    }
    for (int j = 0; j < cfg.l(); ++j) {
        if (j == m) continue;
        const Point& u = cfg.uppers[static_cast<std::size_t>(j)];
        const double d1 = dist2(z, u);
        const double d2 = sq(z.x - u.x) + sq(z.y + u.y);
        if (d1 < kCollisionEps * kCollisionEps) return -std::numeric_limits<double>::infinity();
        w += std::log(d1) + std::log(d2);
    }
    return w;
}

}  // namespace detail

// one Metropolis-Hastings transition: a uniformly chosen particle gets a
// Gaussian perturbation (1d on the axis, 2d off it, with proposals crossing
// the axis folded back by y -> |y|, a symmetric move), accepted with
// probability min(1, exp(delta log target))
inline void mh_step_inplace(ChainState& state, const ProposalScales& scales, Rng& rng) {
    SpectralConfiguration& cfg = state.config;
    const int k = cfg.k(), l = cfg.l();
    const int pick = static_cast<int>(rng.u64() % static_cast<std::uint64_t>(k + l));
    if (pick < k) {
        ++state.proposed_real;
        const double old_x = cfg.reals[static_cast<std::size_t>(pick)];
        const double new_x = old_x + scales.real_scale * rng.normal();
        const double w_old = detail::real_row_weight(cfg, pick, old_x);
        const double w_new = detail::real_row_weight(cfg, pick, new_x);
        const double delta = w_new - w_old;
        if (std::log(rng.uniform01()) <= delta) {
            cfg.reals[static_cast<std::size_t>(pick)] = new_x;
            state.log_target += delta;
            ++state.accepted_real;
        }
    } else {
        ++state.proposed_upper;
        const int m = pick - k;
        const Point old_z = cfg.uppers[static_cast<std::size_t>(m)];
        Point new_z{old_z.x + scales.upper_scale * rng.normal(),
                    old_z.y + scales.upper_scale * rng.normal()};
        new_z.y = std::abs(new_z.y);
        const double w_old = detail::upper_row_weight(cfg, m, old_z);
        const double w_new = detail::upper_row_weight(cfg, m, new_z);
        const double delta = w_new - w_old;
        if (std::log(rng.uniform01()) <= delta) {
            cfg.uppers[static_cast<std::size_t>(m)] = new_z;
            state.log_target += delta;
            ++state.accepted_upper;
        }
    }
}

inline ChainState mh_step(const ChainState& state, const ProposalScales& scales, Rng& rng) {
    ChainState next = state;
    mh_step_inplace(next, scales, rng);
    return next;
}

struct ChainRun {
    std::vector<SpectralConfiguration> samples;
    // per-sample bookkeeping, aligned with `samples`: originating step, the
    // tracked log target, and the cumulative acceptance rate at that step
    std::vector<long> sample_steps;
    std::vector<double> sample_log_targets;
    std::vector<double> sample_accept_rates;
    ChainState final_state;
    ProposalScales tuned_scales;
    // largest discrepancy seen between the incrementally tracked log target
    // and a full recomputation (checked and reset every 10^4 steps)
    double max_log_target_drift = 0.0;
};

struct ChainParams {
    int n = 0;
    int k = 0;
    long steps = 0;
    long burn_in = 0;
    long thinning = 1;
    std::uint64_t seed = 1;
};

inline ChainRun run_chain(const ChainParams& p) {
    if (p.n < 1) throw std::invalid_argument("n must be positive");
    if (p.k < 0 || p.k > p.n) throw std::invalid_argument("k must lie in [0, n]");
    if ((p.n - p.k) % 2 != 0)
        throw std::invalid_argument("k must have the parity of n (complex eigenvalues pair up)");
    if (p.thinning < 1) throw std::invalid_argument("thinning must be positive");
    if (p.burn_in < 0 || p.burn_in > p.steps)
        throw std::invalid_argument("burn-in must lie within the step budget");

    Rng rng(p.seed, 0x6d636d63ULL);
    ChainRun run;
    ChainState& state = run.final_state;
    state.config = initial_configuration(p.n, p.k, rng);
    state.log_target = log_target_density(state.config, p.n, p.k);

    // during burn-in, nudge each proposal scale toward 0.4 acceptance over
    // windows of proposals, then freeze the scales for the sampling phase
    ProposalScales scales;
    scales.real_scale = 0.5 / std::sqrt(static_cast<double>(p.n));
    scales.upper_scale = 0.5 / std::sqrt(static_cast<double>(p.n));
    constexpr long kTuneWindow = 200;
    constexpr long kRecheck = 10000;
    long window_pr = 0, window_ar = 0, window_pu = 0, window_au = 0;

    run.samples.reserve(static_cast<std::size_t>((p.steps - p.burn_in) / p.thinning));

    for (long step = 1; step <= p.steps; ++step) {
        const long before_pr = state.proposed_real, before_ar = state.accepted_real;
        const long before_pu = state.proposed_upper, before_au = state.accepted_upper;
        mh_step_inplace(state, scales, rng);
        if (step <= p.burn_in) {
            window_pr += state.proposed_real - before_pr;
            window_ar += state.accepted_real - before_ar;
            window_pu += state.proposed_upper - before_pu;
            window_au += state.accepted_upper - before_au;
            if (window_pr >= kTuneWindow) {
                const double rate = static_cast<double>(window_ar) / window_pr;
                scales.real_scale = std::clamp(scales.real_scale * std::exp(rate - 0.4), 1e-5, 10.0);
                window_pr = window_ar = 0;
            }
            if (window_pu >= kTuneWindow) {
                const double rate = static_cast<double>(window_au) / window_pu;
                scales.upper_scale =
                    std::clamp(scales.upper_scale * std::exp(rate - 0.4), 1e-5, 10.0);
                window_pu = window_au = 0;
            }
        }
        if (step % kRecheck == 0) {
            const double full = log_target_density(state.config, p.n, p.k);
            run.max_log_target_drift =
                std::max(run.max_log_target_drift, std::abs(full - state.log_target));
            state.log_target = full;
        }
        if (step > p.burn_in && (step - p.burn_in) % p.thinning == 0) {
            run.samples.push_back(state.config);
            run.sample_steps.push_back(step);
            run.sample_log_targets.push_back(state.log_target);
            const long proposed = state.proposed_real + state.proposed_upper;
            const long accepted = state.accepted_real + state.accepted_upper;
            run.sample_accept_rates.push_back(
                proposed == 0 ? 0.0 : static_cast<double>(accepted) / proposed);
        }
    }
    run.tuned_scales = scales;
    return run;
}

inline std::vector<SpectralConfiguration> sample_chain(int n, int k, long steps, long burn_in,
                                                       long thinning, std::uint64_t seed) {
    ChainParams p;
    p.n = n;
    p.k = k;
    p.steps = steps;
    p.burn_in = burn_in;
    p.thinning = thinning;
    p.seed = seed;
    return run_chain(p).samples;
}

}  // namespace rginibre
