#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "rginibre/core.hpp"
#include "rginibre/potential.hpp"

// Euler-Maruyama integration of the overdamped two-phase gas
//
//   d l_i = (sigma/sqrt(n)) dB_i - grad_i Phi dt
//
// in the half-representation: real particles get 1d noise, upper particles
// 2d noise, and the implicit conjugates move by the mirrored increments.
// The deterministic variant is the same map with sigma = 0.

namespace rginibre {

enum class GasMode { stochastic, deterministic };

struct GasParams {
    int n = 0;
    int k = 0;
    double sigma = 1.4142135623730950488;  // sqrt(2), the eigenvalue-gas value
    double dt = 1e-3;
    long steps = 0;
    std::uint64_t seed = 1;
    int threads = 1;
    long snapshot_stride = 0;  // 0: pick ~200 snapshots automatically
};

inline void validate_params(const GasParams& p) {
    if (p.n < 1) throw std::invalid_argument("n must be positive");
    if (p.k < 0 || p.k > p.n) throw std::invalid_argument("k must lie in [0, n]");
    if ((p.n - p.k) % 2 != 0)
        throw std::invalid_argument("k must have the parity of n (complex eigenvalues pair up)");
    if (!(p.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (p.sigma < 0.0) throw std::invalid_argument("sigma must be nonnegative");
}

struct Trajectory {
    std::vector<long> steps;
    std::vector<double> times;
    std::vector<SpectralConfiguration> snapshots;
    std::vector<double> energies;
    std::vector<double> min_separations;
    // rejected step attempts (resolved by halving dt and, in the stochastic
    // case, redrawing the noise); a guard trip proper, i.e. a rejection that
    // persists at the smallest step size, aborts evolve instead
    long guard_retries = 0;
};

// default initial data: reals i.i.d. uniform on [-1,1], uppers uniform on
// the unit half-disk kept off the axis (y >= 0.05)
inline SpectralConfiguration initial_configuration(int n, int k, Rng& rng) {
    GasParams chk;
    chk.n = n;
    chk.k = k;
    chk.dt = 1.0;
    validate_params(chk);
    const int l = (n - k) / 2;
    std::vector<double> reals(static_cast<std::size_t>(k));
    std::vector<Point> uppers(static_cast<std::size_t>(l));
    for (int i = 0; i < k; ++i) reals[i] = rng.uniform(-1.0, 1.0);
    for (int j = 0; j < l; ++j) {
        for (;;) {
            const double x = rng.uniform(-1.0, 1.0);
            const double y = rng.uniform(0.05, 1.0);
            if (x * x + y * y <= 1.0) {
                uppers[j] = {x, y};
                break;
            }
        }
    }
    return make_configuration(std::move(reals), std::move(uppers));
}

namespace detail {

// one explicit step from precomputed forces; reflection y -> |y| backstops
// the discretization (the conjugate repulsion already pushes off the axis)
inline SpectralConfiguration apply_step(const SpectralConfiguration& cfg,
                                        const ForceField& f, double dt,
                                        const std::vector<double>& noise) {
    SpectralConfiguration out = cfg;
    const int k = cfg.k(), l = cfg.l();
    for (int i = 0; i < k; ++i) out.reals[i] += -dt * f.real_force[i] + noise[i];
    for (int m = 0; m < l; ++m) {
        out.uppers[m].x += -dt * f.upper_force[m].x + noise[k + 2 * m];
        out.uppers[m].y += -dt * f.upper_force[m].y + noise[k + 2 * m + 1];
        out.uppers[m].y = std::abs(out.uppers[m].y);
    }
    return out;
}

inline std::string closest_pair_report(const SpectralConfiguration& cfg) {
    // only called on the abort path; a plain O(n^2) rescan is fine
    const int k = cfg.k(), l = cfg.l();
    double best = std::numeric_limits<double>::infinity();
    std::string who = "none";
    auto consider = [&](double d2, const std::string& label) {
        if (d2 < best) {
            best = d2;
            who = label;
        }
    };
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j)
            consider(sq(cfg.reals[i] - cfg.reals[j]),
                     "real " + std::to_string(i) + " / real " + std::to_string(j));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < l; ++j)
            consider(sq(cfg.reals[i] - cfg.uppers[j].x) + sq(cfg.uppers[j].y),
                     "real " + std::to_string(i) + " / pair " + std::to_string(j));
    for (int i = 0; i < l; ++i) {
        consider(sq(2.0 * cfg.uppers[i].y), "pair " + std::to_string(i) + " / own conjugate");
        for (int j = i + 1; j < l; ++j) {
            consider(dist2(cfg.uppers[i], cfg.uppers[j]),
                     "pair " + std::to_string(i) + " / pair " + std::to_string(j));
            consider(sq(cfg.uppers[i].x - cfg.uppers[j].x) + sq(cfg.uppers[i].y + cfg.uppers[j].y),
                     "pair " + std::to_string(i) + " / conjugate of pair " + std::to_string(j));
        }
    }
    return who + " at distance " + std::to_string(std::sqrt(best));
}

}  // namespace detail

inline SpectralConfiguration step_stochastic(const SpectralConfiguration& cfg,
                                             const GasParams& params, Rng& rng) {
    validate_params(params);
    const int k = cfg.k(), l = cfg.l();
    const ForceField f = grad_energy(cfg, params.threads);
    const double amp = params.sigma / std::sqrt(static_cast<double>(cfg.n())) *
                       std::sqrt(params.dt);
    std::vector<double> noise(static_cast<std::size_t>(k + 2 * l), 0.0);
    if (params.sigma > 0.0)
        for (double& v : noise) v = amp * rng.normal();
    SpectralConfiguration out = detail::apply_step(cfg, f, params.dt, noise);
    const double sep = min_separation(out);
    if (out.n() > 1 && sep < kCollisionEps)
        throw numerical_error("post-step collision (" + detail::closest_pair_report(out) +
                              "): step size too large");
    return out;
}

inline SpectralConfiguration step_deterministic(const SpectralConfiguration& cfg, double dt,
                                                int threads = 1) {
    const ForceField f = grad_energy(cfg, threads);
    const std::vector<double> no_noise(static_cast<std::size_t>(cfg.k() + 2 * cfg.l()), 0.0);
    SpectralConfiguration out = detail::apply_step(cfg, f, dt, no_noise);
    const double sep = min_separation(out);
    if (out.n() > 1 && sep < kCollisionEps)
        throw numerical_error("post-step collision (" + detail::closest_pair_report(out) +
                              "): step size too large");
    return out;
}

using SnapshotCallback =
    std::function<void(long step, double time, const SpectralConfiguration&)>;

// Time stepping with the safety rule dt_eff = min(dt, 0.1 min_sep^2 n),
// recomputed every step so the integrator survives tightly packed initial
// data and then accelerates.
//
// Guarded attempts: a step is rejected if it lands two particles closer
// than kCollisionEps or (deterministic mode) raises the energy. Rejection
// halves dt_eff and, in the stochastic case, redraws the noise at the new
// scale; redrawing is essential because at sigma^2 = 2 the log-gap of a
// close pair diffuses with no drift, so gaps graze any fixed floor on long
// runs and a retry that keeps the old noise direction can never escape a
// thin margin. Rejections count as guard_retries. Only a rejection that
// survives 20 halvings is a guard trip: the step size is at its minimum,
// the configuration is genuinely degenerating, and evolve aborts reporting
// the offending pair. Energies and separations are recorded every snapshot
// stride.
inline Trajectory evolve(const SpectralConfiguration& start, const GasParams& params,
                         GasMode mode, const SnapshotCallback& on_snapshot = nullptr) {
    validate_params(params);
    const int n = params.n;
    if (start.n() != n) throw std::invalid_argument("configuration does not match params.n");
    if (start.k() != params.k) throw std::invalid_argument("configuration does not match params.k");

    const long stride =
        params.snapshot_stride > 0 ? params.snapshot_stride : std::max<long>(1, params.steps / 200);
    Rng rng(params.seed, 0);
    Trajectory traj;

    const bool deterministic = (mode == GasMode::deterministic) || params.sigma == 0.0;
    SpectralConfiguration cfg = start;
    ForceField f = grad_energy(cfg, params.threads);
    // the energy guard needs Phi every step in deterministic mode; the
    // stochastic run only pays for it at snapshot strides
    double energy = total_energy(cfg, params.threads).total;
    double t = 0.0;

    auto record = [&](long step) {
        traj.steps.push_back(step);
        traj.times.push_back(t);
        traj.snapshots.push_back(cfg);
        traj.energies.push_back(deterministic ? energy : total_energy(cfg, params.threads).total);
        traj.min_separations.push_back(f.min_separation);
        if (on_snapshot) on_snapshot(step, t, cfg);
    };
    record(0);

    const int k = cfg.k(), l = cfg.l();
    std::vector<double> noise(static_cast<std::size_t>(k + 2 * l), 0.0);

    for (long step = 1; step <= params.steps; ++step) {
        double dt = std::min(params.dt, 0.1 * sq(f.min_separation) * n);
        bool accepted = false;
        for (int attempt = 0; attempt <= 20; ++attempt) {
            if (attempt > 0) {
                ++traj.guard_retries;
                dt *= 0.5;
            }
            if (!deterministic) {
                const double amp =
                    params.sigma / std::sqrt(static_cast<double>(n)) * std::sqrt(dt);
                for (double& v : noise) v = amp * rng.normal();
            }
            SpectralConfiguration next = detail::apply_step(cfg, f, dt, noise);
            ForceField fn;
            try {
                fn = grad_energy(next, params.threads);
            } catch (const numerical_error&) {
                continue;  // collision: halve and retry
            }
            if (fn.min_separation < kCollisionEps) continue;
            if (deterministic) {
                const double next_energy = total_energy(next, params.threads).total;
                if (next_energy > energy + 1e-12 * std::abs(energy)) continue;
                energy = next_energy;
            }
            cfg = std::move(next);
            f = std::move(fn);
            t += dt;
            accepted = true;
            break;
        }
        if (!accepted)
            throw numerical_error("guard trip at minimum dt after 20 halvings (" +
                                  detail::closest_pair_report(cfg) + ")");
        if (step % stride == 0 || step == params.steps) record(step);
    }
    return traj;
}

}  // namespace rginibre
