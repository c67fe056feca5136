#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "rginibre/core.hpp"
#include "rginibre/erfc.hpp"

// Energy and gradient of the two-phase gas
//
//   Phi = sum_{i != j} V(l_i, l_j)/(2n) + sum_i U(l_i),
//   V(a, b) = -log|a - b|,
//   U(x + iy) = x^2/2 - [y != 0] (y^2/2 + log(erfc(|y| sqrt(2n)))/(2n)),
//
// over all n = k + 2l particles. Only the k reals and l upper points are
// stored; every sum below accounts for the implicit conjugates analytically.
// Gradients are partial derivatives in the stored coordinates with all other
// particles (conjugates included) held fixed, which is what the overdamped
// dynamics prescribes.

namespace rginibre {

inline constexpr double kCollisionEps = 1e-10;

struct EnergyBreakdown {
    double interaction = 0.0;
    double confinement = 0.0;
    double total = 0.0;
};

// U at a single point; even in y, so the upper representative is enough
inline double confinement(const Point& p, int n) {
    const double base = 0.5 * sq(p.x);
    if (p.y == 0.0) return base;
    const double ay = std::abs(p.y);
    return base - 0.5 * sq(ay) - log_erfc(ay * std::sqrt(2.0 * n)) / (2.0 * n);
}

// grad U for y > 0; the y-part is -y + g(y sqrt(2n))/sqrt(2n) with the
// hazard ratio g, which stays ~ y + 1/(2ny) for large arguments
inline Point confinement_grad(const Point& p, int n) {
    if (p.y == 0.0) return {p.x, 0.0};
    const double s = std::sqrt(2.0 * n);
    const double sign = p.y > 0.0 ? 1.0 : -1.0;
    const double ay = std::abs(p.y);
    return {p.x, sign * (-ay + gauss_hazard(ay * s) / s)};
}

struct ForceField {
    std::vector<double> real_force;  // dPhi/dx_i, k entries
    std::vector<Point> upper_force;  // grad_{z_m} Phi, l entries
    double min_separation = 0.0;     // over all represented pairs, conjugates included
};

namespace detail {

// Sum of log(v) over a stream of positive values, taking one std::log per
// block of 16 (or when the running product nears the representable range).
struct LogProduct {
    double prod = 1.0;
    int count = 0;
    double sum = 0.0;
    void mul(double v) {
        prod *= v;
        if (++count == 16 || prod < 1e-270 || prod > 1e270) flush();
    }
    void flush() {
        if (count > 0) {
            sum += std::log(prod);
            prod = 1.0;
            count = 0;
        }
    }
    double value() {
        flush();
        return sum;
    }
};

[[noreturn]] inline void throw_collision(double sep) {
    throw numerical_error("particle collision: min separation " +
                          std::to_string(sep) + " below " +
                          std::to_string(kCollisionEps));
}

}  // namespace detail

// Minimum distance over all represented pairs, including each upper point
// to its own conjugate (2y).
inline double min_separation(const SpectralConfiguration& cfg) {
    const int k = cfg.k(), l = cfg.l();
    double m2 = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i)
        for (int j = i + 1; j < k; ++j) m2 = std::min(m2, sq(cfg.reals[i] - cfg.reals[j]));
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < l; ++j)
            m2 = std::min(m2, sq(cfg.reals[i] - cfg.uppers[j].x) + sq(cfg.uppers[j].y));
    for (int i = 0; i < l; ++i) {
        m2 = std::min(m2, sq(2.0 * cfg.uppers[i].y));
        for (int j = i + 1; j < l; ++j) {
            m2 = std::min(m2, dist2(cfg.uppers[i], cfg.uppers[j]));
            m2 = std::min(m2, sq(cfg.uppers[i].x - cfg.uppers[j].x) +
                                  sq(cfg.uppers[i].y + cfg.uppers[j].y));
        }
    }
    return std::sqrt(m2);
}

// Phi split into interaction and confinement. The pair sum is organized in
// rows (one per stored particle, covering pairs with larger index only);
// rows are computed independently, possibly in parallel, then merged with
// compensated summation in fixed row order, so the result is bit-identical
// for every thread count.
inline EnergyBreakdown total_energy(const SpectralConfiguration& cfg, int threads = 1) {
    const int k = cfg.k(), l = cfg.l(), n = cfg.n();
    const int rows = k + l;
    const double* xr = cfg.reals.data();
    const Point* up = cfg.uppers.data();

    std::vector<double> row_half(rows, 0.0);  // terms entering with -1/2 log
    std::vector<double> row_full(rows, 0.0);  // terms entering with -1 log
    std::vector<double> row_min2(rows, std::numeric_limits<double>::infinity());

    parallel_for(0, rows, threads, [&](int rb, int re) {
        for (int i = rb; i < re; ++i) {
            detail::LogProduct half, full;
            double m2 = std::numeric_limits<double>::infinity();
            if (i < k) {
                const double xi = xr[i];
                for (int j = i + 1; j < k; ++j) {
                    const double d2 = sq(xi - xr[j]);
                    m2 = std::min(m2, d2);
                    half.mul(d2);
                }
                for (int j = 0; j < l; ++j) {
                    const double d2 = sq(xi - up[j].x) + sq(up[j].y);
                    m2 = std::min(m2, d2);
                    full.mul(d2);
                }
            } else {
                const int m = i - k;
                const double xm = up[m].x, ym = up[m].y;
                const double own = sq(2.0 * ym);
                m2 = std::min(m2, own);
                half.mul(own);
                for (int j = m + 1; j < l; ++j) {
                    const double d1 = sq(xm - up[j].x) + sq(ym - up[j].y);
                    const double d2 = sq(xm - up[j].x) + sq(ym + up[j].y);
                    m2 = std::min(m2, std::min(d1, d2));
                    full.mul(d1);
                    full.mul(d2);
                }
            }
            row_half[i] = half.value();
            row_full[i] = full.value();
            row_min2[i] = m2;
        }
    });

    double m2 = std::numeric_limits<double>::infinity();
    NeumaierSum pair_sum;  // sum over all full-system pairs of -log distance
    for (int i = 0; i < rows; ++i) {
        m2 = std::min(m2, row_min2[i]);
        pair_sum.add(-0.5 * row_half[i] - row_full[i]);
    }
    const double sep = std::sqrt(m2);
    if (n > 1 && sep < kCollisionEps) detail::throw_collision(sep);

    NeumaierSum conf;
    for (int i = 0; i < k; ++i) conf.add(0.5 * sq(xr[i]));
    for (int j = 0; j < l; ++j) conf.add(2.0 * confinement(up[j], n));

    EnergyBreakdown e;
    e.interaction = pair_sum.value() / n;
    e.confinement = conf.value();
    e.total = e.interaction + e.confinement;
    return e;
}

// grad Phi per stored particle, treating Phi as a function of the stored
// coordinates: moving an upper point drags its mirror image along, so the
// derivative through the implicit conjugate is included (it doubles every
// upper-particle term). This is the gradient that matches finite
// differences of total_energy, and the drift -grad that keeps the gas
// stationary for the Boltzmann weight exp(-n Phi) with sigma = sqrt(2);
// with the conjugate held fixed instead, the axis would become attainable.
inline ForceField grad_energy(const SpectralConfiguration& cfg, int threads = 1) {
    const int k = cfg.k(), l = cfg.l(), n = cfg.n();
    const double* xr = cfg.reals.data();
    const Point* up = cfg.uppers.data();
    const double inv_n = 1.0 / n;

    ForceField f;
    f.real_force.assign(static_cast<std::size_t>(k), 0.0);
    f.upper_force.assign(static_cast<std::size_t>(l), Point{});
    std::vector<double> row_min2(static_cast<std::size_t>(k + l),
                                 std::numeric_limits<double>::infinity());

    parallel_for(0, k, threads, [&](int b, int e) {
        for (int i = b; i < e; ++i) {
            const double xi = xr[i];
            double m2 = std::numeric_limits<double>::infinity();
            double acc = 0.0;
            for (int j = 0; j < i; ++j) {
                const double dx = xi - xr[j];
                m2 = std::min(m2, dx * dx);
                acc += 1.0 / dx;
            }
            for (int j = i + 1; j < k; ++j) {
                const double dx = xi - xr[j];
                m2 = std::min(m2, dx * dx);
                acc += 1.0 / dx;
            }
            for (int j = 0; j < l; ++j) {
                const double dx = xi - up[j].x;
                const double d2 = dx * dx + sq(up[j].y);
                m2 = std::min(m2, d2);
                acc += 2.0 * dx / d2;
            }
            f.real_force[i] = xi - inv_n * acc;
            row_min2[i] = m2;
        }
    });

    parallel_for(0, l, threads, [&](int b, int e) {
        for (int m = b; m < e; ++m) {
            const double xm = up[m].x, ym = up[m].y;
            double m2 = sq(2.0 * ym);
            double ax = 0.0, ay = 0.0;
            for (int j = 0; j < k; ++j) {
                const double dx = xm - xr[j];
                const double d2 = dx * dx + ym * ym;
                m2 = std::min(m2, d2);
                ax += dx / d2;
                ay += ym / d2;
            }
            for (int j = 0; j < l; ++j) {
                if (j == m) continue;
                const double dx = xm - up[j].x;
                const double dy1 = ym - up[j].y;
                const double dy2 = ym + up[j].y;
                const double d1 = dx * dx + dy1 * dy1;
                const double d2 = dx * dx + dy2 * dy2;
                m2 = std::min(m2, std::min(d1, d2));
                ax += dx / d1 + dx / d2;
                ay += dy1 / d1 + dy2 / d2;
            }
            ay += 0.5 / ym;  // own conjugate at distance 2y
            const Point cg = confinement_grad(up[m], n);
            f.upper_force[m] = {2.0 * (cg.x - inv_n * ax), 2.0 * (cg.y - inv_n * ay)};
            row_min2[k + m] = m2;
        }
    });

    double m2 = std::numeric_limits<double>::infinity();
    for (double v : row_min2) m2 = std::min(m2, v);
    f.min_separation = (k + l) > 0 ? std::sqrt(m2) : 0.0;
    if (cfg.n() > 1 && f.min_separation < kCollisionEps)
        detail::throw_collision(f.min_separation);
    return f;
}

}  // namespace rginibre
