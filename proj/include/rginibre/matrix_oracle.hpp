#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rginibre/core.hpp"

// Brute-force spectral ground truth at small n: sample matrices with i.i.d.
// N(0, 1/n) entries, compute full spectra with an in-house real Schur solver
// (Householder Hessenberg reduction + Francis double-shift QR), classify by
// the number of real eigenvalues, and build empirical conditional ensembles
// by rejection.

namespace rginibre {

struct Matrix {
    int n = 0;
    std::vector<double> a;  // row-major
    Matrix() = default;
    explicit Matrix(int n_) : n(n_), a(static_cast<std::size_t>(n_) * n_, 0.0) {}
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
};

struct Spectrum {
    std::vector<Point> eigenvalues;  // whole plane: conjugates appear explicitly
    // backward-error proxy: the largest subdiagonal magnitude discarded at a
    // deflation, relative to the Frobenius norm of the input
    double residual = 0.0;
};

struct RealCountPMF {
    int n = 0;
    std::map<int, long> counts;
    long trials = 0;

    double probability(int k) const {
        const auto it = counts.find(k);
        return it == counts.end() ? 0.0 : static_cast<double>(it->second) / trials;
    }
    // binomial standard error of the probability estimate
    double standard_error(int k) const {
        const double p = probability(k);
        return std::sqrt(p * (1.0 - p) / static_cast<double>(trials));
    }
    double mean_real_count() const {
        double m = 0.0;
        for (const auto& [k, c] : counts) m += static_cast<double>(k) * c;
        return m / static_cast<double>(trials);
    }
};

inline Matrix sample_ginibre(int n, Rng& rng) {
    if (n < 1) throw std::invalid_argument("matrix dimension must be positive");
    Matrix m(n);
    const double sd = 1.0 / std::sqrt(static_cast<double>(n));
    for (double& v : m.a) v = sd * rng.normal();
    return m;
}

namespace detail {

// similarity reduction to upper Hessenberg form by Householder reflections
inline void hessenberg(Matrix& h) {
    const int n = h.n;
    std::vector<double> v(static_cast<std::size_t>(n), 0.0);
    for (int j = 0; j + 2 < n; ++j) {
        double norm2 = 0.0;
        for (int i = j + 1; i < n; ++i) norm2 += sq(h(i, j));
        if (norm2 == 0.0) continue;
        const double alpha = std::sqrt(norm2);
        const double x1 = h(j + 1, j);
        const double beta = x1 >= 0.0 ? -alpha : alpha;
        v[static_cast<std::size_t>(j) + 1] = x1 - beta;
        for (int i = j + 2; i < n; ++i) v[static_cast<std::size_t>(i)] = h(i, j);
        const double tau = 1.0 / (norm2 - beta * x1);  // 2 / vᵀv
        for (int c = j; c < n; ++c) {
            double s = 0.0;
            for (int i = j + 1; i < n; ++i) s += v[static_cast<std::size_t>(i)] * h(i, c);
            s *= tau;
            for (int i = j + 1; i < n; ++i) h(i, c) -= s * v[static_cast<std::size_t>(i)];
        }
        for (int r = 0; r < n; ++r) {
            double s = 0.0;
            for (int c = j + 1; c < n; ++c) s += v[static_cast<std::size_t>(c)] * h(r, c);
            s *= tau;
            for (int c = j + 1; c < n; ++c) h(r, c) -= s * v[static_cast<std::size_t>(c)];
        }
        h(j + 1, j) = beta;
        for (int i = j + 2; i < n; ++i) h(i, j) = 0.0;
    }
}

// one Francis double-shift bulge chase over the decoupled window [lo, hi];
// tr and det prescribe the implicit shift pair as trace and determinant
inline void francis_sweep(Matrix& h, int lo, int hi, double tr, double det) {
    double p = h(lo, lo) * (h(lo, lo) - tr) + h(lo, lo + 1) * h(lo + 1, lo) + det;
    double q = h(lo + 1, lo) * (h(lo, lo) + h(lo + 1, lo + 1) - tr);
    double r = h(lo + 1, lo) * h(lo + 2, lo + 1);

    auto reflect3 = [&](int m, double a0, double a1, double a2) {
        const double scale = std::abs(a0) + std::abs(a1) + std::abs(a2);
        if (scale == 0.0) return;
        a0 /= scale;
        a1 /= scale;
        a2 /= scale;
        const double nrm = std::sqrt(a0 * a0 + a1 * a1 + a2 * a2);
        const double beta = a0 >= 0.0 ? -nrm : nrm;
        const double u0 = a0 - beta, u1 = a1, u2 = a2;
        const double utu = nrm * nrm - beta * a0;  // vᵀv / 2
        if (utu == 0.0) return;
        const double tau = 1.0 / utu;
        for (int c = std::max(lo, m - 1); c <= hi; ++c) {
            double s = u0 * h(m, c) + u1 * h(m + 1, c) + u2 * h(m + 2, c);
            s *= tau;
            h(m, c) -= s * u0;
            h(m + 1, c) -= s * u1;
            h(m + 2, c) -= s * u2;
        }
        for (int rr = lo; rr <= std::min(m + 3, hi); ++rr) {
            double s = u0 * h(rr, m) + u1 * h(rr, m + 1) + u2 * h(rr, m + 2);
            s *= tau;
            h(rr, m) -= s * u0;
            h(rr, m + 1) -= s * u1;
            h(rr, m + 2) -= s * u2;
        }
    };

    for (int m = lo; m <= hi - 2; ++m) {
        if (m > lo) {
            p = h(m, m - 1);
            q = h(m + 1, m - 1);
            r = m + 2 <= hi ? h(m + 2, m - 1) : 0.0;
        }
        reflect3(m, p, q, r);
        if (m > lo) {
            h(m + 1, m - 1) = 0.0;
            if (m + 2 <= hi) h(m + 2, m - 1) = 0.0;
        }
    }
    // the last bulge entry sits one row below the envelope; a 2d reflector
    // on rows (hi-1, hi) restores Hessenberg form
    const int m = hi - 1;
    const double a0 = h(m, m - 1), a1 = h(hi, m - 1);
    const double scale = std::abs(a0) + std::abs(a1);
    if (scale == 0.0) return;
    const double b0 = a0 / scale, b1 = a1 / scale;
    const double nrm = std::sqrt(b0 * b0 + b1 * b1);
    const double beta = b0 >= 0.0 ? -nrm : nrm;
    const double u0 = b0 - beta, u1 = b1;
    const double utu = nrm * nrm - beta * b0;
    if (utu == 0.0) return;
    const double tau = 1.0 / utu;
    for (int c = m - 1; c <= hi; ++c) {
        double s = u0 * h(m, c) + u1 * h(hi, c);
        s *= tau;
        h(m, c) -= s * u0;
        h(hi, c) -= s * u1;
    }
    for (int rr = lo; rr <= hi; ++rr) {
        double s = u0 * h(rr, m) + u1 * h(rr, hi);
        s *= tau;
        h(rr, m) -= s * u0;
        h(rr, hi) -= s * u1;
    }
    h(hi, m - 1) = 0.0;
}

// eigenvalues of the 2x2 block [[a,b],[c,d]], stable in the real case
inline std::pair<Point, Point> eig2(double a, double b, double c, double d) {
    const double m = 0.5 * (a + d);
    const double p = 0.5 * (a - d);
    const double disc = p * p + b * c;
    if (disc >= 0.0) {
        const double q = std::sqrt(disc);
        const double z = m + (m >= 0.0 ? q : -q);
        const double det = a * d - b * c;
        const double other = z != 0.0 ? det / z : m - (m >= 0.0 ? q : -q);
        return {{z, 0.0}, {other, 0.0}};
    }
    const double y = std::sqrt(-disc);
    return {{m, y}, {m, -y}};
}

}  // namespace detail

// full spectrum by real Schur reduction: 1x1 blocks give real eigenvalues,
// 2x2 blocks conjugate pairs, so the output is conjugate-closed exactly
inline Spectrum eigenvalues(const Matrix& input) {
    const int n = input.n;
    if (n > 400) throw std::invalid_argument("matrix dimension exceeds the solver's scale of 400");
    Spectrum out;
    if (n == 0) return out;
    for (double v : input.a)
        if (!std::isfinite(v)) throw std::invalid_argument("matrix entries must be finite");
    out.eigenvalues.reserve(static_cast<std::size_t>(n));
    if (n == 1) {
        out.eigenvalues.push_back({input(0, 0), 0.0});
        return out;
    }

    Matrix h = input;
    detail::hessenberg(h);
    double fro = 0.0;
    for (double v : h.a) fro += sq(v);
    fro = std::sqrt(fro);
    const double fallback = fro > 0.0 ? fro : 1.0;

    int hi = n - 1;
    long sweeps = 0;
    const long cap = 40L * n;
    int window_iters = 0;
    while (hi >= 0) {
        int lo = hi;
        while (lo > 0) {
            const double local = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            const double sub = std::abs(h(lo, lo - 1));
            if (sub <= 1e-12 * (local > 0.0 ? local : fallback)) {
                out.residual = std::max(out.residual, sub / fallback);
                h(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            out.eigenvalues.push_back({h(hi, hi), 0.0});
            --hi;
            window_iters = 0;
            continue;
        }
        if (lo == hi - 1) {
            const auto [z1, z2] = detail::eig2(h(lo, lo), h(lo, hi), h(hi, lo), h(hi, hi));
            out.eigenvalues.push_back(z1);
            out.eigenvalues.push_back(z2);
            hi -= 2;
            window_iters = 0;
            continue;
        }
        if (++sweeps > cap)
            throw numerical_error("eigenvalue iteration did not converge within 40n sweeps");
        double tr, det;
        if (++window_iters % 10 == 0) {
            // exceptional shifts break the rare symmetric limit cycles
            const double s = std::abs(h(hi, hi - 1)) + std::abs(h(hi - 1, hi - 2));
            tr = 1.5 * s;
            det = -0.4375 * s * s;
        } else {
            tr = h(hi - 1, hi - 1) + h(hi, hi);
            det = h(hi - 1, hi - 1) * h(hi, hi) - h(hi - 1, hi) * h(hi, hi - 1);
        }
        detail::francis_sweep(h, lo, hi, tr, det);
    }
    return out;
}

inline double spectral_radius(const Spectrum& spec) {
    double r = 0.0;
    for (const Point& z : spec.eigenvalues) r = std::max(r, std::hypot(z.x, z.y));
    return r;
}

// number of real eigenvalues: |Im| <= tol, then repaired to the parity of n
// by reclassifying the eigenvalue nearest the threshold (the real/complex
// split is exact in the ensemble; floating point needs this convention)
inline int count_real(const Spectrum& spec, double tol = -1.0) {
    const int n = static_cast<int>(spec.eigenvalues.size());
    if (tol < 0.0) tol = 1e-8 * spectral_radius(spec);
    int k = 0;
    for (const Point& z : spec.eigenvalues)
        if (std::abs(z.y) <= tol) ++k;
    if ((n - k) % 2 != 0) {
        int nearest = -1;
        double best = std::numeric_limits<double>::infinity();
        for (int i = 0; i < n; ++i) {
            const double d = std::abs(std::abs(spec.eigenvalues[static_cast<std::size_t>(i)].y) - tol);
            if (d < best) {
                best = d;
                nearest = i;
            }
        }
        k += std::abs(spec.eigenvalues[static_cast<std::size_t>(nearest)].y) <= tol ? -1 : 1;
    }
    return k;
}

// empirical pmf of the real-eigenvalue count over independent draws; trials
// use derived rng streams so the result does not depend on the thread count
inline RealCountPMF estimate_pnk(int n, long trials, Rng& rng, int threads = 1) {
    if (n < 1) throw std::invalid_argument("matrix dimension must be positive");
    if (trials < 1) throw std::invalid_argument("at least one trial is required");
    std::vector<int> ks(static_cast<std::size_t>(trials), 0);
    parallel_for(0, static_cast<int>(trials), threads, [&](int t0, int t1) {
        for (int t = t0; t < t1; ++t) {
            Rng trial_rng = rng.derived(0x6f7261636cULL + static_cast<std::uint64_t>(t));
            const Matrix m = sample_ginibre(n, trial_rng);
            ks[static_cast<std::size_t>(t)] = count_real(eigenvalues(m));
        }
    });
    RealCountPMF pmf;
    pmf.n = n;
    pmf.trials = trials;
    for (int k : ks) ++pmf.counts[k];
    return pmf;
}

// rejection sampling of the ensemble conditioned on exactly k real
// eigenvalues; the acceptance probability decays like exp(-c n^2) away from
// the typical count, so infeasible (n,k) must fail loudly toward the
// constrained sampler instead of spinning
inline std::vector<Spectrum> conditional_ensemble(int n, int k, long trials_cap, Rng& rng,
                                                  int threads = 1) {
    if (n < 1) throw std::invalid_argument("matrix dimension must be positive");
    if (k < 0 || k > n || (n - k) % 2 != 0)
        throw std::invalid_argument("k must lie in [0, n] with the parity of n");
    if (trials_cap < 1) throw std::invalid_argument("at least one trial is required");
    // classify every trial first, then rebuild only the accepted spectra by
    // replaying their derived streams; this keeps memory at one int per trial
    std::vector<char> hit(static_cast<std::size_t>(trials_cap), 0);
    parallel_for(0, static_cast<int>(trials_cap), threads, [&](int t0, int t1) {
        for (int t = t0; t < t1; ++t) {
            Rng trial_rng = rng.derived(0x6f7261636cULL + static_cast<std::uint64_t>(t));
            const Matrix m = sample_ginibre(n, trial_rng);
            if (count_real(eigenvalues(m)) == k) hit[static_cast<std::size_t>(t)] = 1;
        }
    });
    std::vector<long> indices;
    for (long t = 0; t < trials_cap; ++t)
        if (hit[static_cast<std::size_t>(t)]) indices.push_back(t);
    std::vector<Spectrum> out(indices.size());
    parallel_for(0, static_cast<int>(indices.size()), threads, [&](int i0, int i1) {
        for (int i = i0; i < i1; ++i) {
            Rng trial_rng = rng.derived(0x6f7261636cULL +
                                        static_cast<std::uint64_t>(indices[static_cast<std::size_t>(i)]));
            out[static_cast<std::size_t>(i)] = eigenvalues(sample_ginibre(n, trial_rng));
        }
    });
    if (out.empty())
        throw numerical_error("no matrix with " + std::to_string(k) + " real eigenvalues in " +
                              std::to_string(trials_cap) +
                              " trials; the event is too rare for rejection sampling, use the "
                              "constrained chain sampler");
    return out;
}

}  // namespace rginibre
