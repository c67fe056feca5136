#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>
#include <vector>

// Value types shared by every module: conjugate-symmetric particle
// configurations, weighted empirical measures, and a reproducible RNG with
// documented stream splitting.

namespace rginibre {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

inline double sq(double v) { return v * v; }

inline double dist2(const Point& a, const Point& b) {
    return sq(a.x - b.x) + sq(a.y - b.y);
}

// Raised when a computation (not its inputs) goes bad: collisions, guard
// trips, non-convergence. Maps to a distinct process exit code in the CLI.
struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// k particles pinned to the real axis plus l points in the open upper half
// plane. Each upper point stands for a conjugate pair, so the full system
// has n = k + 2l particles and is conjugate-symmetric by construction.
struct SpectralConfiguration {
    std::vector<double> reals;
    std::vector<Point> uppers;

    int k() const { return static_cast<int>(reals.size()); }
    int l() const { return static_cast<int>(uppers.size()); }
    int n() const { return k() + 2 * l(); }
};

inline SpectralConfiguration make_configuration(std::vector<double> reals,
                                                std::vector<Point> uppers) {
    for (double x : reals) {
        if (!std::isfinite(x)) throw std::invalid_argument("non-finite real coordinate");
    }
    for (const Point& p : uppers) {
        if (!std::isfinite(p.x) || !std::isfinite(p.y))
            throw std::invalid_argument("non-finite upper coordinate");
        if (!(p.y > 0.0)) throw std::invalid_argument("upper point must have y > 0");
    }
    for (std::size_t i = 0; i < reals.size(); ++i)
        for (std::size_t j = i + 1; j < reals.size(); ++j)
            if (reals[i] == reals[j]) throw std::invalid_argument("duplicate real point");
    for (std::size_t i = 0; i < uppers.size(); ++i)
        for (std::size_t j = i + 1; j < uppers.size(); ++j)
            if (uppers[i].x == uppers[j].x && uppers[i].y == uppers[j].y)
                throw std::invalid_argument("duplicate upper point");
    SpectralConfiguration cfg;
    cfg.reals = std::move(reals);
    cfg.uppers = std::move(uppers);
    return cfg;
}

// Atomic measure in the plane. Conjugate symmetry is the producer's job:
// to_measure materializes mirror atoms explicitly.
struct EmpiricalMeasure {
    std::vector<Point> atoms;
    std::vector<double> weights;
    double total_mass = 0.0;
};

inline EmpiricalMeasure to_measure(const SpectralConfiguration& cfg) {
    EmpiricalMeasure mu;
    const int n = cfg.n();
    if (n == 0) throw std::invalid_argument("empty configuration");
    const double w = 1.0 / n;
    mu.atoms.reserve(n);
    mu.weights.assign(static_cast<std::size_t>(n), w);
    for (double x : cfg.reals) mu.atoms.push_back({x, 0.0});
    for (const Point& p : cfg.uppers) {
        mu.atoms.push_back(p);
        mu.atoms.push_back({p.x, -p.y});
    }
    mu.total_mass = 1.0;
    return mu;
}

inline double second_moment(const EmpiricalMeasure& mu) {
    if (mu.atoms.empty() || mu.total_mass <= 0.0)
        throw std::invalid_argument("degenerate measure");
    double s = 0.0;
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        s += mu.weights[i] * (sq(mu.atoms[i].x) + sq(mu.atoms[i].y));
    return s / mu.total_mass;
}

inline double on_axis_mass(const EmpiricalMeasure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        if (mu.atoms[i].y == 0.0) s += mu.weights[i];
    return s;
}

// splitmix64: the stream-splitting hash. Derived seeds are
// splitmix64(seed ^ splitmix64(stream)), so (seed, stream) pairs never
// produce overlapping mt19937_64 initializations in practice.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// mt19937_64 is bit-reproducible across platforms by the standard; normals
// are produced by an explicit Box-Muller on 53-bit uniforms because the
// distribution adapters in <random> are not.
class Rng {
  public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
        : seed_(seed), stream_(stream),
          gen_(splitmix64(seed ^ splitmix64(stream))) {}

    Rng derived(std::uint64_t stream) const { return Rng(seed_, stream); }

    std::uint64_t u64() { return gen_(); }

    // uniform on (0, 1]; never 0, so logs are safe
    double uniform01() {
        return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform01(); }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }

  private:
    std::uint64_t seed_;
    std::uint64_t stream_;
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Neumaier's compensated sum; used wherever a deterministic, order-fixed
// reduction has to stay accurate over ~1e8 terms.
struct NeumaierSum {
    double s = 0.0;
    double c = 0.0;
    void add(double v) {
        const double t = s + v;
        if (std::abs(s) >= std::abs(v))
            c += (s - t) + v;
        else
            c += (v - t) + s;
        s = t;
    }
    double value() const { return s + c; }
};

inline int effective_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(begin, end) on contiguous index blocks. Each block writes disjoint
// output, so the result does not depend on the thread count.
template <typename Fn>
void parallel_for(int begin, int end, int threads, Fn&& fn) {
    const int count = end - begin;
    if (count <= 0) return;
    threads = std::min(std::max(threads, 1), count);
    if (threads == 1) {
        fn(begin, end);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    const int chunk = (count + threads - 1) / threads;
    for (int t = 0; t < threads; ++t) {
        const int b = begin + t * chunk;
        const int e = std::min(end, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&fn, b, e] { fn(b, e); });
    }
    for (auto& th : pool) th.join();
}

}  // namespace rginibre
