#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rginibre/core.hpp"

// Observables over ensembles of configurations: real-axis histograms,
// occupancy-grid estimates of the off-axis support, axis gaps, and
// nearest-neighbor gap statistics on the axis.

namespace rginibre {

struct HistogramBin {
    double left = 0.0;
    double right = 0.0;
    double density = 0.0;
};

// density of real coordinates, normalized so the integral equals the mean
// on-axis mass fraction k/n of the ensemble; empty when no reals exist
inline std::vector<HistogramBin> real_histogram(const std::vector<SpectralConfiguration>& ensemble,
                                                int bins) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    if (bins < 1) throw std::invalid_argument("need at least one bin");
    const int n = ensemble.front().n();
    std::vector<double> xs;
    for (const SpectralConfiguration& cfg : ensemble) {
        if (cfg.n() != n) throw std::invalid_argument("mixed particle counts in ensemble");
        xs.insert(xs.end(), cfg.reals.begin(), cfg.reals.end());
    }
    if (xs.empty()) return {};

    double lo = *std::min_element(xs.begin(), xs.end());
    double hi = *std::max_element(xs.begin(), xs.end());
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double w = (hi - lo) / bins;
    std::vector<HistogramBin> out(static_cast<std::size_t>(bins));
    for (int b = 0; b < bins; ++b) {
        out[static_cast<std::size_t>(b)].left = lo + b * w;
        out[static_cast<std::size_t>(b)].right = lo + (b + 1) * w;
    }
    const double unit = 1.0 / (static_cast<double>(ensemble.size()) * n * w);
    for (double x : xs) {
        int b = static_cast<int>((x - lo) / w);
        b = std::clamp(b, 0, bins - 1);
        out[static_cast<std::size_t>(b)].density += unit;
    }
    return out;
}

struct SupportEstimate {
    std::vector<Point> boundary_points;  // closed: first equals last
    double area = 0.0;
    double min_y = 0.0;
    double flatness = 0.0;  // interquartile range over mean of interior cell densities
};

namespace detail {

// chain marching-squares segments into loops and return the longest one
inline std::vector<Point> longest_loop(std::vector<std::pair<Point, Point>>& segs) {
    const auto key = [](Point p) {
        return std::pair<long, long>{std::lround(p.x * 1e7), std::lround(p.y * 1e7)};
    };
    std::multimap<std::pair<long, long>, std::size_t> by_start;
    std::vector<char> used(segs.size(), 0);
    for (std::size_t i = 0; i < segs.size(); ++i) by_start.insert({key(segs[i].first), i});

    std::vector<Point> best;
    for (std::size_t i = 0; i < segs.size(); ++i) {
        if (used[i]) continue;
        std::vector<Point> loop{segs[i].first, segs[i].second};
        used[i] = 1;
        while (true) {
            const auto k = key(loop.back());
            auto [it, end] = by_start.equal_range(k);
            std::size_t next = segs.size();
            for (; it != end; ++it)
                if (!used[it->second]) {
                    next = it->second;
                    break;
                }
            if (next == segs.size()) break;
            used[next] = 1;
            loop.push_back(segs[next].second);
            if (key(loop.back()) == key(loop.front())) break;
        }
        if (loop.size() > best.size()) best = std::move(loop);
    }
    if (!best.empty()) best.back() = best.front();  // weld the closure exactly
    return best;
}

inline double shoelace_area(const std::vector<Point>& poly) {
    double a = 0.0;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i)
        a += poly[i].x * poly[i + 1].y - poly[i + 1].x * poly[i].y;
    return 0.5 * std::abs(a);
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * (static_cast<double>(v.size()) - 1.0);
    const std::size_t i = static_cast<std::size_t>(pos);
    if (i + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(i);
    return v[i] * (1.0 - frac) + v[i + 1] * frac;
}

}  // namespace detail

// Support of the off-axis phase in the upper half plane from a
// time-averaged occupancy grid. Cell centers carry the particle density
// (counts per unit area averaged over snapshots); the boundary is the
// marching-squares contour of that field at one particle per default cell
// (density n/9), which keeps the level set independent of the actual cell
// size, so refining the grid only sharpens the contour. The contour is
// clamped to y >= 0: supports reaching the axis close along it.
inline SupportEstimate complex_support(const std::vector<SpectralConfiguration>& ensemble,
                                       double cell = 0.0) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    const int n = ensemble.front().n();
    double x_lo = std::numeric_limits<double>::infinity(), x_hi = -x_lo, y_hi = 0.0;
    std::size_t uppers = 0;
    for (const SpectralConfiguration& cfg : ensemble) {
        if (cfg.n() != n) throw std::invalid_argument("mixed particle counts in ensemble");
        for (const Point& z : cfg.uppers) {
            x_lo = std::min(x_lo, z.x);
            x_hi = std::max(x_hi, z.x);
            y_hi = std::max(y_hi, z.y);
            ++uppers;
        }
    }
    if (uppers == 0) throw std::invalid_argument("no off-axis particles in ensemble");

    const double h = cell > 0.0 ? cell : 3.0 / std::sqrt(static_cast<double>(n));
    const double level = static_cast<double>(n) / 9.0;  // one particle per 3/sqrt(n) cell

    // node lattice of cell centers, padded by one empty ring so every
    // contour closes; the bottom ring sits below the axis and is clamped
    const int nx = static_cast<int>(std::ceil((x_hi - x_lo) / h)) + 5;
    const int ny = static_cast<int>(std::ceil(y_hi / h)) + 5;
    const double x0 = x_lo - 2.5 * h;  // node (i, j) at (x0 + i h + h/2, y0 + j h + h/2)
    const double y0 = -2.0 * h;
    std::vector<double> field(static_cast<std::size_t>(nx * ny), 0.0);
    const double unit = 1.0 / (static_cast<double>(ensemble.size()) * h * h);
    for (const SpectralConfiguration& cfg : ensemble)
        for (const Point& z : cfg.uppers) {
            const int i = static_cast<int>(std::floor((z.x - x0) / h));
            const int j = static_cast<int>(std::floor((z.y - y0) / h));
            if (i >= 0 && i < nx && j >= 0 && j < ny)
                field[static_cast<std::size_t>(j * nx + i)] += unit;
        }
    const auto node_x = [&](int i) { return x0 + (i + 0.5) * h; };
    const auto node_y = [&](int j) { return y0 + (j + 0.5) * h; };
    const auto f = [&](int i, int j) { return field[static_cast<std::size_t>(j * nx + i)]; };

    if (*std::max_element(field.begin(), field.end()) < level)
        throw numerical_error("too few particles per grid cell: no support at this resolution");

    // marching squares on node quartets with linear interpolation
    std::vector<std::pair<Point, Point>> segs;
    const auto cross = [&](double xa, double ya, double va, double xb, double yb,
                           double vb) -> Point {
        const double t = (level - va) / (vb - va);
        return {xa + t * (xb - xa), std::max(0.0, ya + t * (yb - ya))};
    };
    for (int j = 0; j + 1 < ny; ++j)
        for (int i = 0; i + 1 < nx; ++i) {
            const double v00 = f(i, j), v10 = f(i + 1, j), v01 = f(i, j + 1),
                         v11 = f(i + 1, j + 1);
            const int c = (v00 >= level ? 1 : 0) | (v10 >= level ? 2 : 0) |
                          (v11 >= level ? 4 : 0) | (v01 >= level ? 8 : 0);
            if (c == 0 || c == 15) continue;
            const double xl = node_x(i), xr = node_x(i + 1), yb = node_y(j), yt = node_y(j + 1);
            const Point bottom = cross(xl, yb, v00, xr, yb, v10);
            const Point top = cross(xl, yt, v01, xr, yt, v11);
            const Point left = cross(xl, yb, v00, xl, yt, v01);
            const Point right = cross(xr, yb, v10, xr, yt, v11);
            // segments oriented with the occupied side on the left
            switch (c) {
                case 1: segs.push_back({left, bottom}); break;
                case 2: segs.push_back({bottom, right}); break;
                case 3: segs.push_back({left, right}); break;
                case 4: segs.push_back({right, top}); break;
                case 5:
                    segs.push_back({left, top});
                    segs.push_back({right, bottom});
                    break;
                case 6: segs.push_back({bottom, top}); break;
                case 7: segs.push_back({left, top}); break;
                case 8: segs.push_back({top, left}); break;
                case 9: segs.push_back({top, bottom}); break;
                case 10:
                    segs.push_back({bottom, left});
                    segs.push_back({top, right});
                    break;
                case 11: segs.push_back({top, right}); break;
                case 12: segs.push_back({right, left}); break;
                case 13: segs.push_back({right, bottom}); break;
                case 14: segs.push_back({bottom, left}); break;
                default: break;
            }
        }

    SupportEstimate est;
    est.boundary_points = detail::longest_loop(segs);
    est.area = detail::shoelace_area(est.boundary_points);
    est.min_y = std::numeric_limits<double>::infinity();
    for (const Point& p : est.boundary_points) est.min_y = std::min(est.min_y, p.y);
    if (est.boundary_points.empty()) est.min_y = 0.0;

    // flatness over interior nodes: those at least 2 cells from any
    // below-level node, compared by interquartile range over mean
    std::vector<double> interior;
    for (int j = 0; j < ny; ++j)
        for (int i = 0; i < nx; ++i) {
            if (f(i, j) < level) continue;
            bool deep = true;
            for (int dj = -2; dj <= 2 && deep; ++dj)
                for (int di = -2; di <= 2 && deep; ++di) {
                    const int ii = i + di, jj = j + dj;
                    if (ii < 0 || ii >= nx || jj < 0 || jj >= ny || f(ii, jj) < level)
                        deep = false;
                }
            if (deep) interior.push_back(f(i, j));
        }
    if (interior.empty())
        throw numerical_error("no interior cells at this resolution: grid too fine or ensemble too thin");
    double mean = 0.0;
    for (double v : interior) mean += v;
    mean /= static_cast<double>(interior.size());
    est.flatness = (detail::quantile(interior, 0.75) - detail::quantile(interior, 0.25)) / mean;
    return est;
}

// mean over the ensemble of each snapshot's smallest off-axis height
inline double axis_gap(const std::vector<SpectralConfiguration>& ensemble) {
    if (ensemble.empty()) throw std::invalid_argument("empty ensemble");
    NeumaierSum s;
    long counted = 0;
    for (const SpectralConfiguration& cfg : ensemble) {
        if (cfg.uppers.empty()) continue;
        double m = std::numeric_limits<double>::infinity();
        for (const Point& z : cfg.uppers) m = std::min(m, z.y);
        s.add(m);
        ++counted;
    }
    if (counted == 0) throw std::invalid_argument("no off-axis particles in ensemble");
    return s.value() / static_cast<double>(counted);
}

struct GapStatistics {
    std::vector<double> gaps;  // nearest-neighbor differences of sorted reals
    double mean = 0.0;
    double cv = 0.0;  // standard deviation over mean
};

inline GapStatistics gap_statistics(const SpectralConfiguration& config) {
    if (config.k() < 3) throw std::invalid_argument("need at least 3 real particles");
    std::vector<double> xs = config.reals;
    std::sort(xs.begin(), xs.end());
    GapStatistics g;
    g.gaps.reserve(xs.size() - 1);
    for (std::size_t i = 0; i + 1 < xs.size(); ++i) g.gaps.push_back(xs[i + 1] - xs[i]);
    for (double d : g.gaps) g.mean += d;
    g.mean /= static_cast<double>(g.gaps.size());
    double var = 0.0;
    for (double d : g.gaps) var += sq(d - g.mean);
    var /= static_cast<double>(g.gaps.size());
    g.cv = g.mean > 0.0 ? std::sqrt(var) / g.mean : 0.0;
    return g;
}

}  // namespace rginibre
