#include <algorithm>
#include <cmath>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "rginibre/erfc.hpp"
#include "rginibre/matrix_oracle.hpp"
#include "rginibre/mcmc.hpp"

using namespace rginibre;

namespace {

SpectralConfiguration two_reals(double a, double b) {
    SpectralConfiguration cfg;
    cfg.reals = {a, b};
    return cfg;
}

// sup distance between the empirical CDF of samples and a reference CDF
double ks_to_cdf(std::vector<double> samples, double (*cdf)(double)) {
    std::sort(samples.begin(), samples.end());
    const double m = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = cdf(samples[i]);
        d = std::max(d, std::abs(f - static_cast<double>(i) / m));
        d = std::max(d, std::abs(f - static_cast<double>(i + 1) / m));
    }
    return d;
}

// two-sample sup distance between empirical CDFs
double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t ia = 0, ib = 0;
    double d = 0.0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] <= b[ib])
            ++ia;
        else
            ++ib;
        d = std::max(d, std::abs(static_cast<double>(ia) / na - static_cast<double>(ib) / nb));
    }
    return d;
}

}  // namespace

TEST_CASE("log target matches the closed form for two symmetric reals") {
    // density for two reals is |x1 - x2| exp(-(x1^2 + x2^2)) at n = 2, so at
    // (-a, a) the log is log(2a) - 2a^2
    for (double a : {0.2, 0.5, 1.0, 1.7}) {
        const double lt = log_target_density(two_reals(-a, a), 2, 2);
        REQUIRE_THAT(lt, Catch::Matchers::WithinAbs(std::log(2.0 * a) - 2.0 * a * a, 1e-12));
    }
}

TEST_CASE("log target is exchangeable and mirror symmetric") {
    Rng rng(7, 0);
    SpectralConfiguration cfg = initial_configuration(12, 6, rng);
    const double base = log_target_density(cfg, 12, 6);

    SpectralConfiguration perm = cfg;
    std::swap(perm.reals[0], perm.reals[5]);
    std::swap(perm.uppers[0], perm.uppers[2]);
    REQUIRE_THAT(log_target_density(perm, 12, 6), Catch::Matchers::WithinAbs(base, 1e-10));

    SpectralConfiguration mirror = cfg;
    for (double& x : mirror.reals) x = -x;
    for (Point& z : mirror.uppers) z.x = -z.x;
    REQUIRE_THAT(log_target_density(mirror, 12, 6), Catch::Matchers::WithinAbs(base, 1e-10));
}

TEST_CASE("log target rejects mismatched shape and reports collisions as -inf") {
    REQUIRE_THROWS_AS(log_target_density(two_reals(-1.0, 1.0), 4, 2), std::invalid_argument);
    REQUIRE_THROWS_AS(log_target_density(two_reals(-1.0, 1.0), 2, 0), std::invalid_argument);
    const double lt = log_target_density(two_reals(0.3, 0.3 + 1e-12), 2, 2);
    REQUIRE(std::isinf(lt));
    REQUIRE(lt < 0.0);
}

TEST_CASE("single move deltas agree with full recomputation") {
    Rng rng(11, 0);
    SpectralConfiguration cfg = initial_configuration(14, 6, rng);
    const double full_old = log_target_density(cfg, 14, 6);

    for (int rep = 0; rep < 20; ++rep) {
        SpectralConfiguration moved = cfg;
        double delta;
        if (rep % 2 == 0) {
            const int i = static_cast<int>(rng.u64() % 6);
            const double nx = moved.reals[i] + 0.2 * rng.normal();
            delta = detail::real_row_weight(cfg, i, nx) -
                    detail::real_row_weight(cfg, i, cfg.reals[i]);
            moved.reals[i] = nx;
        } else {
            const int m = static_cast<int>(rng.u64() % 4);
            Point nz{moved.uppers[m].x + 0.2 * rng.normal(),
                     std::abs(moved.uppers[m].y + 0.2 * rng.normal())};
            delta = detail::upper_row_weight(cfg, m, nz) -
                    detail::upper_row_weight(cfg, m, cfg.uppers[m]);
            moved.uppers[m] = nz;
        }
        const double full_delta = log_target_density(moved, 14, 6) - full_old;
        REQUIRE_THAT(delta, Catch::Matchers::WithinAbs(full_delta, 1e-9));
    }
}

TEST_CASE("incrementally tracked log target stays consistent over a long run") {
    Rng rng(3, 0);
    ChainState state;
    state.config = initial_configuration(10, 4, rng);
    state.log_target = log_target_density(state.config, 10, 4);
    ProposalScales scales{0.15, 0.15};
    double worst = 0.0;
    for (int step = 1; step <= 5000; ++step) {
        mh_step_inplace(state, scales, rng);
        if (step % 500 == 0)
            worst = std::max(worst,
                             std::abs(state.log_target - log_target_density(state.config, 10, 4)));
    }
    REQUIRE(worst < 1e-9);
}

TEST_CASE("mh_step returns a new state and leaves the input untouched") {
    Rng rng(5, 0);
    ChainState state;
    state.config = initial_configuration(6, 2, rng);
    state.log_target = log_target_density(state.config, 6, 2);
    const ChainState before = state;
    const ChainState after = mh_step(state, ProposalScales{0.2, 0.2}, rng);
    REQUIRE(state.config.reals == before.config.reals);
    REQUIRE(state.proposed_real == before.proposed_real);
    REQUIRE(after.proposed_real + after.proposed_upper ==
            before.proposed_real + before.proposed_upper + 1);
}

TEST_CASE("zero-width proposals are always accepted") {
    Rng rng(9, 0);
    ChainState state;
    state.config = initial_configuration(8, 4, rng);
    state.log_target = log_target_density(state.config, 8, 4);
    for (int i = 0; i < 50; ++i) mh_step_inplace(state, ProposalScales{0.0, 0.0}, rng);
    REQUIRE(state.accepted_real == state.proposed_real);
    REQUIRE(state.accepted_upper == state.proposed_upper);
}

TEST_CASE("chain run validates arguments") {
    REQUIRE_THROWS_AS(sample_chain(4, 3, 100, 0, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_chain(4, 2, 100, 0, 0, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_chain(4, 2, 100, 200, 1, 1), std::invalid_argument);
    REQUIRE_THROWS_AS(sample_chain(0, 0, 100, 0, 1, 1), std::invalid_argument);
}

TEST_CASE("thinning equal to the step budget yields at most one sample") {
    REQUIRE(sample_chain(4, 2, 1000, 0, 1000, 1).size() == 1);
    REQUIRE(sample_chain(4, 2, 999, 0, 1000, 1).empty());
    REQUIRE(sample_chain(4, 2, 1000, 1000, 1, 1).empty());
}

TEST_CASE("samples preserve the particle counts and stay off the axis") {
    const auto samples = sample_chain(9, 3, 20000, 5000, 100, 2);
    REQUIRE(samples.size() == 150);
    for (const SpectralConfiguration& cfg : samples) {
        REQUIRE(cfg.k() == 3);
        REQUIRE(cfg.l() == 3);
        for (const Point& z : cfg.uppers) REQUIRE(z.y > 0.0);
    }
}

TEST_CASE("chains are reproducible by seed") {
    const auto a = sample_chain(6, 2, 5000, 1000, 50, 42);
    const auto b = sample_chain(6, 2, 5000, 1000, 50, 42);
    const auto c = sample_chain(6, 2, 5000, 1000, 50, 43);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        REQUIRE(a[i].reals == b[i].reals);
        for (std::size_t m = 0; m < a[i].uppers.size(); ++m) {
            REQUIRE(a[i].uppers[m].x == b[i].uppers[m].x);
            REQUIRE(a[i].uppers[m].y == b[i].uppers[m].y);
        }
    }
    REQUIRE(a.back().reals != c.back().reals);
}

TEST_CASE("burn-in tuning lands near the target acceptance rate") {
    ChainParams p;
    p.n = 10;
    p.k = 4;
    p.steps = 60000;
    p.burn_in = 30000;
    p.thinning = 100;
    p.seed = 8;
    const ChainRun run = run_chain(p);
    REQUIRE(run.max_log_target_drift < 1e-7);
    REQUIRE(run.final_state.acceptance_real() > 0.2);
    REQUIRE(run.final_state.acceptance_real() < 0.6);
    REQUIRE(run.final_state.acceptance_upper() > 0.2);
    REQUIRE(run.final_state.acceptance_upper() < 0.6);
}

TEST_CASE("two-real chain reproduces the Gaussian law of the symmetric coordinate") {
    // for two reals the density |x1 - x2| exp(-(x1^2 + x2^2)) separates in
    // rotated coordinates: s = (x1 + x2)/sqrt(2) is exactly N(0, 1/2), with
    // CDF erfc(-s)/2
    Rng rng(17, 0);
    ChainState state;
    state.config = two_reals(-0.5, 0.5);
    state.log_target = log_target_density(state.config, 2, 2);
    const ProposalScales scales{0.7, 0.7};

    const long steps = 1000000, burn = 10000;
    std::vector<double> s_thinned;
    s_thinned.reserve(static_cast<std::size_t>((steps - burn) / 10));

    // three-cell net-flux balance: in stationarity a reversible chain moves
    // between any two cells equally often in both directions
    const auto cell = [](double s) { return s < -0.3 ? 0 : (s <= 0.3 ? 1 : 2); };
    long flux[3][3] = {};
    int prev_cell = -1;

    for (long step = 1; step <= steps; ++step) {
        mh_step_inplace(state, scales, rng);
        const double s = (state.config.reals[0] + state.config.reals[1]) / std::sqrt(2.0);
        if (step > burn) {
            const int c = cell(s);
            if (prev_cell >= 0) ++flux[prev_cell][c];
            prev_cell = c;
            if ((step - burn) % 10 == 0) s_thinned.push_back(s);
        }
    }

    const double d =
        ks_to_cdf(std::move(s_thinned), [](double s) { return 0.5 * rginibre::erfc(-s); });
    REQUIRE(d < 0.03);

    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j) {
            const double total = static_cast<double>(flux[i][j] + flux[j][i]);
            REQUIRE(std::abs(static_cast<double>(flux[i][j] - flux[j][i])) <=
                    3.0 * std::sqrt(total) + 1.0);
        }
}

TEST_CASE("chain marginals agree with the rejection-sampling oracle at n = 4, k = 2") {
    ChainParams p;
    p.n = 4;
    p.k = 2;
    p.steps = 620000;
    p.burn_in = 20000;
    p.thinning = 20;
    p.seed = 23;
    const ChainRun run = run_chain(p);

    Rng rng(29, 0);
    const auto oracle = conditional_ensemble(4, 2, 60000, rng, 4);
    REQUIRE(oracle.size() > 30000);

    std::vector<double> chain_reals, chain_mods, oracle_reals, oracle_mods;
    for (const SpectralConfiguration& cfg : run.samples) {
        for (double x : cfg.reals) chain_reals.push_back(x);
        for (const Point& z : cfg.uppers) chain_mods.push_back(std::hypot(z.x, z.y));
    }
    for (const Spectrum& spec : oracle) {
        const double tol = 1e-8;
        for (const Point& ev : spec.eigenvalues) {
            if (std::abs(ev.y) <= tol)
                oracle_reals.push_back(ev.x);
            else if (ev.y > 0.0)
                oracle_mods.push_back(std::hypot(ev.x, ev.y));
        }
    }
    REQUIRE(chain_reals.size() == 2 * run.samples.size());

    REQUIRE(ks_two_sample(std::move(chain_reals), std::move(oracle_reals)) < 0.05);
    REQUIRE(ks_two_sample(std::move(chain_mods), std::move(oracle_mods)) < 0.05);
}
