// Command-line driver: gas relaxations, MCMC sampling, matrix-oracle
// experiments, rate-functional scans, the y* solver, and offline analysis of
// previously written sample files.
//
// Every run creates one directory containing manifest.json (written before
// any data) plus typed CSV / JSON-lines artifacts. With a fixed seed and
// --threads 1 the data files are byte-identical across reruns; the only
// run-varying manifest field is duration_seconds. Exit codes: 0 success,
// 2 usage error, 3 numerical failure; nonzero exits print a JSON error
// record to stderr and, when the run directory exists, write error.json.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rginibre/io.hpp"

namespace fs = std::filesystem;
using namespace rginibre;

namespace {

constexpr const char* kOutRootEnv = "RGINIBRE_OUT";

// A run directory with its manifest. The manifest hits the disk before any
// data file; finish() rewrites it with the measured wall-clock duration.
class Run {
  public:
    Run(std::string command, fs::path dir, std::uint64_t seed)
        : dir_(std::move(dir)), t0_(std::chrono::steady_clock::now()) {
        manifest_.command = std::move(command);
        manifest_.seed = seed;
    }

    void param(const std::string& key, const std::string& value) {
        manifest_.parameters[key] = value;
    }
    void param(const std::string& key, double v) { param(key, format_double(v)); }
    void param(const std::string& key, long long v) { param(key, std::to_string(v)); }

    const fs::path& dir() const { return dir_; }

    void open(const std::vector<std::string>& planned_outputs) {
        manifest_.outputs = planned_outputs;
        fs::create_directories(dir_);
        write_manifest();
    }

    std::ofstream data_file(const std::string& name) {
        std::ofstream os(dir_ / name);
        if (!os) throw std::runtime_error("cannot open " + (dir_ / name).string());
        if (std::find(manifest_.outputs.begin(), manifest_.outputs.end(), name) ==
            manifest_.outputs.end())
            manifest_.outputs.push_back(name);
        return os;
    }

    void drop_output(const std::string& name) {
        std::erase(manifest_.outputs, name);
        std::error_code ec;
        fs::remove(dir_ / name, ec);
    }

    void finish() {
        manifest_.duration_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
        write_manifest();
    }

  private:
    void write_manifest() {
        std::ofstream os(dir_ / "manifest.json");
        os << to_json(manifest_).dump(2) << '\n';
    }

    fs::path dir_;
    RunManifest manifest_;
    std::chrono::steady_clock::time_point t0_;
};

fs::path resolve_out(const std::string& out_flag, const std::string& default_name) {
    if (!out_flag.empty()) return fs::path(out_flag);
    const char* root = std::getenv(kOutRootEnv);
    return fs::path(root ? root : ".") / default_name;
}

int emit_error(int code, const std::string& type, const std::string& message,
               const std::optional<fs::path>& dir) {
    json record;
    record["error"] = {{"code", code}, {"type", type}, {"message", message}};
    std::cerr << record.dump() << '\n';
    if (dir && fs::exists(*dir)) {
        std::ofstream os(*dir / "error.json");
        os << record.dump(2) << '\n';
    }
    return code;
}

// ---------------------------------------------------------------------------
// shared analysis block: histogram + support artifacts for an ensemble of
// configurations. Best-effort: analyses that this ensemble cannot support
// (no on-axis particles, no off-axis particles, grid too fine for the data)
// are skipped and the reason recorded, because the producing simulation
// already succeeded.

json analyze_ensemble(Run& run, const std::vector<SpectralConfiguration>& ensemble, int bins,
                      double cell, bool strict) {
    json summary;
    const int n = ensemble.front().n();
    const int k = ensemble.front().k();
    summary["n"] = n;
    summary["k"] = k;
    summary["configurations"] = ensemble.size();
    summary["on_axis_fraction"] = static_cast<double>(k) / n;

    if (k > 0) {
        auto os = run.data_file("histogram.csv");
        write_histogram_csv(os, real_histogram(ensemble, bins));
        if (k >= 3) {
            double cv = 0.0;
            for (const SpectralConfiguration& cfg : ensemble) cv += gap_statistics(cfg).cv;
            summary["mean_gap_cv"] = cv / static_cast<double>(ensemble.size());
        }
    } else {
        summary["histogram_skipped"] = "no on-axis particles";
    }

    if (ensemble.front().l() > 0) {
        summary["axis_gap"] = axis_gap(ensemble);
        try {
            const SupportEstimate est = complex_support(ensemble, cell);
            auto os = run.data_file("boundary.csv");
            write_boundary_csv(os, est.boundary_points);
            summary["support_area"] = est.area;
            summary["support_min_y"] = est.min_y;
            summary["support_flatness"] = est.flatness;
        } catch (const numerical_error& e) {
            if (strict) throw;
            summary["support_skipped"] = e.what();
        }
    } else {
        summary["support_skipped"] = "no off-axis particles";
    }
    return summary;
}

// ---------------------------------------------------------------------------

int cmd_gas(int n, double alpha, std::optional<int> k_flag, const std::string& mode_name,
            long steps, double dt, double sigma, std::uint64_t seed, int threads,
            const std::string& out) {
    const int k = k_flag ? *k_flag : round_to_parity(alpha, n);

    GasParams gp;
    gp.n = n;
    gp.k = k;
    gp.dt = dt;
    gp.sigma = sigma;
    gp.steps = steps;
    gp.seed = seed;
    gp.threads = threads;
    GasMode mode;
    if (mode_name == "deterministic") {
        mode = GasMode::deterministic;
        gp.sigma = 0.0;
    } else if (mode_name == "stochastic") {
        mode = GasMode::stochastic;
    } else {
        throw std::invalid_argument("--mode must be deterministic or stochastic");
    }
    validate_params(gp);

    Run run("gas", resolve_out(out, "gas_seed" + std::to_string(seed)), seed);
    run.param("n", static_cast<long long>(n));
    run.param("alpha", alpha);
    run.param("k", static_cast<long long>(k));
    run.param("mode", mode_name);
    run.param("steps", static_cast<long long>(steps));
    run.param("dt", dt);
    run.param("sigma", gp.sigma);
    run.param("threads", static_cast<long long>(threads));
    run.open({"energies.csv", "trajectory.jsonl", "final_config.json", "summary.json"});

    try {
        Rng init_rng(seed, 1);  // stream 1: the noise inside evolve uses stream 0
        const SpectralConfiguration start = initial_configuration(n, k, init_rng);
        const Trajectory traj = evolve(start, gp, mode);

        {
            auto os = run.data_file("energies.csv");
            write_energies_csv(os, traj);
        }
        {
            auto os = run.data_file("trajectory.jsonl");
            write_trajectory_jsonl(os, traj);
        }
        {
            auto os = run.data_file("final_config.json");
            os << to_json(traj.snapshots.back()).dump(2) << '\n';
        }

        // analysis over the equilibrated tail: final 20% of the snapshots
        const std::size_t total = traj.snapshots.size();
        const std::size_t tail = std::max<std::size_t>(1, total / 5);
        const std::vector<SpectralConfiguration> ensemble(traj.snapshots.end() - tail,
                                                          traj.snapshots.end());
        json summary = analyze_ensemble(run, ensemble, 40, 0.0, /*strict=*/false);
        summary["final_energy"] = traj.energies.back();
        summary["final_min_separation"] = traj.min_separations.back();
        summary["guard_retries"] = traj.guard_retries;
        summary["time_reached"] = traj.times.back();
        {
            auto os = run.data_file("summary.json");
            os << summary.dump(2) << '\n';
        }
        run.finish();
        return 0;
    } catch (const numerical_error& e) {
        return emit_error(3, "numerical", e.what(), run.dir());
    }
}

int cmd_mcmc(int n, std::optional<int> k_flag, std::optional<double> alpha_flag, long steps,
             std::optional<long> burn_in_flag, long thinning, std::uint64_t seed,
             const std::string& out) {
    const int k = k_flag ? *k_flag : round_to_parity(alpha_flag.value_or(0.5), n);

    ChainParams p;
    p.n = n;
    p.k = k;
    p.steps = steps;
    p.burn_in = burn_in_flag ? *burn_in_flag : steps / 5;
    p.thinning = thinning;
    p.seed = seed;
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (k < 0 || k > n || (n - k) % 2 != 0)
        throw std::invalid_argument("k must lie in [0, n] with the parity of n");
    if (steps < 1) throw std::invalid_argument("steps must be positive");
    if (p.burn_in < 0 || p.burn_in >= steps)
        throw std::invalid_argument("burn-in must lie in [0, steps)");
    if (thinning < 1) throw std::invalid_argument("thinning must be positive");

    Run run("mcmc", resolve_out(out, "mcmc_seed" + std::to_string(seed)), seed);
    run.param("n", static_cast<long long>(n));
    run.param("k", static_cast<long long>(k));
    run.param("steps", static_cast<long long>(steps));
    run.param("burn_in", static_cast<long long>(p.burn_in));
    run.param("thinning", static_cast<long long>(thinning));
    run.open({"samples.jsonl", "summary.csv", "summary.json"});

    try {
        const ChainRun chain = run_chain(p);
        {
            auto os = run.data_file("samples.jsonl");
            write_samples_jsonl(os, chain.samples);
        }
        {
            auto os = run.data_file("summary.csv");
            write_chain_summary_csv(os, chain, 0);
        }
        json summary;
        summary["samples"] = chain.samples.size();
        summary["acceptance_real"] = chain.final_state.acceptance_real();
        summary["acceptance_upper"] = chain.final_state.acceptance_upper();
        summary["tuned_real_scale"] = chain.tuned_scales.real_scale;
        summary["tuned_upper_scale"] = chain.tuned_scales.upper_scale;
        summary["max_log_target_drift"] = chain.max_log_target_drift;
        summary["on_axis_fraction"] = static_cast<double>(k) / n;
        if (!chain.samples.empty() && chain.samples.front().l() > 0)
            summary["axis_gap"] = axis_gap(chain.samples);
        {
            auto os = run.data_file("summary.json");
            os << summary.dump(2) << '\n';
        }
        run.finish();
        return 0;
    } catch (const numerical_error& e) {
        return emit_error(3, "numerical", e.what(), run.dir());
    }
}

int cmd_oracle(int n, long trials, std::optional<int> k_flag, std::uint64_t seed, int threads,
               const std::string& out) {
    if (n < 1) throw std::invalid_argument("n must be positive");
    if (trials < 1) throw std::invalid_argument("trials must be positive");
    if (k_flag && (*k_flag < 0 || *k_flag > n || (n - *k_flag) % 2 != 0))
        throw std::invalid_argument("k must lie in [0, n] with the parity of n");

    Run run("oracle", resolve_out(out, "oracle_seed" + std::to_string(seed)), seed);
    run.param("n", static_cast<long long>(n));
    run.param("trials", static_cast<long long>(trials));
    run.param("threads", static_cast<long long>(threads));
    if (k_flag) run.param("k", static_cast<long long>(*k_flag));
    std::vector<std::string> planned = {"pmf.csv"};
    if (k_flag) planned.push_back("spectra.jsonl");
    run.open(planned);

    try {
        Rng rng(seed, 0);
        const RealCountPMF pmf = estimate_pnk(n, trials, rng, threads);
        {
            auto os = run.data_file("pmf.csv");
            write_pmf_csv(os, pmf);
        }
        if (k_flag) {
            Rng ens_rng(seed, 1);
            const auto spectra = conditional_ensemble(n, *k_flag, trials, ens_rng, threads);
            if (spectra.empty())
                return emit_error(3, "numerical",
                                  "no spectra with the requested real count in " +
                                      std::to_string(trials) + " trials",
                                  run.dir());
            auto os = run.data_file("spectra.jsonl");
            write_spectra_jsonl(os, spectra);
        }
        run.finish();
        return 0;
    } catch (const numerical_error& e) {
        return emit_error(3, "numerical", e.what(), run.dir());
    }
}

int cmd_rate(std::vector<double> alphas, int n_particles, long steps, double dt,
             std::uint64_t seed, int threads, const std::string& out) {
    if (alphas.empty()) alphas = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (double a : alphas)
        if (a < 0.0 || a > 1.0) throw std::invalid_argument("alpha must lie in [0, 1]");

    RelaxParams rp;
    rp.steps = steps;
    rp.dt = dt;
    rp.seed = seed;
    rp.threads = threads;

    Run run("rate", resolve_out(out, "rate_seed" + std::to_string(seed)), seed);
    {
        std::string list;
        for (double a : alphas) list += (list.empty() ? "" : ",") + format_double(a);
        run.param("alpha", list);
    }
    run.param("n", static_cast<long long>(n_particles));
    run.param("steps", static_cast<long long>(steps));
    run.param("dt", dt);
    run.param("threads", static_cast<long long>(threads));
    run.open({"rate.csv"});

    try {
        std::vector<RateReport> reports;
        for (double a : alphas) reports.push_back(minimum_estimate(a, n_particles, rp));
        auto os = run.data_file("rate.csv");
        write_rate_csv(os, reports);
        run.finish();
        return 0;
    } catch (const numerical_error& e) {
        return emit_error(3, "numerical", e.what(), run.dir());
    }
}

int cmd_ystar(const std::string& out) {
    Run run("ystar", resolve_out(out, "ystar"), 0);
    run.open({"ystar.json"});
    const double y = solve_ystar();
    {
        auto os = run.data_file("ystar.json");
        json j;
        j["ystar"] = y;
        os << j.dump(2) << '\n';
    }
    run.finish();
    std::cout << format_double(y) << '\n';
    return 0;
}

int cmd_analyze(const std::string& input, int bins, double cell, const std::string& out) {
    std::ifstream is(input);
    if (!is) throw std::invalid_argument("cannot read input file: " + input);

    // accept either a samples stream (bare configurations) or a trajectory
    // stream ({"step","time","config"} lines); for a trajectory only the
    // final 20% of the snapshots — the equilibrated tail — is analyzed
    std::vector<SpectralConfiguration> ensemble;
    bool is_trajectory = false;
    for (std::string line; std::getline(is, line);) {
        if (line.empty()) continue;
        const json j = json::parse(line);
        if (j.contains("config")) {
            is_trajectory = true;
            ensemble.push_back(config_from_json(j.at("config")));
        } else {
            ensemble.push_back(config_from_json(j));
        }
    }
    if (ensemble.empty()) throw std::invalid_argument("input has no configurations: " + input);
    if (is_trajectory) {
        const std::size_t tail = std::max<std::size_t>(1, ensemble.size() / 5);
        ensemble.erase(ensemble.begin(), ensemble.end() - tail);
    }

    Run run("analyze", resolve_out(out, "analyze"), 0);
    run.param("input", input);
    run.param("bins", static_cast<long long>(bins));
    run.param("cell", cell);
    run.open({"summary.json"});

    try {
        const json summary = analyze_ensemble(run, ensemble, bins, cell, /*strict=*/true);
        auto os = run.data_file("summary.json");
        os << summary.dump(2) << '\n';
        run.finish();
        return 0;
    } catch (const numerical_error& e) {
        return emit_error(3, "numerical", e.what(), run.dir());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"two-phase log-gas simulator and analyzer for conditioned real spectra"};
    app.require_subcommand(1);

    // shared option storage
    int n = 0;
    double alpha = 0.5;
    std::optional<int> k_flag;
    std::optional<double> alpha_flag;
    std::optional<long> burn_in_flag;
    long steps = 10000, thinning = 1, trials = 100000;
    double dt = 1e-3, sigma = std::sqrt(2.0), cell = 0.0;
    std::uint64_t seed = 1;
    int threads = 1, bins = 40;
    std::string out, mode = "stochastic", input;
    std::vector<double> alpha_list;

    CLI::App* gas = app.add_subcommand("gas", "relax or equilibrate the particle gas");
    gas->add_option("--n", n, "total particle count")->required();
    gas->add_option("--alpha", alpha, "target on-axis fraction in [0, 1]");
    gas->add_option("--k", k_flag, "on-axis count override (default: alpha rounded to parity)");
    gas->add_option("--mode", mode, "deterministic | stochastic");
    gas->add_option("--steps", steps, "time steps");
    gas->add_option("--dt", dt, "step-size cap");
    gas->add_option("--sigma", sigma, "noise amplitude (stochastic mode)");
    gas->add_option("--seed", seed, "RNG seed");
    gas->add_option("--threads", threads, "worker threads");
    gas->add_option("--out", out, "run directory (default: $RGINIBRE_OUT/gas_seed<seed>)");

    CLI::App* mcmc = app.add_subcommand("mcmc", "sample conditioned spectra by Markov chain");
    mcmc->add_option("--n", n, "total particle count")->required();
    mcmc->add_option("--k", k_flag, "on-axis count (parity of n)");
    mcmc->add_option("--alpha", alpha_flag, "on-axis fraction, used when --k is absent");
    mcmc->add_option("--steps", steps, "chain length");
    mcmc->add_option("--burn-in", burn_in_flag, "steps discarded before sampling (default steps/5)");
    mcmc->add_option("--thin", thinning, "keep every thin-th configuration");
    mcmc->add_option("--seed", seed, "RNG seed");
    mcmc->add_option("--out", out, "run directory (default: $RGINIBRE_OUT/mcmc_seed<seed>)");

    CLI::App* oracle = app.add_subcommand("oracle", "dense-matrix sampling of real-count statistics");
    oracle->add_option("--n", n, "matrix dimension")->required();
    oracle->add_option("--trials", trials, "number of sampled matrices");
    oracle->add_option("--k", k_flag, "also keep spectra conditioned on this real count");
    oracle->add_option("--seed", seed, "RNG seed");
    oracle->add_option("--threads", threads, "worker threads");
    oracle->add_option("--out", out, "run directory (default: $RGINIBRE_OUT/oracle_seed<seed>)");

    CLI::App* rate = app.add_subcommand("rate", "rate-functional minima across on-axis fractions");
    rate->add_option("--alpha", alpha_list, "fractions to scan (default 0 0.25 0.5 0.75 1)");
    rate->add_option("--n", n, "particles per relaxation")->required();
    rate->add_option("--steps", steps, "relaxation steps")->default_val(20000L);
    rate->add_option("--dt", dt, "step-size cap");
    rate->add_option("--seed", seed, "RNG seed");
    rate->add_option("--threads", threads, "worker threads");
    rate->add_option("--out", out, "run directory (default: $RGINIBRE_OUT/rate_seed<seed>)");

    CLI::App* ystar = app.add_subcommand("ystar", "solve the lowest-point equation of the axis gap");
    ystar->add_option("--out", out, "run directory (default: $RGINIBRE_OUT/ystar)");

    CLI::App* analyze = app.add_subcommand("analyze", "histogram/support/gap analysis of a sample file");
    analyze->add_option("--input", input, "samples.jsonl or trajectory.jsonl")->required();
    analyze->add_option("--bins", bins, "histogram bin count");
    analyze->add_option("--cell", cell, "support grid cell size (0: automatic)");
    analyze->add_option("--out", out, "run directory (default: $RGINIBRE_OUT/analyze)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::ostringstream msg;
        msg << e.what();
        return emit_error(2, "usage", msg.str(), std::nullopt);
    }

    try {
        if (gas->parsed())
            return cmd_gas(n, alpha, k_flag, mode, steps, dt, sigma, seed, threads, out);
        if (mcmc->parsed())
            return cmd_mcmc(n, k_flag, alpha_flag, steps, burn_in_flag, thinning, seed, out);
        if (oracle->parsed()) return cmd_oracle(n, trials, k_flag, seed, threads, out);
        if (rate->parsed()) return cmd_rate(alpha_list, n, steps, dt, seed, threads, out);
        if (ystar->parsed()) return cmd_ystar(out);
        if (analyze->parsed()) return cmd_analyze(input, bins, cell, out);
    } catch (const std::invalid_argument& e) {
        return emit_error(2, "usage", e.what(), std::nullopt);
    } catch (const std::exception& e) {
        return emit_error(3, "numerical", e.what(), std::nullopt);
    }
    return 2;
}
