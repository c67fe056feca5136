#pragma once

// Serialization for every artifact the tools emit: JSON for configurations
// and run manifests, CSV for tabular data, JSON-lines for streams. All
// floating-point output uses shortest round-trip formatting so that files
// written with a fixed seed are byte-identical across runs and parse back to
// exactly the same doubles.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rginibre/analysis.hpp"
#include "rginibre/core.hpp"
#include "rginibre/gasdyn.hpp"
#include "rginibre/matrix_oracle.hpp"
#include "rginibre/mcmc.hpp"
#include "rginibre/ratefn.hpp"

namespace rginibre {

using json = nlohmann::json;

// shortest decimal string that parses back to exactly `v`
inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

// ---------------------------------------------------------------------------
// configurations: {"reals":[...],"uppers":[[x,y],...]}

inline json to_json(const SpectralConfiguration& cfg) {
    json j;
    j["reals"] = cfg.reals;
    json ups = json::array();
    for (const Point& z : cfg.uppers) ups.push_back(json::array({z.x, z.y}));
    j["uppers"] = std::move(ups);
    return j;
}

inline SpectralConfiguration config_from_json(const json& j) {
    if (!j.is_object() || !j.contains("reals") || !j.contains("uppers"))
        throw std::invalid_argument("configuration JSON needs \"reals\" and \"uppers\"");
    std::vector<double> reals = j.at("reals").get<std::vector<double>>();
    std::vector<Point> uppers;
    for (const json& u : j.at("uppers")) {
        if (!u.is_array() || u.size() != 2)
            throw std::invalid_argument("each upper point must be a [x, y] pair");
        uppers.push_back({u[0].get<double>(), u[1].get<double>()});
    }
    return make_configuration(std::move(reals), std::move(uppers));
}

// ---------------------------------------------------------------------------
// run manifests: written before any data file of a run

struct RunManifest {
    std::string command;
    std::map<std::string, std::string> parameters;
    std::uint64_t seed = 0;
    std::vector<std::string> outputs;  // file names relative to the run directory
    double duration_seconds = 0.0;     // the one field that varies between reruns
};

inline json to_json(const RunManifest& m) {
    json j;
    j["command"] = m.command;
    j["parameters"] = m.parameters;
    j["seed"] = m.seed;
    j["outputs"] = m.outputs;
    j["duration_seconds"] = m.duration_seconds;
    return j;
}

inline RunManifest manifest_from_json(const json& j) {
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.parameters = j.at("parameters").get<std::map<std::string, std::string>>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    m.duration_seconds = j.at("duration_seconds").get<double>();
    return m;
}

// ---------------------------------------------------------------------------
// CSV writers (header rows fixed; one record per line, '\n' line endings)

inline void write_measure_csv(std::ostream& os, const EmpiricalMeasure& mu) {
    os << "re,im,weight\n";
    for (std::size_t i = 0; i < mu.atoms.size(); ++i)
        os << format_double(mu.atoms[i].x) << ',' << format_double(mu.atoms[i].y) << ','
           << format_double(mu.weights[i]) << '\n';
}

inline EmpiricalMeasure read_measure_csv(std::istream& is) {
    EmpiricalMeasure mu;
    std::string line;
    if (!std::getline(is, line) || line != "re,im,weight")
        throw std::invalid_argument("measure CSV must start with \"re,im,weight\"");
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string field;
        double v[3];
        for (double& out : v) {
            if (!std::getline(row, field, ','))
                throw std::invalid_argument("measure CSV row needs three fields");
            const char* b = field.data();
            const auto res = std::from_chars(b, b + field.size(), out);
            if (res.ec != std::errc{}) throw std::invalid_argument("bad number: " + field);
        }
        mu.atoms.push_back({v[0], v[1]});
        mu.weights.push_back(v[2]);
        mu.total_mass += v[2];
    }
    return mu;
}

inline void write_energies_csv(std::ostream& os, const Trajectory& traj) {
    os << "step,time,energy,min_sep\n";
    for (std::size_t i = 0; i < traj.steps.size(); ++i)
        os << traj.steps[i] << ',' << format_double(traj.times[i]) << ','
           << format_double(traj.energies[i]) << ',' << format_double(traj.min_separations[i])
           << '\n';
}

inline void write_pmf_csv(std::ostream& os, const RealCountPMF& pmf) {
    os << "k,count,probability,stderr\n";
    for (const auto& [k, count] : pmf.counts)
        os << k << ',' << count << ',' << format_double(pmf.probability(k)) << ','
           << format_double(pmf.standard_error(k)) << '\n';
}

inline void write_rate_csv(std::ostream& os, const std::vector<RateReport>& reports) {
    os << "alpha,I,stderr,n_atoms\n";
    for (const RateReport& r : reports)
        os << format_double(r.alpha) << ',' << format_double(r.rate_value) << ','
           << format_double(r.error_bar) << ',' << r.n_atoms << '\n';
}

inline void write_histogram_csv(std::ostream& os, const std::vector<HistogramBin>& bins) {
    os << "bin_left,bin_right,density\n";
    for (const HistogramBin& b : bins)
        os << format_double(b.left) << ',' << format_double(b.right) << ','
           << format_double(b.density) << '\n';
}

inline void write_boundary_csv(std::ostream& os, const std::vector<Point>& boundary) {
    os << "re,im\n";
    for (const Point& p : boundary)
        os << format_double(p.x) << ',' << format_double(p.y) << '\n';
}

// ---------------------------------------------------------------------------
// JSON-lines streams

// one snapshot per line, self-describing: {"step":..,"time":..,"config":{...}}
inline void write_trajectory_jsonl(std::ostream& os, const Trajectory& traj) {
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        json line;
        line["step"] = traj.steps[i];
        line["time"] = traj.times[i];
        line["config"] = to_json(traj.snapshots[i]);
        os << line.dump() << '\n';
    }
}

// one configuration per line, in the configuration-file schema
inline void write_samples_jsonl(std::ostream& os,
                                const std::vector<SpectralConfiguration>& samples) {
    for (const SpectralConfiguration& cfg : samples) os << to_json(cfg).dump() << '\n';
}

inline std::vector<SpectralConfiguration> read_samples_jsonl(std::istream& is) {
    std::vector<SpectralConfiguration> out;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        out.push_back(config_from_json(json::parse(line)));
    }
    return out;
}

// one spectrum per line: {"eigenvalues":[[x,y],...],"residual":..}
inline void write_spectra_jsonl(std::ostream& os, const std::vector<Spectrum>& spectra) {
    for (const Spectrum& s : spectra) {
        json line;
        json evs = json::array();
        for (const Point& z : s.eigenvalues) evs.push_back(json::array({z.x, z.y}));
        line["eigenvalues"] = std::move(evs);
        line["residual"] = s.residual;
        os << line.dump() << '\n';
    }
}

inline void write_chain_summary_csv(std::ostream& os, const ChainRun& run, int chain_index = 0) {
    os << "chain,step,log_target,accept_rate\n";
    for (std::size_t i = 0; i < run.sample_steps.size(); ++i)
        os << chain_index << ',' << run.sample_steps[i] << ','
           << format_double(run.sample_log_targets[i]) << ','
           << format_double(run.sample_accept_rates[i]) << '\n';
}

}  // namespace rginibre
