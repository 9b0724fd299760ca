#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "adapsne/config.hpp"
#include "adapsne/controller.hpp"
#include "adapsne/errors.hpp"

// Machine-readable run report. The embedded config snapshot is complete:
// loading it back and re-running against the same data reproduces the
// emitted artifacts byte for byte.

namespace adapsne {

struct RunReport {
    std::vector<std::pair<std::string, std::string>> config;
    std::string data_path;
    std::size_t n = 0;
    std::size_t dim = 0;
    double h_baseline = 0.0;
    double h_threshold = 0.0;
    double h_max = 0.0;
    std::string termination;
    std::vector<TrajectoryPoint> trajectory;
    std::vector<FwaSummary> fwa;
    std::vector<std::pair<int, double>> kl_trace;
    StageTimings timings;
    int grid_g = 0;
    std::size_t exemplar_count = 0;
    int degenerate_rows = 0;
    std::uint64_t seed = 0;
    std::uint64_t seed_fwa = 0;
    std::uint64_t seed_embed = 0;
    std::uint64_t seed_sampler = 0;
};

inline RunReport make_report(const RunResult& run, const RunConfig& cfg,
                             const std::string& data_path, std::size_t n, std::size_t dim) {
    RunReport rep;
    rep.config = cfg.to_map();
    rep.data_path = data_path;
    rep.n = n;
    rep.dim = dim;
    rep.h_baseline = run.h_baseline;
    rep.h_threshold = run.h_threshold;
    rep.h_max = run.h_max;
    rep.termination = run.termination;
    rep.trajectory = run.trajectory;
    rep.fwa = run.fwa_log;
    rep.kl_trace = run.kl_trace;
    rep.timings = run.timings;
    rep.grid_g = run.grid_g;
    rep.exemplar_count = run.exemplar_count;
    rep.degenerate_rows = run.degenerate_rows;
    rep.seed = cfg.seed;
    rep.seed_fwa = cfg.resolved_fwa_seed();
    rep.seed_embed = cfg.resolved_embed_seed();
    rep.seed_sampler = cfg.resolved_sampler_seed();
    return rep;
}

inline nlohmann::json report_to_json(const RunReport& rep) {
    nlohmann::json j;
    nlohmann::json cfg = nlohmann::json::object();
    for (const auto& [key, value] : rep.config) cfg[key] = value;
    j["config"] = cfg;
    j["dataset"] = {{"path", rep.data_path}, {"n", rep.n}, {"dim", rep.dim}};
    j["entropy"] = {{"baseline", rep.h_baseline},
                    {"threshold", rep.h_threshold},
                    {"max", rep.h_max}};
    j["termination"] = rep.termination;
    j["grid_g"] = rep.grid_g;
    j["exemplar_count"] = rep.exemplar_count;
    j["degenerate_rows"] = rep.degenerate_rows;

    auto traj = nlohmann::json::array();
    for (const auto& pt : rep.trajectory)
        traj.push_back({{"k", pt.k}, {"pi_t", pt.pi_t}, {"h", pt.h}});
    j["trajectory"] = traj;

    auto fwa = nlohmann::json::array();
    for (const auto& s : rep.fwa)
        fwa.push_back({{"pi_t", s.pi_t},
                       {"fitness_min", s.fitness_min},
                       {"fitness_median", s.fitness_median},
                       {"fitness_max", s.fitness_max},
                       {"evaluations", s.evaluations}});
    j["fwa"] = fwa;

    auto trace = nlohmann::json::array();
    for (const auto& [iter, kl] : rep.kl_trace)
        trace.push_back({{"iteration", iter}, {"kl", kl}});
    j["kl_trace"] = trace;

    j["timings"] = {{"bandwidth_s", rep.timings.bandwidth_s},
                    {"embed_s", rep.timings.embed_s},
                    {"grid_s", rep.timings.grid_s},
                    {"sampling_s", rep.timings.sampling_s},
                    {"total_s", rep.timings.total_s}};
    j["seeds"] = {{"master", rep.seed},
                  {"fwa", rep.seed_fwa},
                  {"embed", rep.seed_embed},
                  {"sampler", rep.seed_sampler}};
    return j;
}

inline RunReport report_from_json(const nlohmann::json& j) {
    try {
        RunReport rep;
        for (const auto& [key, value] : j.at("config").items())
            rep.config.emplace_back(key, value.get<std::string>());
        rep.data_path = j.at("dataset").at("path").get<std::string>();
        rep.n = j.at("dataset").at("n").get<std::size_t>();
        rep.dim = j.at("dataset").at("dim").get<std::size_t>();
        rep.h_baseline = j.at("entropy").at("baseline").get<double>();
        rep.h_threshold = j.at("entropy").at("threshold").get<double>();
        rep.h_max = j.at("entropy").at("max").get<double>();
        rep.termination = j.at("termination").get<std::string>();
        rep.grid_g = j.at("grid_g").get<int>();
        rep.exemplar_count = j.at("exemplar_count").get<std::size_t>();
        rep.degenerate_rows = j.at("degenerate_rows").get<int>();
        for (const auto& pt : j.at("trajectory"))
            rep.trajectory.push_back(
                {pt.at("k").get<int>(), pt.at("pi_t").get<double>(), pt.at("h").get<double>()});
        for (const auto& s : j.at("fwa"))
            rep.fwa.push_back({s.at("pi_t").get<double>(), s.at("fitness_min").get<double>(),
                               s.at("fitness_median").get<double>(),
                               s.at("fitness_max").get<double>(),
                               s.at("evaluations").get<long long>()});
        for (const auto& t : j.at("kl_trace"))
            rep.kl_trace.emplace_back(t.at("iteration").get<int>(), t.at("kl").get<double>());
        rep.timings.bandwidth_s = j.at("timings").at("bandwidth_s").get<double>();
        rep.timings.embed_s = j.at("timings").at("embed_s").get<double>();
        rep.timings.grid_s = j.at("timings").at("grid_s").get<double>();
        rep.timings.sampling_s = j.at("timings").at("sampling_s").get<double>();
        rep.timings.total_s = j.at("timings").at("total_s").get<double>();
        rep.seed = j.at("seeds").at("master").get<std::uint64_t>();
        rep.seed_fwa = j.at("seeds").at("fwa").get<std::uint64_t>();
        rep.seed_embed = j.at("seeds").at("embed").get<std::uint64_t>();
        rep.seed_sampler = j.at("seeds").at("sampler").get<std::uint64_t>();
        return rep;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report: malformed document: ") + e.what());
    }
}

inline void save_report(const RunReport& rep, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("report: cannot write '" + path + "'");
    out << report_to_json(rep).dump(2) << '\n';
}

inline RunReport load_report(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("report: cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("report: invalid JSON: ") + e.what());
    }
    return report_from_json(j);
}

/// Rebuilds the RunConfig recorded in a report.
inline RunConfig config_from_report(const RunReport& rep) {
    RunConfig cfg;
    for (const auto& [key, value] : rep.config) cfg.set(key, value);
    return cfg;
}

}  // namespace adapsne
