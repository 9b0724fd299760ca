// adapsne command-line tool.
//
//   adapsne run --data <path> [--config <path>] [--out <dir>] [--seed <u64>]
//               [--keep-ratio <f> | --m <int>] [--threads <n>] [--format <f>]
//   adapsne inspect --report <path>
//
// Exit codes: 0 success, 2 configuration error, 3 data error,
// 4 numerical abort.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "adapsne/config.hpp"
#include "adapsne/controller.hpp"
#include "adapsne/io.hpp"
#include "adapsne/report.hpp"

namespace fs = std::filesystem;

namespace {

int run_command(const std::string& data_path, const std::string& config_path,
                const std::string& out_dir, std::optional<std::uint64_t> seed,
                std::optional<double> keep_ratio, std::optional<std::uint64_t> m,
                std::optional<int> threads, const std::string& format_name) {
    adapsne::RunConfig cfg;
    if (!config_path.empty()) cfg = adapsne::load_config(config_path);
    if (seed) cfg.seed = *seed;
    if (keep_ratio && m) throw adapsne::ConfigError("give either --keep-ratio or --m, not both");
    if (keep_ratio) {
        cfg.sampler_keep_ratio = *keep_ratio;
        cfg.sampler_m = 0;
        if (*keep_ratio <= 0.0 || *keep_ratio > 1.0)
            throw adapsne::ConfigError("--keep-ratio must lie in (0, 1]");
    }
    if (m) cfg.sampler_m = *m;
    if (threads) {
        cfg.threads = *threads;
    } else if (const char* env = std::getenv("ADAPSNE_THREADS")) {
        cfg.threads = std::atoi(env);
    }

    adapsne::DataFormat format = adapsne::DataFormat::auto_detect;
    if (format_name == "csv") format = adapsne::DataFormat::csv;
    else if (format_name == "rawmat") format = adapsne::DataFormat::rawmat;
    else if (format_name != "auto")
        throw adapsne::ConfigError("--format must be auto, csv or rawmat");

    const adapsne::Dataset dataset = adapsne::load_dataset(data_path, format);
    const adapsne::RunResult result = adapsne::run_adapsne(dataset, cfg.pipeline());

    fs::create_directories(out_dir);
    adapsne::write_exemplars_csv(result.exemplars, (fs::path(out_dir) / "exemplars.csv").string());
    adapsne::write_embedding_csv(result.final_coords, result.final_hist.spec,
                                 (fs::path(out_dir) / "embedding.csv").string());
    adapsne::write_entropy_trace_csv(result.trajectory,
                                     (fs::path(out_dir) / "entropy_trace.csv").string());
    const adapsne::RunReport report =
        adapsne::make_report(result, cfg, data_path, dataset.n(), dataset.dim());
    adapsne::save_report(report, (fs::path(out_dir) / "report.json").string());

    std::cout << "samples: " << dataset.n() << " x " << dataset.dim() << "\n"
              << "exemplars: " << result.exemplars.indices.size() << " (grid " << result.grid_g
              << "x" << result.grid_g << ")\n"
              << "entropy: baseline " << adapsne::format_double(result.h_baseline)
              << ", final " << adapsne::format_double(result.trajectory.back().h)
              << ", threshold " << adapsne::format_double(result.h_threshold) << "\n"
              << "termination: " << result.termination << " after "
              << (result.trajectory.size() - 1) << " adaptation step(s)\n"
              << "outputs: " << out_dir << "/{exemplars,embedding,entropy_trace}.csv, "
              << out_dir << "/report.json\n";
    return 0;
}

int inspect_command(const std::string& report_path) {
    const adapsne::RunReport rep = adapsne::load_report(report_path);
    std::printf("report: %s\n", report_path.c_str());
    std::printf("data:   %s (%zu x %zu)\n", rep.data_path.c_str(), rep.n, rep.dim);
    std::printf("grid:   %d x %d cells, H_max %.6f\n", rep.grid_g, rep.grid_g, rep.h_max);
    std::printf("entropy: baseline %.6f, threshold %.6f\n", rep.h_baseline, rep.h_threshold);
    std::printf("\n  k    pi_t        H\n");
    for (const auto& pt : rep.trajectory)
        std::printf("%3d  %8.3f  %10.6f\n", pt.k, pt.pi_t, pt.h);
    std::printf("\ntermination: %s\n", rep.termination.c_str());
    std::printf("exemplars:   %zu\n", rep.exemplar_count);
    if (!rep.kl_trace.empty())
        std::printf("final KL:    %.6f (from %.6f)\n", rep.kl_trace.back().second,
                    rep.kl_trace.front().second);
    std::printf("stage seconds: bandwidth %.3f, embed %.3f, grid %.3f, sampling %.3f, total %.3f\n",
                rep.timings.bandwidth_s, rep.timings.embed_s, rep.timings.grid_s,
                rep.timings.sampling_s, rep.timings.total_s);
    std::printf("seeds: master %llu, fwa %llu, embed %llu, sampler %llu\n",
                static_cast<unsigned long long>(rep.seed),
                static_cast<unsigned long long>(rep.seed_fwa),
                static_cast<unsigned long long>(rep.seed_embed),
                static_cast<unsigned long long>(rep.seed_sampler));
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"adapsne - entropy-guided representative dataset sampling"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "sample a dataset and write the result artifacts");
    std::string data_path;
    std::string config_path;
    std::string out_dir = "out";
    std::string format_name = "auto";
    std::optional<std::uint64_t> seed;
    std::optional<double> keep_ratio;
    std::optional<std::uint64_t> m;
    std::optional<int> threads;
    run->add_option("--data", data_path, "input dataset (csv or rawmat)")->required();
    run->add_option("--config", config_path, "run configuration file");
    run->add_option("--out", out_dir, "output directory (default: out)");
    run->add_option("--seed", seed, "master seed override");
    run->add_option("--keep-ratio", keep_ratio, "fraction of samples to keep");
    run->add_option("--m", m, "exact exemplar count");
    run->add_option("--threads", threads, "worker threads (0 = all cores)");
    run->add_option("--format", format_name, "input format: auto, csv, rawmat");

    auto* inspect = app.add_subcommand("inspect", "print a human-readable report summary");
    std::string report_path;
    inspect->add_option("--report", report_path, "report.json produced by run")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed())
            return run_command(data_path, config_path, out_dir, seed, keep_ratio, m, threads,
                               format_name);
        return inspect_command(report_path);
    } catch (const adapsne::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const adapsne::DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 3;
    } catch (const adapsne::NumericError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
