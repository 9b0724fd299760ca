#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adapsne/controller.hpp"
#include "adapsne/errors.hpp"
#include "adapsne/rng.hpp"

// Run configuration: a flat `key = value` document ('#' starts a comment).
// Every key has a default; unknown keys are rejected. Subsystem seeds
// default to streams derived from the master seed (tags: fwa 1, embed 2,
// sampler 3) and may be pinned individually.

namespace adapsne {

struct RunConfig {
    std::uint64_t seed = 42;
    int threads = 0;  // 0: one per hardware thread

    int fwa_n_fireworks = 8;
    int fwa_sparks = 40;
    int fwa_mutants = 8;
    int fwa_generations = 30;
    double fwa_amplitude_max = 0.0;  // 0: auto
    MutationMode fwa_mutation = MutationMode::symmetric;
    std::optional<std::uint64_t> fwa_seed;

    int embed_iterations = 500;
    double embed_learning_rate = 0.0;  // 0: auto
    double embed_momentum_early = 0.5;
    double embed_momentum_late = 0.8;
    double embed_exaggeration_factor = 4.0;
    int embed_exaggeration_iters = 50;
    std::optional<std::uint64_t> embed_seed;

    int grid_g = 0;  // 0: auto
    double grid_alpha = 0.8;

    double controller_pi0 = 30.0;
    double controller_delta_pi = 2.0;
    double controller_epsilon = 1e-8;
    int controller_max_iters = 12;
    int controller_max_step = 16;

    std::size_t sampler_m = 0;  // 0: use keep_ratio
    double sampler_keep_ratio = 0.1;
    PickMode sampler_pick = PickMode::centroid;
    std::optional<std::uint64_t> sampler_seed;

    std::uint64_t resolved_fwa_seed() const { return fwa_seed.value_or(mix_seed(seed, 1)); }
    std::uint64_t resolved_embed_seed() const { return embed_seed.value_or(mix_seed(seed, 2)); }
    std::uint64_t resolved_sampler_seed() const { return sampler_seed.value_or(mix_seed(seed, 3)); }

    void set(std::string_view key, std::string_view value);
    std::vector<std::pair<std::string, std::string>> to_map() const;

    PipelineConfig pipeline() const {
        PipelineConfig pc;
        pc.fwa.n_fireworks = fwa_n_fireworks;
        pc.fwa.n_sparks_total = fwa_sparks;
        pc.fwa.n_mutants = fwa_mutants;
        pc.fwa.generations = fwa_generations;
        pc.fwa.amplitude_max = fwa_amplitude_max;
        pc.fwa.mutation = fwa_mutation;
        pc.fwa.seed = resolved_fwa_seed();
        pc.embed.iterations = embed_iterations;
        pc.embed.learning_rate = embed_learning_rate;
        pc.embed.momentum_early = embed_momentum_early;
        pc.embed.momentum_late = embed_momentum_late;
        pc.embed.exaggeration_factor = embed_exaggeration_factor;
        pc.embed.exaggeration_iters = embed_exaggeration_iters;
        pc.embed.seed = resolved_embed_seed();
        pc.grid_g = grid_g;
        pc.grid_alpha = grid_alpha;
        pc.controller.pi0 = controller_pi0;
        pc.controller.delta_pi = controller_delta_pi;
        pc.controller.epsilon = controller_epsilon;
        pc.controller.max_iters = controller_max_iters;
        pc.controller.max_step = controller_max_step;
        pc.m = sampler_m;
        pc.keep_ratio = sampler_keep_ratio;
        pc.pick = sampler_pick;
        pc.sampler_seed = resolved_sampler_seed();
        pc.threads = threads;
        return pc;
    }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

template <class T>
T parse_number(std::string_view key, std::string_view value) {
    T out{};
    const char* begin = value.data();
    const char* end = begin + value.size();
    const auto [ptr, ec] = std::from_chars(begin, end, out);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("config: bad value '" + std::string(value) + "' for key '" +
                          std::string(key) + "'");
    return out;
}

inline std::string format_double(double v) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace detail

inline void RunConfig::set(std::string_view key, std::string_view value) {
    using detail::parse_number;
    const auto as_int = [&] { return parse_number<int>(key, value); };
    const auto as_double = [&] { return parse_number<double>(key, value); };
    const auto as_u64 = [&] { return parse_number<std::uint64_t>(key, value); };
    const auto as_opt_u64 = [&]() -> std::optional<std::uint64_t> {
        if (value == "auto") return std::nullopt;
        return parse_number<std::uint64_t>(key, value);
    };

    if (key == "seed") seed = as_u64();
    else if (key == "threads") threads = as_int();
    else if (key == "fwa.n_fireworks") fwa_n_fireworks = as_int();
    else if (key == "fwa.sparks") fwa_sparks = as_int();
    else if (key == "fwa.mutants") fwa_mutants = as_int();
    else if (key == "fwa.generations") fwa_generations = as_int();
    else if (key == "fwa.amplitude_max") {
        fwa_amplitude_max = value == "auto" ? 0.0 : as_double();
    } else if (key == "fwa.mutation") {
        if (value == "symmetric") fwa_mutation = MutationMode::symmetric;
        else if (value == "literal") fwa_mutation = MutationMode::literal;
        else throw ConfigError("config: fwa.mutation must be 'symmetric' or 'literal'");
    } else if (key == "fwa.seed") fwa_seed = as_opt_u64();
    else if (key == "embed.iterations") embed_iterations = as_int();
    else if (key == "embed.learning_rate") {
        embed_learning_rate = value == "auto" ? 0.0 : as_double();
    } else if (key == "embed.momentum_early") embed_momentum_early = as_double();
    else if (key == "embed.momentum_late") embed_momentum_late = as_double();
    else if (key == "embed.exaggeration_factor") embed_exaggeration_factor = as_double();
    else if (key == "embed.exaggeration_iters") embed_exaggeration_iters = as_int();
    else if (key == "embed.seed") embed_seed = as_opt_u64();
    else if (key == "grid.g") {
        grid_g = value == "auto" ? 0 : as_int();
        if (grid_g != 0 && grid_g < 2) throw ConfigError("config: grid.g must be >= 2 or 'auto'");
    } else if (key == "grid.alpha") {
        grid_alpha = as_double();
        if (grid_alpha < 0.0 || grid_alpha > 1.0)
            throw ConfigError("config: grid.alpha must lie in [0, 1]");
    } else if (key == "controller.pi0") controller_pi0 = as_double();
    else if (key == "controller.delta_pi") controller_delta_pi = as_double();
    else if (key == "controller.epsilon") controller_epsilon = as_double();
    else if (key == "controller.max_iters") controller_max_iters = as_int();
    else if (key == "controller.max_step") controller_max_step = as_int();
    else if (key == "sampler.m") {
        sampler_m = value == "auto" ? 0 : static_cast<std::size_t>(as_u64());
    } else if (key == "sampler.keep_ratio") {
        sampler_keep_ratio = as_double();
        if (sampler_keep_ratio <= 0.0 || sampler_keep_ratio > 1.0)
            throw ConfigError("config: sampler.keep_ratio must lie in (0, 1]");
    } else if (key == "sampler.pick") {
        if (value == "centroid") sampler_pick = PickMode::centroid;
        else if (value == "random") sampler_pick = PickMode::random;
        else throw ConfigError("config: sampler.pick must be 'centroid' or 'random'");
    } else if (key == "sampler.seed") sampler_seed = as_opt_u64();
    else throw ConfigError("config: unknown key '" + std::string(key) + "'");
}

/// Flat snapshot in fixed key order. Optional seeds are resolved to their
/// derived values so the snapshot alone reproduces the run.
inline std::vector<std::pair<std::string, std::string>> RunConfig::to_map() const {
    using detail::format_double;
    std::vector<std::pair<std::string, std::string>> kv;
    kv.emplace_back("seed", std::to_string(seed));
    kv.emplace_back("threads", std::to_string(threads));
    kv.emplace_back("fwa.n_fireworks", std::to_string(fwa_n_fireworks));
    kv.emplace_back("fwa.sparks", std::to_string(fwa_sparks));
    kv.emplace_back("fwa.mutants", std::to_string(fwa_mutants));
    kv.emplace_back("fwa.generations", std::to_string(fwa_generations));
    kv.emplace_back("fwa.amplitude_max",
                    fwa_amplitude_max == 0.0 ? "auto" : format_double(fwa_amplitude_max));
    kv.emplace_back("fwa.mutation",
                    fwa_mutation == MutationMode::symmetric ? "symmetric" : "literal");
    kv.emplace_back("fwa.seed", std::to_string(resolved_fwa_seed()));
    kv.emplace_back("embed.iterations", std::to_string(embed_iterations));
    kv.emplace_back("embed.learning_rate",
                    embed_learning_rate == 0.0 ? "auto" : format_double(embed_learning_rate));
    kv.emplace_back("embed.momentum_early", format_double(embed_momentum_early));
    kv.emplace_back("embed.momentum_late", format_double(embed_momentum_late));
    kv.emplace_back("embed.exaggeration_factor", format_double(embed_exaggeration_factor));
    kv.emplace_back("embed.exaggeration_iters", std::to_string(embed_exaggeration_iters));
    kv.emplace_back("embed.seed", std::to_string(resolved_embed_seed()));
    kv.emplace_back("grid.g", grid_g == 0 ? "auto" : std::to_string(grid_g));
    kv.emplace_back("grid.alpha", format_double(grid_alpha));
    kv.emplace_back("controller.pi0", format_double(controller_pi0));
    kv.emplace_back("controller.delta_pi", format_double(controller_delta_pi));
    kv.emplace_back("controller.epsilon", format_double(controller_epsilon));
    kv.emplace_back("controller.max_iters", std::to_string(controller_max_iters));
    kv.emplace_back("controller.max_step", std::to_string(controller_max_step));
    kv.emplace_back("sampler.m", sampler_m == 0 ? "auto" : std::to_string(sampler_m));
    kv.emplace_back("sampler.keep_ratio", format_double(sampler_keep_ratio));
    kv.emplace_back("sampler.pick", sampler_pick == PickMode::centroid ? "centroid" : "random");
    kv.emplace_back("sampler.seed", std::to_string(resolved_sampler_seed()));
    return kv;
}

/// Parses a config document. Lines are `key = value`; blank lines and
/// '#' comments are ignored.
inline RunConfig parse_config(std::string_view text) {
    RunConfig cfg;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t eol = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, eol - pos);
        pos = eol + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty()) continue;

        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("config: line " + std::to_string(line_no) +
                              " is not of the form 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        const auto value = detail::trim(line.substr(eq + 1));
        if (key.empty() || value.empty())
            throw ConfigError("config: empty key or value on line " + std::to_string(line_no));
        cfg.set(key, value);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

}  // namespace adapsne
