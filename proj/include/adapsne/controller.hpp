#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "adapsne/affinity.hpp"
#include "adapsne/dataset.hpp"
#include "adapsne/embedding.hpp"
#include "adapsne/errors.hpp"
#include "adapsne/fwa.hpp"
#include "adapsne/grid.hpp"
#include "adapsne/sampler.hpp"

// Entropy-guided outer loop. Each pass runs bandwidth search, t-SNE and
// grid entropy for the current target perplexity; while the entropy stays
// under the threshold, the target is moved by an integer-ceiling secant
// step probed with a small perplexity offset.

namespace adapsne {

struct ControllerConfig {
    double pi0 = 30.0;
    double delta_pi = 2.0;    // probe offset for the finite-difference slope
    double epsilon = 1e-8;    // guards the slope denominator
    int max_iters = 12;
    int max_step = 16;        // cap on one ceiling step, either sign

    void validate() const {
        if (!(pi0 > 1.0)) throw ConfigError("controller: pi0 must be > 1");
        if (!(delta_pi > 0.0)) throw ConfigError("controller: delta_pi must be > 0");
        if (!(epsilon > 0.0)) throw ConfigError("controller: epsilon must be > 0");
        if (max_iters < 0) throw ConfigError("controller: max_iters must be >= 0");
        if (max_step < 1) throw ConfigError("controller: max_step must be >= 1");
    }
};

struct PipelineConfig {
    FwaConfig fwa;
    EmbedConfig embed;
    ControllerConfig controller;
    int grid_g = 0;          // 0: auto, ceil(sqrt(m)), at least 2
    double grid_alpha = 0.8;
    std::size_t m = 0;       // 0: use keep_ratio
    double keep_ratio = 0.1;
    PickMode pick = PickMode::centroid;
    std::uint64_t sampler_seed = 0;
    int threads = 1;
};

struct TrajectoryPoint {
    int k = 0;
    double pi_t = 0.0;
    double h = 0.0;
};

/// Outer-loop state: the trajectory of accepted (perplexity, entropy)
/// pairs, the k=0 baseline entropy and the derived threshold.
struct ControllerState {
    int k = 0;
    std::vector<TrajectoryPoint> history;
    double h_baseline = 0.0;
    double h_threshold = 0.0;
    int last_direction = +1;  // sign of the last accepted perplexity move
};

struct FwaSummary {
    double pi_t = 0.0;
    double fitness_min = 0.0;
    double fitness_median = 0.0;
    double fitness_max = 0.0;
    long long evaluations = 0;
};

struct StageTimings {
    double bandwidth_s = 0.0;
    double embed_s = 0.0;
    double grid_s = 0.0;
    double sampling_s = 0.0;
    double total_s = 0.0;
};

struct PipelineEval {
    Matrix coords;
    GridHistogram hist;
    double h = 0.0;
    FwaSummary fwa;
    std::vector<std::pair<int, double>> kl_trace;
    int degenerate_rows = 0;
};

namespace detail {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    return v[mid];
}

}  // namespace detail

/// One full inner pass (bandwidths -> joint affinities -> embedding ->
/// grid entropy) per target perplexity, memoized so that probe values are
/// never recomputed within a run.
class Pipeline {
public:
    Pipeline(const Dataset& dataset, PipelineConfig config)
        : dataset_(dataset), config_(std::move(config)) {
        validate_dataset(dataset_);
        d2_ = pairwise_sq_dists(dataset_, config_.threads);
        if (!(config_.fwa.sigma_lo < config_.fwa.sigma_hi)) {
            const SigmaBounds b = sigma_bounds(d2_);
            config_.fwa.sigma_lo = b.lo;
            config_.fwa.sigma_hi = b.hi;
        }
    }

    std::size_t n() const { return dataset_.n(); }
    double max_target() const { return static_cast<double>(dataset_.n() - 1); }
    const PipelineConfig& config() const { return config_; }
    const StageTimings& timings() const { return timings_; }
    const std::vector<FwaSummary>& evaluation_log() const { return log_; }

    int grid_cells() const {
        if (config_.grid_g >= 2) return config_.grid_g;
        const std::size_t m = resolve_exemplar_count();
        return std::max(2, static_cast<int>(std::ceil(std::sqrt(static_cast<double>(m)))));
    }

    std::size_t resolve_exemplar_count() const {
        if (config_.m >= 1) {
            if (config_.m > n())
                throw ConfigError("sampler: m exceeds the dataset size");
            return config_.m;
        }
        const double raw = config_.keep_ratio * static_cast<double>(n());
        const auto m = static_cast<std::size_t>(std::llround(raw));
        return std::min(n(), std::max<std::size_t>(1, m));
    }

    const PipelineEval& evaluate(double pi_t) {
        validate_target_perplexity(pi_t, n());
        if (auto it = cache_.find(pi_t); it != cache_.end()) return it->second;

        using clock = std::chrono::steady_clock;
        PipelineEval eval;

        auto t0 = clock::now();
        const BandwidthVector bw =
            solve_all_bandwidths(d2_, pi_t, config_.fwa, config_.threads);
        auto t1 = clock::now();

        Matrix cond(n(), n(), 0.0);
        parallel_for(n(), config_.threads, [&](std::size_t i) {
            const auto row = conditional_row(d2_.row(i), i, bw.sigma[i]);
            std::copy(row.begin(), row.end(), cond.row(i).begin());
        });
        const Matrix joint = symmetrize(cond);
        const Embedding emb = embed(joint, config_.embed, nullptr, config_.threads);
        auto t2 = clock::now();

        const GridSpec spec = fit_grid(emb.coords, grid_cells());
        eval.hist = histogram(emb.coords, spec);
        eval.h = grid_entropy(eval.hist);
        auto t3 = clock::now();

        eval.coords = emb.coords;
        eval.kl_trace = emb.kl_trace;
        eval.degenerate_rows = bw.degenerate_rows;
        eval.fwa.pi_t = pi_t;
        eval.fwa.evaluations = bw.total_evaluations;
        eval.fwa.fitness_min = *std::min_element(bw.fitness.begin(), bw.fitness.end());
        eval.fwa.fitness_max = *std::max_element(bw.fitness.begin(), bw.fitness.end());
        eval.fwa.fitness_median = detail::median_of(bw.fitness);

        timings_.bandwidth_s += std::chrono::duration<double>(t1 - t0).count();
        timings_.embed_s += std::chrono::duration<double>(t2 - t1).count();
        timings_.grid_s += std::chrono::duration<double>(t3 - t2).count();
        log_.push_back(eval.fwa);
        return cache_.emplace(pi_t, std::move(eval)).first->second;
    }

private:
    const Dataset& dataset_;
    PipelineConfig config_;
    Matrix d2_;
    std::map<double, PipelineEval> cache_;
    std::vector<FwaSummary> log_;
    StageTimings timings_;
};

/// Next target perplexity per the update rule. k = 0 takes the fixed probe
/// step; k >= 1 probes the entropy slope at pi_k + delta_pi and applies the
/// ceiling of (H_k - H_{k-1}) / (slope + epsilon), capped at max_step and
/// never zero. The result is clamped to (1, N-1] and bumped until it is
/// distinct from every history value; nullopt means no fresh value exists.
inline std::optional<double> next_perplexity(ControllerState& state,
                                             const std::function<double(double)>& entropy_at,
                                             const ControllerConfig& config, double pi_max) {
    if (state.history.empty()) throw DataError("next_perplexity: empty history");
    const double pi_k = state.history.back().pi_t;
    const double pi_floor = std::min(2.0, pi_max);

    double step;
    if (state.k == 0) {
        step = std::ceil(config.delta_pi);
    } else {
        double probe = pi_k + config.delta_pi;
        if (probe > pi_max) probe = std::max(pi_floor, pi_k - config.delta_pi);
        double slope = 0.0;
        if (probe != pi_k) slope = (entropy_at(probe) - entropy_at(pi_k)) / (probe - pi_k);

        const double h_k = state.history[state.history.size() - 1].h;
        const double h_prev = state.history[state.history.size() - 2].h;
        const double raw = (h_k - h_prev) / (slope + config.epsilon);
        if (!std::isfinite(raw)) {
            step = std::ceil(config.delta_pi);  // fall back to the fixed probe step
        } else {
            step = std::ceil(raw);
        }
        step = std::min(step, static_cast<double>(config.max_step));
        step = std::max(step, -static_cast<double>(config.max_step));
    }
    if (step == 0.0) step = state.last_direction >= 0 ? 1.0 : -1.0;

    double cand = pi_k + step;
    cand = std::min(pi_max, std::max(pi_floor, cand));

    auto used = [&state](double v) {
        for (const auto& pt : state.history)
            if (pt.pi_t == v) return true;
        return false;
    };
    if (!used(cand)) return cand;

    const double dir = step > 0.0 ? 1.0 : -1.0;
    for (double sgn : {dir, -dir}) {
        for (double v = cand + sgn; v >= pi_floor && v <= pi_max; v += sgn) {
            if (!used(v)) return v;
        }
    }
    return std::nullopt;  // the admissible range is exhausted
}

struct RunResult {
    ExemplarSet exemplars;
    std::vector<TrajectoryPoint> trajectory;
    double h_baseline = 0.0;
    double h_threshold = 0.0;
    double h_max = 0.0;
    std::string termination;  // "threshold-met" or "iteration-cap"
    std::vector<FwaSummary> fwa_log;
    std::vector<std::pair<int, double>> kl_trace;
    StageTimings timings;
    Matrix final_coords;
    GridHistogram final_hist;
    int grid_g = 0;
    std::size_t exemplar_count = 0;
    int degenerate_rows = 0;
};

/// The complete sampling run: baseline pass, adaptive perplexity loop,
/// then grid sampling on the final embedding.
inline RunResult run_adapsne(const Dataset& dataset, const PipelineConfig& config) {
    using clock = std::chrono::steady_clock;
    const auto t_start = clock::now();

    config.controller.validate();
    Pipeline pipeline(dataset, config);
    const double pi_max = pipeline.max_target();
    if (!(config.controller.pi0 > 1.0) || config.controller.pi0 > pi_max)
        throw ConfigError("controller: pi0 must lie in (1, N-1]");

    const int g = pipeline.grid_cells();
    const std::size_t m = pipeline.resolve_exemplar_count();

    ControllerState state;
    const PipelineEval* current = &pipeline.evaluate(config.controller.pi0);
    state.history.push_back({0, config.controller.pi0, current->h});
    state.h_baseline = current->h;
    state.h_threshold = entropy_threshold(state.h_baseline, g, config.grid_alpha);

    const auto entropy_at = [&pipeline](double pi) { return pipeline.evaluate(pi).h; };

    bool range_exhausted = false;
    while (current->h < state.h_threshold && state.k < config.controller.max_iters) {
        const auto next = next_perplexity(state, entropy_at, config.controller, pi_max);
        if (!next) {
            range_exhausted = true;
            break;
        }
        const double pi_prev = state.history.back().pi_t;
        current = &pipeline.evaluate(*next);
        ++state.k;
        state.history.push_back({state.k, *next, current->h});
        state.last_direction = *next > pi_prev ? +1 : -1;
    }

    RunResult result;
    result.termination = current->h >= state.h_threshold ? "threshold-met" : "iteration-cap";
    if (range_exhausted && current->h < state.h_threshold) result.termination = "iteration-cap";

    const auto t_sample = clock::now();
    result.exemplars =
        grid_sample(current->coords, current->hist, m, config.sampler_seed, config.pick);
    const auto t_end = clock::now();

    result.trajectory = state.history;
    result.h_baseline = state.h_baseline;
    result.h_threshold = state.h_threshold;
    result.h_max = max_entropy(g);
    result.fwa_log = pipeline.evaluation_log();
    result.kl_trace = current->kl_trace;
    result.final_coords = current->coords;
    result.final_hist = current->hist;
    result.grid_g = g;
    result.exemplar_count = m;
    result.degenerate_rows = current->degenerate_rows;
    result.timings = pipeline.timings();
    result.timings.sampling_s = std::chrono::duration<double>(t_end - t_sample).count();
    result.timings.total_s = std::chrono::duration<double>(t_end - t_start).count();
    return result;
}

}  // namespace adapsne
