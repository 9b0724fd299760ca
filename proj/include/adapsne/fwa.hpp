#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "adapsne/affinity.hpp"
#include "adapsne/errors.hpp"
#include "adapsne/matrix.hpp"
#include "adapsne/parallel.hpp"
#include "adapsne/rng.hpp"

// Fireworks Algorithm over a scalar search interval. Each generation
// explodes every firework into sparks (better fireworks get more sparks in
// a smaller radius), adds mutants scaled by the spark-pool fitness spread,
// and keeps the top n of the combined pool.
//
// Candidate order within pools is deterministic and ties in selection are
// broken by position then pool order, so a fixed seed reproduces the exact
// run regardless of evaluation parallelism.

namespace adapsne {

enum class MutationMode {
    symmetric,  // mutant = firework + delta * u, u ~ Uniform[-1, 1)
    literal,    // mutant = firework + delta (can only move right)
};

struct FwaConfig {
    int n_fireworks = 8;
    int n_sparks_total = 40;
    int n_mutants = 8;
    int generations = 30;
    double amplitude_max = 0.0;  // 0: auto, (hi - lo) / 4
    double sigma_lo = 0.0;
    double sigma_hi = 0.0;
    MutationMode mutation = MutationMode::symmetric;
    std::uint64_t seed = 0;

    double resolved_amplitude() const {
        return amplitude_max > 0.0 ? amplitude_max : (sigma_hi - sigma_lo) / 4.0;
    }

    void validate() const {
        if (n_fireworks < 2) throw ConfigError("fwa: n_fireworks must be >= 2");
        if (n_sparks_total < n_fireworks)
            throw ConfigError("fwa: n_sparks_total must be >= n_fireworks");
        if (n_mutants < 0) throw ConfigError("fwa: n_mutants must be >= 0");
        if (generations < 1) throw ConfigError("fwa: generations must be >= 1");
        if (!(sigma_lo < sigma_hi)) throw ConfigError("fwa: need sigma_lo < sigma_hi");
    }
};

struct Candidate {
    double position = 0.0;
    double fitness = 0.0;
};

/// Fitness-ordering with deterministic tie-breaks (smaller position wins).
inline bool fitter(const Candidate& a, const Candidate& b) {
    if (a.fitness != b.fitness) return a.fitness < b.fitness;
    return a.position < b.position;
}

struct FwaPopulation {
    std::vector<Candidate> fireworks;
    std::vector<Candidate> sparks;   // scratch, refilled every generation
    std::vector<Candidate> mutants;  // scratch, refilled every generation
    std::vector<std::size_t> elite;  // per-firework best spark index into `sparks`
    Candidate best;                  // best ever seen
};

/// Counts objective evaluations; the search cost contract is expressed in
/// these.
class ObjectiveHandle {
public:
    explicit ObjectiveHandle(std::function<double(double)> fn) : fn_(std::move(fn)) {}

    double operator()(double sigma) {
        ++evaluations_;
        return fn_(sigma);
    }

    long long evaluations() const { return evaluations_; }

private:
    std::function<double(double)> fn_;
    long long evaluations_ = 0;
};

namespace detail {

inline double clip(double x, double lo, double hi) { return std::min(hi, std::max(lo, x)); }

inline double evaluate_checked(ObjectiveHandle& objective, double position) {
    const double f = objective(position);
    if (std::isnan(f))
        throw NumericError("objective returned NaN at sigma=" + std::to_string(position));
    return f;
}

}  // namespace detail

struct SparkAllocation {
    std::vector<int> counts;
    std::vector<double> amplitudes;
};

/// Fitness-proportional spark budget and explosion radii. Lower fitness
/// (better) earns more sparks and a smaller amplitude; counts are adjusted
/// deterministically so they sum to `total` exactly, each at least 1.
inline SparkAllocation allocate_sparks(std::span<const Candidate> fireworks, int total,
                                       double amplitude_max) {
    constexpr double xi = 1e-12;
    const std::size_t n = fireworks.size();
    double f_min = fireworks[0].fitness;
    double f_max = fireworks[0].fitness;
    for (const auto& fw : fireworks) {
        f_min = std::min(f_min, fw.fitness);
        f_max = std::max(f_max, fw.fitness);
    }

    SparkAllocation alloc;
    alloc.counts.resize(n);
    alloc.amplitudes.resize(n);

    double denom = 0.0;
    for (const auto& fw : fireworks) denom += f_max - fw.fitness + xi;
    for (std::size_t k = 0; k < n; ++k) {
        const double share = (f_max - fireworks[k].fitness + xi) / denom;
        alloc.counts[k] = std::max(1, static_cast<int>(std::llround(total * share)));
        alloc.amplitudes[k] =
            amplitude_max * (fireworks[k].fitness - f_min + xi) / (f_max - f_min + xi);
    }

    // Rebalance rounding drift: shrink the largest allocations (worst fitness
    // first on ties), grow the best firework's.
    int sum = 0;
    for (int c : alloc.counts) sum += c;
    while (sum > total) {
        std::size_t pick = 0;
        for (std::size_t k = 1; k < n; ++k) {
            if (alloc.counts[k] > alloc.counts[pick] ||
                (alloc.counts[k] == alloc.counts[pick] &&
                 fireworks[k].fitness > fireworks[pick].fitness))
                pick = k;
        }
        if (alloc.counts[pick] <= 1) break;
        --alloc.counts[pick];
        --sum;
    }
    while (sum < total) {
        std::size_t pick = 0;
        for (std::size_t k = 1; k < n; ++k) {
            if (fitter(fireworks[k], fireworks[pick])) pick = k;
        }
        ++alloc.counts[pick];
        ++sum;
    }
    return alloc;
}

/// Draws the initial fireworks uniformly inside the bounds and records the
/// incumbent best.
template <class Rng>
FwaPopulation fwa_init(const FwaConfig& config, ObjectiveHandle& objective, Rng& rng) {
    config.validate();
    FwaPopulation pop;
    pop.fireworks.reserve(config.n_fireworks);
    for (int k = 0; k < config.n_fireworks; ++k) {
        const double pos = rng.uniform(config.sigma_lo, config.sigma_hi);
        pop.fireworks.push_back({pos, detail::evaluate_checked(objective, pos)});
    }
    pop.sparks.reserve(config.n_sparks_total);
    pop.mutants.reserve(std::max(1, config.n_mutants));
    pop.best = pop.fireworks[0];
    for (const auto& fw : pop.fireworks)
        if (fitter(fw, pop.best)) pop.best = fw;
    return pop;
}

/// Explosion phase: fills the spark pool (exactly n_sparks_total sparks,
/// clipped to bounds) and records each firework's elite spark.
template <class Rng>
void explode(FwaPopulation& pop, const FwaConfig& config, ObjectiveHandle& objective, Rng& rng) {
    const SparkAllocation alloc =
        allocate_sparks(pop.fireworks, config.n_sparks_total, config.resolved_amplitude());
    pop.sparks.clear();
    pop.elite.assign(pop.fireworks.size(), 0);
    for (std::size_t k = 0; k < pop.fireworks.size(); ++k) {
        std::size_t best_spark = pop.sparks.size();
        for (int s = 0; s < alloc.counts[k]; ++s) {
            const double bias = rng.uniform_sym();
            const double pos = detail::clip(pop.fireworks[k].position + alloc.amplitudes[k] * bias,
                                            config.sigma_lo, config.sigma_hi);
            pop.sparks.push_back({pos, detail::evaluate_checked(objective, pos)});
            if (fitter(pop.sparks.back(), pop.sparks[best_spark])) best_spark = pop.sparks.size() - 1;
        }
        pop.elite[k] = best_spark;
        if (fitter(pop.sparks[best_spark], pop.best)) pop.best = pop.sparks[best_spark];
    }
}

/// Mutation phase: spawns n_mutants candidates displaced by the spark-pool
/// fitness spread delta = f_max - f_min.
template <class Rng>
void mutate(FwaPopulation& pop, const FwaConfig& config, ObjectiveHandle& objective, Rng& rng) {
    if (pop.sparks.empty()) throw DataError("fwa mutate: spark pool is empty");
    double f_min = pop.sparks[0].fitness;
    double f_max = pop.sparks[0].fitness;
    for (const auto& s : pop.sparks) {
        f_min = std::min(f_min, s.fitness);
        f_max = std::max(f_max, s.fitness);
    }
    const double delta = f_max - f_min;

    pop.mutants.clear();
    for (int t = 0; t < config.n_mutants; ++t) {
        const auto& fw = pop.fireworks[static_cast<std::size_t>(t) % pop.fireworks.size()];
        const double step =
            config.mutation == MutationMode::symmetric ? delta * rng.uniform_sym() : delta;
        const double pos = detail::clip(fw.position + step, config.sigma_lo, config.sigma_hi);
        pop.mutants.push_back({pos, detail::evaluate_checked(objective, pos)});
        if (fitter(pop.mutants.back(), pop.best)) pop.best = pop.mutants.back();
    }
}

/// Selection: the n_fireworks fittest of {fireworks, sparks, mutants}
/// survive. Ties go to the smaller position, then to the earlier pool slot.
inline void select(FwaPopulation& pop, const FwaConfig& config) {
    std::vector<Candidate> pool;
    pool.reserve(pop.fireworks.size() + pop.sparks.size() + pop.mutants.size());
    pool.insert(pool.end(), pop.fireworks.begin(), pop.fireworks.end());
    pool.insert(pool.end(), pop.sparks.begin(), pop.sparks.end());
    pool.insert(pool.end(), pop.mutants.begin(), pop.mutants.end());

    std::stable_sort(pool.begin(), pool.end(), fitter);
    pool.resize(std::min<std::size_t>(pool.size(), static_cast<std::size_t>(config.n_fireworks)));
    pop.fireworks = std::move(pool);
    if (fitter(pop.fireworks.front(), pop.best)) pop.best = pop.fireworks.front();
}

struct FwaResult {
    double sigma = 0.0;
    double fitness = 0.0;
    long long evaluations = 0;
};

/// Full search: init, then `generations` rounds of explode / mutate / select.
/// Returns the best candidate ever evaluated. Evaluation count is exactly
/// n_fireworks + generations * (n_sparks_total + n_mutants).
inline FwaResult fwa_search(ObjectiveHandle& objective, const FwaConfig& config) {
    const long long start_evals = objective.evaluations();
    Xoshiro256 rng(config.seed);
    FwaPopulation pop = fwa_init(config, objective, rng);
    for (int t = 0; t < config.generations; ++t) {
        explode(pop, config, objective, rng);
        mutate(pop, config, objective, rng);
        select(pop, config);
    }
    return {pop.best.position, pop.best.fitness, objective.evaluations() - start_evals};
}

struct BandwidthVector {
    std::vector<double> sigma;         // per-point optimal bandwidth
    std::vector<double> fitness;       // per-point residual |R_i - target|
    long long total_evaluations = 0;
    SigmaBounds bounds;
    int degenerate_rows = 0;  // rows whose off-diagonal distances are all zero
};

/// Runs one bandwidth search per dataset row. Row i draws its seed from the
/// i-th output of a SplitMix64 sequence started at config.seed, so rows are
/// independent streams and any evaluation order gives identical results.
inline BandwidthVector solve_all_bandwidths(const Matrix& d2, double target,
                                            const FwaConfig& config, int threads = 1) {
    const std::size_t n = d2.rows();
    if (n < 3) throw DataError("solve_all_bandwidths: need at least 3 points");
    validate_target_perplexity(target, n);

    FwaConfig base = config;
    if (!(base.sigma_lo < base.sigma_hi)) {
        const SigmaBounds bounds = sigma_bounds(d2);
        base.sigma_lo = bounds.lo;
        base.sigma_hi = bounds.hi;
    }
    base.validate();

    std::vector<std::uint64_t> row_seeds(n);
    {
        SplitMix64 sm(config.seed);
        for (auto& s : row_seeds) s = sm.next();
    }

    BandwidthVector out;
    out.sigma.resize(n);
    out.fitness.resize(n);
    out.bounds = {base.sigma_lo, base.sigma_hi};
    std::vector<long long> evals(n, 0);
    std::vector<char> degenerate(n, 0);

    parallel_for(n, threads, [&](std::size_t i) {
        const auto row = d2.row(i);
        double dmax = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) dmax = std::max(dmax, row[j]);
        degenerate[i] = dmax == 0.0 ? 1 : 0;

        FwaConfig row_config = base;
        row_config.seed = row_seeds[i];
        ObjectiveHandle objective([&row, i, target](double sigma) {
            return perplexity_error(sigma, row, i, target);
        });
        try {
            const FwaResult res = fwa_search(objective, row_config);
            out.sigma[i] = res.sigma;
            out.fitness[i] = res.fitness;
            evals[i] = res.evaluations;
        } catch (const NumericError& e) {
            throw NumericError("row " + std::to_string(i) + ": " + e.what());
        }
    });

    for (std::size_t i = 0; i < n; ++i) {
        out.total_evaluations += evals[i];
        out.degenerate_rows += degenerate[i];
    }
    return out;
}

}  // namespace adapsne
