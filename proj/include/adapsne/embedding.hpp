#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "adapsne/errors.hpp"
#include "adapsne/matrix.hpp"
#include "adapsne/parallel.hpp"
#include "adapsne/rng.hpp"

// 2-D embedding by gradient descent on KL(P || Q), where Q uses the
// Student-t kernel with one degree of freedom. The optimizer is the
// classic recipe: momentum 0.5 early / 0.8 late, early exaggeration of P,
// coordinates re-centered every iteration so the bounding box downstream
// stays put.

namespace adapsne {

enum class InitMode {
    seeded_gaussian,  // isotropic Gaussian, std 1e-4, from the config seed
    provided,         // caller supplies initial coordinates
};

struct EmbedConfig {
    int iterations = 500;
    double learning_rate = 0.0;  // 0: auto, 200 / sqrt(N)
    double momentum_early = 0.5;
    double momentum_late = 0.8;
    double exaggeration_factor = 4.0;
    int exaggeration_iters = 50;
    InitMode init = InitMode::seeded_gaussian;
    std::uint64_t seed = 0;

    void validate() const {
        if (iterations < 1) throw ConfigError("embed: iterations must be >= 1");
        if (learning_rate < 0.0) throw ConfigError("embed: learning_rate must be >= 0");
        if (momentum_early < 0.0 || momentum_early >= 1.0 || momentum_late < 0.0 ||
            momentum_late >= 1.0)
            throw ConfigError("embed: momenta must lie in [0, 1)");
        if (exaggeration_factor < 1.0) throw ConfigError("embed: exaggeration_factor must be >= 1");
        if (exaggeration_iters < 0 || exaggeration_iters >= iterations)
            throw ConfigError("embed: exaggeration_iters must be < iterations");
    }
};

struct Embedding {
    Matrix coords;  // N x 2
    int iteration = 0;
    std::vector<std::pair<int, double>> kl_trace;  // (iteration, KL vs unexaggerated P)
};

namespace detail {

/// Student-t weights w_ij = (1 + |yi - yj|^2)^-1 and their off-diagonal sum.
/// Row partial sums are reduced in index order, so the total is independent
/// of the thread count.
inline double student_t_weights(const Matrix& coords, Matrix& w, int threads = 1) {
    const std::size_t n = coords.rows();
    std::vector<double> row_sum(n, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        const double yi0 = coords(i, 0);
        const double yi1 = coords(i, 1);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) {
                w(i, j) = 0.0;
                continue;
            }
            const double d0 = yi0 - coords(j, 0);
            const double d1 = yi1 - coords(j, 1);
            const double wij = 1.0 / (1.0 + d0 * d0 + d1 * d1);
            w(i, j) = wij;
            acc += wij;
        }
        row_sum[i] = acc;
    });
    double z = 0.0;
    for (double s : row_sum) z += s;
    return z;
}

}  // namespace detail

/// Normalized low-dimensional affinities q_ij = w_ij / z with
/// z = sum_{k != l} w_kl. Returns (q, z).
inline std::pair<Matrix, double> student_t_affinities(const Matrix& coords, int threads = 1) {
    if (coords.cols() != 2) throw DataError("student_t_affinities: coords must be N x 2");
    for (double v : coords.flat())
        if (!std::isfinite(v)) throw DataError("student_t_affinities: non-finite coordinate");
    const std::size_t n = coords.rows();
    Matrix q(n, n, 0.0);
    const double z = detail::student_t_weights(coords, q, threads);
    const double inv_z = 1.0 / z;
    for (double& v : q.flat()) v *= inv_z;
    return {std::move(q), z};
}

/// C = sum_{i != j} p_ij ln(p_ij / q_ij), with 0 ln(0/q) = 0.
inline double kl_divergence(const Matrix& p, const Matrix& q) {
    if (p.rows() != q.rows() || p.cols() != q.cols())
        throw DataError("kl_divergence: shape mismatch");
    const std::size_t n = p.rows();
    double c = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (i == j) continue;
            const double pij = p(i, j);
            if (pij <= 0.0) continue;
            const double qij = q(i, j);
            if (qij <= 0.0) throw NumericError("kl_divergence: q is zero where p > 0");
            c += pij * std::log(pij / qij);
        }
    }
    return c;
}

/// Exact gradient of kl_divergence(p, student_t_affinities(coords)):
///   dC/dyi = 4 sum_j (p_ij - q_ij) (yi - yj) (1 + |yi - yj|^2)^-1
inline Matrix kl_gradient(const Matrix& p, const Matrix& coords, int threads = 1) {
    const std::size_t n = coords.rows();
    if (p.rows() != n || p.cols() != n) throw DataError("kl_gradient: shape mismatch");
    Matrix w(n, n, 0.0);
    const double z = detail::student_t_weights(coords, w, threads);
    const double inv_z = 1.0 / z;
    Matrix grad(n, 2, 0.0);
    parallel_for(n, threads, [&](std::size_t i) {
        double g0 = 0.0;
        double g1 = 0.0;
        const double yi0 = coords(i, 0);
        const double yi1 = coords(i, 1);
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            const double wij = w(i, j);
            const double coeff = (p(i, j) - wij * inv_z) * wij;
            g0 += coeff * (yi0 - coords(j, 0));
            g1 += coeff * (yi1 - coords(j, 1));
        }
        grad(i, 0) = 4.0 * g0;
        grad(i, 1) = 4.0 * g1;
    });
    return grad;
}

/// Gradient descent with momentum on KL(P || Q). P is scaled by
/// exaggeration_factor for the first exaggeration_iters iterations; the KL
/// trace is always measured against the unexaggerated P, every 10
/// iterations and once after the final update.
inline Embedding embed(const Matrix& p, const EmbedConfig& config,
                       const Matrix* init_coords = nullptr, int threads = 1) {
    config.validate();
    const std::size_t n = p.rows();
    if (p.cols() != n) throw DataError("embed: p must be square");
    if (n < 2) throw DataError("embed: need at least 2 points");

    Embedding result;
    if (config.init == InitMode::provided) {
        if (init_coords == nullptr) throw DataError("embed: init=provided but no coords given");
        if (init_coords->rows() != n || init_coords->cols() != 2)
            throw DataError("embed: provided coords must be N x 2");
        result.coords = *init_coords;
    } else {
        result.coords = Matrix(n, 2, 0.0);
        Xoshiro256 rng(config.seed);
        for (double& v : result.coords.flat()) v = 1e-4 * rng.gaussian();
    }

    const double eta =
        config.learning_rate > 0.0 ? config.learning_rate : 200.0 / std::sqrt(double(n));

    auto recenter = [&](Matrix& y) {
        double m0 = 0.0;
        double m1 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m0 += y(i, 0);
            m1 += y(i, 1);
        }
        m0 /= double(n);
        m1 /= double(n);
        for (std::size_t i = 0; i < n; ++i) {
            y(i, 0) -= m0;
            y(i, 1) -= m1;
        }
    };
    recenter(result.coords);

    Matrix velocity(n, 2, 0.0);
    Matrix w(n, n, 0.0);

    for (int iter = 0; iter < config.iterations; ++iter) {
        const bool exaggerating = iter < config.exaggeration_iters;
        const double p_scale = exaggerating ? config.exaggeration_factor : 1.0;
        const double momentum =
            iter < config.exaggeration_iters ? config.momentum_early : config.momentum_late;

        const double z = detail::student_t_weights(result.coords, w, threads);
        const double inv_z = 1.0 / z;

        if (iter % 10 == 0) {
            double kl = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    if (i == j) continue;
                    const double pij = p(i, j);
                    if (pij > 0.0) kl += pij * std::log(pij / (w(i, j) * inv_z));
                }
            result.kl_trace.emplace_back(iter, kl);
        }

        parallel_for(n, threads, [&](std::size_t i) {
            double g0 = 0.0;
            double g1 = 0.0;
            const double yi0 = result.coords(i, 0);
            const double yi1 = result.coords(i, 1);
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                const double wij = w(i, j);
                const double coeff = (p_scale * p(i, j) - wij * inv_z) * wij;
                g0 += coeff * (yi0 - result.coords(j, 0));
                g1 += coeff * (yi1 - result.coords(j, 1));
            }
            velocity(i, 0) = momentum * velocity(i, 0) - eta * 4.0 * g0;
            velocity(i, 1) = momentum * velocity(i, 1) - eta * 4.0 * g1;
        });
        for (std::size_t i = 0; i < n; ++i) {
            result.coords(i, 0) += velocity(i, 0);
            result.coords(i, 1) += velocity(i, 1);
            if (!std::isfinite(result.coords(i, 0)) || !std::isfinite(result.coords(i, 1)))
                throw NumericError("embed: non-finite coordinate at iteration " +
                                   std::to_string(iter));
        }
        recenter(result.coords);
        result.iteration = iter + 1;
    }

    // final KL against the unexaggerated P
    {
        const auto [q, z] = student_t_affinities(result.coords, threads);
        result.kl_trace.emplace_back(config.iterations, kl_divergence(p, q));
    }
    return result;
}

}  // namespace adapsne
