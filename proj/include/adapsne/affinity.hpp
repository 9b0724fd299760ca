#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "adapsne/dataset.hpp"
#include "adapsne/errors.hpp"
#include "adapsne/matrix.hpp"
#include "adapsne/parallel.hpp"

// High-dimensional probability model: squared distances, per-point Gaussian
// conditional affinities p_{j|i}, local perplexity R_i, the |R_i - target|
// objective searched by the bandwidth optimizer, and the analytic derivative
// of the neighbor entropy with respect to the bandwidth.
//
// Entropy here is base-2 (R = 2^H); the grid module uses natural log.

namespace adapsne {

inline constexpr double kLn2 = 0.6931471805599453094;

/// Squared Euclidean distance matrix. Symmetric, zero diagonal.
inline Matrix pairwise_sq_dists(const Dataset& data, int threads = 1) {
    validate_dataset(data);
    const std::size_t n = data.n();
    const std::size_t d = data.dim();
    Matrix d2(n, n, 0.0);
    // each (i, j) pair is computed once and mirrored, so the matrix is
    // symmetric by construction
    parallel_for(n, threads, [&](std::size_t i) {
        const auto xi = data.features.row(i);
        for (std::size_t j = i + 1; j < n; ++j) {
            const auto xj = data.features.row(j);
            double acc = 0.0;
            for (std::size_t k = 0; k < d; ++k) {
                const double diff = xi[k] - xj[k];
                acc += diff * diff;
            }
            d2(i, j) = acc;
        }
    });
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < i; ++j) d2(i, j) = d2(j, i);
    return d2;
}

/// Gaussian conditional affinity row p_{j|i} for bandwidth sigma_i.
///
/// Exponents are shifted by the row maximum before exponentiation, so the
/// row never underflows to an all-zero sum. A row whose off-diagonal
/// distances are all zero is uniform; `degenerate` (when given) is set in
/// that case.
inline std::vector<double> conditional_row(std::span<const double> d2_row, std::size_t i,
                                           double sigma_i, bool* degenerate = nullptr) {
    const std::size_t n = d2_row.size();
    if (n < 2) throw DataError("conditional_row: need at least 2 points, got " + std::to_string(n));
    if (i >= n) throw DataError("conditional_row: self index out of range");
    if (!(sigma_i > 0.0)) throw DataError("conditional_row: sigma must be positive");
    if (d2_row[i] != 0.0) throw DataError("conditional_row: nonzero self distance");

    double dmin = std::numeric_limits<double>::infinity();
    double dmax = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        dmin = std::min(dmin, d2_row[j]);
        dmax = std::max(dmax, d2_row[j]);
    }
    if (degenerate) *degenerate = (dmax == 0.0);

    std::vector<double> p(n, 0.0);
    const double inv = 1.0 / (2.0 * sigma_i * sigma_i);
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double w = std::exp((dmin - d2_row[j]) * inv);
        p[j] = w;
        sum += w;
    }
    const double norm = 1.0 / sum;
    for (std::size_t j = 0; j < n; ++j) p[j] *= norm;
    p[i] = 0.0;
    return p;
}

/// Shannon entropy of a conditional row, in bits. Zero entries contribute 0.
inline double neighbor_entropy_bits(std::span<const double> p_row) {
    double h = 0.0;
    for (double p : p_row) {
        if (p > 0.0) h -= p * std::log2(p);
    }
    return h;
}

/// Local perplexity R = 2^H of a conditional affinity row.
inline double local_perplexity(std::span<const double> p_row) {
    double sum = 0.0;
    for (double p : p_row) sum += p;
    if (std::abs(sum - 1.0) > 1e-6)
        throw DataError("local_perplexity: row does not sum to 1 (sum=" + std::to_string(sum) + ")");
    return std::exp2(neighbor_entropy_bits(p_row));
}

inline void validate_target_perplexity(double target, std::size_t n) {
    if (!(target > 1.0) || !(target <= static_cast<double>(n - 1)))
        throw DataError("target perplexity " + std::to_string(target) + " outside (1, " +
                        std::to_string(n - 1) + "]");
}

/// Bandwidth-search objective |R_i(sigma_i) - target|.
inline double perplexity_error(double sigma_i, std::span<const double> d2_row, std::size_t i,
                               double target) {
    validate_target_perplexity(target, d2_row.size());
    const std::vector<double> p = conditional_row(d2_row, i, sigma_i);
    return std::abs(local_perplexity(p) - target);
}

/// Analytic dH/dsigma of the neighbor entropy (bits) at sigma_i:
///
///   dH/dsigma = -(1 / (sigma^3 ln 2)) * sum_{j != i} p_{j|i} (d2_ij - D_i) (ln p_{j|i} + 1)
///
/// with D_i = sum_k p_{k|i} d2_ik. dR/dsigma follows as R ln(2) dH/dsigma.
/// Terms with p = 0 vanish in the limit and are skipped.
inline double perplexity_entropy_derivative(double sigma_i, std::span<const double> d2_row,
                                            std::size_t i) {
    const std::vector<double> p = conditional_row(d2_row, i, sigma_i);
    double d_mean = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) d_mean += p[j] * d2_row[j];
    double acc = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
        if (j == i || p[j] <= 0.0) continue;
        acc += p[j] * (d2_row[j] - d_mean) * (std::log(p[j]) + 1.0);
    }
    return -acc / (sigma_i * sigma_i * sigma_i * kLn2);
}

/// Joint affinities p_ij = (p_{i|j} + p_{j|i}) / (2N). Symmetric, zero
/// diagonal, sums to 1.
inline Matrix symmetrize(const Matrix& cond) {
    const std::size_t n = cond.rows();
    if (cond.cols() != n) throw DataError("symmetrize: matrix must be square");
    for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (double v : cond.row(i)) sum += v;
        if (std::abs(sum - 1.0) > 1e-6)
            throw DataError("symmetrize: conditional row " + std::to_string(i) +
                            " does not sum to 1");
        if (cond(i, i) != 0.0)
            throw DataError("symmetrize: nonzero diagonal at row " + std::to_string(i));
    }
    Matrix joint(n, n, 0.0);
    const double scale = 1.0 / (2.0 * static_cast<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = (cond(i, j) + cond(j, i)) * scale;
            joint(i, j) = v;
            joint(j, i) = v;
        }
    }
    return joint;
}

struct SigmaBounds {
    double lo = 0.0;
    double hi = 0.0;
};

/// Scale-invariant default search bounds: [1e-3, 1e3] times the median
/// nonzero pairwise distance. All-duplicate datasets fall back to [1e-3, 1e3].
inline SigmaBounds sigma_bounds(const Matrix& d2) {
    std::vector<double> dist;
    dist.reserve(d2.rows() * (d2.rows() - 1) / 2);
    for (std::size_t i = 0; i < d2.rows(); ++i)
        for (std::size_t j = i + 1; j < d2.cols(); ++j)
            if (d2(i, j) > 0.0) dist.push_back(std::sqrt(d2(i, j)));
    double median = 1.0;
    if (!dist.empty()) {
        const std::size_t mid = dist.size() / 2;
        std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
        median = dist[mid];
    }
    return {1e-3 * median, 1e3 * median};
}

}  // namespace adapsne
