#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "adapsne/errors.hpp"
#include "adapsne/matrix.hpp"

namespace adapsne {

/// High-dimensional input: N samples by D features. `ids` are 0-based
/// positions in the source file and travel with the samples through
/// sampling.
struct Dataset {
    Matrix features;
    std::vector<std::size_t> ids;

    std::size_t n() const { return features.rows(); }
    std::size_t dim() const { return features.cols(); }
};

inline Dataset make_dataset(Matrix features) {
    Dataset ds;
    ds.ids.resize(features.rows());
    for (std::size_t i = 0; i < features.rows(); ++i) ds.ids[i] = i;
    ds.features = std::move(features);
    return ds;
}

/// Pipeline entry validation. Loading tolerates any N >= 1; the sampling
/// pipeline itself needs at least three samples.
inline void validate_dataset(const Dataset& ds, std::size_t min_rows = 3) {
    if (ds.n() < min_rows)
        throw DataError("dataset has " + std::to_string(ds.n()) + " samples, need at least " +
                        std::to_string(min_rows));
    if (ds.dim() < 1) throw DataError("dataset has zero feature columns");
    if (ds.ids.size() != ds.n()) throw DataError("dataset ids/features size mismatch");
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (double v : ds.features.row(i)) {
            if (!std::isfinite(v))
                throw DataError("non-finite feature value in row " + std::to_string(i));
        }
    }
}

}  // namespace adapsne
