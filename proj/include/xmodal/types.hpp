#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "xmodal/errors.hpp"

namespace xmodal {

using DenseVector = std::vector<float>;

enum class Modality : uint8_t { image = 0, sentence = 1 };

struct SparseEntry {
    uint32_t index = 0;
    float weight = 0.0f;

    friend bool operator==(const SparseEntry&, const SparseEntry&) = default;
};

/// Sparse vector over a fixed dimensionality. Entries are kept sorted by
/// strictly increasing component index and never store a zero or negative
/// weight; an empty entry list is a valid (all-zero) vector.
struct SparseVector {
    uint32_t dim = 0;
    std::vector<SparseEntry> entries;

    std::size_t nnz() const { return entries.size(); }
    bool empty() const { return entries.empty(); }

    /// L2 norm, accumulated in double in ascending index order.
    double norm() const;

    /// Throws DomainError/DimensionError if the invariants above are broken.
    void check_invariants() const;

    friend bool operator==(const SparseVector&, const SparseVector&) = default;
};

}  // namespace xmodal
