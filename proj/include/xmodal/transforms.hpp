#pragma once

#include <span>
#include <string>
#include <vector>

#include "xmodal/feature_pack.hpp"
#include "xmodal/types.hpp"

namespace xmodal {

enum class TransformMethod : uint8_t {
    deep_permutation = 0,
    scalar_quantization = 1,
};

/// How a single global vector becomes a sparse one.
struct TransformConfig {
    TransformMethod method = TransformMethod::deep_permutation;
    double scale = 1000.0;  // scalar quantization only
    uint32_t keep_z = 0;    // top-z to keep; 0 means keep everything
    bool apply_crelu = true;

    void validate(uint32_t output_dim) const;
};

/// Concatenates v with its negation and clips negatives: out[j] = max(v[j], 0),
/// out[d + j] = max(-v[j], 0). Doubles the dimensionality and preserves the
/// L2 norm.
DenseVector crelu(std::span<const float> v);

/// Rank-based weights: the r-th largest positive component (0-based r, ties by
/// ascending index) gets weight n - r, where n = v.size(). Zero components are
/// dropped entirely; keep_z = 0 keeps all positive components. Negative
/// components throw DomainError.
SparseVector deep_permutation(std::span<const float> v, uint32_t keep_z = 0);

/// weight[j] = floor(scale * v[j]); components that quantize below 1 are
/// dropped. keep_z = 0 keeps everything; otherwise the keep_z largest weights
/// survive (ties by ascending index). Negative components throw DomainError.
SparseVector scalar_quantize(std::span<const float> v, double scale = 1000.0,
                             uint32_t keep_z = 0);

/// Keeps the z entries with the largest weights (ties by ascending index);
/// z >= nnz is a no-op and z = 0 empties the vector.
SparseVector sparsify_top_z(const SparseVector& v, uint32_t z);

/// Cosine over the sparse representations; 0 whenever either side is empty.
/// The dot product is accumulated in double in ascending index order.
double sparse_cosine(const SparseVector& a, const SparseVector& b);

/// Full pipeline for one vector: optional c-relu, then the configured method.
SparseVector transform_global(std::span<const float> v, const TransformConfig& config);

struct EncodedItem {
    std::string id;
    SparseVector vec;
};

/// Applies `config` to every item's global vector, in item order. Items
/// without a global produce an empty vector of the output dimensionality.
/// Parallel across items; the result does not depend on the thread count.
std::vector<EncodedItem> transform_pack(const FeaturePack& pack,
                                        const TransformConfig& config);

/// Number of components kept at sparsity factor f in [0, 1):
/// round((1 - f) * dim). Throws ConfigError if f is out of range or rounding
/// would keep nothing.
uint32_t keep_z_for_sparsity(double f, uint32_t dim);

}  // namespace xmodal
