#pragma once

#include <span>
#include <vector>

#include "xmodal/codebook.hpp"
#include "xmodal/transforms.hpp"
#include "xmodal/types.hpp"

namespace xmodal {

enum class Assignment : uint8_t { hard = 0, soft = 1 };

/// How per-concept similarity rows are collapsed into one weight per centroid.
enum class Aggregation : uint8_t { max = 0, sum = 1 };

/// L2-distance-to-similarity conversion for soft assignment.
enum class SimilarityTransform : uint8_t {
    /// 1 / (1 + d): positive and bounded by 1; the default.
    one_over_one_plus_d = 0,
    /// 1 / (1 - d): keeps only entries with d < 1, everything else drops to
    /// zero (the denominator would be zero or negative).
    one_over_one_minus_d = 1,
};

struct BocConfig {
    Assignment assignment = Assignment::hard;
    Aggregation aggregation = Aggregation::sum;  // soft only
    uint32_t row_keep_z = 0;                     // soft only; 0 = keep all p
    SimilarityTransform similarity = SimilarityTransform::one_over_one_plus_d;
    bool exclude_stop_words = false;             // drop stop-word concepts before encoding

    void validate(uint32_t p) const;
};

/// Histogram over nearest centroids: weight of centroid k = number of
/// concepts whose nearest centroid is k (ties to the lowest index). The output
/// dimensionality is the codebook size; no concepts means an empty vector.
SparseVector hard_assign(std::span<const DenseVector> concepts, const Codebook& cb);

/// Soft assignment: each concept contributes a similarity row over all
/// centroids, the row keeps its row_keep_z largest values (ties to the lowest
/// centroid index), and rows collapse per centroid by max or sum. Weights
/// accumulate in double, in concept order, and round to float once at the end.
SparseVector soft_assign(std::span<const DenseVector> concepts, const Codebook& cb,
                         const BocConfig& config);

/// Encodes every item of the pack against the codebook, in item order.
/// Parallel across items; the result does not depend on the thread count.
std::vector<EncodedItem> encode_pack(const FeaturePack& pack, const Codebook& cb,
                                     const BocConfig& config);

}  // namespace xmodal
