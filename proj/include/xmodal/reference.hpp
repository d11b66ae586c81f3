#pragma once

// Serial reference implementations. Tests use these exhaustive scans as
// correctness oracles for the indexed/parallel paths, and the benchmark uses
// them as its single-thread baseline. They share no code with the paths they
// check beyond the core vector types.

#include <span>
#include <string>
#include <vector>

#include "xmodal/transforms.hpp"
#include "xmodal/types.hpp"

namespace xmodal::ref {

struct ScanHit {
    std::string id;
    double score = 0.0;
};

/// Brute-force sparse cosine over every corpus entry; top k by
/// (score desc, id asc). Entries with zero cosine are skipped.
std::vector<ScanHit> sparse_topk_scan(std::span<const EncodedItem> corpus,
                                      const SparseVector& query, std::size_t k);

/// Brute-force dense cosine over row-major `vectors` (ids.size() rows); top k
/// by (score desc, id asc). Zero-norm rows and zero-norm queries score 0 and
/// are kept, so ranking over them is purely id order.
std::vector<ScanHit> dense_topk_scan(std::span<const float> vectors,
                                     std::span<const std::string> ids,
                                     std::size_t dim, std::span<const float> query,
                                     std::size_t k);

/// Nearest centroid of `v` among `centroids` (p rows, row-major) by squared
/// L2 distance, ties to the lowest index.
uint32_t nearest_centroid_scan(std::span<const float> v,
                               std::span<const float> centroids, uint32_t p,
                               uint32_t dim);

/// Serial twin of the parallel assignment kernel: fills `out_assign[i]` and
/// `out_dist2[i]` for every row of `points`.
void assign_nearest_serial(std::span<const float> points, std::size_t n,
                           uint32_t dim, std::span<const float> centroids,
                           uint32_t p, std::span<uint32_t> out_assign,
                           std::span<double> out_dist2);

}  // namespace xmodal::ref
