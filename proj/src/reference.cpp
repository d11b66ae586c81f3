#include "xmodal/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace xmodal::ref {

namespace {

bool better(const ScanHit& a, const ScanHit& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.id < b.id;
}

}  // namespace

std::vector<ScanHit> sparse_topk_scan(std::span<const EncodedItem> corpus,
                                      const SparseVector& query, std::size_t k) {
    std::vector<ScanHit> hits;
    for (const EncodedItem& item : corpus) {
        const double s = sparse_cosine(query, item.vec);
        if (s != 0.0) {
            hits.push_back({item.id, s});
        }
    }
    std::sort(hits.begin(), hits.end(), better);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

std::vector<ScanHit> dense_topk_scan(std::span<const float> vectors,
                                     std::span<const std::string> ids,
                                     std::size_t dim, std::span<const float> query,
                                     std::size_t k) {
    double qss = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
        qss += static_cast<double>(query[j]) * static_cast<double>(query[j]);
    }
    const double qnorm = std::sqrt(qss);

    std::vector<ScanHit> hits;
    hits.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const float* row = vectors.data() + i * dim;
        double dot = 0.0;
        double ss = 0.0;
        for (std::size_t j = 0; j < dim; ++j) {
            dot += static_cast<double>(query[j]) * static_cast<double>(row[j]);
            ss += static_cast<double>(row[j]) * static_cast<double>(row[j]);
        }
        const double norm = std::sqrt(ss);
        const double s = (qnorm > 0.0 && norm > 0.0) ? dot / (qnorm * norm) : 0.0;
        hits.push_back({ids[i], s});
    }
    std::sort(hits.begin(), hits.end(), better);
    if (hits.size() > k) hits.resize(k);
    return hits;
}

uint32_t nearest_centroid_scan(std::span<const float> v,
                               std::span<const float> centroids, uint32_t p,
                               uint32_t dim) {
    uint32_t best = 0;
    double best_d2 = std::numeric_limits<double>::infinity();
    for (uint32_t c = 0; c < p; ++c) {
        const float* row = centroids.data() + static_cast<std::size_t>(c) * dim;
        double d2 = 0.0;
        for (uint32_t j = 0; j < dim; ++j) {
            const double diff = static_cast<double>(v[j]) - static_cast<double>(row[j]);
            d2 += diff * diff;
        }
        if (d2 < best_d2) {
            best_d2 = d2;
            best = c;
        }
    }
    return best;
}

void assign_nearest_serial(std::span<const float> points, std::size_t n,
                           uint32_t dim, std::span<const float> centroids,
                           uint32_t p, std::span<uint32_t> out_assign,
                           std::span<double> out_dist2) {
    for (std::size_t i = 0; i < n; ++i) {
        const float* pt = points.data() + i * dim;
        uint32_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (uint32_t c = 0; c < p; ++c) {
            const float* row = centroids.data() + static_cast<std::size_t>(c) * dim;
            double d2 = 0.0;
            for (uint32_t j = 0; j < dim; ++j) {
                const double diff =
                    static_cast<double>(pt[j]) - static_cast<double>(row[j]);
                d2 += diff * diff;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = c;
            }
        }
        out_assign[i] = best;
        out_dist2[i] = best_d2;
    }
}

}  // namespace xmodal::ref
