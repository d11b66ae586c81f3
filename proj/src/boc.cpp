#include "xmodal/boc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>

#include "xmodal/parallel.hpp"

namespace xmodal {

namespace {

void check_concept_dim(const DenseVector& v, const Codebook& cb) {
    if (v.size() != cb.dim) {
        throw DimensionError("concept vector has " + std::to_string(v.size()) +
                             " components, codebook expects " + std::to_string(cb.dim));
    }
}

double l2_distance(const DenseVector& v, std::span<const float> centroid) {
    double d2 = 0.0;
    for (std::size_t j = 0; j < centroid.size(); ++j) {
        const double diff = static_cast<double>(v[j]) - static_cast<double>(centroid[j]);
        d2 += diff * diff;
    }
    return std::sqrt(d2);
}

double to_similarity(double d, SimilarityTransform transform) {
    switch (transform) {
        case SimilarityTransform::one_over_one_plus_d:
            return 1.0 / (1.0 + d);
        case SimilarityTransform::one_over_one_minus_d:
            return d < 1.0 ? 1.0 / (1.0 - d) : 0.0;
    }
    throw ConfigError("unknown similarity transform");
}

}  // namespace

void BocConfig::validate(uint32_t p) const {
    if (row_keep_z > p) {
        throw ConfigError("row_keep_z " + std::to_string(row_keep_z) +
                          " exceeds codebook size " + std::to_string(p));
    }
}

SparseVector hard_assign(std::span<const DenseVector> concepts, const Codebook& cb) {
    SparseVector out;
    out.dim = cb.p;
    if (concepts.empty()) return out;

    std::vector<uint32_t> histogram(cb.p, 0);
    for (const DenseVector& v : concepts) {
        check_concept_dim(v, cb);
        uint32_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (uint32_t k = 0; k < cb.p; ++k) {
            const float* row = cb.centroids.data() + static_cast<std::size_t>(k) * cb.dim;
            double d2 = 0.0;
            for (uint32_t j = 0; j < cb.dim; ++j) {
                const double diff =
                    static_cast<double>(v[j]) - static_cast<double>(row[j]);
                d2 += diff * diff;
            }
            if (d2 < best_d2) {
                best_d2 = d2;
                best = k;
            }
        }
        ++histogram[best];
    }
    for (uint32_t k = 0; k < cb.p; ++k) {
        if (histogram[k] > 0) {
            out.entries.push_back({k, static_cast<float>(histogram[k])});
        }
    }
    return out;
}

SparseVector soft_assign(std::span<const DenseVector> concepts, const Codebook& cb,
                         const BocConfig& config) {
    config.validate(cb.p);
    const uint32_t z = config.row_keep_z == 0 ? cb.p : config.row_keep_z;

    SparseVector out;
    out.dim = cb.p;
    if (concepts.empty()) return out;

    std::vector<double> acc(cb.p, 0.0);
    std::vector<std::pair<double, uint32_t>> row;
    row.reserve(cb.p);
    for (const DenseVector& v : concepts) {
        check_concept_dim(v, cb);
        row.clear();
        for (uint32_t k = 0; k < cb.p; ++k) {
            const double s = to_similarity(l2_distance(v, cb.centroid(k)), config.similarity);
            if (s > 0.0) row.emplace_back(s, k);
        }
        // Row-level top-z by (similarity desc, centroid asc).
        if (row.size() > z) {
            std::nth_element(row.begin(), row.begin() + z, row.end(),
                             [](const auto& a, const auto& b) {
                                 if (a.first != b.first) return a.first > b.first;
                                 return a.second < b.second;
                             });
            row.resize(z);
            // Restore ascending centroid order so the accumulation below is
            // a fixed sequence of additions.
            std::sort(row.begin(), row.end(),
                      [](const auto& a, const auto& b) { return a.second < b.second; });
        }
        for (const auto& [s, k] : row) {
            if (config.aggregation == Aggregation::sum) {
                acc[k] += s;
            } else {
                acc[k] = std::max(acc[k], s);
            }
        }
    }
    for (uint32_t k = 0; k < cb.p; ++k) {
        if (acc[k] > 0.0) {
            out.entries.push_back({k, static_cast<float>(acc[k])});
        }
    }
    return out;
}

std::vector<EncodedItem> encode_pack(const FeaturePack& pack, const Codebook& cb,
                                     const BocConfig& config) {
    if (pack.dim != cb.dim) {
        throw DimensionError("pack dim " + std::to_string(pack.dim) +
                             " does not match codebook dim " + std::to_string(cb.dim));
    }
    config.validate(cb.p);

    std::vector<EncodedItem> out(pack.items.size());
    std::exception_ptr first_error = nullptr;
    const int64_t n = static_cast<int64_t>(pack.items.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) num_threads(worker_threads())
#endif
    for (int64_t i = 0; i < n; ++i) {
        const Item& item = pack.items[static_cast<std::size_t>(i)];
        EncodedItem& slot = out[static_cast<std::size_t>(i)];
        slot.id = item.id;
        try {
            std::vector<DenseVector> concepts;
            concepts.reserve(item.concepts.size());
            for (const Concept& c : item.concepts) {
                if (config.exclude_stop_words && c.is_stop_word) continue;
                concepts.push_back(c.vector);
            }
            slot.vec = config.assignment == Assignment::hard
                           ? hard_assign(concepts, cb)
                           : soft_assign(concepts, cb, config);
        } catch (...) {
#ifdef _OPENMP
#pragma omp critical
#endif
            {
                if (!first_error) first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace xmodal
