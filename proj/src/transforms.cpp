#include "xmodal/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#include "xmodal/parallel.hpp"

namespace xmodal {

namespace {

/// (weight desc, index asc): strict weak ordering used for every top-z pick.
bool heavier(const SparseEntry& a, const SparseEntry& b) {
    if (a.weight != b.weight) return a.weight > b.weight;
    return a.index < b.index;
}

void keep_top_z(std::vector<SparseEntry>& entries, uint32_t z) {
    if (entries.size() <= z) return;
    std::nth_element(entries.begin(), entries.begin() + z, entries.end(), heavier);
    entries.resize(z);
    std::sort(entries.begin(), entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
}

void require_non_negative(std::span<const float> v) {
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] < 0.0f) {
            throw DomainError("negative component at index " + std::to_string(j) +
                              "; apply c-relu first");
        }
    }
}

void require_non_empty(std::span<const float> v) {
    if (v.empty()) {
        throw DimensionError("cannot transform an empty vector");
    }
}

void require_keep_z(uint32_t keep_z, std::size_t n) {
    if (keep_z > n) {
        throw ConfigError("keep_z " + std::to_string(keep_z) +
                          " exceeds dimensionality " + std::to_string(n));
    }
}

}  // namespace

void TransformConfig::validate(uint32_t output_dim) const {
    if (method == TransformMethod::scalar_quantization && !(scale > 0.0)) {
        throw ConfigError("quantization scale must be positive");
    }
    require_keep_z(keep_z, output_dim);
}

DenseVector crelu(std::span<const float> v) {
    DenseVector out(2 * v.size(), 0.0f);
    for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] > 0.0f) {
            out[j] = v[j];
        } else if (v[j] < 0.0f) {
            out[v.size() + j] = -v[j];
        }
    }
    return out;
}

SparseVector deep_permutation(std::span<const float> v, uint32_t keep_z) {
    require_non_empty(v);
    require_non_negative(v);
    require_keep_z(keep_z, v.size());

    // Positive components ranked by (value desc, index asc); rank r gets
    // weight n - r, so the top-z by weight are exactly the first z ranks.
    std::vector<uint32_t> order;
    order.reserve(v.size());
    for (uint32_t j = 0; j < v.size(); ++j) {
        if (v[j] > 0.0f) order.push_back(j);
    }
    std::sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
        if (v[a] != v[b]) return v[a] > v[b];
        return a < b;
    });

    const uint32_t n = static_cast<uint32_t>(v.size());
    const std::size_t kept =
        keep_z == 0 ? order.size() : std::min<std::size_t>(order.size(), keep_z);

    SparseVector out;
    out.dim = n;
    out.entries.reserve(kept);
    for (std::size_t r = 0; r < kept; ++r) {
        out.entries.push_back({order[r], static_cast<float>(n - r)});
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const SparseEntry& a, const SparseEntry& b) { return a.index < b.index; });
    return out;
}

SparseVector scalar_quantize(std::span<const float> v, double scale, uint32_t keep_z) {
    require_non_empty(v);
    if (!(scale > 0.0)) {
        throw ConfigError("quantization scale must be positive");
    }
    require_non_negative(v);
    require_keep_z(keep_z, v.size());

    SparseVector out;
    out.dim = static_cast<uint32_t>(v.size());
    for (uint32_t j = 0; j < v.size(); ++j) {
        const double w = std::floor(scale * static_cast<double>(v[j]));
        if (w >= 1.0) {
            out.entries.push_back({j, static_cast<float>(w)});
        }
    }
    if (keep_z != 0) {
        keep_top_z(out.entries, keep_z);
    }
    return out;
}

SparseVector sparsify_top_z(const SparseVector& v, uint32_t z) {
    SparseVector out = v;
    keep_top_z(out.entries, z);
    return out;
}

double sparse_cosine(const SparseVector& a, const SparseVector& b) {
    if (a.dim != b.dim) {
        throw DimensionError("sparse cosine on mismatched dims " +
                             std::to_string(a.dim) + " vs " + std::to_string(b.dim));
    }
    if (a.empty() || b.empty()) return 0.0;

    double dot = 0.0;
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.entries.size() && j < b.entries.size()) {
        const uint32_t ai = a.entries[i].index;
        const uint32_t bj = b.entries[j].index;
        if (ai == bj) {
            dot += static_cast<double>(a.entries[i].weight) *
                   static_cast<double>(b.entries[j].weight);
            ++i;
            ++j;
        } else if (ai < bj) {
            ++i;
        } else {
            ++j;
        }
    }
    if (dot == 0.0) return 0.0;
    return dot / (a.norm() * b.norm());
}

SparseVector transform_global(std::span<const float> v, const TransformConfig& config) {
    require_non_empty(v);
    const DenseVector expanded = config.apply_crelu ? crelu(v) : DenseVector(v.begin(), v.end());
    config.validate(static_cast<uint32_t>(expanded.size()));
    switch (config.method) {
        case TransformMethod::deep_permutation:
            return deep_permutation(expanded, config.keep_z);
        case TransformMethod::scalar_quantization:
            return scalar_quantize(expanded, config.scale, config.keep_z);
    }
    throw ConfigError("unknown transform method");
}

std::vector<EncodedItem> transform_pack(const FeaturePack& pack,
                                        const TransformConfig& config) {
    const uint32_t out_dim = config.apply_crelu ? 2 * pack.dim : pack.dim;
    config.validate(out_dim);

    std::vector<EncodedItem> out(pack.items.size());
    std::exception_ptr first_error = nullptr;
    const int64_t n = static_cast<int64_t>(pack.items.size());

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_threads())
#endif
    for (int64_t i = 0; i < n; ++i) {
        const Item& item = pack.items[static_cast<std::size_t>(i)];
        EncodedItem& slot = out[static_cast<std::size_t>(i)];
        slot.id = item.id;
        try {
            if (item.global) {
                slot.vec = transform_global(*item.global, config);
            } else {
                slot.vec.dim = out_dim;
            }
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

uint32_t keep_z_for_sparsity(double f, uint32_t dim) {
    if (!(f >= 0.0) || !(f < 1.0)) {
        throw ConfigError("sparsity factor must lie in [0, 1)");
    }
    if (dim == 0) {
        throw DimensionError("sparsity over zero dimensions");
    }
    const long long z = std::llround((1.0 - f) * static_cast<double>(dim));
    if (z <= 0) {
        throw ConfigError("sparsity factor keeps no components at dim " +
                          std::to_string(dim));
    }
    return static_cast<uint32_t>(z);
}

}  // namespace xmodal
