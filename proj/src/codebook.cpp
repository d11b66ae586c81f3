#include "xmodal/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <unordered_map>

#include "xmodal/detail/binary_io.hpp"
#include "xmodal/parallel.hpp"
#include "xmodal/rng.hpp"

namespace xmodal {

namespace {

constexpr char kMagic[4] = {'X', 'M', 'C', 'B'};
constexpr uint16_t kVersion = 1;

double dist2_rows(const float* a, const float* b, uint32_t dim) {
    double d2 = 0.0;
    for (uint32_t j = 0; j < dim; ++j) {
        const double diff = static_cast<double>(a[j]) - static_cast<double>(b[j]);
        d2 += diff * diff;
    }
    return d2;
}

}  // namespace

void Codebook::validate() const {
    if (p == 0 || dim == 0) {
        throw ConfigError("codebook must have positive p and dim");
    }
    if (centroids.size() != static_cast<std::size_t>(p) * dim) {
        throw DimensionError("codebook centroid buffer has wrong size");
    }
    if (!labels.empty() && labels.size() != p) {
        throw ConfigError("codebook label count does not match p");
    }
    for (float x : centroids) {
        if (!std::isfinite(x)) {
            throw DomainError("non-finite centroid component");
        }
    }
}

ConceptPool build_pool(std::span<const FeaturePack* const> packs,
                       std::size_t target_size, bool exclude_stop_words,
                       uint64_t seed) {
    if (packs.empty()) {
        throw ConfigError("pool requires at least one pack");
    }
    if (target_size == 0) {
        throw ConfigError("pool target size must be positive");
    }
    const uint32_t dim = packs.front()->dim;

    std::vector<const Concept*> all;
    bool contextualized = true;
    for (const FeaturePack* pack : packs) {
        if (pack->dim != dim) {
            throw DimensionError("packs disagree on dim: " + std::to_string(pack->dim) +
                                 " vs " + std::to_string(dim));
        }
        contextualized = contextualized && pack->contextualized;
        for (const Item& item : pack->items) {
            for (const Concept& c : item.concepts) {
                if (exclude_stop_words && c.is_stop_word) continue;
                all.push_back(&c);
            }
        }
    }
    if (all.empty()) {
        throw EmptyPoolError("no concepts available for the pool");
    }

    // Seeded sample without replacement; kept in selection order.
    std::vector<std::size_t> pick(all.size());
    for (std::size_t i = 0; i < pick.size(); ++i) pick[i] = i;
    const std::size_t take = std::min(target_size, all.size());
    if (take < all.size()) {
        Rng rng(seed);
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + rng.bounded(pick.size() - i);
            std::swap(pick[i], pick[j]);
        }
    }

    ConceptPool pool;
    pool.dim = dim;
    pool.stop_words_included = !exclude_stop_words;
    pool.from_contextualized = contextualized;
    pool.data.reserve(take * dim);
    pool.words.reserve(take);
    pool.stop_flags.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const Concept& c = *all[pick[i]];
        pool.data.insert(pool.data.end(), c.vector.begin(), c.vector.end());
        pool.words.push_back(c.word);
        pool.stop_flags.push_back(c.is_stop_word ? 1 : 0);
    }
    return pool;
}

void assign_nearest(std::span<const float> points, std::size_t n, uint32_t dim,
                    std::span<const float> centroids, uint32_t p,
                    std::span<uint32_t> out_assign, std::span<double> out_dist2) {
    const int64_t in = static_cast<int64_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_threads())
#endif
    for (int64_t i = 0; i < in; ++i) {
        const float* pt = points.data() + static_cast<std::size_t>(i) * dim;
        uint32_t best = 0;
        double best_d2 = std::numeric_limits<double>::infinity();
        for (uint32_t c = 0; c < p; ++c) {
            const double d2 =
                dist2_rows(pt, centroids.data() + static_cast<std::size_t>(c) * dim, dim);
            if (d2 < best_d2) {
                best_d2 = d2;
                best = c;
            }
        }
        out_assign[static_cast<std::size_t>(i)] = best;
        out_dist2[static_cast<std::size_t>(i)] = best_d2;
    }
}

Codebook kmeans_codebook(const ConceptPool& pool, uint32_t p, uint64_t seed,
                         const KmeansOptions& options, KmeansStats* stats) {
    if (p == 0) throw ConfigError("codebook size must be positive");
    if (pool.size() == 0) throw EmptyPoolError("k-means on an empty pool");
    if (pool.size() < p) {
        throw InsufficientDataError("pool of " + std::to_string(pool.size()) +
                                    " points cannot seed " + std::to_string(p) +
                                    " centroids");
    }
    const std::size_t n = pool.size();
    const uint32_t dim = pool.dim;
    Rng rng(seed);

    std::vector<float> centroids(static_cast<std::size_t>(p) * dim);
    auto centroid_row = [&](uint32_t k) { return centroids.data() + static_cast<std::size_t>(k) * dim; };
    auto point_row = [&](std::size_t i) { return pool.data.data() + i * dim; };

    // kmeans++: first centroid uniform, the rest D^2-weighted. The sampling
    // walk runs serially in point order so the seeded choice is fixed.
    {
        const std::size_t first = rng.bounded(n);
        std::copy_n(point_row(first), dim, centroid_row(0));
        std::vector<double> mind2(n);
        const int64_t in = static_cast<int64_t>(n);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_threads())
#endif
        for (int64_t i = 0; i < in; ++i) {
            mind2[static_cast<std::size_t>(i)] =
                dist2_rows(point_row(static_cast<std::size_t>(i)), centroid_row(0), dim);
        }
        for (uint32_t k = 1; k < p; ++k) {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i) total += mind2[i];
            std::size_t chosen = 0;
            if (total > 0.0) {
                const double r = rng.uniform01() * total;
                double cum = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    cum += mind2[i];
                    if (cum > r) {
                        chosen = i;
                        break;
                    }
                }
            } else {
                chosen = rng.bounded(n);
            }
            std::copy_n(point_row(chosen), dim, centroid_row(k));
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(worker_threads())
#endif
            for (int64_t i = 0; i < in; ++i) {
                const std::size_t idx = static_cast<std::size_t>(i);
                const double d2 = dist2_rows(point_row(idx), centroid_row(k), dim);
                if (d2 < mind2[idx]) mind2[idx] = d2;
            }
        }
    }

    // Lloyd iterations. Accumulation stays serial in point order; only the
    // assignment scan fans out.
    std::vector<uint32_t> assign(n);
    std::vector<double> dist2(n);
    std::vector<double> sums(static_cast<std::size_t>(p) * dim);
    std::vector<std::size_t> counts(p);
    std::vector<float> next(centroids.size());
    std::vector<uint8_t> used(n);

    for (uint32_t iter = 0; iter < options.max_iters; ++iter) {
        assign_nearest(pool.data, n, dim, centroids, p, assign, dist2);

        double objective = 0.0;
        for (std::size_t i = 0; i < n; ++i) objective += dist2[i];
        if (stats) stats->objective.push_back(objective);

        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const uint32_t k = assign[i];
            ++counts[k];
            double* dst = sums.data() + static_cast<std::size_t>(k) * dim;
            const float* src = point_row(i);
            for (uint32_t j = 0; j < dim; ++j) dst[j] += static_cast<double>(src[j]);
        }

        std::fill(used.begin(), used.end(), 0);
        for (uint32_t k = 0; k < p; ++k) {
            float* dst = next.data() + static_cast<std::size_t>(k) * dim;
            if (counts[k] > 0) {
                const double* src = sums.data() + static_cast<std::size_t>(k) * dim;
                const double inv = 1.0 / static_cast<double>(counts[k]);
                for (uint32_t j = 0; j < dim; ++j) {
                    dst[j] = static_cast<float>(src[j] * inv);
                }
            } else {
                // Reseed to the point currently farthest from its centroid,
                // skipping points already consumed by an earlier reseed.
                std::size_t far = n;
                double far_d2 = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (!used[i] && dist2[i] > far_d2) {
                        far_d2 = dist2[i];
                        far = i;
                    }
                }
                used[far] = 1;
                std::copy_n(point_row(far), dim, dst);
                if (stats) ++stats->reseeds;
            }
        }

        double max_disp = 0.0;
        for (uint32_t k = 0; k < p; ++k) {
            const double d2 = dist2_rows(centroid_row(k),
                                         next.data() + static_cast<std::size_t>(k) * dim, dim);
            max_disp = std::max(max_disp, std::sqrt(d2));
        }
        centroids = next;
        if (stats) stats->iterations = iter + 1;
        if (max_disp < options.tol) break;
    }

    Codebook cb;
    cb.p = p;
    cb.dim = dim;
    cb.method = CodebookMethod::kmeans;
    cb.built_with_stop_words = pool.stop_words_included;
    cb.built_contextualized = pool.from_contextualized;
    cb.centroids = std::move(centroids);
    cb.validate();
    return cb;
}

Codebook build_word_codebook(std::span<const FeaturePack* const> packs, uint32_t p,
                             const std::unordered_set<std::string>& dictionary,
                             const std::unordered_set<std::string>& stop_words) {
    if (packs.empty()) {
        throw ConfigError("word codebook requires at least one pack");
    }
    if (p == 0) throw ConfigError("codebook size must be positive");
    const uint32_t dim = packs.front()->dim;

    // Count every occurrence of a qualifying word. std::map keeps words
    // ordered so count ties resolve to the lexicographically smaller word.
    std::map<std::string, uint64_t> counts;
    bool contextualized = true;
    for (const FeaturePack* pack : packs) {
        if (pack->dim != dim) {
            throw DimensionError("packs disagree on dim");
        }
        contextualized = contextualized && pack->contextualized;
        for (const Item& item : pack->items) {
            for (const Concept& c : item.concepts) {
                if (c.word.empty()) continue;
                if (!dictionary.contains(c.word)) continue;
                if (stop_words.contains(c.word)) continue;
                ++counts[c.word];
            }
        }
    }
    if (counts.size() < p) {
        throw InsufficientDataError("only " + std::to_string(counts.size()) +
                                    " distinct words available, need " +
                                    std::to_string(p));
    }

    std::vector<std::pair<std::string, uint64_t>> ranked(counts.begin(), counts.end());
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    ranked.resize(p);

    std::unordered_map<std::string, uint32_t> slot;
    slot.reserve(p);
    for (uint32_t k = 0; k < p; ++k) slot.emplace(ranked[k].first, k);

    std::vector<double> sums(static_cast<std::size_t>(p) * dim, 0.0);
    std::vector<uint64_t> hits(p, 0);
    for (const FeaturePack* pack : packs) {
        for (const Item& item : pack->items) {
            for (const Concept& c : item.concepts) {
                if (c.word.empty()) continue;
                auto it = slot.find(c.word);
                if (it == slot.end()) continue;
                double* dst = sums.data() + static_cast<std::size_t>(it->second) * dim;
                for (uint32_t j = 0; j < dim; ++j) {
                    dst[j] += static_cast<double>(c.vector[j]);
                }
                ++hits[it->second];
            }
        }
    }

    Codebook cb;
    cb.p = p;
    cb.dim = dim;
    cb.method = CodebookMethod::word_frequency;
    cb.built_with_stop_words = false;
    cb.built_contextualized = contextualized;
    cb.centroids.resize(static_cast<std::size_t>(p) * dim);
    cb.labels.reserve(p);
    for (uint32_t k = 0; k < p; ++k) {
        cb.labels.push_back(ranked[k].first);
        const double inv = 1.0 / static_cast<double>(hits[k]);
        for (uint32_t j = 0; j < dim; ++j) {
            cb.centroids[static_cast<std::size_t>(k) * dim + j] =
                static_cast<float>(sums[static_cast<std::size_t>(k) * dim + j] * inv);
        }
    }
    cb.validate();
    return cb;
}

std::unordered_set<std::string> load_word_list(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open word list: " + path.string());
    }
    std::unordered_set<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' ||
                                 line.back() == '\t')) {
            line.pop_back();
        }
        if (!line.empty()) words.insert(line);
    }
    return words;
}

void write_codebook(const Codebook& cb, const std::filesystem::path& path) {
    cb.validate();
    detail::BinWriter w(path);
    w.bytes(kMagic, 4);
    w.u16(kVersion);
    w.u8(static_cast<uint8_t>(cb.method));
    w.u32(cb.p);
    w.u32(cb.dim);
    uint8_t flags = 0;
    if (cb.built_with_stop_words) flags |= 0x01;
    if (cb.built_contextualized) flags |= 0x02;
    w.u8(flags);
    for (uint32_t k = 0; k < cb.p; ++k) {
        w.str16(cb.labels.empty() ? std::string() : cb.labels[k]);
        w.f32_array(cb.centroids.data() + static_cast<std::size_t>(k) * cb.dim, cb.dim);
    }
    w.finish();
}

Codebook load_codebook(const std::filesystem::path& path) {
    detail::BinReader r(path);
    r.expect_magic(kMagic, "codebook");
    const uint16_t version = r.u16();
    if (version != kVersion) {
        throw FormatError("unsupported codebook version " + std::to_string(version) +
                          ": " + r.path());
    }
    const uint8_t method = r.u8();
    if (method > 1) {
        throw FormatError("bad codebook method byte in " + r.path());
    }
    Codebook cb;
    cb.method = static_cast<CodebookMethod>(method);
    cb.p = r.u32();
    cb.dim = r.u32();
    if (cb.p == 0 || cb.dim == 0) {
        throw FormatError("zero p or dim in " + r.path());
    }
    const uint8_t flags = r.u8();
    if (flags & ~0x03) {
        throw FormatError("unknown flag bits in " + r.path());
    }
    cb.built_with_stop_words = (flags & 0x01) != 0;
    cb.built_contextualized = (flags & 0x02) != 0;
    cb.centroids.resize(static_cast<std::size_t>(cb.p) * cb.dim);
    cb.labels.resize(cb.p);
    bool any_label = false;
    for (uint32_t k = 0; k < cb.p; ++k) {
        cb.labels[k] = r.str16();
        any_label = any_label || !cb.labels[k].empty();
        r.f32_array(cb.centroids.data() + static_cast<std::size_t>(k) * cb.dim, cb.dim);
    }
    if (!any_label) cb.labels.clear();
    r.expect_end("codebook");
    cb.validate();
    return cb;
}

}  // namespace xmodal
