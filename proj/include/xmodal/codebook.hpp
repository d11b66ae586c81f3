#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <unordered_set>
#include <vector>

#include "xmodal/feature_pack.hpp"
#include "xmodal/types.hpp"

namespace xmodal {

enum class CodebookMethod : uint8_t {
    kmeans = 0,
    word_frequency = 1,
};

/// p centroids over the concept space, plus build metadata that downstream
/// encodings must agree with.
struct Codebook {
    uint32_t p = 0;
    uint32_t dim = 0;
    CodebookMethod method = CodebookMethod::kmeans;
    bool built_with_stop_words = true;
    bool built_contextualized = false;
    std::vector<float> centroids;     // row-major, p * dim
    std::vector<std::string> labels;  // empty, or one label per centroid

    std::span<const float> centroid(uint32_t k) const {
        return {centroids.data() + static_cast<std::size_t>(k) * dim, dim};
    }

    void validate() const;
};

/// Flat sample of concept vectors drawn from one or more packs.
struct ConceptPool {
    uint32_t dim = 0;
    std::vector<float> data;  // row-major, size() * dim
    std::vector<std::string> words;
    std::vector<uint8_t> stop_flags;
    bool stop_words_included = true;
    bool from_contextualized = false;

    std::size_t size() const { return stop_flags.size(); }
    std::span<const float> vec(std::size_t i) const {
        return {data.data() + i * dim, dim};
    }
};

/// Collects concept vectors across packs, optionally skipping stop words,
/// then downsamples to at most `target_size` without replacement (seeded).
ConceptPool build_pool(std::span<const FeaturePack* const> packs,
                       std::size_t target_size, bool exclude_stop_words,
                       uint64_t seed);

struct KmeansOptions {
    uint32_t max_iters = 100;
    double tol = 1e-4;  // max centroid displacement that counts as converged
};

/// Per-iteration objective is the sum of squared distances to the assigned
/// centroid, measured right after the assignment step.
struct KmeansStats {
    std::vector<double> objective;
    uint32_t iterations = 0;
    uint32_t reseeds = 0;
};

/// Lloyd's algorithm with kmeans++ seeding. Deterministic for a given pool,
/// p and seed regardless of thread count. Empty clusters are reseeded to the
/// point farthest from its assigned centroid.
Codebook kmeans_codebook(const ConceptPool& pool, uint32_t p, uint64_t seed,
                         const KmeansOptions& options = {},
                         KmeansStats* stats = nullptr);

/// Selects the p most frequent dictionary words over all labeled concepts
/// (stop words excluded, count ties broken by ascending word) and uses the
/// mean embedding of each word's occurrences as its centroid.
Codebook build_word_codebook(std::span<const FeaturePack* const> packs, uint32_t p,
                             const std::unordered_set<std::string>& dictionary,
                             const std::unordered_set<std::string>& stop_words);

/// One word per line; blank lines ignored.
std::unordered_set<std::string> load_word_list(const std::filesystem::path& path);

void write_codebook(const Codebook& cb, const std::filesystem::path& path);
Codebook load_codebook(const std::filesystem::path& path);

/// Nearest-centroid assignment for every row of `points`: squared L2, ties to
/// the lowest centroid index. Parallel across points; `out_dist2` receives the
/// winning squared distance.
void assign_nearest(std::span<const float> points, std::size_t n, uint32_t dim,
                    std::span<const float> centroids, uint32_t p,
                    std::span<uint32_t> out_assign, std::span<double> out_dist2);

}  // namespace xmodal
