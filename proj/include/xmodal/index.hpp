#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "xmodal/feature_pack.hpp"
#include "xmodal/transforms.hpp"
#include "xmodal/types.hpp"

namespace xmodal {

struct SearchHit {
    std::string id;
    double score = 0.0;
};

/// Work counters for one query; useful for checking that sparsification
/// actually shrinks the touched volume.
struct QueryStats {
    uint64_t postings_scanned = 0;
    uint64_t candidates = 0;
};

struct Posting {
    uint32_t ordinal = 0;
    float weight = 0.0f;
};

/// Term-at-a-time inverted index over sparse vectors. Scoring is exact cosine
/// via full accumulation over the touched posting lists; items sharing no
/// component with the query never become candidates. Immutable after build;
/// concurrent queries are safe.
class InvertedIndex {
public:
    /// Items must agree on dim, carry unique ids and be non-empty.
    static InvertedIndex build(std::span<const EncodedItem> items,
                               std::optional<Modality> modality = std::nullopt);

    /// Top k by (cosine desc, id asc) over candidates with nonzero overlap.
    /// k must be positive; an empty query returns an empty list.
    std::vector<SearchHit> query_topk(const SparseVector& query, std::size_t k,
                                      QueryStats* stats = nullptr) const;

    uint32_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    std::optional<Modality> modality() const { return modality_; }
    double norm_of(uint32_t ordinal) const { return norms_[ordinal]; }
    std::span<const Posting> postings(uint32_t component) const;
    std::optional<uint32_t> ordinal_of(const std::string& id) const;

    /// Rebuilds every item's sparse vector from the posting lists.
    std::vector<SparseVector> reconstruct_all() const;

    friend void write_index(const InvertedIndex& index,
                            const std::filesystem::path& path);
    friend InvertedIndex load_index(const std::filesystem::path& path);

private:
    InvertedIndex() = default;

    uint32_t dim_ = 0;
    std::optional<Modality> modality_;
    std::vector<std::string> ids_;            // ordinal -> id
    std::vector<double> norms_;               // ordinal -> L2 norm
    std::vector<Posting> postings_;           // all lists, concatenated
    std::vector<std::size_t> list_offsets_;   // dim + 1 offsets into postings_
    std::unordered_map<std::string, uint32_t> ordinal_by_id_;
};

void write_index(const InvertedIndex& index, const std::filesystem::path& path);
InvertedIndex load_index(const std::filesystem::path& path);

/// Original dense vectors retained for exact cosine scoring and re-ranking.
class DenseStore {
public:
    static DenseStore build(std::span<const std::string> ids,
                            std::span<const float> vectors, uint32_t dim);

    /// One row per item that has a global vector.
    static DenseStore from_pack_globals(const FeaturePack& pack);

    /// Top k by (cosine desc, id asc). With `restrict_to` set, only those ids
    /// compete (every one of them must exist). Zero-norm rows score 0.
    std::vector<SearchHit> exact_topk(
        std::span<const float> query, std::size_t k,
        const std::unordered_set<std::string>* restrict_to = nullptr) const;

    /// Batch scan, parallel across queries.
    std::vector<std::vector<SearchHit>> exact_topk_batch(
        std::span<const DenseVector> queries, std::size_t k) const;

    uint32_t dim() const { return dim_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<std::string>& ids() const { return ids_; }
    std::span<const float> vec(uint32_t ordinal) const;
    std::optional<uint32_t> ordinal_of(const std::string& id) const;

private:
    uint32_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<float> data_;
    std::vector<double> norms_;
    std::unordered_map<std::string, uint32_t> ordinal_by_id_;
};

}  // namespace xmodal
