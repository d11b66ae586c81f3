#pragma once

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "xmodal/index.hpp"
#include "xmodal/transforms.hpp"

namespace xmodal {

/// Which side is being retrieved. Image retrieval ranks images for sentence
/// queries; sentence retrieval ranks sentences for image queries.
enum class Task : uint8_t { image_retrieval = 0, sentence_retrieval = 1 };

/// What counts as a hit when an image query retrieves sentences: any of the
/// image's captions, or only its first one.
enum class HitRule : uint8_t { any_caption = 0, first_caption = 1 };

const char* task_name(Task task);

/// Sentence-to-image links recovered from the sentence pack's group field.
struct GroundTruth {
    std::unordered_map<std::string, std::string> image_of_sentence;
    std::vector<std::pair<std::string, std::vector<std::string>>> captions;  // per image, pack order
    std::unordered_map<std::string, std::size_t> caption_slot;

    /// Every sentence must carry a non-empty group.
    static GroundTruth from_sentence_pack(const FeaturePack& sentences);

    const std::string& image_for(const std::string& sentence_id) const;
    const std::vector<std::string>& captions_for(const std::string& image_id) const;
};

/// One query's retrieved ids, best first. `query_empty` marks queries whose
/// encoded vector had no nonzero components; they retrieve nothing and count
/// as misses.
struct Ranking {
    std::string query_id;
    bool query_empty = false;
    std::vector<std::string> ids;
};

using Rankings = std::vector<Ranking>;

/// Runs every encoded query against the index, keeping the top k_max ids.
/// Parallel across queries; the result does not depend on the thread count.
Rankings run_retrieval(const InvertedIndex& index,
                       std::span<const EncodedItem> queries, std::size_t k_max);

struct RecallReport {
    Task task = Task::image_retrieval;
    std::map<uint32_t, double> recall;  // K -> percentage in [0, 100]
    uint64_t queries = 0;
    uint64_t unretrievable = 0;
};

/// Recall@K over the rankings: the fraction of queries whose correct answer
/// appears in the top K, as a percentage. Empty rankings are misses.
RecallReport recall_at_k(const Rankings& rankings, const GroundTruth& truth,
                         Task task, std::span<const uint32_t> ks,
                         HitRule rule = HitRule::any_caption);

/// Re-orders the first r_m * k entries of each ranking by exact cosine over
/// the original vectors (queries_dense is aligned with `approx`); entries
/// beyond the candidate window are dropped. Shorter rankings re-rank whatever
/// they have. Parallel across queries.
Rankings rerank(const Rankings& approx, const DenseStore& store,
                std::span<const DenseVector> queries_dense, uint32_t r_m,
                uint32_t k);

}  // namespace xmodal
