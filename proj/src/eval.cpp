#include "xmodal/eval.hpp"

#include <algorithm>
#include <exception>
#include <unordered_set>

#include "xmodal/parallel.hpp"

namespace xmodal {

const char* task_name(Task task) {
    switch (task) {
        case Task::image_retrieval:
            return "image_retrieval";
        case Task::sentence_retrieval:
            return "sentence_retrieval";
    }
    return "unknown";
}

GroundTruth GroundTruth::from_sentence_pack(const FeaturePack& sentences) {
    GroundTruth gt;
    gt.image_of_sentence.reserve(sentences.items.size());
    for (const Item& item : sentences.items) {
        if (item.group.empty()) {
            throw ConfigError("sentence " + item.id + " has no image group");
        }
        gt.image_of_sentence.emplace(item.id, item.group);
        auto [slot, inserted] = gt.caption_slot.emplace(item.group, gt.captions.size());
        if (inserted) {
            gt.captions.emplace_back(item.group, std::vector<std::string>{});
        }
        gt.captions[slot->second].second.push_back(item.id);
    }
    return gt;
}

const std::string& GroundTruth::image_for(const std::string& sentence_id) const {
    auto it = image_of_sentence.find(sentence_id);
    if (it == image_of_sentence.end()) {
        throw UnknownIdError("sentence id not in ground truth: " + sentence_id);
    }
    return it->second;
}

const std::vector<std::string>& GroundTruth::captions_for(
    const std::string& image_id) const {
    auto it = caption_slot.find(image_id);
    if (it == caption_slot.end()) {
        throw UnknownIdError("image id not in ground truth: " + image_id);
    }
    return captions[it->second].second;
}

Rankings run_retrieval(const InvertedIndex& index,
                       std::span<const EncodedItem> queries, std::size_t k_max) {
    if (k_max == 0) {
        throw ConfigError("k_max must be positive");
    }
    Rankings out(queries.size());
    std::exception_ptr first_error = nullptr;
    const int64_t n = static_cast<int64_t>(queries.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_threads())
#endif
    for (int64_t i = 0; i < n; ++i) {
        const EncodedItem& q = queries[static_cast<std::size_t>(i)];
        Ranking& slot = out[static_cast<std::size_t>(i)];
        slot.query_id = q.id;
        try {
            if (q.vec.empty()) {
                slot.query_empty = true;
            } else {
                const auto hits = index.query_topk(q.vec, k_max);
                slot.ids.reserve(hits.size());
                for (const SearchHit& h : hits) slot.ids.push_back(h.id);
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

RecallReport recall_at_k(const Rankings& rankings, const GroundTruth& truth,
                         Task task, std::span<const uint32_t> ks, HitRule rule) {
    if (rankings.empty()) {
        throw ConfigError("recall over zero queries is undefined");
    }
    std::vector<uint32_t> cutoffs(ks.begin(), ks.end());
    if (cutoffs.empty()) {
        throw ConfigError("recall needs at least one K");
    }
    for (const uint32_t k : cutoffs) {
        if (k == 0) throw ConfigError("recall cutoffs must be positive");
    }
    std::sort(cutoffs.begin(), cutoffs.end());
    cutoffs.erase(std::unique(cutoffs.begin(), cutoffs.end()), cutoffs.end());

    RecallReport report;
    report.task = task;
    report.queries = rankings.size();
    std::map<uint32_t, uint64_t> hits;
    for (const uint32_t k : cutoffs) hits[k] = 0;

    for (const Ranking& r : rankings) {
        if (r.query_empty) ++report.unretrievable;
        // Rank of the correct answer in this ranking; npos when absent.
        std::size_t rank = std::string::npos;
        if (task == Task::image_retrieval) {
            const std::string& target = truth.image_for(r.query_id);
            for (std::size_t pos = 0; pos < r.ids.size(); ++pos) {
                if (r.ids[pos] == target) {
                    rank = pos;
                    break;
                }
            }
        } else {
            const std::vector<std::string>& caps = truth.captions_for(r.query_id);
            if (rule == HitRule::first_caption) {
                for (std::size_t pos = 0; pos < r.ids.size(); ++pos) {
                    if (r.ids[pos] == caps.front()) {
                        rank = pos;
                        break;
                    }
                }
            } else {
                const std::unordered_set<std::string> targets(caps.begin(), caps.end());
                for (std::size_t pos = 0; pos < r.ids.size(); ++pos) {
                    if (targets.contains(r.ids[pos])) {
                        rank = pos;
                        break;
                    }
                }
            }
        }
        for (const uint32_t k : cutoffs) {
            if (rank < k) ++hits[k];
        }
    }

    for (const uint32_t k : cutoffs) {
        report.recall[k] =
            100.0 * static_cast<double>(hits[k]) / static_cast<double>(report.queries);
    }
    return report;
}

Rankings rerank(const Rankings& approx, const DenseStore& store,
                std::span<const DenseVector> queries_dense, uint32_t r_m,
                uint32_t k) {
    if (r_m == 0 || k == 0) {
        throw ConfigError("re-ranking needs positive r_m and k");
    }
    if (queries_dense.size() != approx.size()) {
        throw ConfigError("dense query list does not align with the rankings");
    }
    const uint64_t window = static_cast<uint64_t>(r_m) * k;

    Rankings out(approx.size());
    std::exception_ptr first_error = nullptr;
    const int64_t n = static_cast<int64_t>(approx.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_threads())
#endif
    for (int64_t i = 0; i < n; ++i) {
        const Ranking& in = approx[static_cast<std::size_t>(i)];
        Ranking& slot = out[static_cast<std::size_t>(i)];
        slot.query_id = in.query_id;
        slot.query_empty = in.query_empty;
        try {
            const std::size_t take =
                static_cast<std::size_t>(std::min<uint64_t>(window, in.ids.size()));
            if (take > 0) {
                const std::unordered_set<std::string> candidates(in.ids.begin(),
                                                                 in.ids.begin() + take);
                const auto hits = store.exact_topk(queries_dense[static_cast<std::size_t>(i)],
                                                   take, &candidates);
                slot.ids.reserve(hits.size());
                for (const SearchHit& h : hits) slot.ids.push_back(h.id);
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

}  // namespace xmodal
