#pragma once

#include <span>
#include <vector>

#include <json.hpp>

#include "xmodal/boc.hpp"
#include "xmodal/codebook.hpp"
#include "xmodal/eval.hpp"
#include "xmodal/index.hpp"
#include "xmodal/synthetic.hpp"
#include "xmodal/transforms.hpp"

namespace xmodal {

/// A complete encoding recipe: one of the two global-vector methods or one of
/// the two bag-of-concepts variants (which need a codebook).
struct MethodSpec {
    enum class Kind : uint8_t {
        deep_permutation = 0,
        scalar_quantization = 1,
        boc_hard = 2,
        boc_soft = 3,
    };

    Kind kind = Kind::deep_permutation;
    double scale = 1000.0;   // scalar quantization
    bool apply_crelu = true; // global methods
    Aggregation aggregation = Aggregation::sum;               // boc_soft
    SimilarityTransform similarity = SimilarityTransform::one_over_one_plus_d;
    bool exclude_stop_words = false;                          // boc encoding
    const Codebook* codebook = nullptr;                       // boc methods

    bool is_global() const {
        return kind == Kind::deep_permutation || kind == Kind::scalar_quantization;
    }
    const char* name() const;
    nlohmann::json params() const;
    void validate() const;
};

/// Encodes a pack under `spec` at sparsity factor f. For global methods f
/// controls top-z over the output components; for boc_soft it controls the
/// per-row top-z over centroids. boc_hard accepts only f = 0.
std::vector<EncodedItem> encode_for(const FeaturePack& pack, const MethodSpec& spec,
                                    double sparsity);

/// Flat result row ready for serialization.
struct EvalReport {
    std::string task;
    std::string method;
    nlohmann::json params;
    double sparsity = 0.0;
    uint32_t r_m = 0;  // 0 = no re-ranking stage
    std::map<uint32_t, double> recall;
    uint64_t queries = 0;
    uint64_t unretrievable = 0;
};

struct EvaluationInputs {
    const FeaturePack* images = nullptr;
    const FeaturePack* sentences = nullptr;
    std::vector<uint32_t> ks = {1, 5, 10};
    HitRule rule = HitRule::any_caption;
};

/// Encodes both packs once and evaluates both retrieval directions.
std::vector<EvalReport> evaluate_both_tasks(const EvaluationInputs& inputs,
                                            const MethodSpec& spec, double sparsity);

/// evaluate_both_tasks at each factor, concatenated in factor order.
std::vector<EvalReport> sparsity_sweep(const EvaluationInputs& inputs,
                                       const MethodSpec& spec,
                                       std::span<const double> factors);

/// Approximate retrieval at `sparsity`, then re-ranking of the first r_m * k
/// candidates by exact cosine over the original global vectors, for every r_m
/// in `rms`. Each direction contributes a baseline report (r_m = 0) followed
/// by one report per r_m.
std::vector<EvalReport> rerank_curve(const EvaluationInputs& inputs,
                                     const MethodSpec& spec, double sparsity,
                                     std::span<const uint32_t> rms, uint32_t k);

/// Exhaustive dense-cosine rankings of `corpus` for every query in `queries`,
/// optionally through c-relu first. Queries without a global vector come back
/// flagged unretrievable. The diagnostic baseline the approximate paths are
/// measured against.
Rankings exact_rankings(const FeaturePack& corpus, const FeaturePack& queries,
                        bool apply_crelu, std::size_t k_max);

}  // namespace xmodal
