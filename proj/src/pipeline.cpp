#include "xmodal/pipeline.hpp"

#include <algorithm>
#include <exception>

#include "xmodal/parallel.hpp"

namespace xmodal {

namespace {

const char* aggregation_name(Aggregation a) {
    return a == Aggregation::max ? "max" : "sum";
}

const char* similarity_name(SimilarityTransform s) {
    return s == SimilarityTransform::one_over_one_plus_d ? "one_over_one_plus_d"
                                                         : "one_over_one_minus_d";
}

/// Corpus entries with at least one nonzero component; empty ones cannot be
/// indexed and are counted for the report instead.
std::vector<EncodedItem> drop_empty(const std::vector<EncodedItem>& items,
                                    uint64_t* dropped) {
    std::vector<EncodedItem> kept;
    kept.reserve(items.size());
    for (const EncodedItem& item : items) {
        if (item.vec.empty()) {
            ++*dropped;
        } else {
            kept.push_back(item);
        }
    }
    return kept;
}

std::vector<DenseVector> globals_of(const FeaturePack& pack) {
    std::vector<DenseVector> out;
    out.reserve(pack.items.size());
    for (const Item& item : pack.items) {
        if (!item.global) {
            throw ConfigError("item " + item.id +
                              " has no global vector; re-ranking needs one per query");
        }
        out.push_back(*item.global);
    }
    return out;
}

EvalReport make_report(const MethodSpec& spec, double sparsity, uint32_t r_m,
                       const RecallReport& rr, uint64_t dropped_corpus) {
    EvalReport rep;
    rep.task = task_name(rr.task);
    rep.method = spec.name();
    rep.params = spec.params();
    rep.params["dropped_corpus"] = dropped_corpus;
    rep.sparsity = sparsity;
    rep.r_m = r_m;
    rep.recall = rr.recall;
    rep.queries = rr.queries;
    rep.unretrievable = rr.unretrievable;
    return rep;
}

struct Direction {
    Task task;
    const std::vector<EncodedItem>* corpus;
    const std::vector<EncodedItem>* queries;
    Modality corpus_modality;
};

}  // namespace

const char* MethodSpec::name() const {
    switch (kind) {
        case Kind::deep_permutation:
            return "deep_permutation";
        case Kind::scalar_quantization:
            return "scalar_quantization";
        case Kind::boc_hard:
            return "boc_hard";
        case Kind::boc_soft:
            return "boc_soft";
    }
    return "unknown";
}

nlohmann::json MethodSpec::params() const {
    nlohmann::json j;
    if (is_global()) {
        j["crelu"] = apply_crelu;
        if (kind == Kind::scalar_quantization) j["scale"] = scale;
    } else {
        j["p"] = codebook ? codebook->p : 0;
        j["exclude_stop_words"] = exclude_stop_words;
        if (kind == Kind::boc_soft) {
            j["aggregation"] = aggregation_name(aggregation);
            j["similarity"] = similarity_name(similarity);
        }
    }
    return j;
}

void MethodSpec::validate() const {
    if (!is_global() && codebook == nullptr) {
        throw ConfigError("bag-of-concepts methods need a codebook");
    }
    if (kind == Kind::scalar_quantization && !(scale > 0.0)) {
        throw ConfigError("quantization scale must be positive");
    }
}

std::vector<EncodedItem> encode_for(const FeaturePack& pack, const MethodSpec& spec,
                                    double sparsity) {
    spec.validate();
    if (!(sparsity >= 0.0) || !(sparsity < 1.0)) {
        throw ConfigError("sparsity factor must lie in [0, 1)");
    }
    switch (spec.kind) {
        case MethodSpec::Kind::deep_permutation:
        case MethodSpec::Kind::scalar_quantization: {
            TransformConfig cfg;
            cfg.method = spec.kind == MethodSpec::Kind::deep_permutation
                             ? TransformMethod::deep_permutation
                             : TransformMethod::scalar_quantization;
            cfg.scale = spec.scale;
            cfg.apply_crelu = spec.apply_crelu;
            const uint32_t out_dim = spec.apply_crelu ? 2 * pack.dim : pack.dim;
            cfg.keep_z = keep_z_for_sparsity(sparsity, out_dim);
            return transform_pack(pack, cfg);
        }
        case MethodSpec::Kind::boc_hard: {
            if (sparsity != 0.0) {
                throw ConfigError(
                    "hard assignment has no per-row sparsification; only f = 0 is valid");
            }
            BocConfig cfg;
            cfg.assignment = Assignment::hard;
            cfg.exclude_stop_words = spec.exclude_stop_words;
            return encode_pack(pack, *spec.codebook, cfg);
        }
        case MethodSpec::Kind::boc_soft: {
            BocConfig cfg;
            cfg.assignment = Assignment::soft;
            cfg.aggregation = spec.aggregation;
            cfg.similarity = spec.similarity;
            cfg.exclude_stop_words = spec.exclude_stop_words;
            cfg.row_keep_z = keep_z_for_sparsity(sparsity, spec.codebook->p);
            return encode_pack(pack, *spec.codebook, cfg);
        }
    }
    throw ConfigError("unknown method");
}

std::vector<EvalReport> evaluate_both_tasks(const EvaluationInputs& inputs,
                                            const MethodSpec& spec, double sparsity) {
    const std::vector<EncodedItem> enc_images = encode_for(*inputs.images, spec, sparsity);
    const std::vector<EncodedItem> enc_sentences =
        encode_for(*inputs.sentences, spec, sparsity);
    const GroundTruth gt = GroundTruth::from_sentence_pack(*inputs.sentences);
    const uint32_t k_max = *std::max_element(inputs.ks.begin(), inputs.ks.end());

    std::vector<EvalReport> reports;
    for (const Direction& dir : {
             Direction{Task::image_retrieval, &enc_images, &enc_sentences, Modality::image},
             Direction{Task::sentence_retrieval, &enc_sentences, &enc_images,
                       Modality::sentence},
         }) {
        uint64_t dropped = 0;
        const std::vector<EncodedItem> corpus = drop_empty(*dir.corpus, &dropped);
        const InvertedIndex index = InvertedIndex::build(corpus, dir.corpus_modality);
        const Rankings rankings = run_retrieval(index, *dir.queries, k_max);
        const RecallReport rr =
            recall_at_k(rankings, gt, dir.task, inputs.ks, inputs.rule);
        reports.push_back(make_report(spec, sparsity, 0, rr, dropped));
    }
    return reports;
}

std::vector<EvalReport> sparsity_sweep(const EvaluationInputs& inputs,
                                       const MethodSpec& spec,
                                       std::span<const double> factors) {
    if (factors.empty()) {
        throw ConfigError("sparsity sweep needs at least one factor");
    }
    if (spec.kind == MethodSpec::Kind::boc_hard) {
        for (const double f : factors) {
            if (f != 0.0) {
                throw ConfigError("hard assignment cannot sweep sparsity factors");
            }
        }
    }
    std::vector<EvalReport> reports;
    for (const double f : factors) {
        auto batch = evaluate_both_tasks(inputs, spec, f);
        reports.insert(reports.end(), std::make_move_iterator(batch.begin()),
                       std::make_move_iterator(batch.end()));
    }
    return reports;
}

std::vector<EvalReport> rerank_curve(const EvaluationInputs& inputs,
                                     const MethodSpec& spec, double sparsity,
                                     std::span<const uint32_t> rms, uint32_t k) {
    if (rms.empty()) {
        throw ConfigError("re-rank curve needs at least one r_m");
    }
    for (const uint32_t rm : rms) {
        if (rm == 0) throw ConfigError("r_m must be positive");
    }
    if (k == 0) {
        throw ConfigError("re-rank window k must be positive");
    }

    const std::vector<EncodedItem> enc_images = encode_for(*inputs.images, spec, sparsity);
    const std::vector<EncodedItem> enc_sentences =
        encode_for(*inputs.sentences, spec, sparsity);
    const GroundTruth gt = GroundTruth::from_sentence_pack(*inputs.sentences);

    const DenseStore store_images = DenseStore::from_pack_globals(*inputs.images);
    const DenseStore store_sentences = DenseStore::from_pack_globals(*inputs.sentences);
    const std::vector<DenseVector> dense_image_queries = globals_of(*inputs.images);
    const std::vector<DenseVector> dense_sentence_queries = globals_of(*inputs.sentences);

    const uint32_t max_rm = *std::max_element(rms.begin(), rms.end());
    const uint32_t max_k = *std::max_element(inputs.ks.begin(), inputs.ks.end());

    std::vector<EvalReport> reports;
    for (const Direction& dir : {
             Direction{Task::image_retrieval, &enc_images, &enc_sentences, Modality::image},
             Direction{Task::sentence_retrieval, &enc_sentences, &enc_images,
                       Modality::sentence},
         }) {
        uint64_t dropped = 0;
        const std::vector<EncodedItem> corpus = drop_empty(*dir.corpus, &dropped);
        const InvertedIndex index = InvertedIndex::build(corpus, dir.corpus_modality);
        const DenseStore& store =
            dir.task == Task::image_retrieval ? store_images : store_sentences;
        const std::vector<DenseVector>& dense_queries =
            dir.task == Task::image_retrieval ? dense_sentence_queries
                                              : dense_image_queries;

        // The approximate pass keeps enough depth for the widest window.
        const uint64_t window = static_cast<uint64_t>(max_rm) * k;
        const std::size_t k_max = static_cast<std::size_t>(
            std::max<uint64_t>(std::min<uint64_t>(window, corpus.size()), max_k));
        const Rankings approx = run_retrieval(index, *dir.queries, k_max);

        reports.push_back(make_report(
            spec, sparsity, 0, recall_at_k(approx, gt, dir.task, inputs.ks, inputs.rule),
            dropped));
        for (const uint32_t rm : rms) {
            const Rankings rr = rerank(approx, store, dense_queries, rm, k);
            reports.push_back(make_report(
                spec, sparsity, rm, recall_at_k(rr, gt, dir.task, inputs.ks, inputs.rule),
                dropped));
        }
    }
    return reports;
}

Rankings exact_rankings(const FeaturePack& corpus, const FeaturePack& queries,
                        bool apply_crelu, std::size_t k_max) {
    std::vector<std::string> ids;
    std::vector<float> data;
    const uint32_t dim = apply_crelu ? 2 * corpus.dim : corpus.dim;
    ids.reserve(corpus.items.size());
    for (const Item& item : corpus.items) {
        if (!item.global) continue;
        ids.push_back(item.id);
        if (apply_crelu) {
            const DenseVector expanded = crelu(*item.global);
            data.insert(data.end(), expanded.begin(), expanded.end());
        } else {
            data.insert(data.end(), item.global->begin(), item.global->end());
        }
    }
    const DenseStore store = DenseStore::build(ids, data, dim);

    Rankings out(queries.items.size());
    std::exception_ptr first_error = nullptr;
    const int64_t n = static_cast<int64_t>(queries.items.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_threads())
#endif
    for (int64_t i = 0; i < n; ++i) {
        const Item& item = queries.items[static_cast<std::size_t>(i)];
        Ranking& slot = out[static_cast<std::size_t>(i)];
        slot.query_id = item.id;
        try {
            if (!item.global) {
                slot.query_empty = true;
            } else {
                const DenseVector q =
                    apply_crelu ? crelu(*item.global) : *item.global;
                const auto hits = store.exact_topk(q, k_max);
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
