#include "xmodal/index.hpp"

#include <algorithm>
#include <cmath>

#include "xmodal/detail/binary_io.hpp"
#include "xmodal/parallel.hpp"

namespace xmodal {

namespace {

constexpr char kMagic[4] = {'X', 'M', 'I', 'X'};
constexpr uint16_t kVersion = 1;

void sort_hits_topk(std::vector<SearchHit>& hits, std::size_t k) {
    std::sort(hits.begin(), hits.end(), [](const SearchHit& a, const SearchHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (hits.size() > k) hits.resize(k);
}

}  // namespace

InvertedIndex InvertedIndex::build(std::span<const EncodedItem> items,
                                   std::optional<Modality> modality) {
    if (items.empty()) {
        throw ConfigError("cannot build an index over zero items");
    }
    InvertedIndex idx;
    idx.dim_ = items.front().vec.dim;
    idx.modality_ = modality;
    if (idx.dim_ == 0) {
        throw DimensionError("indexed vectors must have positive dim");
    }

    idx.ids_.reserve(items.size());
    idx.norms_.reserve(items.size());
    idx.ordinal_by_id_.reserve(items.size());
    std::vector<std::size_t> list_sizes(idx.dim_, 0);
    std::size_t total = 0;
    for (const EncodedItem& item : items) {
        if (item.vec.dim != idx.dim_) {
            throw DimensionError("item " + item.id + " has dim " +
                                 std::to_string(item.vec.dim) + ", index expects " +
                                 std::to_string(idx.dim_));
        }
        if (item.vec.empty()) {
            throw EmptyVectorError("item " + item.id + " has no nonzero components");
        }
        item.vec.check_invariants();
        const uint32_t ordinal = static_cast<uint32_t>(idx.ids_.size());
        if (!idx.ordinal_by_id_.emplace(item.id, ordinal).second) {
            throw DuplicateIdError("duplicate item id: " + item.id);
        }
        idx.ids_.push_back(item.id);
        double sumsq = 0.0;
        for (const SparseEntry& e : item.vec.entries) {
            sumsq += static_cast<double>(e.weight) * static_cast<double>(e.weight);
            ++list_sizes[e.index];
            ++total;
        }
        idx.norms_.push_back(std::sqrt(sumsq));
    }

    idx.list_offsets_.assign(idx.dim_ + 1, 0);
    for (uint32_t c = 0; c < idx.dim_; ++c) {
        idx.list_offsets_[c + 1] = idx.list_offsets_[c] + list_sizes[c];
    }
    idx.postings_.resize(total);
    std::vector<std::size_t> cursor(idx.list_offsets_.begin(),
                                    idx.list_offsets_.end() - 1);
    for (uint32_t ordinal = 0; ordinal < idx.ids_.size(); ++ordinal) {
        for (const SparseEntry& e : items[ordinal].vec.entries) {
            idx.postings_[cursor[e.index]++] = {ordinal, e.weight};
        }
    }
    return idx;
}

std::span<const Posting> InvertedIndex::postings(uint32_t component) const {
    if (component >= dim_) {
        throw DimensionError("component " + std::to_string(component) +
                             " out of range for dim " + std::to_string(dim_));
    }
    return {postings_.data() + list_offsets_[component],
            list_offsets_[component + 1] - list_offsets_[component]};
}

std::optional<uint32_t> InvertedIndex::ordinal_of(const std::string& id) const {
    auto it = ordinal_by_id_.find(id);
    if (it == ordinal_by_id_.end()) return std::nullopt;
    return it->second;
}

std::vector<SearchHit> InvertedIndex::query_topk(const SparseVector& query,
                                                 std::size_t k,
                                                 QueryStats* stats) const {
    if (k == 0) {
        throw ConfigError("query k must be positive");
    }
    if (query.dim != dim_) {
        throw DimensionError("query dim " + std::to_string(query.dim) +
                             " does not match index dim " + std::to_string(dim_));
    }
    if (query.empty()) return {};

    // Full accumulation, term at a time. Query components ascend and posting
    // lists ascend by ordinal, so each candidate's dot product accumulates in
    // ascending component order, matching a serial merge bit for bit.
    std::vector<double> acc(ids_.size(), 0.0);
    std::vector<uint8_t> seen(ids_.size(), 0);
    std::vector<uint32_t> touched;
    for (const SparseEntry& e : query.entries) {
        const std::span<const Posting> list = postings(e.index);
        if (stats) stats->postings_scanned += list.size();
        const double qw = static_cast<double>(e.weight);
        for (const Posting& post : list) {
            acc[post.ordinal] += qw * static_cast<double>(post.weight);
            if (!seen[post.ordinal]) {
                seen[post.ordinal] = 1;
                touched.push_back(post.ordinal);
            }
        }
    }
    if (stats) stats->candidates += touched.size();

    const double qnorm = query.norm();
    std::vector<SearchHit> hits;
    hits.reserve(touched.size());
    for (const uint32_t ordinal : touched) {
        hits.push_back({ids_[ordinal], acc[ordinal] / (qnorm * norms_[ordinal])});
    }
    sort_hits_topk(hits, k);
    return hits;
}

std::vector<SparseVector> InvertedIndex::reconstruct_all() const {
    std::vector<SparseVector> out(ids_.size());
    for (SparseVector& v : out) v.dim = dim_;
    for (uint32_t c = 0; c < dim_; ++c) {
        for (const Posting& post : postings(c)) {
            out[post.ordinal].entries.push_back({c, post.weight});
        }
    }
    return out;
}

void write_index(const InvertedIndex& index, const std::filesystem::path& path) {
    detail::BinWriter w(path);
    w.bytes(kMagic, 4);
    w.u16(kVersion);
    w.u32(index.dim_);
    w.u64(index.ids_.size());
    for (const std::string& id : index.ids_) {
        w.str16(id);
    }
    for (const double norm : index.norms_) {
        w.f32(static_cast<float>(norm));
    }
    for (uint32_t c = 0; c < index.dim_; ++c) {
        const auto list = index.postings(c);
        w.u32(static_cast<uint32_t>(list.size()));
        for (const Posting& post : list) {
            w.u32(post.ordinal);
            w.f32(post.weight);
        }
    }
    w.finish();
}

InvertedIndex load_index(const std::filesystem::path& path) {
    detail::BinReader r(path);
    r.expect_magic(kMagic, "index segment");
    const uint16_t version = r.u16();
    if (version != kVersion) {
        throw FormatError("unsupported index version " + std::to_string(version) +
                          ": " + r.path());
    }
    InvertedIndex idx;
    idx.dim_ = r.u32();
    if (idx.dim_ == 0) {
        throw FormatError("zero dim in " + r.path());
    }
    const uint64_t count = r.u64();
    if (count == 0) {
        throw FormatError("zero items in " + r.path());
    }
    idx.ids_.reserve(count);
    idx.ordinal_by_id_.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        std::string id = r.str16();
        if (id.empty()) {
            throw FormatError("empty item id in " + r.path());
        }
        if (!idx.ordinal_by_id_.emplace(id, static_cast<uint32_t>(i)).second) {
            throw DuplicateIdError("duplicate item id in " + r.path() + ": " + id);
        }
        idx.ids_.push_back(std::move(id));
    }
    std::vector<float> stored_norms(count);
    r.f32_array(stored_norms.data(), count);

    idx.list_offsets_.assign(idx.dim_ + 1, 0);
    std::vector<double> sumsq(count, 0.0);
    for (uint32_t c = 0; c < idx.dim_; ++c) {
        const uint32_t len = r.u32();
        idx.list_offsets_[c + 1] = idx.list_offsets_[c] + len;
        uint32_t prev = 0;
        for (uint32_t i = 0; i < len; ++i) {
            Posting post;
            post.ordinal = r.u32();
            post.weight = r.f32();
            if (post.ordinal >= count) {
                throw FormatError("posting ordinal out of range in " + r.path());
            }
            if (i > 0 && post.ordinal <= prev) {
                throw FormatError("posting list not strictly increasing in " + r.path());
            }
            if (!(post.weight > 0.0f) || !std::isfinite(post.weight)) {
                throw FormatError("non-positive posting weight in " + r.path());
            }
            prev = post.ordinal;
            sumsq[post.ordinal] +=
                static_cast<double>(post.weight) * static_cast<double>(post.weight);
            idx.postings_.push_back(post);
        }
    }
    r.expect_end("index segment");

    // Norms are recomputed in the same component order the builder used, so
    // in-memory double norms match a freshly built index bit for bit; the f32
    // copies in the file only guard against corruption.
    idx.norms_.resize(count);
    for (uint64_t i = 0; i < count; ++i) {
        if (sumsq[i] == 0.0) {
            throw FormatError("item " + idx.ids_[i] + " has no postings in " + r.path());
        }
        idx.norms_[i] = std::sqrt(sumsq[i]);
        if (static_cast<float>(idx.norms_[i]) != stored_norms[i]) {
            throw FormatError("stored norm mismatch for item " + idx.ids_[i] + " in " +
                              r.path());
        }
    }
    return idx;
}

DenseStore DenseStore::build(std::span<const std::string> ids,
                             std::span<const float> vectors, uint32_t dim) {
    if (dim == 0) {
        throw DimensionError("dense store dim must be positive");
    }
    if (vectors.size() != ids.size() * static_cast<std::size_t>(dim)) {
        throw DimensionError("dense store buffer size does not match ids * dim");
    }
    DenseStore store;
    store.dim_ = dim;
    store.ids_.assign(ids.begin(), ids.end());
    store.data_.assign(vectors.begin(), vectors.end());
    store.norms_.reserve(ids.size());
    store.ordinal_by_id_.reserve(ids.size());
    for (uint32_t i = 0; i < store.ids_.size(); ++i) {
        if (!store.ordinal_by_id_.emplace(store.ids_[i], i).second) {
            throw DuplicateIdError("duplicate item id: " + store.ids_[i]);
        }
        const float* row = store.data_.data() + static_cast<std::size_t>(i) * dim;
        double ss = 0.0;
        for (uint32_t j = 0; j < dim; ++j) {
            ss += static_cast<double>(row[j]) * static_cast<double>(row[j]);
        }
        store.norms_.push_back(std::sqrt(ss));
    }
    return store;
}

DenseStore DenseStore::from_pack_globals(const FeaturePack& pack) {
    std::vector<std::string> ids;
    std::vector<float> data;
    ids.reserve(pack.items.size());
    data.reserve(pack.items.size() * static_cast<std::size_t>(pack.dim));
    for (const Item& item : pack.items) {
        if (!item.global) continue;
        ids.push_back(item.id);
        data.insert(data.end(), item.global->begin(), item.global->end());
    }
    return build(ids, data, pack.dim);
}

std::span<const float> DenseStore::vec(uint32_t ordinal) const {
    return {data_.data() + static_cast<std::size_t>(ordinal) * dim_, dim_};
}

std::optional<uint32_t> DenseStore::ordinal_of(const std::string& id) const {
    auto it = ordinal_by_id_.find(id);
    if (it == ordinal_by_id_.end()) return std::nullopt;
    return it->second;
}

std::vector<SearchHit> DenseStore::exact_topk(
    std::span<const float> query, std::size_t k,
    const std::unordered_set<std::string>* restrict_to) const {
    if (k == 0) {
        throw ConfigError("query k must be positive");
    }
    if (query.size() != dim_) {
        throw DimensionError("query dim " + std::to_string(query.size()) +
                             " does not match store dim " + std::to_string(dim_));
    }

    std::vector<uint32_t> ordinals;
    if (restrict_to) {
        ordinals.reserve(restrict_to->size());
        for (const std::string& id : *restrict_to) {
            const auto ordinal = ordinal_of(id);
            if (!ordinal) {
                throw UnknownIdError("id not in dense store: " + id);
            }
            ordinals.push_back(*ordinal);
        }
        std::sort(ordinals.begin(), ordinals.end());
    } else {
        ordinals.resize(ids_.size());
        for (uint32_t i = 0; i < ordinals.size(); ++i) ordinals[i] = i;
    }

    double qss = 0.0;
    for (std::size_t j = 0; j < query.size(); ++j) {
        qss += static_cast<double>(query[j]) * static_cast<double>(query[j]);
    }
    const double qnorm = std::sqrt(qss);

    std::vector<SearchHit> hits;
    hits.reserve(ordinals.size());
    for (const uint32_t i : ordinals) {
        const float* row = data_.data() + static_cast<std::size_t>(i) * dim_;
        double dot = 0.0;
        for (uint32_t j = 0; j < dim_; ++j) {
            dot += static_cast<double>(query[j]) * static_cast<double>(row[j]);
        }
        const double score =
            (qnorm > 0.0 && norms_[i] > 0.0) ? dot / (qnorm * norms_[i]) : 0.0;
        hits.push_back({ids_[i], score});
    }
    sort_hits_topk(hits, k);
    return hits;
}

std::vector<std::vector<SearchHit>> DenseStore::exact_topk_batch(
    std::span<const DenseVector> queries, std::size_t k) const {
    std::vector<std::vector<SearchHit>> out(queries.size());
    std::exception_ptr first_error = nullptr;
    const int64_t n = static_cast<int64_t>(queries.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 8) num_threads(worker_threads())
#endif
    for (int64_t i = 0; i < n; ++i) {
        try {
            out[static_cast<std::size_t>(i)] =
                exact_topk(queries[static_cast<std::size_t>(i)], k);
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
