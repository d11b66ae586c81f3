// Acceptance harness. Runs eight gated criteria and prints exactly one line
// per criterion, [A#] PASS/FAIL/SKIP plus a short detail, then exits nonzero
// if any non-skipped criterion failed. Thresholds and frozen values live
// right next to the checks; -1 entries in the frozen table mean "record from
// the next oracle run".

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "xmodal/boc.hpp"
#include "xmodal/codebook.hpp"
#include "xmodal/eval.hpp"
#include "xmodal/index.hpp"
#include "xmodal/pipeline.hpp"
#include "xmodal/reference.hpp"
#include "xmodal/report_io.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/synthetic.hpp"
#include "xmodal/transforms.hpp"

namespace {

using namespace xmodal;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename... Args>
std::string fmt(const char* pattern, Args... args) {
    char buf[1024];
    std::snprintf(buf, sizeof(buf), pattern, args...);
    return buf;
}

struct Outcome {
    bool ok = false;
    bool skipped = false;
    std::string detail;
};

struct Fixture {
    FeaturePack images;
    FeaturePack sentences;
};

/// The frozen corpus: 1000 images, 5 captions each, d=64, 100 topics, zero
/// noise, seed 42. At zero noise every global inside a topic is bitwise
/// identical, so the exact rankings are pure tie-order and the approximate
/// paths can be held to exact equalities instead of tolerances.
const Fixture& fixture() {
    static const Fixture fx = [] {
        SyntheticConfig cfg;
        cfg.n_images = 1000;
        cfg.captions_per_image = 5;
        cfg.dim = 64;
        cfg.topics = 100;
        cfg.noise_sigma = 0.0;
        cfg.concepts_per_image = {6, 12};
        cfg.concepts_per_sentence = {4, 9};
        cfg.seed = 42;
        auto packs = generate_synthetic(cfg);
        return Fixture{std::move(packs.first), std::move(packs.second)};
    }();
    return fx;
}

SparseVector random_sparse(Rng& rng, uint32_t dim, uint64_t nnz_lo, uint64_t nnz_hi) {
    SparseVector v;
    v.dim = dim;
    const uint64_t nnz = rng.range(nnz_lo, nnz_hi);
    std::set<uint32_t> indices;
    while (indices.size() < nnz) {
        indices.insert(static_cast<uint32_t>(rng.bounded(dim)));
    }
    for (uint32_t i : indices) {
        v.entries.push_back({i, static_cast<float>(0.05 + rng.uniform01())});
    }
    return v;
}

/// Mean fraction of the exact top-10 recovered by the approximate top-10.
double mean_overlap(const Rankings& exact, const Rankings& approx) {
    if (exact.size() != approx.size()) return -1.0;
    double total = 0.0;
    for (std::size_t i = 0; i < exact.size(); ++i) {
        const std::set<std::string> want(exact[i].ids.begin(), exact[i].ids.end());
        std::size_t shared = 0;
        for (const std::string& id : approx[i].ids) {
            shared += want.count(id);
        }
        total += static_cast<double>(shared) / 10.0;
    }
    return total / static_cast<double>(exact.size());
}

std::size_t file_lines(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return 0;
    const std::string all{std::istreambuf_iterator<char>(in),
                          std::istreambuf_iterator<char>()};
    return static_cast<std::size_t>(std::count(all.begin(), all.end(), '\n'));
}

// A1: the five-component rank-weight example must come out exactly.
Outcome a1() {
    const auto t0 = Clock::now();
    const std::array<float, 5> v{0.2f, 0.4f, 0.1f, 0.3f, 0.6f};
    const SparseVector got = deep_permutation(v, 5);
    const SparseVector want{5, {{0, 2.0f}, {1, 4.0f}, {2, 1.0f}, {3, 3.0f}, {4, 5.0f}}};
    const bool ok = got == want;
    return {ok, false,
            fmt("rank weights over [0.2, 0.4, 0.1, 0.3, 0.6] (%.3f s)",
                seconds_since(t0))};
}

// A2: indexed top-10 must equal the exhaustive sparse-cosine scan on 1000
// vectors (dim 1000, nnz 15..25) for 100 queries, scores within 1e-9.
Outcome a2() {
    const auto t0 = Clock::now();
    Rng rng(2024);
    std::vector<EncodedItem> items(1000);
    for (std::size_t i = 0; i < items.size(); ++i) {
        items[i].id = fmt("v%04zu", i);
        items[i].vec = random_sparse(rng, 1000, 15, 25);
    }
    const InvertedIndex index = InvertedIndex::build(items);

    Rng qrng(2025);
    bool ok = true;
    double max_dev = 0.0;
    for (int q = 0; q < 100; ++q) {
        const SparseVector query = random_sparse(qrng, 1000, 15, 25);
        const auto got = index.query_topk(query, 10);
        const auto want = ref::sparse_topk_scan(items, query, 10);
        if (got.size() != want.size()) {
            ok = false;
            continue;
        }
        for (std::size_t j = 0; j < got.size(); ++j) {
            ok = ok && got[j].id == want[j].id;
            max_dev = std::max(max_dev, std::fabs(got[j].score - want[j].score));
        }
    }
    ok = ok && max_dev <= 1e-9;
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < 10.0;
    return {ok, false,
            fmt("100 queries vs exhaustive scan, max score deviation %.2e (%.2f s)",
                max_dev, elapsed)};
}

// A3: at sparsity 0, quantized retrieval must recover the exact top-10
// within mean overlap 0.9 on the frozen corpus, both methods and directions.
// A noisy companion corpus is reported alongside (not gated).
Outcome a3() {
    const auto t0 = Clock::now();
    const Fixture& fx = fixture();

    const Rankings exact_img = exact_rankings(fx.images, fx.sentences, true, 10);
    const Rankings exact_sen = exact_rankings(fx.sentences, fx.images, true, 10);

    std::array<double, 4> mean{};  // [method * 2 + direction]
    for (int m = 0; m < 2; ++m) {
        MethodSpec spec;
        spec.kind = m == 0 ? MethodSpec::Kind::scalar_quantization
                           : MethodSpec::Kind::deep_permutation;
        for (int dir = 0; dir < 2; ++dir) {
            const FeaturePack& corpus = dir == 0 ? fx.images : fx.sentences;
            const FeaturePack& queries = dir == 0 ? fx.sentences : fx.images;
            const auto corpus_enc = encode_for(corpus, spec, 0.0);
            const auto query_enc = encode_for(queries, spec, 0.0);
            const InvertedIndex index = InvertedIndex::build(corpus_enc);
            const Rankings approx = run_retrieval(index, query_enc, 10);
            mean[m * 2 + dir] = mean_overlap(dir == 0 ? exact_img : exact_sen, approx);
        }
    }

    // Companion at noise 0.1 (100 images, 20 topics, seed 7), reported only.
    SyntheticConfig small;
    small.n_images = 100;
    small.captions_per_image = 5;
    small.dim = 64;
    small.topics = 20;
    small.noise_sigma = 0.1;
    small.seed = 7;
    const auto packs = generate_synthetic(small);
    const Rankings small_exact = exact_rankings(packs.first, packs.second, true, 10);
    std::array<double, 2> companion{};
    for (int m = 0; m < 2; ++m) {
        MethodSpec spec;
        spec.kind = m == 0 ? MethodSpec::Kind::scalar_quantization
                           : MethodSpec::Kind::deep_permutation;
        const auto corpus_enc = encode_for(packs.first, spec, 0.0);
        const auto query_enc = encode_for(packs.second, spec, 0.0);
        const InvertedIndex index = InvertedIndex::build(corpus_enc);
        companion[m] = mean_overlap(small_exact, run_retrieval(index, query_enc, 10));
    }

    bool ok = true;
    for (double v : mean) ok = ok && v >= 0.9;
    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < 60.0;
    return {ok, false,
            fmt("mean top-10 overlap sq %.3f/%.3f dp %.3f/%.3f"
                " (img/sen); noisy companion sq %.3f dp %.3f (%.1f s)",
                mean[0], mean[1], mean[2], mean[3], companion[0], companion[1],
                elapsed)};
}

// A4: full-row soft assignment with sum aggregation must equal the explicit
// similarity-matrix column sums; hard histogram mass must equal the concept
// count across 10000 random cases.
Outcome a4() {
    const auto t0 = Clock::now();
    Rng rng(99);
    Codebook cb;
    cb.p = 32;
    cb.dim = 16;
    cb.centroids = rng.gaussian_vec(static_cast<std::size_t>(cb.p) * cb.dim);

    BocConfig cfg;
    cfg.assignment = Assignment::soft;
    cfg.aggregation = Aggregation::sum;
    cfg.row_keep_z = cb.p;

    bool sums_ok = true;
    double max_order_dev = 0.0;
    for (int rep = 0; rep < 100; ++rep) {
        const uint64_t n = rng.range(3, 12);
        std::vector<DenseVector> concepts(n);
        for (auto& c : concepts) c = rng.gaussian_vec(cb.dim);

        const SparseVector got = soft_assign(concepts, cb, cfg);

        // Explicit matrix, then column sums forward and in reverse concept
        // order; the reverse sum bounds the accumulation-order sensitivity.
        std::vector<std::vector<double>> sim(n, std::vector<double>(cb.p));
        for (std::size_t c = 0; c < n; ++c) {
            for (uint32_t k = 0; k < cb.p; ++k) {
                double d2 = 0.0;
                const auto row = cb.centroid(k);
                for (uint32_t j = 0; j < cb.dim; ++j) {
                    const double diff = static_cast<double>(concepts[c][j]) -
                                        static_cast<double>(row[j]);
                    d2 += diff * diff;
                }
                sim[c][k] = 1.0 / (1.0 + std::sqrt(d2));
            }
        }
        std::vector<double> fwd(cb.p, 0.0);
        std::vector<double> bwd(cb.p, 0.0);
        for (std::size_t c = 0; c < n; ++c) {
            for (uint32_t k = 0; k < cb.p; ++k) fwd[k] += sim[c][k];
        }
        for (std::size_t c = n; c-- > 0;) {
            for (uint32_t k = 0; k < cb.p; ++k) bwd[k] += sim[c][k];
        }
        sums_ok = sums_ok && got.entries.size() == cb.p;
        for (uint32_t k = 0; k < cb.p && sums_ok; ++k) {
            sums_ok = got.entries[k].index == k &&
                      got.entries[k].weight == static_cast<float>(fwd[k]);
            max_order_dev = std::max(
                max_order_dev, std::fabs(fwd[k] - bwd[k]) / std::max(1.0, fwd[k]));
        }
    }
    sums_ok = sums_ok && max_order_dev <= 1e-9;

    Rng hrng(7);
    bool mass_ok = true;
    for (int rep = 0; rep < 10000 && mass_ok; ++rep) {
        Codebook hb;
        hb.p = static_cast<uint32_t>(1 + hrng.bounded(16));
        hb.dim = static_cast<uint32_t>(1 + hrng.bounded(8));
        hb.centroids = hrng.gaussian_vec(static_cast<std::size_t>(hb.p) * hb.dim);
        const uint64_t n = hrng.bounded(9);
        std::vector<DenseVector> concepts(n);
        for (auto& c : concepts) c = hrng.gaussian_vec(hb.dim);
        const SparseVector hist = hard_assign(concepts, hb);
        double mass = 0.0;
        for (const SparseEntry& e : hist.entries) mass += e.weight;
        mass_ok = mass == static_cast<double>(n);
    }

    const bool ok = sums_ok && mass_ok;
    return {ok, false,
            fmt("column-sum deviation %.2e over 100 items; 10000 histogram"
                " mass cases %s (%.2f s)",
                max_order_dev, mass_ok ? "exact" : "BROKEN", seconds_since(t0))};
}

// A5: at sparsity 0.99 a re-rank window covering the whole corpus must
// reproduce the exact-cosine Recall@10, r_m=1 must leave Recall@10 untouched,
// and the curve must land in a plottable csv.
Outcome a5() {
    const auto t0 = Clock::now();
    const Fixture& fx = fixture();
    MethodSpec spec;
    spec.kind = MethodSpec::Kind::deep_permutation;
    EvaluationInputs inputs;
    inputs.images = &fx.images;
    inputs.sentences = &fx.sentences;

    const std::array<uint32_t, 6> rms{1, 2, 5, 20, 100, 500};
    const auto curve = rerank_curve(inputs, spec, 0.99, rms, 10);

    bool ok = curve.size() == 14;
    if (ok) {
        ok = curve[0].task == "image_retrieval" && curve[0].r_m == 0 &&
             curve[6].r_m == 500 && curve[7].task == "sentence_retrieval" &&
             curve[7].r_m == 0 && curve[13].r_m == 500;
        // r_m=1 re-orders inside the reported window only.
        ok = ok && curve[1].recall.at(10) == curve[0].recall.at(10);
        ok = ok && curve[8].recall.at(10) == curve[7].recall.at(10);
    }

    double exact_img = -1.0;
    double exact_sen = -1.0;
    if (ok) {
        const GroundTruth truth = GroundTruth::from_sentence_pack(fx.sentences);
        const std::array<uint32_t, 1> ks{10};
        exact_img = recall_at_k(exact_rankings(fx.images, fx.sentences, false, 10),
                                truth, Task::image_retrieval, ks)
                        .recall.at(10);
        exact_sen = recall_at_k(exact_rankings(fx.sentences, fx.images, false, 10),
                                truth, Task::sentence_retrieval, ks)
                        .recall.at(10);
        ok = curve[6].recall.at(10) == exact_img &&
             curve[13].recall.at(10) == exact_sen;
    }

    const char* csv_name = "acceptance_rerank_curve.csv";
    write_reports_csv(curve, csv_name);
    ok = ok && file_lines(csv_name) == 1 + 3 * curve.size();

    const double elapsed = seconds_since(t0);
    ok = ok && elapsed < 120.0;
    return {ok, false,
            fmt("window limit meets exact recall@10 %.2f/%.2f (img/sen),"
                " curve in %s (%.1f s)",
                exact_img, exact_sen, csv_name, elapsed)};
}

// A6: the sparsity sweep {0, 0.5, 0.9, 0.99} must be bitwise reproducible,
// agree with the never-sparsified encoding at factor 0, and match the frozen
// Recall@10 values below.
Outcome a6() {
    const auto t0 = Clock::now();
    const Fixture& fx = fixture();
    EvaluationInputs inputs;
    inputs.images = &fx.images;
    inputs.sentences = &fx.sentences;
    const std::array<double, 4> factors{0.0, 0.5, 0.9, 0.99};

    // Frozen Recall@10, [method][direction][factor], recorded from the
    // oracle run at seed 42; reruns must reproduce them bit for bit.
    static constexpr double kFrozen[2][2][4] = {
        // deep_permutation img, sen
        {{100, 100, 100, 73}, {20, 20, 20, 14.6}},
        // scalar_quantization img, sen
        {{100, 100, 100, 74}, {20, 20, 20, 14.800000000000001}},
    };

    bool ok = true;
    bool frozen_ok = true;
    std::string values;
    for (int m = 0; m < 2; ++m) {
        MethodSpec spec;
        spec.kind = m == 0 ? MethodSpec::Kind::deep_permutation
                           : MethodSpec::Kind::scalar_quantization;
        const auto sweep = sparsity_sweep(inputs, spec, factors);
        const auto again = sparsity_sweep(inputs, spec, factors);
        if (sweep.size() != 8 || again.size() != 8) {
            ok = false;
            break;
        }
        for (std::size_t i = 0; i < sweep.size(); ++i) {
            ok = ok && sweep[i].recall == again[i].recall &&
                 sweep[i].queries == again[i].queries &&
                 sweep[i].unretrievable == again[i].unretrievable;
        }

        // Factor 0 against an encoding that never goes through top-z at all.
        TransformConfig tc;
        tc.method = m == 0 ? TransformMethod::deep_permutation
                           : TransformMethod::scalar_quantization;
        tc.keep_z = 0;
        const GroundTruth truth = GroundTruth::from_sentence_pack(fx.sentences);
        const std::array<uint32_t, 1> ks{10};
        for (int dir = 0; dir < 2; ++dir) {
            const FeaturePack& corpus = dir == 0 ? fx.images : fx.sentences;
            const FeaturePack& queries = dir == 0 ? fx.sentences : fx.images;
            const InvertedIndex index =
                InvertedIndex::build(transform_pack(corpus, tc));
            const Rankings rankings =
                run_retrieval(index, transform_pack(queries, tc), 10);
            const Task task =
                dir == 0 ? Task::image_retrieval : Task::sentence_retrieval;
            const double baseline =
                recall_at_k(rankings, truth, task, ks).recall.at(10);
            ok = ok && baseline == sweep[static_cast<std::size_t>(dir)].recall.at(10);
        }

        for (int dir = 0; dir < 2; ++dir) {
            values += fmt("%s %s {", spec.name(), dir == 0 ? "img" : "sen");
            for (int f = 0; f < 4; ++f) {
                const double r =
                    sweep[static_cast<std::size_t>(f) * 2 + dir].recall.at(10);
                values += fmt(f + 1 < 4 ? "%.17g, " : "%.17g} ", r);
                frozen_ok = frozen_ok && r == kFrozen[m][dir][f];
            }
        }
    }

    const double elapsed = seconds_since(t0);
    ok = ok && frozen_ok && elapsed < 300.0;
    return {ok, false, values + fmt("(%.1f s)", elapsed)};
}

// A7: the clustering objective never increases between iterations, and two
// separated blobs come back as their per-blob sample means.
Outcome a7() {
    const auto t0 = Clock::now();
    Rng rng(31);
    bool monotone = true;
    for (int rep = 0; rep < 50; ++rep) {
        ConceptPool pool;
        pool.dim = static_cast<uint32_t>(2 + rng.bounded(11));
        const uint32_t p = static_cast<uint32_t>(2 + rng.bounded(7));
        const std::size_t n = p * 3 + rng.bounded(180);
        pool.data = rng.gaussian_vec(n * pool.dim);
        pool.stop_flags.assign(n, 0);
        KmeansStats stats;
        kmeans_codebook(pool, p, 1000 + static_cast<uint64_t>(rep), {}, &stats);
        for (std::size_t i = 0; i + 1 < stats.objective.size(); ++i) {
            monotone = monotone && stats.objective[i + 1] <= stats.objective[i];
        }
    }

    Rng brng(77);
    const uint32_t dim = 8;
    const std::size_t per_blob = 200;
    ConceptPool blobs;
    blobs.dim = dim;
    blobs.data.reserve(2 * per_blob * dim);
    for (int b = 0; b < 2; ++b) {
        const double center = b == 0 ? 5.0 : -5.0;
        for (std::size_t i = 0; i < per_blob; ++i) {
            for (uint32_t j = 0; j < dim; ++j) {
                const double base = j == 0 ? center : 0.0;
                blobs.data.push_back(static_cast<float>(base + 0.2 * brng.gaussian()));
            }
        }
    }
    blobs.stop_flags.assign(2 * per_blob, 0);
    const Codebook cb = kmeans_codebook(blobs, 2, 5);

    // Per-blob sample means, accumulated in double in row order.
    std::array<std::vector<float>, 2> want;
    for (int b = 0; b < 2; ++b) {
        std::vector<double> acc(dim, 0.0);
        for (std::size_t i = b * per_blob; i < (b + 1) * per_blob; ++i) {
            for (uint32_t j = 0; j < dim; ++j) acc[j] += blobs.vec(i)[j];
        }
        want[b].resize(dim);
        for (uint32_t j = 0; j < dim; ++j) {
            want[b][j] = static_cast<float>(acc[j] / static_cast<double>(per_blob));
        }
    }

    bool blob_ok = true;
    double max_diff = 0.0;
    std::array<bool, 2> matched{false, false};
    for (uint32_t k = 0; k < 2; ++k) {
        // Match each centroid to the blob mean it sits closest to.
        const int b = std::fabs(cb.centroid(k)[0] - want[0][0]) <
                              std::fabs(cb.centroid(k)[0] - want[1][0])
                          ? 0
                          : 1;
        matched[static_cast<std::size_t>(b)] = true;
        for (uint32_t j = 0; j < dim; ++j) {
            max_diff = std::max(
                max_diff, std::fabs(static_cast<double>(cb.centroid(k)[j]) -
                                    static_cast<double>(want[static_cast<std::size_t>(b)][j])));
        }
    }
    blob_ok = matched[0] && matched[1] && max_diff < 1e-5;

    const bool ok = monotone && blob_ok;
    return {ok, false,
            fmt("objective monotone on 50 pools: %s; blob-mean deviation %.2e"
                " (%.2f s)",
                monotone ? "yes" : "NO", max_diff, seconds_since(t0))};
}

// A8: optional replication on externally supplied real feature packs; both
// quantized methods at sparsity 0 must sit within 0.2 recall points of the
// exact-cosine baseline.
Outcome a8() {
    const char* img_path = std::getenv("XMODAL_COCO_IMAGES");
    const char* sen_path = std::getenv("XMODAL_COCO_SENTENCES");
    if (!img_path || !sen_path) {
        return {true, true,
                "set XMODAL_COCO_IMAGES and XMODAL_COCO_SENTENCES to real"
                " feature packs to run the replication"};
    }
    const auto t0 = Clock::now();
    const FeaturePack images = load_feature_pack(img_path);
    const FeaturePack sentences = load_feature_pack(sen_path);
    EvaluationInputs inputs;
    inputs.images = &images;
    inputs.sentences = &sentences;

    const GroundTruth truth = GroundTruth::from_sentence_pack(sentences);
    const std::array<uint32_t, 3> ks{1, 5, 10};
    const RecallReport exact_img =
        recall_at_k(exact_rankings(images, sentences, true, 10), truth,
                    Task::image_retrieval, ks);
    const RecallReport exact_sen =
        recall_at_k(exact_rankings(sentences, images, true, 10), truth,
                    Task::sentence_retrieval, ks);

    bool ok = true;
    double max_dev = 0.0;
    std::string dp_line;
    for (int m = 0; m < 2; ++m) {
        MethodSpec spec;
        spec.kind = m == 0 ? MethodSpec::Kind::deep_permutation
                           : MethodSpec::Kind::scalar_quantization;
        const auto reports = evaluate_both_tasks(inputs, spec, 0.0);
        ok = ok && reports.size() == 2;
        if (!ok) break;
        for (int dir = 0; dir < 2; ++dir) {
            const RecallReport& exact = dir == 0 ? exact_img : exact_sen;
            for (uint32_t k : ks) {
                const double dev = std::fabs(
                    reports[static_cast<std::size_t>(dir)].recall.at(k) -
                    exact.recall.at(k));
                max_dev = std::max(max_dev, dev);
            }
        }
        if (m == 0) {
            dp_line = fmt("dp img %.1f/%.1f/%.1f sen %.1f/%.1f/%.1f, ",
                          reports[0].recall.at(1), reports[0].recall.at(5),
                          reports[0].recall.at(10), reports[1].recall.at(1),
                          reports[1].recall.at(5), reports[1].recall.at(10));
        }
    }
    ok = ok && max_dev <= 0.2;
    return {ok, false,
            dp_line + fmt("max deviation from exact %.3f (%.1f s)", max_dev,
                          seconds_since(t0))};
}

}  // namespace

int main() {
    struct Row {
        const char* tag;
        Outcome (*fn)();
    };
    const Row rows[] = {{"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4},
                        {"A5", a5}, {"A6", a6}, {"A7", a7}, {"A8", a8}};
    int failures = 0;
    for (const Row& row : rows) {
        Outcome out;
        try {
            out = row.fn();
        } catch (const std::exception& e) {
            out = {false, false, std::string("unhandled error: ") + e.what()};
        }
        const char* status = out.skipped ? "SKIP" : out.ok ? "PASS" : "FAIL";
        std::printf("[%s] %s  %s\n", row.tag, status, out.detail.c_str());
        std::fflush(stdout);
        if (!out.ok && !out.skipped) ++failures;
    }
    if (failures > 0) {
        std::printf("%d of 8 criteria failed\n", failures);
    }
    return failures == 0 ? 0 : 1;
}
