// Serial reference kernels vs the OpenMP paths on synthetic data. Run with
// XMODAL_THREADS to pin the pool; wall times are best of three.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "xmodal/boc.hpp"
#include "xmodal/codebook.hpp"
#include "xmodal/eval.hpp"
#include "xmodal/index.hpp"
#include "xmodal/parallel.hpp"
#include "xmodal/reference.hpp"
#include "xmodal/rng.hpp"
#include "xmodal/synthetic.hpp"
#include "xmodal/transforms.hpp"

using namespace xmodal;

namespace {

double time_best_of(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(best,
                        std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s %10.2f ms %10.2f ms %8.2fx\n", name, serial_ms, parallel_ms,
                serial_ms / parallel_ms);
}

}  // namespace

int main() {
    std::printf("worker threads: %d\n", worker_threads());
    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    // Shared corpus.
    SyntheticConfig cfg;
    cfg.n_images = 4000;
    cfg.captions_per_image = 2;
    cfg.dim = 64;
    cfg.topics = 100;
    cfg.noise_sigma = 0.1;
    cfg.seed = 99;
    const auto [images, sentences] = generate_synthetic(cfg);

    // Nearest-centroid assignment.
    {
        const std::vector<const FeaturePack*> packs{&images, &sentences};
        const ConceptPool pool = build_pool(packs, 30000, false, 7);
        const uint32_t p = 128;
        std::vector<float> centroids(static_cast<std::size_t>(p) * pool.dim);
        Rng rng(11);
        for (float& x : centroids) x = static_cast<float>(rng.gaussian());
        std::vector<uint32_t> assign(pool.size());
        std::vector<double> dist2(pool.size());
        const double serial_ms = time_best_of(3, [&] {
            ref::assign_nearest_serial(pool.data, pool.size(), pool.dim, centroids, p,
                                       assign, dist2);
        });
        const double parallel_ms = time_best_of(3, [&] {
            assign_nearest(pool.data, pool.size(), pool.dim, centroids, p, assign,
                           dist2);
        });
        report("nearest-centroid assign", serial_ms, parallel_ms);
    }

    // Batch global transform.
    {
        TransformConfig tc;
        tc.method = TransformMethod::deep_permutation;
        const double serial_ms = time_best_of(3, [&] {
            for (const Item& item : sentences.items) {
                (void)transform_global(*item.global, tc);
            }
        });
        const double parallel_ms =
            time_best_of(3, [&] { (void)transform_pack(sentences, tc); });
        report("deep-permutation encode", serial_ms, parallel_ms);
    }

    // Dense exact scan.
    {
        const DenseStore store = DenseStore::from_pack_globals(images);
        std::vector<DenseVector> queries;
        for (std::size_t i = 0; i < 400; ++i) {
            queries.push_back(*sentences.items[i].global);
        }
        std::vector<std::string> ids(store.ids());
        std::vector<float> flat;
        flat.reserve(store.size() * store.dim());
        for (uint32_t i = 0; i < store.size(); ++i) {
            const auto row = store.vec(i);
            flat.insert(flat.end(), row.begin(), row.end());
        }
        const double serial_ms = time_best_of(3, [&] {
            for (const DenseVector& q : queries) {
                (void)ref::dense_topk_scan(flat, ids, store.dim(), q, 10);
            }
        });
        const double parallel_ms =
            time_best_of(3, [&] { (void)store.exact_topk_batch(queries, 10); });
        report("dense exact top-10", serial_ms, parallel_ms);
    }

    // Inverted-index retrieval.
    {
        TransformConfig tc;
        tc.method = TransformMethod::scalar_quantization;
        tc.keep_z = 16;
        const auto corpus = transform_pack(images, tc);
        const auto queries = transform_pack(sentences, tc);
        const InvertedIndex index = InvertedIndex::build(corpus, Modality::image);
        const double serial_ms = time_best_of(3, [&] {
            for (const EncodedItem& q : queries) {
                (void)ref::sparse_topk_scan(corpus, q.vec, 10);
            }
        });
        const double parallel_ms =
            time_best_of(3, [&] { (void)run_retrieval(index, queries, 10); });
        report("sparse top-10 (scan/index)", serial_ms, parallel_ms);
    }

    return 0;
}
