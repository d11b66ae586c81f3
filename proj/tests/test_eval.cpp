#include <doctest.h>

#include <string>
#include <vector>

#include "xmodal/eval.hpp"

using namespace xmodal;

namespace {

FeaturePack caption_pack() {
    FeaturePack pack;
    pack.modality = Modality::sentence;
    pack.dim = 2;
    const char* links[][2] = {
        {"s1", "i1"}, {"s2", "i1"}, {"s3", "i2"}, {"s4", "i2"}, {"s5", "i3"}};
    for (const auto& [sid, gid] : links) {
        Item item;
        item.id = sid;
        item.group = gid;
        pack.items.push_back(std::move(item));
    }
    return pack;
}

Ranking make_ranking(std::string id, std::vector<std::string> ids,
                     bool empty = false) {
    Ranking r;
    r.query_id = std::move(id);
    r.query_empty = empty;
    r.ids = std::move(ids);
    return r;
}

}  // namespace

TEST_CASE("ground truth links sentences to their images") {
    const FeaturePack pack = caption_pack();
    const GroundTruth gt = GroundTruth::from_sentence_pack(pack);

    CHECK(gt.image_for("s3") == "i2");
    CHECK(gt.captions_for("i1") == std::vector<std::string>{"s1", "s2"});
    CHECK(gt.captions_for("i3") == std::vector<std::string>{"s5"});
    REQUIRE(gt.captions.size() == 3);
    CHECK(gt.captions[0].first == "i1");  // pack order is preserved
    CHECK(gt.captions[1].first == "i2");

    CHECK_THROWS_AS(gt.image_for("nope"), UnknownIdError);
    CHECK_THROWS_AS(gt.captions_for("nope"), UnknownIdError);

    FeaturePack orphan = caption_pack();
    orphan.items[2].group.clear();
    CHECK_THROWS_AS(GroundTruth::from_sentence_pack(orphan), ConfigError);
}

TEST_CASE("recall over hand-built image-retrieval rankings") {
    const GroundTruth gt = GroundTruth::from_sentence_pack(caption_pack());
    Rankings rankings;
    rankings.push_back(make_ranking("s1", {"i1", "i2", "i3"}));      // rank 0
    rankings.push_back(make_ranking("s2", {"i3", "i2", "i1"}));      // rank 2
    rankings.push_back(make_ranking("s3", {"i1", "i3"}));            // absent
    rankings.push_back(make_ranking("s5", {}, true));                // empty query

    const uint32_t ks[] = {5, 1, 3, 3};  // unsorted with a duplicate
    const RecallReport rep = recall_at_k(rankings, gt, Task::image_retrieval, ks);
    CHECK(rep.queries == 4);
    CHECK(rep.unretrievable == 1);
    REQUIRE(rep.recall.size() == 3);
    CHECK(rep.recall.at(1) == 25.0);
    CHECK(rep.recall.at(3) == 50.0);
    CHECK(rep.recall.at(5) == 50.0);
    CHECK(rep.recall.at(1) <= rep.recall.at(3));
    CHECK(rep.recall.at(3) <= rep.recall.at(5));
}

TEST_CASE("sentence retrieval counts any caption or only the first") {
    const GroundTruth gt = GroundTruth::from_sentence_pack(caption_pack());
    Rankings rankings;
    // i1's captions are s1 (first) and s2; s2 leads, s1 is buried at rank 4.
    rankings.push_back(make_ranking("i1", {"s2", "s3", "s4", "s5", "s1"}));

    const uint32_t ks[] = {1, 3};
    const RecallReport any =
        recall_at_k(rankings, gt, Task::sentence_retrieval, ks, HitRule::any_caption);
    CHECK(any.recall.at(1) == 100.0);
    CHECK(any.recall.at(3) == 100.0);

    const RecallReport first =
        recall_at_k(rankings, gt, Task::sentence_retrieval, ks, HitRule::first_caption);
    CHECK(first.recall.at(1) == 0.0);
    CHECK(first.recall.at(3) == 0.0);
    const uint32_t k5[] = {5};
    CHECK(recall_at_k(rankings, gt, Task::sentence_retrieval, k5,
                      HitRule::first_caption)
              .recall.at(5) == 100.0);
}

TEST_CASE("recall argument validation") {
    const GroundTruth gt = GroundTruth::from_sentence_pack(caption_pack());
    const uint32_t ks[] = {1};
    CHECK_THROWS_AS(recall_at_k({}, gt, Task::image_retrieval, ks), ConfigError);

    Rankings rankings;
    rankings.push_back(make_ranking("s1", {"i1"}));
    CHECK_THROWS_AS(recall_at_k(rankings, gt, Task::image_retrieval, {}), ConfigError);
    const uint32_t zero[] = {0};
    CHECK_THROWS_AS(recall_at_k(rankings, gt, Task::image_retrieval, zero),
                    ConfigError);
}

TEST_CASE("retrieval flags empty queries instead of ranking them") {
    std::vector<EncodedItem> corpus(2);
    corpus[0].id = "a";
    corpus[0].vec.dim = 2;
    corpus[0].vec.entries = {{0, 1.0f}};
    corpus[1].id = "b";
    corpus[1].vec.dim = 2;
    corpus[1].vec.entries = {{1, 1.0f}};
    const InvertedIndex index = InvertedIndex::build(corpus);

    std::vector<EncodedItem> queries(2);
    queries[0].id = "q_full";
    queries[0].vec.dim = 2;
    queries[0].vec.entries = {{0, 2.0f}};
    queries[1].id = "q_empty";
    queries[1].vec.dim = 2;

    const Rankings out = run_retrieval(index, queries, 5);
    REQUIRE(out.size() == 2);
    CHECK_FALSE(out[0].query_empty);
    CHECK(out[0].ids == std::vector<std::string>{"a"});
    CHECK(out[1].query_empty);
    CHECK(out[1].ids.empty());

    CHECK_THROWS_AS(run_retrieval(index, queries, 0), ConfigError);
}

TEST_CASE("re-ranking reorders only the candidate window") {
    const std::vector<std::string> ids = {"a", "b", "c", "d"};
    const std::vector<float> data = {1.0f, 0.0f,  0.9f, 0.1f,
                                     0.5f, 0.5f,  0.0f, 1.0f};
    const DenseStore store = DenseStore::build(ids, data, 2);
    const std::vector<DenseVector> queries = {{1.0f, 0.0f}};

    Rankings approx;
    approx.push_back(make_ranking("q", {"d", "c", "a", "b"}));

    // Window of 2: only d and c compete, by exact cosine.
    Rankings narrow = rerank(approx, store, queries, 1, 2);
    REQUIRE(narrow.size() == 1);
    CHECK(narrow[0].ids == std::vector<std::string>{"c", "d"});

    // Window of 4 covers the whole list and restores the true order.
    Rankings wide = rerank(approx, store, queries, 2, 2);
    CHECK(wide[0].ids == std::vector<std::string>{"a", "b", "c", "d"});

    // Shorter lists re-rank whatever they have.
    Rankings stub;
    stub.push_back(make_ranking("q", {"d"}));
    Rankings short_out = rerank(stub, store, queries, 2, 2);
    CHECK(short_out[0].ids == std::vector<std::string>{"d"});

    // Empty queries stay empty.
    Rankings hollow;
    hollow.push_back(make_ranking("q", {}, true));
    Rankings hollow_out = rerank(hollow, store, queries, 2, 2);
    CHECK(hollow_out[0].query_empty);
    CHECK(hollow_out[0].ids.empty());

    CHECK_THROWS_AS(rerank(approx, store, queries, 0, 2), ConfigError);
    CHECK_THROWS_AS(rerank(approx, store, queries, 1, 0), ConfigError);
    const std::vector<DenseVector> misaligned;
    CHECK_THROWS_AS(rerank(approx, store, misaligned, 1, 2), ConfigError);
}
