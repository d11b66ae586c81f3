#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "xmodal/types.hpp"

namespace xmodal {

/// One region or word descriptor. `word` is empty for visual concepts and
/// carries the surface form for textual ones; `is_stop_word` may only be set
/// when a word is present.
struct Concept {
    DenseVector vector;
    std::string word;
    bool is_stop_word = false;

    friend bool operator==(const Concept&, const Concept&) = default;
};

/// An image or a sentence: an optional global descriptor plus a variable
/// number of concept vectors. `group` ties a sentence to its image id and is
/// empty for images.
struct Item {
    std::string id;
    std::optional<DenseVector> global;
    std::vector<Concept> concepts;
    std::string group;

    friend bool operator==(const Item&, const Item&) = default;
};

/// A collection of same-modality items sharing one feature dimensionality.
/// `source` is free-form provenance for logs and is not persisted.
struct FeaturePack {
    Modality modality = Modality::image;
    uint32_t dim = 0;
    bool contextualized = false;
    std::string source;
    std::vector<Item> items;

    /// Checks dimensionality, id uniqueness and the stop-word/word rule.
    void validate() const;

    /// Equality over everything except `source`.
    bool same_content(const FeaturePack& other) const;
};

FeaturePack load_feature_pack(const std::filesystem::path& path);
void write_feature_pack(const FeaturePack& pack, const std::filesystem::path& path);

}  // namespace xmodal
