#include "xmodal/feature_pack.hpp"

#include <unordered_set>

#include "xmodal/detail/binary_io.hpp"

namespace xmodal {

namespace {

constexpr char kMagic[4] = {'X', 'M', 'F', 'P'};
constexpr uint16_t kVersion = 1;

}  // namespace

void FeaturePack::validate() const {
    if (dim == 0) {
        throw DimensionError("feature pack dim must be positive");
    }
    std::unordered_set<std::string> seen;
    seen.reserve(items.size());
    for (const Item& item : items) {
        if (!seen.insert(item.id).second) {
            throw DuplicateIdError("duplicate item id: " + item.id);
        }
        if (item.global && item.global->size() != dim) {
            throw DimensionError("item " + item.id + ": global vector has " +
                                 std::to_string(item.global->size()) +
                                 " components, expected " + std::to_string(dim));
        }
        for (const Concept& c : item.concepts) {
            if (c.vector.size() != dim) {
                throw DimensionError("item " + item.id + ": concept vector has " +
                                     std::to_string(c.vector.size()) +
                                     " components, expected " + std::to_string(dim));
            }
            if (c.is_stop_word && c.word.empty()) {
                throw FormatError("item " + item.id +
                                  ": stop-word flag set on a concept without a word");
            }
        }
    }
}

bool FeaturePack::same_content(const FeaturePack& other) const {
    return modality == other.modality && dim == other.dim &&
           contextualized == other.contextualized && items == other.items;
}

// Layout: magic "XMFP", version u16, modality u8, contextualized u8, dim u32,
// item count u64, then per item: id str16, group str16, has-global u8,
// [global f32*dim], concept count u32, then per concept: word str16,
// stop-flag u8, vector f32*dim. Little-endian throughout; the in-memory
// `source` note is not persisted.
void write_feature_pack(const FeaturePack& pack, const std::filesystem::path& path) {
    pack.validate();
    detail::BinWriter w(path);
    w.bytes(kMagic, 4);
    w.u16(kVersion);
    w.u8(static_cast<uint8_t>(pack.modality));
    w.u8(pack.contextualized ? 0x01 : 0x00);
    w.u32(pack.dim);
    w.u64(pack.items.size());
    for (const Item& item : pack.items) {
        w.str16(item.id);
        w.str16(item.group);
        w.u8(item.global ? 1 : 0);
        if (item.global) {
            w.f32_array(item.global->data(), pack.dim);
        }
        w.u32(static_cast<uint32_t>(item.concepts.size()));
        for (const Concept& c : item.concepts) {
            w.str16(c.word);
            w.u8(c.is_stop_word ? 1 : 0);
            w.f32_array(c.vector.data(), pack.dim);
        }
    }
    w.finish();
}

FeaturePack load_feature_pack(const std::filesystem::path& path) {
    detail::BinReader r(path);
    r.expect_magic(kMagic, "feature pack");
    const uint16_t version = r.u16();
    if (version != kVersion) {
        throw FormatError("unsupported feature pack version " +
                          std::to_string(version) + ": " + r.path());
    }
    const uint8_t modality = r.u8();
    if (modality > 1) {
        throw FormatError("bad modality byte in " + r.path());
    }
    const uint8_t flags = r.u8();
    if (flags & ~0x01) {
        throw FormatError("unknown flag bits in " + r.path());
    }

    FeaturePack pack;
    pack.modality = static_cast<Modality>(modality);
    pack.contextualized = (flags & 0x01) != 0;
    pack.dim = r.u32();
    if (pack.dim == 0) {
        throw FormatError("zero dim in " + r.path());
    }
    const uint64_t count = r.u64();
    pack.items.reserve(count);
    for (uint64_t i = 0; i < count; ++i) {
        Item item;
        item.id = r.str16();
        if (item.id.empty()) {
            throw FormatError("empty item id in " + r.path());
        }
        item.group = r.str16();
        const uint8_t has_global = r.u8();
        if (has_global > 1) {
            throw FormatError("bad global-presence byte in " + r.path());
        }
        if (has_global) {
            DenseVector g(pack.dim);
            r.f32_array(g.data(), pack.dim);
            item.global = std::move(g);
        }
        const uint32_t n_concepts = r.u32();
        item.concepts.reserve(n_concepts);
        for (uint32_t j = 0; j < n_concepts; ++j) {
            Concept c;
            c.word = r.str16();
            const uint8_t stop = r.u8();
            if (stop > 1) {
                throw FormatError("bad stop-word byte in " + r.path());
            }
            c.is_stop_word = stop != 0;
            c.vector.resize(pack.dim);
            r.f32_array(c.vector.data(), pack.dim);
            item.concepts.push_back(std::move(c));
        }
        pack.items.push_back(std::move(item));
    }
    r.expect_end("feature pack");
    pack.source = path.string();
    pack.validate();
    return pack;
}

}  // namespace xmodal
