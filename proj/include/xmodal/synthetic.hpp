#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>

#include "xmodal/feature_pack.hpp"

namespace xmodal {

/// Parameters for the clustered synthetic corpus. Every image belongs to one
/// topic (index modulo `topics`); its captions draw from the same topic, so
/// ground truth is recoverable by construction.
struct SyntheticConfig {
    uint64_t n_images = 0;
    uint32_t captions_per_image = 5;
    uint32_t dim = 0;
    uint32_t topics = 0;
    double noise_sigma = 0.1;
    std::array<uint32_t, 2> concepts_per_image{4, 10};
    std::array<uint32_t, 2> concepts_per_sentence{3, 8};
    uint64_t seed = 0;

    void validate() const;
};

/// Parses a JSON config. Keys n_images, dim, topics, noise_sigma and seed are
/// required; captions_per_image and the two [min,max] concept-count ranges
/// fall back to the defaults above.
SyntheticConfig load_synthetic_config(const std::filesystem::path& path);

/// Deterministic generation: the same config always produces byte-identical
/// packs. Returns {images, sentences}; sentence ids carry their image id in
/// `group`.
std::pair<FeaturePack, FeaturePack> generate_synthetic(const SyntheticConfig& config);

}  // namespace xmodal
