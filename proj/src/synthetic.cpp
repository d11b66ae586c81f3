#include "xmodal/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "xmodal/rng.hpp"

namespace xmodal {

namespace {

using nlohmann::json;

const char* const kStopWords[] = {"the", "a", "of", "in", "on",
                                  "and", "with", "is"};
constexpr uint64_t kStopWordCount = 8;
// Roughly one stop word per six sentence concepts.
constexpr uint64_t kStopWordOdds = 6;
constexpr uint64_t kWordsPerTopic = 16;

std::vector<double> unit(std::vector<double> v) {
    double sumsq = 0.0;
    for (double x : v) sumsq += x * x;
    const double n = std::sqrt(sumsq);
    if (n > 0.0) {
        for (double& x : v) x /= n;
    }
    return v;
}

DenseVector to_float(const std::vector<double>& v) {
    DenseVector out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i]);
    return out;
}

std::vector<double> gaussian_dvec(Rng& rng, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = rng.gaussian();
    return out;
}

/// centroid + sigma * noise, unit-normalized, rounded to float. The noise
/// vector is always drawn so the stream advances identically for sigma = 0.
DenseVector draw_member(Rng& rng, const std::vector<double>& centroid, double sigma) {
    std::vector<double> v = gaussian_dvec(rng, centroid.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
        v[j] = centroid[j] + sigma * v[j];
    }
    return to_float(unit(std::move(v)));
}

DenseVector draw_global(Rng& rng, const std::vector<Concept>& concepts,
                        std::size_t dim, double sigma) {
    std::vector<double> mean(dim, 0.0);
    for (const Concept& c : concepts) {
        for (std::size_t j = 0; j < dim; ++j) {
            mean[j] += static_cast<double>(c.vector[j]);
        }
    }
    for (double& x : mean) x /= static_cast<double>(concepts.size());
    std::vector<double> noise = gaussian_dvec(rng, dim);
    for (std::size_t j = 0; j < dim; ++j) {
        mean[j] += sigma * noise[j];
    }
    return to_float(unit(std::move(mean)));
}

uint64_t require_u64(const json& j, const char* key) {
    if (!j.contains(key)) {
        throw ConfigError(std::string("missing config key: ") + key);
    }
    if (!j[key].is_number_unsigned()) {
        throw ConfigError(std::string("config key must be a non-negative integer: ") + key);
    }
    return j[key].get<uint64_t>();
}

std::array<uint32_t, 2> optional_range(const json& j, const char* key,
                                       std::array<uint32_t, 2> fallback) {
    if (!j.contains(key)) return fallback;
    const json& r = j[key];
    if (!r.is_array() || r.size() != 2 || !r[0].is_number_unsigned() ||
        !r[1].is_number_unsigned()) {
        throw ConfigError(std::string(key) + " must be a [min, max] pair");
    }
    return {r[0].get<uint32_t>(), r[1].get<uint32_t>()};
}

}  // namespace

void SyntheticConfig::validate() const {
    if (n_images == 0) throw ConfigError("n_images must be positive");
    if (dim == 0) throw ConfigError("dim must be positive");
    if (topics == 0) throw ConfigError("topics must be positive");
    if (captions_per_image == 0) throw ConfigError("captions_per_image must be positive");
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw ConfigError("noise_sigma must be a finite non-negative number");
    }
    for (const auto& [range, name] :
         {std::pair{concepts_per_image, "concepts_per_image"},
          std::pair{concepts_per_sentence, "concepts_per_sentence"}}) {
        if (range[0] == 0 || range[0] > range[1]) {
            throw ConfigError(std::string(name) + " range must satisfy 1 <= min <= max");
        }
    }
}

SyntheticConfig load_synthetic_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config: " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config is not valid JSON: " + path.string() + ": " + e.what());
    }
    if (!j.is_object()) {
        throw ConfigError("config root must be a JSON object: " + path.string());
    }

    SyntheticConfig cfg;
    cfg.n_images = require_u64(j, "n_images");
    cfg.dim = static_cast<uint32_t>(require_u64(j, "dim"));
    cfg.topics = static_cast<uint32_t>(require_u64(j, "topics"));
    cfg.seed = require_u64(j, "seed");
    if (!j.contains("noise_sigma")) {
        throw ConfigError("missing config key: noise_sigma");
    }
    if (!j["noise_sigma"].is_number()) {
        throw ConfigError("noise_sigma must be a number");
    }
    cfg.noise_sigma = j["noise_sigma"].get<double>();
    if (j.contains("captions_per_image")) {
        cfg.captions_per_image = static_cast<uint32_t>(require_u64(j, "captions_per_image"));
    }
    cfg.concepts_per_image =
        optional_range(j, "concepts_per_image", cfg.concepts_per_image);
    cfg.concepts_per_sentence =
        optional_range(j, "concepts_per_sentence", cfg.concepts_per_sentence);
    cfg.validate();
    return cfg;
}

std::pair<FeaturePack, FeaturePack> generate_synthetic(const SyntheticConfig& config) {
    config.validate();
    Rng rng(config.seed);

    std::vector<std::vector<double>> centroids;
    centroids.reserve(config.topics);
    for (uint32_t t = 0; t < config.topics; ++t) {
        centroids.push_back(unit(gaussian_dvec(rng, config.dim)));
    }

    char buf[32];

    FeaturePack images;
    images.modality = Modality::image;
    images.dim = config.dim;
    images.source = "synth(seed=" + std::to_string(config.seed) + ")";
    images.items.reserve(config.n_images);
    for (uint64_t i = 0; i < config.n_images; ++i) {
        const uint32_t topic = static_cast<uint32_t>(i % config.topics);
        Item item;
        std::snprintf(buf, sizeof(buf), "img%06llu", static_cast<unsigned long long>(i));
        item.id = buf;
        const uint64_t m =
            rng.range(config.concepts_per_image[0], config.concepts_per_image[1]);
        item.concepts.reserve(m);
        for (uint64_t k = 0; k < m; ++k) {
            Concept c;
            c.vector = draw_member(rng, centroids[topic], config.noise_sigma);
            item.concepts.push_back(std::move(c));
        }
        item.global = draw_global(rng, item.concepts, config.dim, config.noise_sigma);
        images.items.push_back(std::move(item));
    }

    FeaturePack sentences;
    sentences.modality = Modality::sentence;
    sentences.dim = config.dim;
    sentences.source = images.source;
    sentences.items.reserve(config.n_images * config.captions_per_image);
    uint64_t sentence_counter = 0;
    for (uint64_t i = 0; i < config.n_images; ++i) {
        const uint32_t topic = static_cast<uint32_t>(i % config.topics);
        for (uint32_t cap = 0; cap < config.captions_per_image; ++cap) {
            Item item;
            std::snprintf(buf, sizeof(buf), "sen%07llu",
                          static_cast<unsigned long long>(sentence_counter++));
            item.id = buf;
            item.group = images.items[i].id;
            const uint64_t m = rng.range(config.concepts_per_sentence[0],
                                         config.concepts_per_sentence[1]);
            item.concepts.reserve(m);
            for (uint64_t k = 0; k < m; ++k) {
                Concept c;
                c.vector = draw_member(rng, centroids[topic], config.noise_sigma);
                if (rng.bounded(kStopWordOdds) == 0) {
                    c.word = kStopWords[rng.bounded(kStopWordCount)];
                    c.is_stop_word = true;
                } else {
                    std::snprintf(buf, sizeof(buf), "t%04u_w%02u", topic,
                                  static_cast<unsigned>(rng.bounded(kWordsPerTopic)));
                    c.word = buf;
                }
                item.concepts.push_back(std::move(c));
            }
            item.global = draw_global(rng, item.concepts, config.dim, config.noise_sigma);
            sentences.items.push_back(std::move(item));
        }
    }

    return {std::move(images), std::move(sentences)};
}

}  // namespace xmodal
