// Command-line front end: synth, codebook, transform, index, query, evaluate.
// Every subcommand accepts --config <json>; explicit flags override config
// values. Exit codes: 0 success, 1 usage, 2 bad data or config, 3 unknown id.

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "xmodal/boc.hpp"
#include "xmodal/codebook.hpp"
#include "xmodal/eval.hpp"
#include "xmodal/feature_pack.hpp"
#include "xmodal/index.hpp"
#include "xmodal/parallel.hpp"
#include "xmodal/pipeline.hpp"
#include "xmodal/report_io.hpp"
#include "xmodal/synthetic.hpp"
#include "xmodal/transforms.hpp"

namespace {

using nlohmann::json;
using namespace xmodal;

/// Defaults loaded from --config before flag parsing, so flags always win.
struct ConfigDefaults {
    json j = json::object();
    bool loaded = false;

    void load(const std::string& path) {
        std::ifstream in(path);
        if (!in) {
            throw IoError("cannot open config: " + path);
        }
        try {
            in >> j;
        } catch (const json::parse_error& e) {
            throw ConfigError("config is not valid JSON: " + path + ": " + e.what());
        }
        if (!j.is_object()) {
            throw ConfigError("config root must be a JSON object: " + path);
        }
        loaded = true;
    }

    template <typename T>
    void get(const char* key, T& target) const {
        if (!loaded || !j.contains(key)) return;
        try {
            target = j.at(key).get<T>();
        } catch (const json::exception&) {
            throw ConfigError(std::string("config key has the wrong type: ") + key);
        }
    }
};

/// The --config path must be known before CLI11 runs, so scan argv by hand.
std::string find_config_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--config" && i + 1 < argc) return argv[i + 1];
        if (arg.rfind("--config=", 0) == 0) return arg.substr(9);
    }
    return {};
}

/// First bare token names the subcommand; config defaults only apply to it.
std::string find_subcommand_arg(int argc, char** argv) {
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (!arg.empty() && arg[0] != '-') return arg;
        if (arg == "--config") ++i;  // skip its value
    }
    return {};
}

MethodSpec::Kind parse_method(const std::string& name) {
    if (name == "deep_permutation" || name == "dp") return MethodSpec::Kind::deep_permutation;
    if (name == "scalar_quantization" || name == "sq") {
        return MethodSpec::Kind::scalar_quantization;
    }
    if (name == "boc_hard") return MethodSpec::Kind::boc_hard;
    if (name == "boc_soft") return MethodSpec::Kind::boc_soft;
    throw ConfigError("unknown method: " + name);
}

Aggregation parse_aggregation(const std::string& name) {
    if (name == "max") return Aggregation::max;
    if (name == "sum") return Aggregation::sum;
    throw ConfigError("unknown aggregation: " + name);
}

SimilarityTransform parse_similarity(const std::string& name) {
    if (name == "one_over_one_plus_d" || name == "plus") {
        return SimilarityTransform::one_over_one_plus_d;
    }
    if (name == "one_over_one_minus_d" || name == "minus") {
        return SimilarityTransform::one_over_one_minus_d;
    }
    throw ConfigError("unknown similarity transform: " + name);
}

HitRule parse_hit_rule(const std::string& name) {
    if (name == "any") return HitRule::any_caption;
    if (name == "first") return HitRule::first_caption;
    throw ConfigError("unknown hit rule: " + name);
}

void print_reports(const std::vector<EvalReport>& reports) {
    std::cout << std::left << std::setw(20) << "task" << std::setw(22) << "method"
              << std::setw(10) << "sparsity" << std::setw(6) << "r_m";
    if (!reports.empty()) {
        for (const auto& [k, _] : reports.front().recall) {
            std::cout << std::setw(10) << ("R@" + std::to_string(k));
        }
    }
    std::cout << "unretrievable\n";
    for (const EvalReport& r : reports) {
        std::cout << std::left << std::setw(20) << r.task << std::setw(22) << r.method
                  << std::setw(10) << r.sparsity << std::setw(6) << r.r_m;
        std::cout << std::fixed << std::setprecision(2);
        for (const auto& [_, v] : r.recall) {
            std::cout << std::setw(10) << v;
        }
        std::cout.unsetf(std::ios::fixed);
        std::cout << std::setprecision(6) << r.unretrievable << "\n";
    }
}

int cmd_synth(const std::string& out_images, const std::string& out_sentences,
              SyntheticConfig base) {
    // CLI11 already wrote flag values into `base`; json filled the rest.
    base.validate();
    auto [images, sentences] = generate_synthetic(base);
    write_feature_pack(images, out_images);
    write_feature_pack(sentences, out_sentences);
    std::cout << "wrote " << images.items.size() << " images to " << out_images
              << " and " << sentences.items.size() << " sentences to " << out_sentences
              << "\n";
    return 0;
}

}  // namespace

int run(int argc, char** argv) {
    CLI::App app{"cross-modal retrieval toolkit"};
    app.require_subcommand(1);
    std::string config_path_opt;
    app.add_option("--config", config_path_opt, "JSON config with defaults for the flags");

    ConfigDefaults all_cfg;
    const std::string config_path = find_config_arg(argc, argv);
    if (!config_path.empty()) {
        all_cfg.load(config_path);
    }
    const std::string active = find_subcommand_arg(argc, argv);
    auto cfg_for = [&](const char* name) {
        return active == name ? all_cfg : ConfigDefaults{};
    };

    // synth
    auto* synth = app.add_subcommand("synth", "generate a synthetic corpus");
    synth->add_option("--config", config_path_opt, "JSON config");
    SyntheticConfig synth_cfg;
    std::string synth_out_images;
    std::string synth_out_sentences;
    {
        const ConfigDefaults cfg = cfg_for("synth");
        cfg.get("n_images", synth_cfg.n_images);
        cfg.get("captions_per_image", synth_cfg.captions_per_image);
        cfg.get("dim", synth_cfg.dim);
        cfg.get("topics", synth_cfg.topics);
        cfg.get("noise_sigma", synth_cfg.noise_sigma);
        cfg.get("concepts_per_image", synth_cfg.concepts_per_image);
        cfg.get("concepts_per_sentence", synth_cfg.concepts_per_sentence);
        cfg.get("seed", synth_cfg.seed);
        cfg.get("out_images", synth_out_images);
        cfg.get("out_sentences", synth_out_sentences);
    }
    synth->add_option("--n-images", synth_cfg.n_images, "number of images");
    synth->add_option("--captions-per-image", synth_cfg.captions_per_image,
                      "sentences per image");
    synth->add_option("--dim", synth_cfg.dim, "feature dimensionality");
    synth->add_option("--topics", synth_cfg.topics, "number of topics");
    synth->add_option("--noise-sigma", synth_cfg.noise_sigma, "cluster noise");
    synth->add_option("--seed", synth_cfg.seed, "random seed");
    synth->add_option("--out-images", synth_out_images, "output image pack")
        ->required(synth_out_images.empty());
    synth->add_option("--out-sentences", synth_out_sentences, "output sentence pack")
        ->required(synth_out_sentences.empty());

    // codebook
    auto* codebook_cmd = app.add_subcommand("codebook", "build a concept codebook");
    codebook_cmd->add_option("--config", config_path_opt, "JSON config");
    std::vector<std::string> cb_packs;
    std::string cb_method = "kmeans";
    std::string cb_out;
    std::string cb_dictionary;
    std::string cb_stop_words;
    uint32_t cb_p = 1000;
    uint64_t cb_pool_size = 100000;
    uint64_t cb_seed = 0;
    bool cb_exclude_stop = false;
    {
        const ConfigDefaults cfg = cfg_for("codebook");
        cfg.get("packs", cb_packs);
        cfg.get("method", cb_method);
        cfg.get("out", cb_out);
        cfg.get("dictionary", cb_dictionary);
        cfg.get("stop_words", cb_stop_words);
        cfg.get("p", cb_p);
        cfg.get("pool_size", cb_pool_size);
        cfg.get("seed", cb_seed);
        cfg.get("exclude_stop_words", cb_exclude_stop);
    }
    codebook_cmd->add_option("--pack", cb_packs, "input feature pack (repeatable)");
    codebook_cmd->add_option("--method", cb_method, "kmeans | words");
    codebook_cmd->add_option("--p", cb_p, "codebook size");
    codebook_cmd->add_option("--pool-size", cb_pool_size, "max concepts sampled for k-means");
    codebook_cmd->add_option("--seed", cb_seed, "sampling/seeding seed");
    codebook_cmd->add_flag("--exclude-stop-words", cb_exclude_stop,
                           "drop stop-word concepts from the pool");
    codebook_cmd->add_option("--dictionary", cb_dictionary, "word list (words method)");
    codebook_cmd->add_option("--stop-words", cb_stop_words, "stop-word list (words method)");
    codebook_cmd->add_option("--out", cb_out, "output codebook")->required(cb_out.empty());

    // transform
    auto* transform_cmd =
        app.add_subcommand("transform", "encode global vectors into sparse form");
    transform_cmd->add_option("--config", config_path_opt, "JSON config");
    std::string tr_pack;
    std::string tr_out;
    std::string tr_method = "deep_permutation";
    double tr_scale = 1000.0;
    double tr_sparsity = 0.0;
    bool tr_no_crelu = false;
    {
        const ConfigDefaults cfg = cfg_for("transform");
        cfg.get("pack", tr_pack);
        cfg.get("out", tr_out);
        cfg.get("method", tr_method);
        cfg.get("scale", tr_scale);
        cfg.get("sparsity", tr_sparsity);
        cfg.get("no_crelu", tr_no_crelu);
    }
    transform_cmd->add_option("--pack", tr_pack, "input feature pack")
        ->required(tr_pack.empty());
    transform_cmd->add_option("--method", tr_method,
                              "deep_permutation | scalar_quantization");
    transform_cmd->add_option("--scale", tr_scale, "quantization scale");
    transform_cmd->add_option("--sparsity", tr_sparsity, "sparsity factor in [0,1)");
    transform_cmd->add_flag("--no-crelu", tr_no_crelu, "skip the c-relu expansion");
    transform_cmd->add_option("--out", tr_out, "output vector segment")
        ->required(tr_out.empty());

    // index
    auto* index_cmd = app.add_subcommand("index", "validate and rewrite a vector segment");
    index_cmd->add_option("--config", config_path_opt, "JSON config");
    std::string ix_in;
    std::string ix_out;
    {
        const ConfigDefaults cfg = cfg_for("index");
        cfg.get("in", ix_in);
        cfg.get("out", ix_out);
    }
    index_cmd->add_option("--in", ix_in, "input segment")->required(ix_in.empty());
    index_cmd->add_option("--out", ix_out, "output segment")->required(ix_out.empty());

    // query
    auto* query_cmd = app.add_subcommand("query", "run one query against a segment");
    query_cmd->add_option("--config", config_path_opt, "JSON config");
    std::string q_index;
    std::string q_vectors;
    std::string q_id;
    std::string q_vector_file;
    uint64_t q_k = 10;
    {
        const ConfigDefaults cfg = cfg_for("query");
        cfg.get("index", q_index);
        cfg.get("vectors", q_vectors);
        cfg.get("id", q_id);
        cfg.get("vector_file", q_vector_file);
        cfg.get("k", q_k);
    }
    query_cmd->add_option("--index", q_index, "segment to search")->required(q_index.empty());
    query_cmd->add_option("--vectors", q_vectors, "segment holding the query vector");
    query_cmd->add_option("--id", q_id, "query id inside --vectors");
    query_cmd->add_option("--vector-file", q_vector_file,
                          "JSON file {\"dim\": d, \"entries\": [[index, weight], ...]}");
    query_cmd->add_option("--k", q_k, "results to return");

    // evaluate
    auto* eval_cmd = app.add_subcommand("evaluate", "recall over a corpus pair");
    eval_cmd->add_option("--config", config_path_opt, "JSON config");
    std::string ev_images;
    std::string ev_sentences;
    std::string ev_method = "deep_permutation";
    std::string ev_codebook;
    std::string ev_aggregation = "sum";
    std::string ev_similarity = "one_over_one_plus_d";
    std::string ev_hit_rule = "any";
    std::string ev_out_json;
    std::string ev_out_csv;
    std::vector<double> ev_sparsity = {0.0};
    std::vector<uint32_t> ev_rerank;
    std::vector<uint32_t> ev_ks = {1, 5, 10};
    double ev_scale = 1000.0;
    bool ev_no_crelu = false;
    bool ev_exclude_stop = false;
    uint32_t ev_rerank_k = 10;
    {
        const ConfigDefaults cfg = cfg_for("evaluate");
        cfg.get("images", ev_images);
        cfg.get("sentences", ev_sentences);
        cfg.get("method", ev_method);
        cfg.get("codebook", ev_codebook);
        cfg.get("aggregation", ev_aggregation);
        cfg.get("similarity", ev_similarity);
        cfg.get("hit_rule", ev_hit_rule);
        cfg.get("out_json", ev_out_json);
        cfg.get("out_csv", ev_out_csv);
        cfg.get("sparsity", ev_sparsity);
        cfg.get("rerank", ev_rerank);
        cfg.get("ks", ev_ks);
        cfg.get("scale", ev_scale);
        cfg.get("no_crelu", ev_no_crelu);
        cfg.get("exclude_stop_words", ev_exclude_stop);
        cfg.get("rerank_k", ev_rerank_k);
    }
    eval_cmd->add_option("--images", ev_images, "image feature pack")
        ->required(ev_images.empty());
    eval_cmd->add_option("--sentences", ev_sentences, "sentence feature pack")
        ->required(ev_sentences.empty());
    eval_cmd->add_option("--method", ev_method,
                         "deep_permutation | scalar_quantization | boc_hard | boc_soft");
    eval_cmd->add_option("--codebook", ev_codebook, "codebook file (boc methods)");
    eval_cmd->add_option("--sparsity", ev_sparsity, "sparsity factors")
        ->delimiter(',');
    eval_cmd->add_option("--rerank", ev_rerank, "r_m values; enables the re-rank stage")
        ->delimiter(',');
    eval_cmd->add_option("--rerank-k", ev_rerank_k, "K whose window r_m * K is re-ranked");
    eval_cmd->add_option("--k", ev_ks, "recall cutoffs")->delimiter(',');
    eval_cmd->add_option("--scale", ev_scale, "quantization scale");
    eval_cmd->add_flag("--no-crelu", ev_no_crelu, "skip the c-relu expansion");
    eval_cmd->add_flag("--exclude-stop-words", ev_exclude_stop,
                       "drop stop-word concepts at encoding time");
    eval_cmd->add_option("--aggregation", ev_aggregation, "max | sum (boc_soft)");
    eval_cmd->add_option("--similarity", ev_similarity,
                         "one_over_one_plus_d | one_over_one_minus_d");
    eval_cmd->add_option("--hit-rule", ev_hit_rule, "any | first");
    eval_cmd->add_option("--out-json", ev_out_json, "write reports as JSON");
    eval_cmd->add_option("--out-csv", ev_out_csv, "write reports as CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (synth->parsed()) {
        return cmd_synth(synth_out_images, synth_out_sentences, synth_cfg);
    }

    if (codebook_cmd->parsed()) {
        if (cb_packs.empty()) {
            std::cerr << "codebook: at least one --pack is required\n";
            return 1;
        }
        std::vector<FeaturePack> packs;
        packs.reserve(cb_packs.size());
        std::vector<const FeaturePack*> pack_ptrs;
        for (const std::string& p : cb_packs) {
            packs.push_back(load_feature_pack(p));
        }
        for (const FeaturePack& p : packs) pack_ptrs.push_back(&p);

        Codebook cb;
        if (cb_method == "kmeans") {
            const ConceptPool pool =
                build_pool(pack_ptrs, cb_pool_size, cb_exclude_stop, cb_seed);
            KmeansStats stats;
            cb = kmeans_codebook(pool, cb_p, cb_seed, {}, &stats);
            std::cout << "k-means: pool " << pool.size() << ", " << stats.iterations
                      << " iterations, " << stats.reseeds << " reseeds, objective "
                      << (stats.objective.empty() ? 0.0 : stats.objective.back()) << "\n";
        } else if (cb_method == "words") {
            if (cb_dictionary.empty()) {
                std::cerr << "codebook: --dictionary is required for the words method\n";
                return 1;
            }
            const auto dictionary = load_word_list(cb_dictionary);
            std::unordered_set<std::string> stop;
            if (!cb_stop_words.empty()) stop = load_word_list(cb_stop_words);
            cb = build_word_codebook(pack_ptrs, cb_p, dictionary, stop);
        } else {
            throw ConfigError("unknown codebook method: " + cb_method);
        }
        write_codebook(cb, cb_out);
        std::cout << "wrote codebook p=" << cb.p << " dim=" << cb.dim << " to " << cb_out
                  << "\n";
        return 0;
    }

    if (transform_cmd->parsed()) {
        const FeaturePack pack = load_feature_pack(tr_pack);
        MethodSpec spec;
        spec.kind = parse_method(tr_method);
        if (!spec.is_global()) {
            throw ConfigError("transform handles the global-vector methods only");
        }
        spec.scale = tr_scale;
        spec.apply_crelu = !tr_no_crelu;
        const auto encoded = encode_for(pack, spec, tr_sparsity);
        const InvertedIndex index = InvertedIndex::build(encoded, pack.modality);
        write_index(index, tr_out);
        std::cout << "wrote " << index.size() << " vectors (dim " << index.dim()
                  << ") to " << tr_out << "\n";
        return 0;
    }

    if (index_cmd->parsed()) {
        const InvertedIndex index = load_index(ix_in);
        write_index(index, ix_out);
        std::cout << "validated " << index.size() << " items (dim " << index.dim()
                  << "); wrote " << ix_out << "\n";
        return 0;
    }

    if (query_cmd->parsed()) {
        const InvertedIndex index = load_index(q_index);
        SparseVector query;
        if (!q_vector_file.empty()) {
            std::ifstream in(q_vector_file);
            if (!in) {
                throw IoError("cannot open vector file: " + q_vector_file);
            }
            json j;
            try {
                in >> j;
            } catch (const json::parse_error& e) {
                throw ConfigError(std::string("vector file is not valid JSON: ") + e.what());
            }
            if (!j.contains("dim") || !j.contains("entries")) {
                throw ConfigError("vector file needs dim and entries");
            }
            query.dim = j["dim"].get<uint32_t>();
            for (const auto& pair : j["entries"]) {
                if (!pair.is_array() || pair.size() != 2) {
                    throw ConfigError("entries must be [index, weight] pairs");
                }
                query.entries.push_back(
                    {pair[0].get<uint32_t>(), pair[1].get<float>()});
            }
            query.check_invariants();
        } else if (!q_vectors.empty() && !q_id.empty()) {
            const InvertedIndex source = load_index(q_vectors);
            const auto ordinal = source.ordinal_of(q_id);
            if (!ordinal) {
                throw UnknownIdError("id not in " + q_vectors + ": " + q_id);
            }
            query = source.reconstruct_all()[*ordinal];
        } else {
            std::cerr << "query: provide --vector-file, or --vectors with --id\n";
            return 1;
        }
        const auto hits = index.query_topk(query, q_k);
        for (std::size_t i = 0; i < hits.size(); ++i) {
            std::printf("%zu\t%s\t%.9g\n", i + 1, hits[i].id.c_str(), hits[i].score);
        }
        return 0;
    }

    if (eval_cmd->parsed()) {
        const FeaturePack images = load_feature_pack(ev_images);
        const FeaturePack sentences = load_feature_pack(ev_sentences);

        MethodSpec spec;
        spec.kind = parse_method(ev_method);
        spec.scale = ev_scale;
        spec.apply_crelu = !ev_no_crelu;
        spec.aggregation = parse_aggregation(ev_aggregation);
        spec.similarity = parse_similarity(ev_similarity);
        spec.exclude_stop_words = ev_exclude_stop;
        Codebook cb;
        if (!spec.is_global()) {
            if (ev_codebook.empty()) {
                throw ConfigError("boc methods need --codebook");
            }
            cb = load_codebook(ev_codebook);
            spec.codebook = &cb;
        }

        EvaluationInputs inputs;
        inputs.images = &images;
        inputs.sentences = &sentences;
        inputs.ks = ev_ks;
        inputs.rule = parse_hit_rule(ev_hit_rule);

        std::vector<EvalReport> reports;
        if (!ev_rerank.empty()) {
            if (ev_sparsity.size() != 1) {
                throw ConfigError("the re-rank stage needs exactly one sparsity factor");
            }
            reports = rerank_curve(inputs, spec, ev_sparsity.front(), ev_rerank,
                                   ev_rerank_k);
        } else {
            reports = sparsity_sweep(inputs, spec, ev_sparsity);
        }

        print_reports(reports);
        if (!ev_out_json.empty()) write_reports_json(reports, ev_out_json);
        if (!ev_out_csv.empty()) write_reports_csv(reports, ev_out_csv);
        return 0;
    }

    return 1;
}

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const xmodal::UnknownIdError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const xmodal::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
