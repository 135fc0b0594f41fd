#include "mosaic/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "mosaic/errors.hpp"

namespace mosaic::config {

using nlohmann::json;

namespace {

// Reject keys the schema does not know about.
void check_keys(const json& obj, const std::string& where,
                const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw ConfigError(where + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.count(it.key()))
            throw ConfigError(where + ": unknown key \"" + it.key() + "\"");
    }
}

template <typename T>
void read_into(const json& obj, const char* key, T& out) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config key \"") + key + "\": " + e.what());
    }
}

DateRange read_range(const json& obj, const std::string& where) {
    check_keys(obj, where, {"first", "last"});
    if (!obj.contains("first") || !obj.contains("last"))
        throw ConfigError(where + ": needs first and last dates");
    DateRange r;
    r.first = Date::parse_iso(obj.at("first").get<std::string>());
    r.last = Date::parse_iso(obj.at("last").get<std::string>());
    return r;
}

}  // namespace

void PipelineConfig::validate() const {
    if (data.prices_dir.empty()) throw ConfigError("data.prices_dir is required");
    if (data.tickers.empty()) throw ConfigError("data.tickers must be non-empty");
    if (sampling.window == 0) throw ConfigError("sampling.window must be positive");
    if (sampling.pos_threshold < 0 || sampling.neg_threshold < 0)
        throw ConfigError("sampling thresholds must be non-negative");
    split.validate();
    if (alphas.rescale_factor <= 0)
        throw ConfigError("alphas.rescale_factor must be positive");
    if (alphas.k_hist <= 0) throw ConfigError("alphas.k_hist must be positive");
    if (experts.roster.empty()) throw ConfigError("experts.roster must be non-empty");
    for (const auto& r : experts.roster)
        if (r != "sentiment" && r != "technical" && r != "human")
            throw ConfigError("unknown expert \"" + r + "\"");
    if (experts.sentiment_scorer != "lexicon" && experts.sentiment_scorer != "llm")
        throw ConfigError("experts.sentiment_scorer must be lexicon or llm");
    if (backend.kind != "http" && backend.kind != "replay" && backend.kind != "scripted")
        throw ConfigError("backend.kind must be http, replay, or scripted");
    if (train.weight.tau <= 0) throw ConfigError("train.tau must be positive");
    if (train.embed_dim <= 0) throw ConfigError("train.embed_dim must be positive");
    if (train.epochs <= 0) throw ConfigError("train.epochs must be positive");
    if (train.lr <= 0) throw ConfigError("train.lr must be positive");
    for (double t : sweep_taus)
        if (t <= 0) throw ConfigError("sweep_taus must be positive");
}

PipelineConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    check_keys(root, "config",
               {"seed", "out_dir", "data", "sampling", "split", "alphas",
                "experts", "backend", "audit_log", "train", "sweep_taus",
                "templates_dir"});

    PipelineConfig cfg;
    read_into(root, "seed", cfg.seed);
    read_into(root, "out_dir", cfg.out_dir);
    read_into(root, "audit_log", cfg.audit_log);
    read_into(root, "sweep_taus", cfg.sweep_taus);
    read_into(root, "templates_dir", cfg.templates_dir);

    if (root.contains("data")) {
        const json& d = root.at("data");
        check_keys(d, "data", {"prices_dir", "tickers", "news_file"});
        read_into(d, "prices_dir", cfg.data.prices_dir);
        read_into(d, "tickers", cfg.data.tickers);
        read_into(d, "news_file", cfg.data.news_file);
    }
    if (root.contains("sampling")) {
        const json& s = root.at("sampling");
        check_keys(s, "sampling", {"window", "pos_threshold", "neg_threshold"});
        read_into(s, "window", cfg.sampling.window);
        read_into(s, "pos_threshold", cfg.sampling.pos_threshold);
        read_into(s, "neg_threshold", cfg.sampling.neg_threshold);
    }
    if (!root.contains("split")) throw ConfigError("config: split is required");
    {
        const json& s = root.at("split");
        check_keys(s, "split", {"train", "val", "test"});
        if (!s.contains("train") || !s.contains("val") || !s.contains("test"))
            throw ConfigError("split: needs train, val, and test ranges");
        cfg.split.train = read_range(s.at("train"), "split.train");
        cfg.split.val = read_range(s.at("val"), "split.val");
        cfg.split.test = read_range(s.at("test"), "split.test");
    }
    if (root.contains("alphas")) {
        const json& a = root.at("alphas");
        check_keys(a, "alphas", {"catalog_file", "rescale_factor", "k_hist"});
        read_into(a, "catalog_file", cfg.alphas.catalog_file);
        read_into(a, "rescale_factor", cfg.alphas.rescale_factor);
        read_into(a, "k_hist", cfg.alphas.k_hist);
    }
    if (root.contains("experts")) {
        const json& e = root.at("experts");
        check_keys(e, "experts",
                   {"roster", "lexicon_file", "sentiment_scorer", "human_opinions_file"});
        read_into(e, "roster", cfg.experts.roster);
        read_into(e, "lexicon_file", cfg.experts.lexicon_file);
        read_into(e, "sentiment_scorer", cfg.experts.sentiment_scorer);
        read_into(e, "human_opinions_file", cfg.experts.human_opinions_file);
    }
    if (root.contains("backend")) {
        const json& b = root.at("backend");
        check_keys(b, "backend",
                   {"kind", "base_url", "api_key_env", "model", "max_attempts",
                    "backoff_ms", "parallelism", "replay_dir", "record_dir"});
        read_into(b, "kind", cfg.backend.kind);
        read_into(b, "base_url", cfg.backend.base_url);
        read_into(b, "api_key_env", cfg.backend.api_key_env);
        read_into(b, "model", cfg.backend.model);
        read_into(b, "max_attempts", cfg.backend.retry.max_attempts);
        read_into(b, "backoff_ms", cfg.backend.retry.backoff_ms);
        read_into(b, "parallelism", cfg.backend.parallelism);
        read_into(b, "replay_dir", cfg.backend.replay_dir);
        read_into(b, "record_dir", cfg.backend.record_dir);
    }
    if (root.contains("train")) {
        const json& t = root.at("train");
        check_keys(t, "train",
                   {"embed_dim", "lr", "epochs", "tau", "scale_by_m", "detach_alpha"});
        read_into(t, "embed_dim", cfg.train.embed_dim);
        read_into(t, "lr", cfg.train.lr);
        read_into(t, "epochs", cfg.train.epochs);
        read_into(t, "tau", cfg.train.weight.tau);
        read_into(t, "scale_by_m", cfg.train.weight.scale_by_m);
        read_into(t, "detach_alpha", cfg.train.weight.detach_alpha);
    }
    cfg.train.seed = cfg.seed;

    cfg.validate();
    return cfg;
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

}  // namespace mosaic::config
