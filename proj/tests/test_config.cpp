#include <doctest.h>

#include <string>

#include "mosaic/config.hpp"
#include "mosaic/errors.hpp"

using namespace mosaic;
using namespace mosaic::config;

namespace {

std::string minimal_config(const std::string& extra = "") {
    return R"({
      "data": {"prices_dir": "prices", "tickers": ["AAA"]},
      "split": {
        "train": {"first": "2014-01-01", "last": "2014-03-31"},
        "val":   {"first": "2014-04-01", "last": "2014-04-30"},
        "test":  {"first": "2014-05-01", "last": "2014-05-31"}
      })" + extra + "\n}";
}

}  // namespace

TEST_CASE("minimal config fills documented defaults") {
    auto cfg = parse_config(minimal_config());
    CHECK(cfg.seed == 42);
    CHECK(cfg.out_dir == "out");
    CHECK(cfg.sampling.window == 5);
    CHECK(cfg.sampling.pos_threshold == doctest::Approx(0.0055));
    CHECK(cfg.sampling.neg_threshold == doctest::Approx(0.005));
    CHECK(cfg.alphas.rescale_factor == doctest::Approx(100.0));
    CHECK(cfg.alphas.k_hist == 3);
    CHECK(cfg.backend.kind == "replay");
    CHECK(cfg.train.weight.tau == doctest::Approx(0.5));
    CHECK(cfg.train.weight.detach_alpha);
    CHECK(cfg.train.seed == cfg.seed);
    CHECK(cfg.experts.roster == std::vector<std::string>{"sentiment", "technical"});
}

TEST_CASE("full config round-trips explicit values") {
    auto cfg = parse_config(minimal_config(R"(,
      "seed": 7,
      "out_dir": "artifacts",
      "sampling": {"window": 10, "pos_threshold": 0.01, "neg_threshold": 0.01},
      "alphas": {"rescale_factor": 10.0, "k_hist": 5},
      "experts": {"roster": ["human"], "human_opinions_file": "h.jsonl"},
      "backend": {"kind": "scripted", "max_attempts": 5, "backoff_ms": 10},
      "train": {"embed_dim": 16, "lr": 0.1, "epochs": 9, "tau": 0.25,
                "detach_alpha": false},
      "sweep_taus": [0.1, 0.2],
      "audit_log": "audit.jsonl")"));
    CHECK(cfg.seed == 7);
    CHECK(cfg.train.seed == 7);
    CHECK(cfg.out_dir == "artifacts");
    CHECK(cfg.sampling.window == 10);
    CHECK(cfg.alphas.k_hist == 5);
    CHECK(cfg.experts.roster == std::vector<std::string>{"human"});
    CHECK(cfg.backend.kind == "scripted");
    CHECK(cfg.backend.retry.max_attempts == 5);
    CHECK(cfg.train.epochs == 9);
    CHECK_FALSE(cfg.train.weight.detach_alpha);
    CHECK(cfg.sweep_taus == std::vector<double>{0.1, 0.2});
    CHECK(cfg.audit_log == "audit.jsonl");
}

TEST_CASE("unknown keys are rejected at every level") {
    CHECK_THROWS_WITH_AS(parse_config(minimal_config(R"(, "typo_key": 1)")),
                         doctest::Contains("typo_key"), ConfigError);
    CHECK_THROWS_AS(
        parse_config(R"({
          "data": {"prices_dir": "p", "tickers": ["A"], "surprise": true},
          "split": {
            "train": {"first": "2014-01-01", "last": "2014-01-31"},
            "val":   {"first": "2014-02-01", "last": "2014-02-28"},
            "test":  {"first": "2014-03-01", "last": "2014-03-31"}
          }})"),
        ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "train": {"gamma": 1})")),
                    ConfigError);
}

TEST_CASE("config validation failures") {
    // split is mandatory
    CHECK_THROWS_AS(parse_config(R"({"data": {"prices_dir": "p", "tickers": ["A"]}})"),
                    ConfigError);
    // overlapping split
    CHECK_THROWS_AS(parse_config(R"({
      "data": {"prices_dir": "p", "tickers": ["A"]},
      "split": {
        "train": {"first": "2014-01-01", "last": "2014-02-28"},
        "val":   {"first": "2014-02-01", "last": "2014-03-31"},
        "test":  {"first": "2014-04-01", "last": "2014-04-30"}
      }})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "sampling": {"window": 0})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "backend": {"kind": "psychic"})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "train": {"tau": -0.5})")),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(minimal_config(R"(, "sweep_taus": [0.0])")),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_config(minimal_config(R"(, "experts": {"roster": ["astrologer"]})")),
        ConfigError);
    CHECK_THROWS_AS(parse_config("not json"), ConfigError);
}

TEST_CASE("load_config reports missing files") {
    CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}
