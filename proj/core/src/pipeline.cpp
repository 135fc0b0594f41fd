#include "mosaic/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "mosaic/alpha.hpp"
#include "mosaic/errors.hpp"
#include "mosaic/experts.hpp"
#include "mosaic/hash.hpp"
#include "mosaic/metrics.hpp"
#include "mosaic/prompts.hpp"
#include "mosaic/weighting.hpp"

namespace mosaic::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

prompts::TemplateLibrary make_library(const config::PipelineConfig& cfg) {
    prompts::TemplateLibrary lib;
    if (!cfg.templates_dir.empty()) lib.load_dir(cfg.templates_dir);
    return lib;
}

std::vector<alpha::AlphaDef> make_catalog(const config::PipelineConfig& cfg) {
    if (cfg.alphas.catalog_file.empty()) return alpha::builtin_catalog();
    return alpha::load_catalog(cfg.alphas.catalog_file);
}

std::shared_ptr<gateway::Gateway> make_gateway(const config::PipelineConfig& cfg) {
    return std::make_shared<gateway::Gateway>(gateway::make_backend(cfg.backend),
                                              cfg.backend.retry, cfg.audit_log);
}

void write_text(const fs::path& path, const std::string& text) {
    fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("pipeline: cannot write " + path.string());
    out << text;
}

std::vector<std::string> read_lines(const fs::path& path, const char* stage) {
    std::ifstream in(path);
    if (!in)
        throw Error(std::string(stage) + ": missing artifact " + path.string() +
                    " (run the earlier stage first)");
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    return lines;
}

std::string split_of(const config::PipelineConfig& cfg, const Date& d) {
    if (cfg.split.train.contains(d)) return "train";
    if (cfg.split.val.contains(d)) return "val";
    if (cfg.split.test.contains(d)) return "test";
    return "none";
}

// Alpha series over the ticker's full history before the target date, cut
// down to the sample window (rolling alphas need the longer run-up).
std::vector<alpha::AlphaSeries> technical_series(
    const std::vector<PriceBar>& bars, const Sample& s,
    const std::vector<alpha::AlphaDef>& catalog, double rescale_factor) {
    std::vector<PriceBar> hist;
    for (const PriceBar& b : bars)
        if (b.date < s.target_date) hist.push_back(b);
    const std::size_t T = s.window.size();
    if (hist.size() < T)
        throw IntegrityError("pipeline: insufficient history for " + s.ticker + " " +
                             s.target_date.to_iso());
    std::vector<alpha::AlphaSeries> out;
    for (const alpha::AlphaDef& def : catalog) {
        alpha::AlphaSeries full = alpha::evaluate_alpha(def, hist, rescale_factor);
        alpha::AlphaSeries cut;
        cut.def = full.def;
        cut.values.assign(full.values.end() - T, full.values.end());
        cut.scaled.assign(full.scaled.end() - T, full.scaled.end());
        out.push_back(std::move(cut));
    }
    return out;
}

std::vector<std::unique_ptr<experts::Expert>> make_experts(
    const config::PipelineConfig& cfg, const Inputs& in,
    std::shared_ptr<gateway::Gateway> gw,
    std::shared_ptr<const prompts::TemplateLibrary> lib) {
    std::vector<std::unique_ptr<experts::Expert>> pool;
    for (const std::string& name : cfg.experts.roster) {
        if (name == "sentiment") {
            experts::SentimentScorer scorer;
            if (cfg.experts.sentiment_scorer == "llm")
                scorer = experts::make_llm_scorer(gw, lib);
            else
                scorer = experts::make_lexicon_scorer(cfg.experts.lexicon_file);
            pool.push_back(experts::make_sentiment_expert(std::move(scorer), lib));
        } else if (name == "technical") {
            pool.push_back(experts::make_technical_expert(
                gw, lib, make_catalog(cfg), in.bars, cfg.alphas.k_hist,
                cfg.alphas.rescale_factor));
        } else if (name == "human") {
            pool.push_back(experts::make_human_expert(cfg.experts.human_opinions_file));
        }
    }
    if (pool.empty()) throw ConfigError("pipeline: expert roster resolved to nothing");
    return pool;
}

}  // namespace

Inputs load_inputs(const config::PipelineConfig& cfg) {
    Inputs in;
    if (!cfg.data.news_file.empty()) in.news = ingest_news(cfg.data.news_file);
    std::vector<Sample> samples;
    for (const std::string& ticker : cfg.data.tickers) {
        fs::path csv = fs::path(cfg.data.prices_dir) / (ticker + ".csv");
        auto bars = ingest_prices(csv.string(), ticker);
        auto s = generate_samples(ticker, bars, in.news, cfg.sampling.window,
                                  cfg.sampling.pos_threshold, cfg.sampling.neg_threshold);
        samples.insert(samples.end(), s.begin(), s.end());
        in.bars.emplace(ticker, std::move(bars));
    }
    in.splits = split_samples(samples, cfg.split);
    in.all_samples = in.splits.train;
    in.all_samples.insert(in.all_samples.end(), in.splits.val.begin(), in.splits.val.end());
    in.all_samples.insert(in.all_samples.end(), in.splits.test.begin(), in.splits.test.end());
    return in;
}

std::string pool_result_to_json(const PoolResult& pr) {
    json j;
    j["ticker"] = pr.sample.ticker;
    j["target_date"] = pr.sample.target_date;
    j["label"] = pr.label;
    j["pct_change"] = pr.pct_change;
    j["opinions"] = json::array();
    for (const ExpertOpinion& op : pr.opinions) {
        json o;
        o["expert_id"] = op.expert_id;
        o["input_text"] = op.input_text;
        o["prediction"] = op.prediction;
        o["confidence"] = op.confidence ? json(*op.confidence) : json(nullptr);
        o["rationale"] = op.rationale ? json(*op.rationale) : json(nullptr);
        j["opinions"].push_back(std::move(o));
    }
    j["abstentions"] = pr.abstentions;
    return j.dump();
}

PoolResult pool_result_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("pool.jsonl: bad line: ") + e.what());
    }
    PoolResult pr;
    pr.sample.ticker = j.at("ticker").get<std::string>();
    pr.sample.target_date = j.at("target_date").get<std::string>();
    pr.label = j.at("label").get<int>();
    pr.pct_change = j.at("pct_change").get<double>();
    for (const json& o : j.at("opinions")) {
        ExpertOpinion op;
        op.expert_id = o.at("expert_id").get<std::string>();
        op.input_text = o.at("input_text").get<std::string>();
        op.prediction = o.at("prediction").get<int>();
        if (!o.at("confidence").is_null()) op.confidence = o.at("confidence").get<double>();
        if (!o.at("rationale").is_null()) op.rationale = o.at("rationale").get<std::string>();
        pr.opinions.push_back(std::move(op));
    }
    pr.abstentions = j.at("abstentions").get<std::vector<std::string>>();
    return pr;
}

std::string instruction_to_json(const gateway::InstructionRecord& rec) {
    json j;
    j["kind"] = rec.kind;
    j["input"] = rec.input;
    j["output"] = rec.output;
    j["ticker"] = rec.sample.ticker;
    j["target_date"] = rec.sample.target_date;
    j["label"] = rec.label;
    j["bullish"] = rec.bullish;
    j["bearish"] = rec.bearish;
    j["prediction_text"] = rec.prediction_text;
    return j.dump();
}

gateway::InstructionRecord instruction_from_json(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception& e) {
        throw IntegrityError(std::string("instructions.jsonl: bad line: ") + e.what());
    }
    gateway::InstructionRecord rec;
    rec.kind = j.at("kind").get<std::string>();
    rec.input = j.at("input").get<std::string>();
    rec.output = j.at("output").get<std::string>();
    rec.sample.ticker = j.at("ticker").get<std::string>();
    rec.sample.target_date = j.at("target_date").get<std::string>();
    rec.label = j.at("label").get<int>();
    rec.bullish = j.at("bullish").get<std::vector<std::string>>();
    rec.bearish = j.at("bearish").get<std::vector<std::string>>();
    rec.prediction_text = j.at("prediction_text").get<std::string>();
    return rec;
}

void cmd_ingest(const config::PipelineConfig& cfg, std::string& report) {
    Inputs in = load_inputs(cfg);
    std::ostringstream out;
    for (const auto& [ticker, bars] : in.bars)
        out << ticker << ": " << bars.size() << " bars\n";
    out << "news items: " << in.news.size() << "\n";
    out << "samples: train=" << in.splits.train.size()
        << " val=" << in.splits.val.size() << " test=" << in.splits.test.size() << "\n";
    report = out.str();
}

void cmd_build_dataset(const config::PipelineConfig& cfg, std::string& report) {
    Inputs in = load_inputs(cfg);
    prompts::TemplateLibrary lib = make_library(cfg);
    auto catalog = make_catalog(cfg);

    std::ostringstream samples_out, prompts_out;
    for (const Sample& s : in.all_samples) {
        json j;
        j["ticker"] = s.ticker;
        j["target_date"] = s.target_date.to_iso();
        j["label"] = s.label;
        j["pct_change"] = s.pct_change;
        j["split"] = split_of(cfg, s.target_date);
        j["window_first"] = s.window.front().date.to_iso();
        j["window_last"] = s.window.back().date.to_iso();
        j["news_count"] = s.news.size();
        samples_out << j.dump() << "\n";

        auto emit = [&](const prompts::RenderedPrompt& p) {
            json q;
            q["kind"] = prompts::kind_name(p.kind);
            q["ticker"] = p.ticker;
            q["target_date"] = p.target_date;
            q["text"] = p.text;
            prompts_out << q.dump() << "\n";
        };
        emit(prompts::render_sup_sentiment(lib, s));
        auto series = technical_series(in.bars.at(s.ticker), s, catalog,
                                       cfg.alphas.rescale_factor);
        emit(prompts::render_technical(lib, s, series, cfg.alphas.k_hist));
    }

    fs::path out_dir(cfg.out_dir);
    write_text(out_dir / "samples.jsonl", samples_out.str());
    write_text(out_dir / "prompts.jsonl", prompts_out.str());

    json manifest;
    for (const char* name : {"samples.jsonl", "prompts.jsonl"}) {
        fs::path p = out_dir / name;
        manifest["files"][name] = {{"fnv1a64", hash_file(p.string())},
                                   {"bytes", fs::file_size(p)}};
    }
    manifest["counts"] = {{"train", in.splits.train.size()},
                          {"val", in.splits.val.size()},
                          {"test", in.splits.test.size()}};
    write_text(out_dir / "manifest.json", manifest.dump(2) + "\n");

    std::ostringstream out;
    out << "samples: " << in.all_samples.size() << ", prompts: "
        << 2 * in.all_samples.size() << "\n";
    report = out.str();
}

void cmd_run_experts(const config::PipelineConfig& cfg, std::string& report) {
    Inputs in = load_inputs(cfg);
    auto lib = std::make_shared<const prompts::TemplateLibrary>(make_library(cfg));
    auto gw = make_gateway(cfg);
    auto pool = make_experts(cfg, in, gw, lib);
    std::vector<PoolResult> results = experts::run_pool(in.all_samples, pool);

    std::ostringstream out;
    std::size_t abstained = 0;
    for (const PoolResult& pr : results) {
        out << pool_result_to_json(pr) << "\n";
        if (pr.opinions.empty()) ++abstained;
    }
    write_text(fs::path(cfg.out_dir) / "pool.jsonl", out.str());

    std::ostringstream rep;
    rep << "pool results: " << results.size() << " (" << abstained
        << " with no opinions)\n";
    report = rep.str();
}

void cmd_scrape(const config::PipelineConfig& cfg, std::string& report) {
    std::vector<PoolResult> results;
    for (const std::string& line : read_lines(fs::path(cfg.out_dir) / "pool.jsonl", "scrape"))
        results.push_back(pool_result_from_json(line));

    prompts::TemplateLibrary lib = make_library(cfg);
    auto gw = make_gateway(cfg);
    gateway::ScrapeOutcome outcome = gateway::scrape_rationales(results, lib, *gw);

    std::ostringstream recs, quar;
    for (const auto& rec : outcome.records) recs << instruction_to_json(rec) << "\n";
    for (const std::string& q : outcome.quarantined)
        quar << json{{"completion", q}}.dump() << "\n";
    write_text(fs::path(cfg.out_dir) / "instructions.jsonl", recs.str());
    write_text(fs::path(cfg.out_dir) / "quarantine.jsonl", quar.str());

    std::ostringstream rep;
    rep << "instruction records: " << outcome.records.size() << ", quarantined: "
        << outcome.quarantined.size() << "\n";
    report = rep.str();
}

namespace {

std::vector<weighting::TrainRecord> load_records(const config::PipelineConfig& cfg,
                                                 const char* stage,
                                                 std::vector<gateway::InstructionRecord>* raw) {
    std::vector<weighting::TrainRecord> records;
    for (const std::string& line :
         read_lines(fs::path(cfg.out_dir) / "instructions.jsonl", stage)) {
        gateway::InstructionRecord rec = instruction_from_json(line);
        records.push_back(weighting::make_record(rec));
        if (raw) raw->push_back(std::move(rec));
    }
    if (records.empty())
        throw DomainError(std::string(stage) + ": no instruction records to work with");
    return records;
}

}  // namespace

void cmd_train(const config::PipelineConfig& cfg, std::string& report) {
    auto records = load_records(cfg, "train", nullptr);
    auto vocab = weighting::ToyModel::build_vocabulary(records,
                                                       weighting::Verbalizer::defaults());
    weighting::ToyModel model(vocab, cfg.train);
    std::vector<double> trace = model.fit(records);
    model.save((fs::path(cfg.out_dir) / "model.json").string());

    std::ostringstream csv;
    csv << "epoch,loss\n";
    csv.precision(10);
    for (std::size_t i = 0; i < trace.size(); ++i) csv << i << "," << trace[i] << "\n";
    write_text(fs::path(cfg.out_dir) / "loss_trace.csv", csv.str());

    std::ostringstream rep;
    rep << "trained on " << records.size() << " records, " << trace.size()
        << " epochs, final loss " << trace.back() << "\n";
    report = rep.str();
}

void cmd_eval(const config::PipelineConfig& cfg, std::string& report) {
    std::vector<gateway::InstructionRecord> raw;
    auto records = load_records(cfg, "eval", &raw);
    weighting::ToyModel model =
        weighting::ToyModel::load((fs::path(cfg.out_dir) / "model.json").string());

    std::vector<int> preds, labels;
    std::map<std::string, std::pair<std::vector<int>, std::vector<int>>> by_split;
    for (std::size_t i = 0; i < records.size(); ++i) {
        int pred = model.predict_label(records[i]);
        preds.push_back(pred);
        labels.push_back(records[i].label);
        auto& bucket = by_split[split_of(cfg, Date::parse_iso(raw[i].sample.target_date))];
        bucket.first.push_back(pred);
        bucket.second.push_back(records[i].label);
    }

    metrics::MetricsReport overall = metrics::metrics_report(preds, labels);
    json mj;
    mj["overall"] = json::parse(overall.to_json());
    for (const auto& [name, pl] : by_split)
        mj["splits"][name] = json::parse(metrics::metrics_report(pl.first, pl.second).to_json());
    write_text(fs::path(cfg.out_dir) / "metrics.json", mj.dump(2) + "\n");

    std::vector<metrics::RationaleSet> sets;
    for (const auto& rec : raw) {
        metrics::RationaleSet set;
        set.knowledge = rec.input;
        set.rationales = rec.bullish;
        set.rationales.insert(set.rationales.end(), rec.bearish.begin(), rec.bearish.end());
        sets.push_back(std::move(set));
    }
    prompts::TemplateLibrary lib = make_library(cfg);
    auto gw = make_gateway(cfg);
    metrics::FaithfulnessReport fr = metrics::faithfulness(sets, lib, *gw);
    write_text(fs::path(cfg.out_dir) / "faithfulness.json",
               json::parse(fr.to_json()).dump(2) + "\n");

    std::ostringstream rep;
    rep << overall.to_table();
    rep << "faithfulness " << fr.score << " (" << fr.n_yes << "/" << fr.n_rationales
        << ", " << fr.n_parse_errors << " judge errors)\n";
    report = rep.str();
}

void cmd_sweep(const config::PipelineConfig& cfg, std::string& report) {
    std::vector<gateway::InstructionRecord> raw;
    auto records = load_records(cfg, "sweep", &raw);

    // The judge does not depend on tau, so score faithfulness once.
    std::vector<metrics::RationaleSet> sets;
    for (const auto& rec : raw) {
        metrics::RationaleSet set;
        set.knowledge = rec.input;
        set.rationales = rec.bullish;
        set.rationales.insert(set.rationales.end(), rec.bearish.begin(), rec.bearish.end());
        sets.push_back(std::move(set));
    }
    prompts::TemplateLibrary lib = make_library(cfg);
    auto gw = make_gateway(cfg);
    double faith = metrics::faithfulness(sets, lib, *gw).score;

    std::size_t dropped = 0;
    std::vector<double> taus = metrics::normalize_taus(cfg.sweep_taus, &dropped);
    auto vocab = weighting::ToyModel::build_vocabulary(records,
                                                       weighting::Verbalizer::defaults());

    std::vector<metrics::SweepRow> rows;
    for (double tau : taus) {
        weighting::TrainConfig tc = cfg.train;
        tc.weight.tau = tau;
        weighting::ToyModel model(vocab, tc);
        model.fit(records);
        std::vector<int> preds, labels;
        for (const auto& rec : records) {
            preds.push_back(model.predict_label(rec));
            labels.push_back(rec.label);
        }
        metrics::SweepRow row;
        row.tau = tau;
        row.accuracy = metrics::f1_accuracy(metrics::confusion(preds, labels)).accuracy;
        row.faithfulness = faith;
        rows.push_back(row);
    }
    write_text(fs::path(cfg.out_dir) / "sweep.csv", metrics::sweep_csv(rows));

    std::ostringstream rep;
    rep << "swept " << taus.size() << " taus";
    if (dropped) rep << " (" << dropped << " duplicates dropped)";
    rep << "\n";
    report = rep.str();
}

}  // namespace mosaic::pipeline
