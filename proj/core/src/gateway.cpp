#include "mosaic/gateway.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "mosaic/errors.hpp"
#include "mosaic/hash.hpp"

namespace mosaic::gateway {
namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

// ---------------------------------------------------------------- http ----

class HttpBackend final : public Backend {
public:
    explicit HttpBackend(BackendConfig cfg) : cfg_(std::move(cfg)) {
        if (cfg_.base_url.empty())
            throw ConfigError("http backend requires base_url");
        auto scheme_end = cfg_.base_url.find("://");
        if (scheme_end == std::string::npos)
            throw ConfigError("base_url must include a scheme: " + cfg_.base_url);
        auto path_start = cfg_.base_url.find('/', scheme_end + 3);
        if (path_start == std::string::npos) {
            host_ = cfg_.base_url;
        } else {
            host_ = cfg_.base_url.substr(0, path_start);
            path_prefix_ = cfg_.base_url.substr(path_start);
            while (!path_prefix_.empty() && path_prefix_.back() == '/')
                path_prefix_.pop_back();
        }
    }

    CompletionResponse complete(const CompletionRequest& req) override;

    std::string name() const override { return "http"; }

private:
    BackendConfig cfg_;
    std::string host_;
    std::string path_prefix_;
};

// -------------------------------------------------------------- replay ----

std::string replay_path(const std::string& dir, const std::string& key) {
    return (std::filesystem::path(dir) / (key + ".json")).string();
}

class ReplayBackend final : public Backend {
public:
    explicit ReplayBackend(std::string dir) : dir_(std::move(dir)) {
        if (dir_.empty()) throw ConfigError("replay backend requires replay_dir");
    }

    CompletionResponse complete(const CompletionRequest& req) override {
        req.validate();
        std::string key = req.cache_key();
        std::string path = replay_path(dir_, key);
        if (!std::filesystem::exists(path))
            throw Error("replay miss: no cached completion for key " + key);
        json j = json::parse(read_file(path));
        CompletionResponse resp;
        resp.text = j.at("response").at("text").get<std::string>();
        resp.usage.prompt_tokens = j["response"].value("prompt_tokens", 0);
        resp.usage.completion_tokens = j["response"].value("completion_tokens", 0);
        resp.raw = j["response"].dump();
        return resp;
    }

    std::string name() const override { return "replay"; }

private:
    std::string dir_;
};

class RecordingBackend final : public Backend {
public:
    RecordingBackend(std::unique_ptr<Backend> inner, std::string dir)
        : inner_(std::move(inner)), dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
    }

    CompletionResponse complete(const CompletionRequest& req) override {
        CompletionResponse resp = inner_->complete(req);
        json j;
        j["request"] = json::parse(req.canonical_json());
        j["response"] = {{"text", resp.text},
                         {"prompt_tokens", resp.usage.prompt_tokens},
                         {"completion_tokens", resp.usage.completion_tokens}};
        std::ofstream out(replay_path(dir_, req.cache_key()));
        out << j.dump(2) << "\n";
        return resp;
    }

    std::string name() const override { return inner_->name() + "+record"; }

private:
    std::unique_ptr<Backend> inner_;
    std::string dir_;
};

// ------------------------------------------------------------- scripted ----

// Deterministic stand-in for a frozen LLM: answers are pure functions of the
// request text, well-formed for the two prompt shapes the pipeline issues.
class ScriptedBackend final : public Backend {
public:
    CompletionResponse complete(const CompletionRequest& req) override {
        req.validate();
        const std::string& prompt = req.messages.back().content;
        CompletionResponse resp;
        if (prompt.find("[Rationale]:") != std::string::npos) {
            resp.text = judge_answer(prompt);
        } else if (prompt.find("Bullish Rationales:") != std::string::npos) {
            resp.text = rearview_answer(prompt);
        } else if (prompt.find("sentiment of this news/tweet") != std::string::npos) {
            resp.text = sentiment_answer(prompt);
        } else if (prompt.find("[Stock Factors]:") != std::string::npos) {
            resp.text = technical_answer(prompt);
        } else {
            resp.text = "Up";
        }
        resp.usage.prompt_tokens = static_cast<std::int64_t>(prompt.size() / 4);
        resp.usage.completion_tokens = static_cast<std::int64_t>(resp.text.size() / 4);
        resp.raw = "{\"scripted\":true}";
        return resp;
    }

    std::string name() const override { return "scripted"; }

private:
    static std::string rearview_answer(const std::string& prompt) {
        // direction comes from the outcome sentence in the [Analysis] block
        bool up = prompt.find(" is up by ") != std::string::npos;
        std::string tag = hex64(fnv1a64(prompt)).substr(0, 6);
        std::ostringstream out;
        // quote one headline from the news block verbatim when there is one,
        // so that some rationales are actually grounded in the input
        std::string headline;
        auto lpos = prompt.find("listed below:\n");
        if (lpos != std::string::npos) {
            auto start = lpos + 14;
            auto eol = prompt.find('\n', start);
            std::string line = prompt.substr(start, eol - start);
            // strip the "YYYY-MM-DD: " prefix
            if (line.size() > 12 && line[4] == '-' && line[10] == ':')
                headline = line.substr(12);
        }
        out << "Bullish Rationales:\n";
        out << "  - Technical indicators such as the moving averages show upward "
               "pressure in the recent window (case " << tag << ").\n";
        if (!headline.empty())
            out << "  - " << headline << "\n";
        else
            out << "  - Recent company news carries a constructive tone.\n";
        out << "Bearish Rationales:\n";
        out << "  - Short-term momentum readings remain mixed across the factor set.\n";
        out << "  - Part of the news flow points to competitive headwinds.\n";
        out << "Prediction:\n";
        out << "  - Weighing both sides, the stock is expected to move "
            << (up ? "up" : "down") << " over the next session.\n";
        return out.str();
    }

    static std::string judge_answer(const std::string& prompt) {
        // a rationale is judged yes iff its first 12 characters appear in the
        // knowledge block, which makes verdicts content-driven but stable
        auto kpos = prompt.find("[Knowledge]: ");
        auto rpos = prompt.find("[Rationale]: ");
        std::string knowledge = prompt.substr(kpos + 13, rpos - kpos - 13);
        std::string rationale = trim(prompt.substr(rpos + 13));
        auto apos = rationale.rfind("\nAnswer:");
        if (apos != std::string::npos) rationale = trim(rationale.substr(0, apos));
        std::string probe = rationale.substr(0, std::min<std::size_t>(12, rationale.size()));
        bool yes = !probe.empty() && knowledge.find(probe) != std::string::npos;
        return yes ? "Yes, the rationale is stated in the given information."
                   : "No, the rationale cannot be inferred from the given information.";
    }

    static std::string technical_answer(const std::string& prompt) {
        // trend-follow the price history in the [Analysis] block
        auto pos = prompt.rfind(" is ");
        auto end = prompt.find(". Please predict", pos);
        long long first = 0, last = 0;
        bool have = false;
        if (pos != std::string::npos && end != std::string::npos) {
            std::istringstream nums(prompt.substr(pos + 4, end - pos - 4));
            std::string tok;
            while (std::getline(nums, tok, ',')) {
                try {
                    long long v = std::stoll(tok);
                    if (!have) first = v;
                    last = v;
                    have = true;
                } catch (const std::exception&) {
                }
            }
        }
        if (!have) return "Up";
        return last >= first ? "The stock price will go up."
                             : "The stock price will go down.";
    }

    static std::string sentiment_answer(const std::string& prompt) {
        std::string p = lower(prompt);
        static const char* neg[] = {"drop", "down", "fall", "miss", "cuts", "lawsuit"};
        static const char* pos[] = {"beat", "up", "rise", "growth", "record", "tops"};
        int score = 0;
        for (const char* w : pos)
            if (p.find(w) != std::string::npos) ++score;
        for (const char* w : neg)
            if (p.find(w) != std::string::npos) --score;
        return score > 0 ? "Positive" : score < 0 ? "Negative" : "Neutral";
    }
};

}  // namespace

// ------------------------------------------------------------- request ----

void CompletionRequest::validate() const {
    if (messages.empty()) throw ConfigError("completion request needs >= 1 message");
    for (const auto& m : messages)
        if (m.content.empty()) throw ConfigError("completion message content is empty");
    if (temperature < 0 || temperature > 2)
        throw ConfigError("temperature out of range [0,2]");
    if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
    if (top_p <= 0 || top_p > 1) throw ConfigError("top_p out of range (0,1]");
}

std::string CompletionRequest::canonical_json() const {
    json j;
    j["messages"] = json::array();
    for (const auto& m : messages)
        j["messages"].push_back({{"role", m.role}, {"content", m.content}});
    j["temperature"] = temperature;
    j["max_tokens"] = max_tokens;
    j["top_p"] = top_p;
    j["frequency_penalty"] = frequency_penalty;
    return j.dump();
}

std::string CompletionRequest::cache_key() const {
    return hex64(fnv1a64(canonical_json()));
}

// ---------------------------------------------------------------- http ----

CompletionResponse HttpBackend::complete(const CompletionRequest& req) {
    req.validate();
    json body;
    body["model"] = cfg_.model;
    body["messages"] = json::array();
    for (const auto& m : req.messages)
        body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = req.temperature;
    body["max_tokens"] = req.max_tokens;
    body["top_p"] = req.top_p;
    body["frequency_penalty"] = req.frequency_penalty;

    const char* key = nullptr;
    if (!cfg_.api_key_env.empty()) key = std::getenv(cfg_.api_key_env.c_str());

    httplib::Client client(host_);
    client.set_read_timeout(120, 0);
    httplib::Headers headers;
    if (key) headers.emplace("Authorization", std::string("Bearer ") + key);

    auto res = client.Post(path_prefix_ + "/chat/completions", headers, body.dump(),
                           "application/json");
    if (!res)
        throw TransportError("http backend: " + httplib::to_string(res.error()));
    if (res->status == 429 || res->status >= 500)
        throw TransportError("http backend: transient status " +
                             std::to_string(res->status));
    if (res->status >= 400)
        throw Error("http backend: request rejected with status " +
                    std::to_string(res->status) + ": " + res->body);

    json j;
    try {
        j = json::parse(res->body);
    } catch (const json::exception& e) {
        throw TransportError(std::string("http backend: malformed response: ") + e.what());
    }
    CompletionResponse resp;
    try {
        resp.text = j.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const json::exception&) {
        throw AnswerParseError("http backend: response has no choices[0].message.content");
    }
    if (j.contains("usage")) {
        resp.usage.prompt_tokens = j["usage"].value("prompt_tokens", 0);
        resp.usage.completion_tokens = j["usage"].value("completion_tokens", 0);
    }
    resp.raw = res->body;
    return resp;
}

// ------------------------------------------------------------ factories ----

std::unique_ptr<Backend> make_http_backend(const BackendConfig& cfg) {
    return std::make_unique<HttpBackend>(cfg);
}

std::unique_ptr<Backend> make_replay_backend(const std::string& replay_dir) {
    return std::make_unique<ReplayBackend>(replay_dir);
}

std::unique_ptr<Backend> make_scripted_backend() {
    return std::make_unique<ScriptedBackend>();
}

std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::string& record_dir) {
    return std::make_unique<RecordingBackend>(std::move(inner), record_dir);
}

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg) {
    std::unique_ptr<Backend> b;
    if (cfg.kind == "http")
        b = make_http_backend(cfg);
    else if (cfg.kind == "replay")
        b = make_replay_backend(cfg.replay_dir);
    else if (cfg.kind == "scripted")
        b = make_scripted_backend();
    else
        throw ConfigError("unknown backend kind: " + cfg.kind);
    if (!cfg.record_dir.empty())
        b = make_recording_backend(std::move(b), cfg.record_dir);
    return b;
}

// -------------------------------------------------------------- gateway ----

Gateway::Gateway(std::unique_ptr<Backend> backend, RetryPolicy retry,
                 std::string audit_log_path)
    : backend_(std::move(backend)), retry_(retry), audit_path_(std::move(audit_log_path)) {
    if (retry_.max_attempts < 1) throw ConfigError("retry max_attempts must be >= 1");
}

CompletionResponse Gateway::complete(const CompletionRequest& req) {
    req.validate();
    int attempt = 0;
    for (;;) {
        ++attempt;
        try {
            CompletionResponse resp = backend_->complete(req);
            if (!audit_path_.empty()) {
                std::lock_guard<std::mutex> lock(audit_mutex_);
                json entry;
                entry["backend"] = backend_->name();
                entry["attempts"] = attempt;
                entry["request"] = json::parse(req.canonical_json());
                entry["response_text"] = resp.text;
                entry["prompt_tokens"] = resp.usage.prompt_tokens;
                entry["completion_tokens"] = resp.usage.completion_tokens;
                std::ofstream out(audit_path_, std::ios::app);
                out << entry.dump() << "\n";
            }
            return resp;
        } catch (const TransportError&) {
            if (attempt >= retry_.max_attempts) throw;
            auto delay = std::chrono::milliseconds(
                retry_.backoff_ms * (1LL << (attempt - 1)));
            std::this_thread::sleep_for(delay);
        }
    }
}

// -------------------------------------------------------------- scrape ----

namespace {

std::vector<std::string> parse_bullets(const std::string& block) {
    std::vector<std::string> items;
    std::istringstream in(block);
    std::string line;
    while (std::getline(in, line)) {
        std::string t = trim(line);
        if (t.rfind("- ", 0) == 0) items.push_back(trim(t.substr(2)));
    }
    return items;
}

std::string expert_input_blocks(const PoolResult& pr) {
    std::string out;
    for (const auto& op : pr.opinions) {
        std::string name = op.expert_id;
        if (!name.empty()) name[0] = static_cast<char>(std::toupper(name[0]));
        out += "[" + name + " Expert Input]:\n" + op.input_text;
        if (out.back() != '\n') out += "\n";
        out += "[" + name + " Expert Prediction]: " +
               (op.prediction == 1 ? "Up" : "Down") + "\n";
    }
    return out;
}

}  // namespace

std::optional<InstructionRecord> parse_rearview_completion(const std::string& text) {
    // section headers keyed exactly, tolerating surrounding whitespace
    auto find_header = [&](const std::string& header) -> std::optional<std::size_t> {
        std::size_t pos = 0;
        while ((pos = text.find(header, pos)) != std::string::npos) {
            // must sit at the start of a (possibly indented) line
            std::size_t bol = text.rfind('\n', pos);
            std::string prefix =
                text.substr(bol == std::string::npos ? 0 : bol + 1,
                            pos - (bol == std::string::npos ? 0 : bol + 1));
            if (trim(prefix).empty()) return pos;
            ++pos;
        }
        return std::nullopt;
    };

    auto bull = find_header("Bullish Rationales:");
    auto bear = find_header("Bearish Rationales:");
    auto pred = find_header("Prediction:");
    if (!bull || !bear || !pred || !(*bull < *bear && *bear < *pred))
        return std::nullopt;

    InstructionRecord rec;
    rec.kind = "rearview";
    rec.bullish = parse_bullets(text.substr(*bull, *bear - *bull));
    rec.bearish = parse_bullets(text.substr(*bear, *pred - *bear));
    std::string pred_block = text.substr(*pred + std::string("Prediction:").size());
    auto pred_items = parse_bullets(pred_block);
    rec.prediction_text = pred_items.empty() ? trim(pred_block) : pred_items.front();
    return rec;
}

ScrapeOutcome scrape_rationales(const std::vector<PoolResult>& pool_results,
                                const prompts::TemplateLibrary& lib,
                                Gateway& gw) {
    ScrapeOutcome out;
    for (const PoolResult& pr : pool_results) {
        if (pr.opinions.empty()) continue;
        auto bucket = prompts::bucket_from_pct(pr.pct_change);
        auto prompt = prompts::render_rearview(lib, pr.sample, pr.opinions, pr.label, bucket);

        CompletionRequest req;
        req.messages = {{"user", prompt.text}};
        req.temperature = 1.0;
        req.max_tokens = 2000;
        req.top_p = 1.0;
        req.frequency_penalty = 0.0;

        CompletionResponse resp = gw.complete(req);
        auto parsed = parse_rearview_completion(resp.text);
        if (!parsed) {
            out.quarantined.push_back(resp.text);
            continue;
        }
        InstructionRecord rec = std::move(*parsed);
        rec.sample = pr.sample;
        rec.label = pr.label;
        rec.input = expert_input_blocks(pr);

        std::ostringstream o;
        o << "Bullish Rationales:\n";
        for (const auto& r : rec.bullish) o << "  - " << r << "\n";
        o << "Bearish Rationales:\n";
        for (const auto& r : rec.bearish) o << "  - " << r << "\n";
        o << "Prediction:\n  - " << rec.prediction_text << "\n";
        o << prompts::verbalize_label(pr.sample.ticker, pr.label) << "\n";
        rec.output = o.str();

        out.records.push_back(std::move(rec));
    }
    return out;
}

Verdict judge_faithfulness(const std::string& knowledge, const std::string& rationale,
                           const prompts::TemplateLibrary& lib, Gateway& gw) {
    auto prompt = prompts::render_faithfulness(lib, knowledge, rationale);
    CompletionRequest req;
    req.messages = {{"user", prompt.text}};
    req.temperature = 0.0;  // deterministic judging
    req.max_tokens = 2000;

    CompletionResponse resp = gw.complete(req);
    std::string head = lower(trim(resp.text));
    Verdict v;
    if (head.rfind("yes", 0) == 0)
        v.yes = true;
    else if (head.rfind("no", 0) == 0)
        v.yes = false;
    else
        throw AnswerParseError("judge reply starts with neither yes nor no: " +
                               resp.text.substr(0, 40));
    v.reason = trim(resp.text);
    return v;
}

}  // namespace mosaic::gateway
