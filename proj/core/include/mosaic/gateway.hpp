#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "mosaic/opinion.hpp"
#include "mosaic/prompts.hpp"

namespace mosaic::gateway {

struct Message {
    std::string role;  // "system" | "user" | "assistant"
    std::string content;
};

struct CompletionRequest {
    std::vector<Message> messages;
    double temperature = 1.0;
    int max_tokens = 2000;
    double top_p = 1.0;
    double frequency_penalty = 0.0;

    void validate() const;
    std::string canonical_json() const;  // stable serialization, also the cache key input
    std::string cache_key() const;       // fnv1a64 hex of canonical_json
};

struct Usage {
    std::int64_t prompt_tokens = 0;
    std::int64_t completion_tokens = 0;
};

struct CompletionResponse {
    std::string text;
    Usage usage;
    std::string raw;  // provider payload, retained for audit
};

// Chat-completion backend. complete() either returns a response or throws.
class Backend {
public:
    virtual ~Backend() = default;
    virtual CompletionResponse complete(const CompletionRequest& req) = 0;
    virtual std::string name() const = 0;
};

struct RetryPolicy {
    int max_attempts = 3;
    int backoff_ms = 100;  // doubled per retry
};

struct BackendConfig {
    std::string kind = "replay";  // "http" | "replay" | "scripted"
    std::string base_url;
    std::string api_key_env = "MOSAIC_API_KEY";
    std::string model = "gpt-4";
    RetryPolicy retry;
    int parallelism = 4;
    std::string replay_dir;   // for kind == "replay"
    std::string record_dir;   // when set, responses are recorded here
};

// HTTPS JSON chat-completions client (de-facto schema: messages array in,
// choices[0].message.content out). API key read from the named env var.
std::unique_ptr<Backend> make_http_backend(const BackendConfig& cfg);

// Content-addressed replay cache: {replay_dir}/{key}.json. A miss is a
// deterministic error.
std::unique_ptr<Backend> make_replay_backend(const std::string& replay_dir);

// Deterministic test double: synthesizes a well-formed completion from the
// request text alone (sections for rearview prompts, yes/no for judge
// prompts). Used to prime replay caches offline.
std::unique_ptr<Backend> make_scripted_backend();

// Wraps a backend, writing every response into a replay cache directory.
std::unique_ptr<Backend> make_recording_backend(std::unique_ptr<Backend> inner,
                                                const std::string& record_dir);

std::unique_ptr<Backend> make_backend(const BackendConfig& cfg);

// Issues requests through a backend with retry/backoff on transient
// failures and an append-only JSONL audit log (never records credentials).
class Gateway {
public:
    Gateway(std::unique_ptr<Backend> backend, RetryPolicy retry,
            std::string audit_log_path = "");

    CompletionResponse complete(const CompletionRequest& req);

    Backend& backend() { return *backend_; }

private:
    std::unique_ptr<Backend> backend_;
    RetryPolicy retry_;
    std::string audit_path_;
    std::mutex audit_mutex_;
};

// A (prompt, completion) training pair plus provenance.
struct InstructionRecord {
    std::string kind;    // "rearview"
    std::string input;   // concatenated expert inputs and analyses
    std::string output;  // rationales + label verbalization
    SampleRef sample;
    int label = 0;
    std::vector<std::string> bullish;
    std::vector<std::string> bearish;
    std::string prediction_text;
};

struct ScrapeOutcome {
    std::vector<InstructionRecord> records;
    std::vector<std::string> quarantined;  // completions missing a section
};

// Parse a rearview completion into its three sections. Returns nullopt when
// a required header is missing.
std::optional<InstructionRecord> parse_rearview_completion(const std::string& text);

// Render the rearview prompt for each pool result, call the backend with the
// paper-reported scrape settings (temperature 1.0, max_tokens 2000, top_p
// 1.0, frequency_penalty 0), and assemble instruction records. Structurally
// unparseable completions are quarantined, not dropped silently.
ScrapeOutcome scrape_rationales(const std::vector<PoolResult>& pool_results,
                                const prompts::TemplateLibrary& lib,
                                Gateway& gw);

struct Verdict {
    bool yes;
    std::string reason;
};

// Judge a rationale against knowledge with the faithfulness prompt at
// temperature 0. Throws AnswerParseError if the reply starts with neither
// yes nor no.
Verdict judge_faithfulness(const std::string& knowledge, const std::string& rationale,
                           const prompts::TemplateLibrary& lib, Gateway& gw);

}  // namespace mosaic::gateway
