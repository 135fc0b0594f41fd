#include "mosaic/weighting.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "mosaic/errors.hpp"
#include "mosaic/hash.hpp"
#include "mosaic/prompts.hpp"

namespace mosaic::weighting {
namespace {

constexpr const char* kSep = "<sep>";

double dot(const Vec& a, const Vec& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

double norm(const Vec& a) { return std::sqrt(dot(a, a)); }

Vec softmax(const Vec& logits) {
    double mx = *std::max_element(logits.begin(), logits.end());
    Vec out(logits.size());
    double sum = 0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - mx);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

}  // namespace

Verbalizer Verbalizer::defaults() {
    Verbalizer v;
    v.words[1] = {"up", "boost", "positive", "rise"};
    v.words[0] = {"down", "reduce", "negative", "drop"};
    return v;
}

void Verbalizer::validate() const {
    if (words.empty()) throw DomainError("verbalizer has no word lists");
    std::set<std::string> seen;
    for (const auto& [label, list] : words) {
        if (list.empty())
            throw DomainError("verbalizer list for label " + std::to_string(label) +
                              " is empty");
        for (const auto& w : list)
            if (!seen.insert(w).second)
                throw DomainError("verbalizer word '" + w +
                                  "' appears under more than one label");
    }
}

const std::vector<std::string>& Verbalizer::list(int label) const {
    auto it = words.find(label);
    if (it == words.end())
        throw DomainError("verbalizer has no list for label " + std::to_string(label));
    return it->second;
}

bool Verbalizer::contains_word(const std::string& w) const {
    for (const auto& [label, list] : words)
        if (std::find(list.begin(), list.end(), w) != list.end()) return true;
    return false;
}

Vec type_embedding(const Verbalizer& verbalizer, int label,
                   const std::function<Vec(const std::string&)>& embed) {
    const auto& list = verbalizer.list(label);
    Vec mean;
    for (const std::string& w : list) {
        Vec e = embed(w);
        if (mean.empty()) mean.assign(e.size(), 0.0);
        if (e.size() != mean.size())
            throw DomainError("embedding dimension mismatch for word '" + w + "'");
        for (std::size_t i = 0; i < e.size(); ++i) mean[i] += e[i];
    }
    for (double& v : mean) v /= static_cast<double>(list.size());
    return mean;
}

Vec token_weights(const std::vector<Vec>& hidden, const Vec& type_emb, double tau) {
    if (tau <= 0) throw DomainError("tau must be positive");
    if (hidden.empty()) throw DomainError("token_weights needs >= 1 hidden state");
    double tn = norm(type_emb);
    if (tn == 0) throw DomainError("zero-norm type embedding");
    Vec logits(hidden.size());
    for (std::size_t i = 0; i < hidden.size(); ++i) {
        if (hidden[i].size() != type_emb.size())
            throw DomainError("hidden-state dimension mismatch");
        double hn = norm(hidden[i]);
        if (hn == 0) throw DomainError("zero-norm hidden state");
        logits[i] = dot(type_emb, hidden[i]) / (tn * hn) / tau;
    }
    return softmax(logits);
}

double weighted_loss(const Vec& nll, const Vec& alpha, const WeightConfig& cfg) {
    if (nll.size() != alpha.size())
        throw DomainError("nll/alpha length mismatch");
    double loss = 0;
    for (std::size_t i = 0; i < nll.size(); ++i) loss += alpha[i] * nll[i];
    if (cfg.scale_by_m) loss *= static_cast<double>(nll.size());
    return loss;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    auto flush = [&] {
        // strip surrounding punctuation, keep interior characters
        std::size_t b = 0, e = cur.size();
        while (b < e && !std::isalnum(static_cast<unsigned char>(cur[b]))) ++b;
        while (e > b && !std::isalnum(static_cast<unsigned char>(cur[e - 1]))) --e;
        if (e > b) tokens.push_back(cur.substr(b, e - b));
        cur.clear();
    };
    for (char c : text) {
        if (std::isspace(static_cast<unsigned char>(c)))
            flush();
        else
            cur += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    flush();
    return tokens;
}

TrainRecord make_record(const gateway::InstructionRecord& rec) {
    TrainRecord r;
    r.input_tokens = tokenize(rec.input);
    r.output_tokens = tokenize(rec.output);
    r.label = rec.label;
    r.ticker = rec.sample.ticker;
    return r;
}

std::vector<std::string> ToyModel::build_vocabulary(
    const std::vector<TrainRecord>& recs, const Verbalizer& verbalizer) {
    std::set<std::string> vocab;
    vocab.insert(kSep);
    for (const auto& [label, list] : verbalizer.words)
        vocab.insert(list.begin(), list.end());
    for (const TrainRecord& r : recs) {
        vocab.insert(r.input_tokens.begin(), r.input_tokens.end());
        vocab.insert(r.output_tokens.begin(), r.output_tokens.end());
        for (int label : {0, 1}) {
            auto sentence = tokenize(prompts::verbalize_label(r.ticker, label));
            vocab.insert(sentence.begin(), sentence.end());
        }
    }
    return {vocab.begin(), vocab.end()};
}

ToyModel::ToyModel(std::vector<std::string> vocabulary, const TrainConfig& cfg,
                   Verbalizer verbalizer)
    : vocab_(std::move(vocabulary)),
      cfg_(cfg),
      verbalizer_(std::move(verbalizer)),
      dim_(cfg.embed_dim) {
    if (vocab_.empty()) throw ConfigError("toy model needs a non-empty vocabulary");
    if (dim_ < 1) throw ConfigError("embed_dim must be >= 1");
    verbalizer_.validate();
    for (std::size_t i = 0; i < vocab_.size(); ++i) index_[vocab_[i]] = static_cast<int>(i);
    for (const auto& [label, list] : verbalizer_.words)
        for (const auto& w : list)
            if (!index_.count(w))
                throw ConfigError("verbalizer word '" + w + "' not in vocabulary");

    std::mt19937 rng(cfg_.seed);
    std::normal_distribution<double> init(0.0, 0.1);
    const std::size_t V = vocab_.size();
    embed_.resize(V * dim_);
    out_w_.resize(V * dim_);
    out_b_.assign(V, 0.0);
    for (double& v : embed_) v = init(rng);
    for (double& v : out_w_) v = init(rng);
}

int ToyModel::token_id(const std::string& tok) const {
    auto it = index_.find(tok);
    if (it == index_.end())
        throw DomainError("token outside vocabulary: '" + tok + "'");
    return it->second;
}

Vec ToyModel::type_embedding_for(int label) const {
    return type_embedding(verbalizer_, label, [&](const std::string& w) {
        int id = token_id(w);
        return Vec(embed_.begin() + id * dim_, embed_.begin() + (id + 1) * dim_);
    });
}

namespace {

struct Sequence {
    std::vector<int> ids;    // input + sep + output
    std::size_t base;        // index of first output token
};

}  // namespace

ToyModel::Forward ToyModel::forward(const TrainRecord& rec) const {
    if (rec.output_tokens.empty())
        throw DomainError("record has no output tokens");

    std::vector<int> ids;
    for (const auto& t : rec.input_tokens) ids.push_back(token_id(t));
    ids.push_back(token_id(kSep));
    const std::size_t base = ids.size();
    for (const auto& t : rec.output_tokens) ids.push_back(token_id(t));

    const std::size_t m = rec.output_tokens.size();
    const std::size_t V = vocab_.size();

    Vec nll(m);
    std::vector<Vec> hidden(m, Vec(dim_));
    Vec running(dim_, 0.0);  // sum of embeddings over the prefix
    for (std::size_t t = 0; t < base; ++t)
        for (int d = 0; d < dim_; ++d) running[d] += embed_[ids[t] * dim_ + d];

    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t n = base + i;
        Vec ctx(dim_);
        for (int d = 0; d < dim_; ++d) ctx[d] = running[d] / static_cast<double>(n);

        Vec logits(V);
        for (std::size_t v = 0; v < V; ++v) {
            double s = out_b_[v];
            for (int d = 0; d < dim_; ++d) s += out_w_[v * dim_ + d] * ctx[d];
            logits[v] = s;
        }
        Vec p = softmax(logits);
        int y = ids[base + i];
        nll[i] = -std::log(std::max(p[y], 1e-300));

        for (int d = 0; d < dim_; ++d) {
            running[d] += embed_[y * dim_ + d];
            hidden[i][d] = running[d] / static_cast<double>(n + 1);
        }
    }

    Forward f;
    f.nll = std::move(nll);
    f.alpha = token_weights(hidden, type_embedding_for(rec.label), cfg_.weight.tau);
    f.loss = weighted_loss(f.nll, f.alpha, cfg_.weight);
    return f;
}

std::pair<double, Vec> ToyModel::loss_and_grad(
    const std::vector<TrainRecord>& recs) const {
    const std::size_t V = vocab_.size();
    const std::size_t nE = V * dim_, nW = V * dim_;
    Vec grad(nE + nW + V, 0.0);
    double total_loss = 0;

    for (const TrainRecord& rec : recs) {
        std::vector<int> ids;
        for (const auto& t : rec.input_tokens) ids.push_back(token_id(t));
        ids.push_back(token_id(kSep));
        const std::size_t base = ids.size();
        for (const auto& t : rec.output_tokens) ids.push_back(token_id(t));
        const std::size_t m = rec.output_tokens.size();
        if (m == 0) throw DomainError("record has no output tokens");

        // forward pass retaining intermediates
        std::vector<Vec> ctxs(m, Vec(dim_)), probs(m), hidden(m, Vec(dim_));
        Vec nll(m);
        Vec running(dim_, 0.0);
        for (std::size_t t = 0; t < base; ++t)
            for (int d = 0; d < dim_; ++d) running[d] += embed_[ids[t] * dim_ + d];
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t n = base + i;
            for (int d = 0; d < dim_; ++d)
                ctxs[i][d] = running[d] / static_cast<double>(n);
            Vec logits(V);
            for (std::size_t v = 0; v < V; ++v) {
                double s = out_b_[v];
                for (int d = 0; d < dim_; ++d) s += out_w_[v * dim_ + d] * ctxs[i][d];
                logits[v] = s;
            }
            probs[i] = softmax(logits);
            int y = ids[base + i];
            nll[i] = -std::log(std::max(probs[i][y], 1e-300));
            for (int d = 0; d < dim_; ++d) {
                running[d] += embed_[y * dim_ + d];
                hidden[i][d] = running[d] / static_cast<double>(n + 1);
            }
        }

        Vec type_emb = type_embedding_for(rec.label);
        Vec alpha = token_weights(hidden, type_emb, cfg_.weight.tau);
        double lw = 0;
        for (std::size_t i = 0; i < m; ++i) lw += alpha[i] * nll[i];
        const double scale = cfg_.weight.scale_by_m ? static_cast<double>(m) : 1.0;
        total_loss += lw * scale;

        // ----- path through the per-token NLLs
        for (std::size_t i = 0; i < m; ++i) {
            const std::size_t n = base + i;
            const int y = ids[base + i];
            const double w = scale * alpha[i];
            Vec dctx(dim_, 0.0);
            for (std::size_t v = 0; v < V; ++v) {
                double g = w * (probs[i][v] - (static_cast<int>(v) == y ? 1.0 : 0.0));
                grad[nE + nW + v] += g;  // bias
                for (int d = 0; d < dim_; ++d) {
                    grad[nE + v * dim_ + d] += g * ctxs[i][d];
                    dctx[d] += g * out_w_[v * dim_ + d];
                }
            }
            for (std::size_t t = 0; t < n; ++t)
                for (int d = 0; d < dim_; ++d)
                    grad[ids[t] * dim_ + d] += dctx[d] / static_cast<double>(n);
        }

        // ----- path through alpha (cosine + softmax), when not detached
        if (!cfg_.weight.detach_alpha) {
            const double tn = norm(type_emb);
            Vec dtype(dim_, 0.0);
            for (std::size_t i = 0; i < m; ++i) {
                const double ds = scale * alpha[i] * (nll[i] - lw);  // dL/ds_i
                const double dcos = ds / cfg_.weight.tau;
                const double hn = norm(hidden[i]);
                const double cosv = dot(type_emb, hidden[i]) / (tn * hn);

                const std::size_t n1 = base + i + 1;  // context incl current token
                for (int d = 0; d < dim_; ++d) {
                    double dh = dcos * (type_emb[d] / (tn * hn) -
                                        cosv * hidden[i][d] / (hn * hn));
                    double per_tok = dh / static_cast<double>(n1);
                    for (std::size_t t = 0; t < n1; ++t)
                        grad[ids[t] * dim_ + d] += per_tok;
                    dtype[d] += dcos * (hidden[i][d] / (tn * hn) -
                                        cosv * type_emb[d] / (tn * tn));
                }
            }
            const auto& vw = verbalizer_.list(rec.label);
            for (const std::string& w : vw) {
                int id = token_id(w);
                for (int d = 0; d < dim_; ++d)
                    grad[id * dim_ + d] += dtype[d] / static_cast<double>(vw.size());
            }
        }
    }

    const double inv = 1.0 / static_cast<double>(recs.size());
    for (double& g : grad) g *= inv;
    return {total_loss * inv, grad};
}

double ToyModel::train_step(const std::vector<TrainRecord>& recs) {
    auto [loss, grad] = loss_and_grad(recs);
    const std::size_t V = vocab_.size();
    const std::size_t nE = V * dim_, nW = V * dim_;
    for (std::size_t i = 0; i < nE; ++i) embed_[i] -= cfg_.lr * grad[i];
    for (std::size_t i = 0; i < nW; ++i) out_w_[i] -= cfg_.lr * grad[nE + i];
    for (std::size_t i = 0; i < V; ++i) out_b_[i] -= cfg_.lr * grad[nE + nW + i];
    return loss;
}

std::vector<double> ToyModel::fit(const std::vector<TrainRecord>& recs) {
    if (recs.empty()) throw ConfigError("fit requires at least one record");
    std::vector<double> trace;
    trace.reserve(cfg_.epochs);
    for (int e = 0; e < cfg_.epochs; ++e) trace.push_back(train_step(recs));
    return trace;
}

int ToyModel::predict_label(const TrainRecord& rec) const {
    auto mean_nll_for = [&](int label) {
        TrainRecord candidate = rec;
        candidate.label = label;
        candidate.output_tokens = tokenize(prompts::verbalize_label(rec.ticker, label));
        Forward f = forward(candidate);
        double s = 0;
        for (double v : f.nll) s += v;
        return s / static_cast<double>(f.nll.size());
    };
    return mean_nll_for(1) <= mean_nll_for(0) ? 1 : 0;
}

Vec ToyModel::parameters() const {
    Vec p;
    p.reserve(embed_.size() + out_w_.size() + out_b_.size());
    p.insert(p.end(), embed_.begin(), embed_.end());
    p.insert(p.end(), out_w_.begin(), out_w_.end());
    p.insert(p.end(), out_b_.begin(), out_b_.end());
    return p;
}

void ToyModel::set_parameters(const Vec& p) {
    if (p.size() != embed_.size() + out_w_.size() + out_b_.size())
        throw DomainError("parameter vector size mismatch");
    std::size_t off = 0;
    std::copy(p.begin(), p.begin() + embed_.size(), embed_.begin());
    off += embed_.size();
    std::copy(p.begin() + off, p.begin() + off + out_w_.size(), out_w_.begin());
    off += out_w_.size();
    std::copy(p.begin() + off, p.end(), out_b_.begin());
}

void ToyModel::save(const std::string& path) const {
    nlohmann::json j;
    j["vocab"] = vocab_;
    j["embed_dim"] = dim_;
    j["tau"] = cfg_.weight.tau;
    j["scale_by_m"] = cfg_.weight.scale_by_m;
    j["detach_alpha"] = cfg_.weight.detach_alpha;
    j["lr"] = cfg_.lr;
    j["epochs"] = cfg_.epochs;
    j["seed"] = cfg_.seed;
    j["embed"] = embed_;
    j["out_w"] = out_w_;
    j["out_b"] = out_b_;
    std::ofstream out(path);
    if (!out) throw Error("cannot write checkpoint: " + path);
    out << j.dump() << "\n";
}

ToyModel ToyModel::load(const std::string& path) {
    nlohmann::json j = nlohmann::json::parse(read_file(path));
    TrainConfig cfg;
    cfg.embed_dim = j.at("embed_dim").get<int>();
    cfg.weight.tau = j.at("tau").get<double>();
    cfg.weight.scale_by_m = j.at("scale_by_m").get<bool>();
    cfg.weight.detach_alpha = j.at("detach_alpha").get<bool>();
    cfg.lr = j.at("lr").get<double>();
    cfg.epochs = j.at("epochs").get<int>();
    cfg.seed = j.at("seed").get<unsigned>();
    ToyModel model(j.at("vocab").get<std::vector<std::string>>(), cfg);
    model.embed_ = j.at("embed").get<Vec>();
    model.out_w_ = j.at("out_w").get<Vec>();
    model.out_b_ = j.at("out_b").get<Vec>();
    return model;
}

}  // namespace mosaic::weighting
