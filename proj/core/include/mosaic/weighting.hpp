#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mosaic/gateway.hpp"

namespace mosaic::weighting {

using Vec = std::vector<double>;

// Injective label -> word-list mapping. The words' embeddings define the
// label's type embedding.
struct Verbalizer {
    std::map<int, std::vector<std::string>> words;  // 1 = up, 0 = down

    static Verbalizer defaults();  // Up -> [up, boost, positive, rise],
                                   // Down -> [down, reduce, negative, drop]
    void validate() const;
    const std::vector<std::string>& list(int label) const;
    bool contains_word(const std::string& w) const;
};

// Mean of the label's verbalizer-word embeddings.
Vec type_embedding(const Verbalizer& verbalizer, int label,
                   const std::function<Vec(const std::string&)>& embed);

// alpha_i = softmax_i( cos(type_emb, hidden[i]) / tau ). Throws DomainError
// on zero-norm vectors or tau <= 0.
Vec token_weights(const std::vector<Vec>& hidden, const Vec& type_emb, double tau);

struct WeightConfig {
    double tau = 0.5;  // the empirical optimum
    bool scale_by_m = false;
    bool detach_alpha = true;
};

// L = sum_i alpha_i * nll_i, optionally rescaled by m.
double weighted_loss(const Vec& nll, const Vec& alpha, const WeightConfig& cfg);

// Lowercased, punctuation-stripped whitespace tokenization.
std::vector<std::string> tokenize(const std::string& text);

struct TrainRecord {
    std::vector<std::string> input_tokens;
    std::vector<std::string> output_tokens;  // the m generated tokens
    int label = 0;
    std::string ticker;
};

TrainRecord make_record(const gateway::InstructionRecord& rec);

struct TrainConfig {
    int embed_dim = 12;
    WeightConfig weight;
    double lr = 0.05;
    int epochs = 50;
    unsigned seed = 7;
};

// Small trainable sequence model standing in for the LLM: embedding table,
// causal mean-pool context encoder, linear output head. The weighting
// mechanism (hidden states -> cosines -> alpha -> loss) is the same as in
// the full-scale setup; the capacity is not.
//
// For output position i the context is every preceding token (input,
// separator, outputs 0..i-1); its mean embedding feeds the output head, and
// the hidden state h_i is the mean embedding including token i itself. The
// type embedding reads verbalizer words from the model's own input-embedding
// table.
class ToyModel {
public:
    ToyModel(std::vector<std::string> vocabulary, const TrainConfig& cfg,
             Verbalizer verbalizer = Verbalizer::defaults());

    struct Forward {
        Vec nll;    // per output token
        Vec alpha;  // token weights
        double loss = 0;
    };

    Forward forward(const TrainRecord& rec) const;

    // Mean loss over records together with the gradient w.r.t. parameters()
    // (analytic; follows the alpha path only when detach_alpha is off).
    std::pair<double, Vec> loss_and_grad(const std::vector<TrainRecord>& recs) const;

    // One full-batch gradient step; returns the pre-step mean loss.
    double train_step(const std::vector<TrainRecord>& recs);

    // Runs cfg.epochs steps; returns the per-epoch loss trace.
    std::vector<double> fit(const std::vector<TrainRecord>& recs);

    // 0/1 by comparing mean NLL of the two verbalized label sentences.
    int predict_label(const TrainRecord& rec) const;

    // Flat parameter access (embedding table, output weights, output bias).
    Vec parameters() const;
    void set_parameters(const Vec& p);

    void save(const std::string& path) const;
    static ToyModel load(const std::string& path);

    const std::vector<std::string>& vocabulary() const { return vocab_; }
    const TrainConfig& config() const { return cfg_; }

    static std::vector<std::string> build_vocabulary(
        const std::vector<TrainRecord>& recs, const Verbalizer& verbalizer);

private:
    int token_id(const std::string& tok) const;  // throws DomainError if absent
    Vec type_embedding_for(int label) const;

    std::vector<std::string> vocab_;
    std::map<std::string, int> index_;
    TrainConfig cfg_;
    Verbalizer verbalizer_;
    int dim_;
    Vec embed_;   // V x dim
    Vec out_w_;   // V x dim
    Vec out_b_;   // V
};

}  // namespace mosaic::weighting
