#include "mosaic/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "mosaic/errors.hpp"

namespace mosaic::metrics {

ConfusionCounts confusion(const std::vector<int>& preds, const std::vector<int>& labels) {
    if (preds.size() != labels.size())
        throw DomainError("confusion: prediction/label length mismatch");
    if (preds.empty()) throw DomainError("confusion: empty input");
    ConfusionCounts c;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        if ((preds[i] != 0 && preds[i] != 1) || (labels[i] != 0 && labels[i] != 1))
            throw DomainError("confusion: values must be 0 or 1");
        if (labels[i] == 1)
            (preds[i] == 1 ? c.tp : c.fn)++;
        else
            (preds[i] == 1 ? c.fp : c.tn)++;
    }
    return c;
}

double mcc(const ConfusionCounts& c) {
    const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
    const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    if (denom == 0) return 0.0;
    return (tp * tn - fp * fn) / std::sqrt(denom);
}

F1Accuracy f1_accuracy(const ConfusionCounts& c) {
    if (c.total() == 0) throw DomainError("f1_accuracy: empty confusion counts");
    F1Accuracy r;
    r.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    const double denom = static_cast<double>(2 * c.tp + c.fp + c.fn);
    r.f1 = denom == 0 ? 0.0 : 2.0 * static_cast<double>(c.tp) / denom;
    return r;
}

MetricsReport metrics_report(const std::vector<int>& preds,
                             const std::vector<int>& labels) {
    MetricsReport rep;
    rep.counts = confusion(preds, labels);
    auto fa = f1_accuracy(rep.counts);
    rep.accuracy = fa.accuracy;
    rep.f1 = fa.f1;
    rep.mcc = mcc(rep.counts);
    rep.n = rep.counts.total();
    return rep;
}

std::string MetricsReport::to_json() const {
    nlohmann::json j;
    j["n"] = n;
    j["accuracy"] = accuracy;
    j["f1"] = f1;
    j["mcc"] = mcc;
    j["confusion"] = {{"tp", counts.tp}, {"tn", counts.tn},
                      {"fp", counts.fp}, {"fn", counts.fn}};
    return j.dump();
}

std::string MetricsReport::to_table() const {
    std::ostringstream out;
    out << "n         " << n << "\n";
    out << "accuracy  " << accuracy << "\n";
    out << "f1        " << f1 << "\n";
    out << "mcc       " << mcc << "\n";
    out << "confusion tp=" << counts.tp << " tn=" << counts.tn
        << " fp=" << counts.fp << " fn=" << counts.fn << "\n";
    return out.str();
}

std::string FaithfulnessReport::to_json() const {
    nlohmann::json j;
    j["n_rationales"] = n_rationales;
    j["n_yes"] = n_yes;
    j["n_parse_errors"] = n_parse_errors;
    j["score"] = score;
    j["verdicts"] = verdicts;
    return j.dump();
}

FaithfulnessReport faithfulness(const std::vector<RationaleSet>& sets,
                                const prompts::TemplateLibrary& lib,
                                gateway::Gateway& gw) {
    FaithfulnessReport rep;
    for (const RationaleSet& set : sets) {
        for (const std::string& rationale : set.rationales) {
            try {
                auto verdict = gateway::judge_faithfulness(set.knowledge, rationale, lib, gw);
                ++rep.n_rationales;
                if (verdict.yes) ++rep.n_yes;
                rep.verdicts.push_back(verdict.yes ? "yes" : "no");
            } catch (const AnswerParseError&) {
                ++rep.n_parse_errors;
                rep.verdicts.push_back("error");
            }
        }
    }
    if (rep.n_rationales == 0 && rep.n_parse_errors == 0)
        throw DomainError("faithfulness: nothing to evaluate");
    rep.score = rep.n_rationales == 0
                    ? 0.0
                    : static_cast<double>(rep.n_yes) / static_cast<double>(rep.n_rationales);
    return rep;
}

std::vector<std::string> extract_rationales(const std::string& output) {
    std::vector<std::string> items;
    std::istringstream in(output);
    std::string line;
    while (std::getline(in, line)) {
        auto b = line.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        if (line.compare(b, 2, "- ") == 0) {
            std::string item = line.substr(b + 2);
            auto e = item.find_last_not_of(" \t\r");
            if (e != std::string::npos) items.push_back(item.substr(0, e + 1));
        }
    }
    return items;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream out;
    out << "tau,accuracy,faithfulness\n";
    out.precision(10);
    for (const SweepRow& r : rows)
        out << r.tau << "," << r.accuracy << "," << r.faithfulness << "\n";
    return out.str();
}

std::vector<double> normalize_taus(const std::vector<double>& taus, std::size_t* dropped) {
    if (taus.empty()) throw ConfigError("sweep requires at least one tau");
    for (double t : taus)
        if (t <= 0) throw ConfigError("sweep taus must be positive");
    std::vector<double> sorted = taus;
    std::sort(sorted.begin(), sorted.end());
    auto last = std::unique(sorted.begin(), sorted.end());
    if (dropped) *dropped = static_cast<std::size_t>(sorted.end() - last);
    sorted.erase(last, sorted.end());
    return sorted;
}

}  // namespace mosaic::metrics
