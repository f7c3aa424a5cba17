#include "gesa/reader.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <unordered_set>

namespace gesa {

namespace {
constexpr double kClamp = 1e-12;

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

std::vector<double> candidate_logits(const Mat& hidden, const TokenSequence& seq,
                                     const ModelParams& params) {
    const int W = seq.word_count();
    const int E = seq.entity_count();
    const int L = params.config.hidden_size;
    if (E < 2) throw DataError("score_candidates: no candidates");
    const double* w_plc = params.reader_w->v.row(0);
    const double* w_cand = w_plc + L;
    const double b = params.reader_b->v(0, 0);
    const double* y_plc = hidden.row(W);  // entity 0 is the placeholder

    std::vector<double> logits(E - 1);
    const double plc_part = dot(w_plc, y_plc, L);
    for (int c = 1; c < E; ++c)
        logits[c - 1] = plc_part + dot(w_cand, hidden.row(W + c), L) + b;
    return logits;
}

}  // namespace

Prediction score_candidates(const Mat& hidden, const TokenSequence& seq,
                            const std::vector<Mention>& mentions, const ModelParams& params) {
    Prediction pred;
    std::vector<double> logits = candidate_logits(hidden, seq, params);
    pred.scores.resize(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) pred.scores[i] = sigmoid(logits[i]);
    pred.best_index = 0;
    for (size_t i = 1; i < pred.scores.size(); ++i)
        if (pred.scores[i] > pred.scores[pred.best_index]) pred.best_index = static_cast<int>(i);
    const EntityToken& best = seq.entities[1 + pred.best_index];
    pred.best_surface = mentions[best.mention_ref].surface;
    return pred;
}

std::vector<int> make_targets(const TokenSequence& seq, const ClozeInstance& inst) {
    std::unordered_set<std::string> golds;
    for (const auto& g : inst.gold_answers) golds.insert(normalize_answer(g));
    std::vector<int> targets;
    for (int e = 1; e < seq.entity_count(); ++e) {
        const Mention& m = inst.mentions[seq.entities[e].mention_ref];
        targets.push_back(golds.count(normalize_answer(m.surface)) ? 1 : 0);
    }
    return targets;
}

double bce_loss(const std::vector<double>& scores, const std::vector<int>& targets) {
    if (scores.size() != targets.size()) throw DataError("bce_loss: length mismatch");
    if (scores.empty()) throw DataError("bce_loss: empty input");
    double loss = 0.0;
    int clamped = 0;
    for (size_t i = 0; i < scores.size(); ++i) {
        double s = scores[i];
        if (s <= 0.0 || s >= 1.0) {
            s = std::clamp(s, kClamp, 1.0 - kClamp);
            ++clamped;
        }
        loss -= targets[i] ? std::log(s) : std::log(1.0 - s);
    }
    if (clamped)
        std::cerr << "warning: bce_loss clamped " << clamped << " saturated score(s)\n";
    return loss / static_cast<double>(scores.size());
}

double reader_loss_backward(const Mat& hidden, const TokenSequence& seq,
                            const std::vector<int>& targets, ModelParams& params, Mat& dhidden) {
    const int W = seq.word_count();
    const int E = seq.entity_count();
    const int L = params.config.hidden_size;
    std::vector<double> logits = candidate_logits(hidden, seq, params);
    if (static_cast<int>(targets.size()) != E - 1)
        throw DataError("reader_loss_backward: target length mismatch");

    std::vector<double> scores(logits.size());
    for (size_t i = 0; i < logits.size(); ++i) scores[i] = sigmoid(logits[i]);
    const double loss = bce_loss(scores, targets);

    const double inv_n = 1.0 / static_cast<double>(scores.size());
    const double* w_plc = params.reader_w->v.row(0);
    const double* w_cand = w_plc + L;
    double* dw_plc = params.reader_w->g.row(0);
    double* dw_cand = dw_plc + L;
    const double* y_plc = hidden.row(W);

    for (int c = 1; c < E; ++c) {
        const double dlogit = (scores[c - 1] - targets[c - 1]) * inv_n;
        axpy(dlogit, y_plc, dw_plc, L);
        axpy(dlogit, hidden.row(W + c), dw_cand, L);
        params.reader_b->g(0, 0) += dlogit;
        axpy(dlogit, w_plc, dhidden.row(W), L);
        axpy(dlogit, w_cand, dhidden.row(W + c), L);
    }
    return loss;
}

}  // namespace gesa
