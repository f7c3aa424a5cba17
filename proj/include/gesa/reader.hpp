#pragma once

#include <string>
#include <vector>

#include "gesa/model.hpp"
#include "gesa/sequence.hpp"

namespace gesa {

struct Prediction {
    std::vector<double> scores;  // per candidate entity token, in (0,1)
    int best_index = -1;         // argmax, ties broken toward the lowest index
    std::string best_surface;
};

// Scores each candidate from the concatenated placeholder-entity and
// candidate representations: sigmoid(w . [y_plc ; y_cand] + b).
Prediction score_candidates(const Mat& hidden, const TokenSequence& seq,
                            const std::vector<Mention>& mentions, const ModelParams& params);

// Target is 1 iff the candidate's normalized surface is a normalized gold
// answer; every mention of the answer string gets 1.
std::vector<int> make_targets(const TokenSequence& seq, const ClozeInstance& inst);

// Mean over candidates of -[t ln s + (1-t) ln(1-s)]; scores at exactly 0 or 1
// are clamped at 1e-12 with a warning.
double bce_loss(const std::vector<double>& scores, const std::vector<int>& targets);

// Forward scores + loss; accumulates reader gradients and the gradient w.r.t.
// the hidden states into dhidden (which must be zero-initialized P x L).
double reader_loss_backward(const Mat& hidden, const TokenSequence& seq,
                            const std::vector<int>& targets, ModelParams& params, Mat& dhidden);

}  // namespace gesa
