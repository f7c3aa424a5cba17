#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "gesa/graph.hpp"

namespace gesa {

enum class W2wMode { ClippedDense, MaskedWindow };

W2wMode w2w_mode_from_string(const std::string& s);
const char* w2w_mode_name(W2wMode m);

// Single-toggle ablations. DROP_* merges the named label into its block
// default; the EQ3_* toggles remove the relative term from attention scores
// in the named blocks; LOCAL_E2E replaces graph labels with window labels
// over entity-input index offsets.
enum class Ablation {
    None,
    NoGlobalW2W,
    LocalE2E,
    Eq3InW2eE2wE2e,
    Eq3InW2W,
    DropGlobCls,
    DropGlobQ,
    DropW2eMention,
    DropW2ePlcq,
    DropE2eSent,
    DropE2eMatch,
    DropE2ePlc,
    OneLabelAllEdges,
};

Ablation ablation_from_string(const std::string& s);
const char* ablation_name(Ablation a);
// All toggles, Ablation::None excluded.
const std::vector<Ablation>& all_ablations();

// Which attention blocks include the relative-position term.
struct AttentionMode {
    bool rel_w2w = true;
    bool rel_w2e = true;
    bool rel_e2w = true;
    bool rel_e2e = true;

    static AttentionMode from_ablation(Ablation a);
};

// Dense label id assignment for window radius k. Window labels occupy
// [0, 2k]; the named labels follow consecutively. Ablations merge ids or
// leave a name unassigned (-1); size counts distinct assigned ids.
struct LabelVocabulary {
    int k = 0;
    int size = 0;
    int glob_cls = -1;
    int glob_q = -1;
    int w2e_mention = -1;
    int w2e_none = -1;
    int w2e_plcq = -1;
    int e2e_plc = -1;
    int e2e_sent = -1;
    int e2e_match = -1;
    int e2e_no_edge = -1;
    int e2e_self = -1;

    int win(int offset) const;  // clips offset to [-k, k]

    static LabelVocabulary build(int k, Ablation ab = Ablation::None);
};

// P x P relative-position label ids; -1 marks a cell that may not attend.
struct LabelMatrix {
    int P = 0;
    int W = 0;  // word-token count; entities occupy [W, P)
    std::vector<int32_t> labels;

    int32_t label(int i, int j) const { return labels[static_cast<size_t>(i) * P + j]; }
    int32_t& label(int i, int j) { return labels[static_cast<size_t>(i) * P + j]; }
    bool attend(int i, int j) const { return label(i, j) >= 0; }
    int entity_count() const { return P - W; }
};

// Window label for two non-global word positions: WIN(clip(j - i, -k, +k)).
int window_label(int i, int j, int k);

LabelMatrix build_label_matrix(const TokenSequence& seq, const HeterogeneousGraph& graph,
                               const LabelVocabulary& vocab, W2wMode mode, Ablation ab);

// CSV of label ids, one row per line, masked cells as -1. Lines starting
// with '#' are comments and are skipped on import.
void export_pattern(const LabelMatrix& m, std::ostream& out, const std::string& header = "");
void export_pattern(const LabelMatrix& m, const std::string& path, const std::string& header = "");
// Re-imported matrices carry W = -1 (the word/entity split is not stored).
LabelMatrix import_pattern(std::istream& in);

}  // namespace gesa
