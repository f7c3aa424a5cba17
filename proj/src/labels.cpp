#include "gesa/labels.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace gesa {

W2wMode w2w_mode_from_string(const std::string& s) {
    if (s == "clipped_dense") return W2wMode::ClippedDense;
    if (s == "masked_window") return W2wMode::MaskedWindow;
    throw DataError("unknown w2w_mode: " + s);
}

const char* w2w_mode_name(W2wMode m) {
    return m == W2wMode::ClippedDense ? "clipped_dense" : "masked_window";
}

namespace {
const std::pair<const char*, Ablation> kAblationNames[] = {
    {"NONE", Ablation::None},
    {"NO_GLOBAL_W2W", Ablation::NoGlobalW2W},
    {"LOCAL_E2E", Ablation::LocalE2E},
    {"EQ3_IN_W2E_E2W_E2E", Ablation::Eq3InW2eE2wE2e},
    {"EQ3_IN_W2W", Ablation::Eq3InW2W},
    {"DROP_GLOB_CLS", Ablation::DropGlobCls},
    {"DROP_GLOB_Q", Ablation::DropGlobQ},
    {"DROP_W2E_MENTION", Ablation::DropW2eMention},
    {"DROP_W2E_PLCQ", Ablation::DropW2ePlcq},
    {"DROP_E2E_SENT", Ablation::DropE2eSent},
    {"DROP_E2E_MATCH", Ablation::DropE2eMatch},
    {"DROP_E2E_PLC", Ablation::DropE2ePlc},
    {"ONE_LABEL_ALL_EDGES", Ablation::OneLabelAllEdges},
};
}  // namespace

Ablation ablation_from_string(const std::string& s) {
    for (const auto& [name, ab] : kAblationNames)
        if (s == name) return ab;
    throw DataError("unknown ablation spec: " + s);
}

const char* ablation_name(Ablation a) {
    for (const auto& [name, ab] : kAblationNames)
        if (ab == a) return name;
    return "?";
}

const std::vector<Ablation>& all_ablations() {
    static const std::vector<Ablation> all = [] {
        std::vector<Ablation> v;
        for (const auto& [name, ab] : kAblationNames)
            if (ab != Ablation::None) v.push_back(ab);
        return v;
    }();
    return all;
}

AttentionMode AttentionMode::from_ablation(Ablation a) {
    AttentionMode m;
    if (a == Ablation::Eq3InW2W) m.rel_w2w = false;
    if (a == Ablation::Eq3InW2eE2wE2e) m.rel_w2e = m.rel_e2w = m.rel_e2e = false;
    return m;
}

int LabelVocabulary::win(int offset) const {
    return std::clamp(offset, -k, k) + k;
}

LabelVocabulary LabelVocabulary::build(int k, Ablation ab) {
    LabelVocabulary v;
    v.k = k;
    int next = 2 * k + 1;

    const bool globals = ab != Ablation::NoGlobalW2W;
    const bool graph_labels = ab != Ablation::LocalE2E;

    if (globals && ab != Ablation::DropGlobCls) v.glob_cls = next++;
    if (globals && ab != Ablation::DropGlobQ) v.glob_q = next++;
    if (ab != Ablation::DropW2eMention) v.w2e_mention = next++;
    v.w2e_none = next++;
    if (ab != Ablation::DropW2ePlcq) v.w2e_plcq = next++;
    if (graph_labels) {
        if (ab != Ablation::DropE2ePlc) v.e2e_plc = next++;
        if (ab == Ablation::OneLabelAllEdges) {
            v.e2e_sent = v.e2e_plc;
            v.e2e_match = v.e2e_plc;
        } else {
            if (ab != Ablation::DropE2eSent) v.e2e_sent = next++;
            if (ab != Ablation::DropE2eMatch) v.e2e_match = next++;
        }
        v.e2e_no_edge = next++;
        v.e2e_self = next++;
    }
    v.size = next;

    // Merged names resolve to the block default.
    if (ab == Ablation::DropW2eMention) v.w2e_mention = v.w2e_none;
    if (ab == Ablation::DropW2ePlcq) v.w2e_plcq = v.w2e_none;
    if (graph_labels) {
        if (ab == Ablation::DropE2ePlc) v.e2e_plc = v.e2e_no_edge;
        if (ab == Ablation::DropE2eSent) v.e2e_sent = v.e2e_no_edge;
        if (ab == Ablation::DropE2eMatch) v.e2e_match = v.e2e_no_edge;
    }
    return v;
}

int window_label(int i, int j, int k) {
    return std::clamp(j - i, -k, k) + k;
}

LabelMatrix build_label_matrix(const TokenSequence& seq, const HeterogeneousGraph& graph,
                               const LabelVocabulary& vocab, W2wMode mode, Ablation ab) {
    const int W = seq.word_count();
    const int E = seq.entity_count();
    const int P = W + E;
    if (graph.node_count != E)
        throw DataError("label matrix: graph has " + std::to_string(graph.node_count) +
                        " nodes but sequence has " + std::to_string(E) + " entity tokens");

    const bool globals = ab != Ablation::NoGlobalW2W;
    const bool local_e2e = ab == Ablation::LocalE2E;
    const int k = vocab.k;

    std::vector<uint8_t> is_cls(W), is_q(W);
    for (int i = 0; i < W; ++i) {
        is_cls[i] = seq.words[i].role == TokenRole::Cls;
        is_q[i] = seq.words[i].role == TokenRole::Question || seq.words[i].role == TokenRole::PlcWord;
    }

    EdgeIndex edges(graph);

    LabelMatrix m;
    m.P = P;
    m.W = W;
    m.labels.assign(static_cast<size_t>(P) * P, -1);

    // w2w block
    for (int i = 0; i < W; ++i) {
        for (int j = 0; j < W; ++j) {
            int32_t label;
            if (globals && vocab.glob_cls >= 0 && (is_cls[i] || is_cls[j])) {
                label = vocab.glob_cls;
            } else if (globals && vocab.glob_q >= 0 && (is_q[i] || is_q[j])) {
                label = vocab.glob_q;
            } else {
                const int d = j - i;
                if (mode == W2wMode::MaskedWindow && (d < -k || d > k)) continue;  // masked
                label = vocab.win(d);
            }
            m.label(i, j) = label;
        }
    }

    // w2e / e2w blocks (symmetric label)
    for (int w = 0; w < W; ++w) {
        for (int e = 0; e < E; ++e) {
            const EntityToken& ent = seq.entities[e];
            int32_t label = vocab.w2e_none;
            if (ent.kind == EntityKind::PlcEntity) {
                if (seq.words[w].role == TokenRole::PlcWord)
                    label = vocab.w2e_mention;
                else if (seq.words[w].role == TokenRole::Question)
                    label = vocab.w2e_plcq;
            } else if (w >= ent.span_begin && w < ent.span_end) {
                label = vocab.w2e_mention;
            }
            m.label(w, W + e) = label;
            m.label(W + e, w) = label;
        }
    }

    // e2e block
    for (int a = 0; a < E; ++a) {
        for (int b = 0; b < E; ++b) {
            int32_t label;
            if (local_e2e) {
                label = vocab.win(b - a);
            } else if (a == b) {
                label = vocab.e2e_self;
            } else {
                auto edge = edges.find(a, b);
                if (!edge) {
                    label = vocab.e2e_no_edge;
                } else {
                    switch (*edge) {
                        case EdgeType::Plc: label = vocab.e2e_plc; break;
                        case EdgeType::SentBased: label = vocab.e2e_sent; break;
                        case EdgeType::Match: label = vocab.e2e_match; break;
                        default: label = vocab.e2e_no_edge;
                    }
                }
            }
            m.label(W + a, W + b) = label;
        }
    }
    return m;
}

void export_pattern(const LabelMatrix& m, std::ostream& out, const std::string& header) {
    if (!header.empty()) {
        std::istringstream lines(header);
        std::string line;
        while (std::getline(lines, line)) out << "# " << line << "\n";
    }
    for (int i = 0; i < m.P; ++i) {
        for (int j = 0; j < m.P; ++j) {
            if (j) out << ",";
            out << m.label(i, j);
        }
        out << "\n";
    }
}

void export_pattern(const LabelMatrix& m, const std::string& path, const std::string& header) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    export_pattern(m, out, header);
}

LabelMatrix import_pattern(std::istream& in) {
    std::vector<std::vector<int32_t>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<int32_t> row;
        std::istringstream cells(line);
        std::string cell;
        while (std::getline(cells, cell, ',')) row.push_back(std::stoi(cell));
        rows.push_back(std::move(row));
    }
    LabelMatrix m;
    m.P = static_cast<int>(rows.size());
    m.W = -1;
    m.labels.reserve(static_cast<size_t>(m.P) * m.P);
    for (const auto& row : rows) {
        if (static_cast<int>(row.size()) != m.P) throw DataError("pattern import: ragged grid");
        m.labels.insert(m.labels.end(), row.begin(), row.end());
    }
    return m;
}

}  // namespace gesa
