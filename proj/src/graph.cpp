#include "gesa/graph.hpp"

#include <string>

namespace gesa {

const char* edge_type_name(EdgeType t) {
    switch (t) {
        case EdgeType::SentBased: return "SENT_BASED";
        case EdgeType::Match: return "MATCH";
        case EdgeType::Plc: return "PLC";
    }
    return "?";
}

HeterogeneousGraph build_graph(const std::vector<EntityToken>& entities,
                               const std::vector<Mention>& mentions) {
    HeterogeneousGraph g;
    g.node_count = static_cast<int>(entities.size());
    if (g.node_count == 0) return g;
    if (entities[0].kind != EntityKind::PlcEntity)
        throw DataError("build_graph: entity 0 is not the placeholder");

    struct NodeInfo {
        int sentence = -1;
        std::string norm_surface;
    };
    std::vector<NodeInfo> info(g.node_count);
    for (int i = 1; i < g.node_count; ++i) {
        const EntityToken& e = entities[i];
        if (e.kind != EntityKind::Candidate || e.mention_ref < 0 ||
            e.mention_ref >= static_cast<int>(mentions.size()))
            throw DataError("build_graph: dangling mention_ref at node " + std::to_string(i));
        info[i].sentence = mentions[e.mention_ref].sentence_index;
        info[i].norm_surface = normalize_answer(mentions[e.mention_ref].surface);
    }

    for (int j = 1; j < g.node_count; ++j) g.edges.push_back({0, j, EdgeType::Plc});
    for (int a = 1; a < g.node_count; ++a) {
        for (int b = a + 1; b < g.node_count; ++b) {
            if (info[a].sentence == info[b].sentence)
                g.edges.push_back({a, b, EdgeType::SentBased});
            else if (info[a].norm_surface == info[b].norm_surface)
                g.edges.push_back({a, b, EdgeType::Match});
        }
    }
    return g;
}

EdgeIndex::EdgeIndex(const HeterogeneousGraph& g) : n_(g.node_count) {
    for (const auto& e : g.edges)
        map_[static_cast<long long>(e.a) * n_ + e.b] = e.type;
}

std::optional<EdgeType> EdgeIndex::find(int a, int b) const {
    if (a == b) return std::nullopt;
    if (a > b) std::swap(a, b);
    auto it = map_.find(static_cast<long long>(a) * n_ + b);
    if (it == map_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::vector<std::string>> segment_sentences(const std::vector<std::string>& tokens) {
    std::vector<std::vector<std::string>> out;
    std::vector<std::string> cur;
    for (const auto& tok : tokens) {
        cur.push_back(tok);
        const char last = tok.empty() ? '\0' : tok.back();
        if (last == '.' || last == '!' || last == '?') {
            out.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

void write_graph(const HeterogeneousGraph& g, std::ostream& out) {
    for (const auto& e : g.edges)
        out << e.a << " " << e.b << " " << edge_type_name(e.type) << "\n";
}

}  // namespace gesa
