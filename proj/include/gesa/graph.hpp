#pragma once

#include <optional>
#include <ostream>
#include <unordered_map>
#include <vector>

#include "gesa/sequence.hpp"

namespace gesa {

enum class EdgeType { SentBased, Match, Plc };

const char* edge_type_name(EdgeType t);

struct GraphEdge {
    int a = 0;  // a < b
    int b = 0;
    EdgeType type = EdgeType::SentBased;

    bool operator==(const GraphEdge&) const = default;
};

// Undirected typed graph over entity tokens; node 0 is the placeholder.
struct HeterogeneousGraph {
    int node_count = 0;
    std::vector<GraphEdge> edges;
};

// Edge rules over candidate pairs (a, b):
//   same sentence                         -> SENT_BASED
//   different sentences, equal normalized -> MATCH
// plus PLC edges from node 0 to every other node.
HeterogeneousGraph build_graph(const std::vector<EntityToken>& entities,
                               const std::vector<Mention>& mentions);

// O(1) pair lookup over a built graph.
class EdgeIndex {
  public:
    explicit EdgeIndex(const HeterogeneousGraph& g);
    std::optional<EdgeType> find(int a, int b) const;

  private:
    int n_ = 0;
    std::unordered_map<long long, EdgeType> map_;
};

// Fallback segmentation for sources without sentence annotation: splits after
// tokens ending in '.', '!' or '?'. Concatenation equals the input; no empty
// sentences.
std::vector<std::vector<std::string>> segment_sentences(const std::vector<std::string>& tokens);

// One edge per line: "i j TYPE".
void write_graph(const HeterogeneousGraph& g, std::ostream& out);

}  // namespace gesa
