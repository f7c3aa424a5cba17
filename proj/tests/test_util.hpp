#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "gesa/corpus.hpp"
#include "gesa/graph.hpp"
#include "gesa/model.hpp"

namespace gesa::test {

inline std::string temp_path(const std::string& name) {
    static int counter = 0;
    auto dir = std::filesystem::temp_directory_path() / "gesa_tests";
    std::filesystem::create_directories(dir);
    return (dir / (std::to_string(++counter) + "_" + name)).string();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// Random native-format instance with all invariants satisfied.
inline ClozeInstance random_instance(std::mt19937_64& rng) {
    static const std::vector<std::string> words = {"ox", "elm", "fog", "rig", "paw",
                                                   "cod", "yam", "ivy", "gnu", "asp"};
    std::uniform_int_distribution<int> sent_count(1, 4);
    std::uniform_int_distribution<int> sent_len(2, 6);
    std::uniform_int_distribution<size_t> word_pick(0, words.size() - 1);

    ClozeInstance inst;
    inst.id = "rand-" + std::to_string(rng());
    inst.question_tokens = {"what", kPlcToken, words[word_pick(rng)]};
    const int n_sents = sent_count(rng);
    for (int s = 0; s < n_sents; ++s) {
        std::vector<std::string> sent;
        const int n = sent_len(rng);
        for (int t = 0; t < n; ++t) sent.push_back(words[word_pick(rng)]);
        inst.sentences.push_back(std::move(sent));
    }
    // non-overlapping single-token mentions
    for (int s = 0; s < n_sents; ++s) {
        const int n = static_cast<int>(inst.sentences[s].size());
        for (int t = 0; t < n; t += 3) {
            if (rng() % 2) continue;
            Mention m;
            m.sentence_index = s;
            m.token_start = t;
            m.token_end = t + 1;
            m.surface = inst.sentences[s][t];
            inst.mentions.push_back(std::move(m));
        }
    }
    if (inst.mentions.empty()) {
        Mention m;
        m.sentence_index = 0;
        m.token_start = 0;
        m.token_end = 1;
        m.surface = inst.sentences[0][0];
        inst.mentions.push_back(std::move(m));
    }
    for (size_t m = 0; m < inst.mentions.size(); ++m) inst.candidates.push_back(static_cast<int>(m));
    inst.gold_answers = {inst.mentions[rng() % inst.mentions.size()].surface};
    return inst;
}

// Applies a permutation to the candidate entity tokens (and relabels graph
// nodes to match). perm maps old candidate slot -> new candidate slot, over
// entities[1..].
inline void permute_entities(TokenSequence& seq, HeterogeneousGraph& graph,
                             const std::vector<int>& perm) {
    std::vector<EntityToken> entities(seq.entities.size());
    entities[0] = seq.entities[0];
    for (size_t c = 0; c < perm.size(); ++c) entities[1 + perm[c]] = seq.entities[1 + c];
    seq.entities = std::move(entities);
    auto map_node = [&](int n) { return n == 0 ? 0 : 1 + perm[n - 1]; };
    for (auto& e : graph.edges) {
        e.a = map_node(e.a);
        e.b = map_node(e.b);
        if (e.a > e.b) std::swap(e.a, e.b);
    }
}

inline void fill_tensor(Tensor* t, double value) {
    std::fill(t->v.a.begin(), t->v.a.end(), value);
}

inline void randomize_params(ModelParams& p, uint64_t seed, double scale = 0.1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> dist(0.0, scale);
    for (auto& t : p.tensors)
        for (double& v : t->v.a) v = dist(rng);
}

}  // namespace gesa::test
