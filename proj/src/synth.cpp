#include <algorithm>
#include <random>

#include "gesa/train.hpp"

namespace gesa {

namespace {

const std::vector<std::string> kFillers = {
    "aqua", "brisk", "cedar", "dune",  "ember", "frost", "gale",  "haze",  "iris", "jade",
    "kelp", "lumen", "moss",  "nova",  "onyx",  "pine",  "quill", "reef",  "slate", "tide"};

const std::vector<std::string> kEntities = {
    "arlen", "boyd", "cora", "dex",  "edna", "finn",  "gwen", "hale", "ivy",  "jude",
    "kira",  "lars", "mona", "nash", "opal", "pax",   "quinn", "rhea", "saul", "tess",
    "uma",   "vern", "wren", "xan",  "yara", "zeke"};

// Distinct pool so "mentions a cue" is a learnable token-level feature.
const std::vector<std::string> kCues = {"crimson", "amber",   "violet", "indigo", "teal",
                                        "scarlet", "ochre",   "magenta", "cobalt", "sienna"};

struct SentenceDraft {
    std::vector<std::string> tokens;
    // (surface, position) of candidate mentions in this sentence
    std::vector<std::pair<std::string, int>> mentions;
};

// Layout [f f A f B f .]; slots hold a mention token, the cue, or filler.
SentenceDraft make_sentence(std::mt19937_64& rng, const std::string& slot_a,
                            bool a_is_mention, const std::string& slot_b, bool b_is_mention) {
    std::uniform_int_distribution<size_t> pick(0, kFillers.size() - 1);
    auto filler = [&] { return kFillers[pick(rng)]; };
    SentenceDraft s;
    s.tokens = {filler(), filler(),
                slot_a.empty() ? filler() : slot_a,
                filler(),
                slot_b.empty() ? filler() : slot_b,
                filler(), "."};
    if (a_is_mention) s.mentions.emplace_back(slot_a, 2);
    if (b_is_mention) s.mentions.emplace_back(slot_b, 4);
    return s;
}

}  // namespace

ClozeInstance gen_synthetic(int n_candidates, int n_sentences, int hops, uint64_t seed) {
    if (n_candidates < 2) throw DataError("gen_synthetic: need at least 2 candidates");
    if (n_sentences < n_candidates)
        throw DataError("gen_synthetic: need n_sentences >= n_candidates");
    if (hops != 1 && hops != 2) throw DataError("gen_synthetic: hops must be 1 or 2");

    std::mt19937_64 rng(seed);
    std::vector<std::string> surfaces = kEntities;
    std::shuffle(surfaces.begin(), surfaces.end(), rng);
    surfaces.resize(n_candidates);
    const std::string cue = kCues[std::uniform_int_distribution<size_t>(0, kCues.size() - 1)(rng)];
    const std::string answer = surfaces[0];

    std::vector<SentenceDraft> drafts;
    if (hops == 1) {
        // answer shares the cue's sentence; every other candidate sits alone
        drafts.push_back(make_sentence(rng, cue, false, answer, true));
        for (int c = 1; c < n_candidates; ++c)
            drafts.push_back(make_sentence(rng, "", false, surfaces[c], true));
    } else {
        // cue + bridge, then bridge + answer; a decoy pair mirrors the chain
        const std::string& bridge = surfaces[1];
        drafts.push_back(make_sentence(rng, cue, false, bridge, true));
        drafts.push_back(make_sentence(rng, bridge, true, answer, true));
        int next = 2;
        if (n_candidates >= 4) {
            const std::string& decoy_bridge = surfaces[2];
            const std::string& decoy_answer = surfaces[3];
            drafts.push_back(make_sentence(rng, "", false, decoy_bridge, true));
            drafts.push_back(make_sentence(rng, decoy_bridge, true, decoy_answer, true));
            next = 4;
        }
        for (int c = next; c < n_candidates; ++c)
            drafts.push_back(make_sentence(rng, "", false, surfaces[c], true));
    }
    while (static_cast<int>(drafts.size()) < n_sentences)
        drafts.push_back(make_sentence(rng, "", false, "", false));
    std::shuffle(drafts.begin(), drafts.end(), rng);

    ClozeInstance inst;
    inst.id = "synth-h" + std::to_string(hops) + "-" + std::to_string(seed);
    inst.question_tokens = {"who", "is", "the", kPlcToken, "near", cue, "?"};
    for (size_t s = 0; s < drafts.size(); ++s) {
        inst.sentences.push_back(drafts[s].tokens);
        for (const auto& [surface, position] : drafts[s].mentions) {
            Mention m;
            m.surface = surface;
            m.sentence_index = static_cast<int>(s);
            m.token_start = position;
            m.token_end = position + 1;
            inst.mentions.push_back(std::move(m));
        }
    }
    for (size_t m = 0; m < inst.mentions.size(); ++m)
        inst.candidates.push_back(static_cast<int>(m));
    inst.gold_answers = {answer};
    validate_instance(inst);
    return inst;
}

std::vector<ClozeInstance> gen_synthetic_set(int n, int n_candidates, int n_sentences, int hops,
                                             uint64_t seed) {
    std::vector<ClozeInstance> out;
    out.reserve(n);
    for (int i = 0; i < n; ++i) {
        const uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * static_cast<uint64_t>(i + 1));
        out.push_back(gen_synthetic(n_candidates, n_sentences, hops, s));
        out.back().id += "-" + std::to_string(i);
    }
    return out;
}

}  // namespace gesa
