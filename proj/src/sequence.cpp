#include "gesa/sequence.hpp"

#include <algorithm>
#include <unordered_map>
#include <unordered_set>

namespace gesa {

namespace {

struct MentionPos {
    int mention_idx = 0;
    int raw_begin = 0;  // flattened document token range
    int raw_end = 0;
    bool is_candidate = false;
};

}  // namespace

TokenSequence build_sequence(const ClozeInstance& inst, const Vocabulary& vocab, int max_len,
                             int max_q_len) {
    const std::string where = "instance " + inst.id + ": ";
    const int q_len = static_cast<int>(inst.question_tokens.size()) + 3;  // [CLS] Q [SEP] [SEP]
    if (q_len > max_q_len)
        throw DataError(where + "question (incl. specials) exceeds max_q_len: " +
                        std::to_string(q_len) + " > " + std::to_string(max_q_len));
    if (inst.candidates.empty()) throw DataError(where + "no candidates");

    // Flattened document token offsets per sentence.
    std::vector<int> sent_offset(inst.sentences.size() + 1, 0);
    for (size_t s = 0; s < inst.sentences.size(); ++s)
        sent_offset[s + 1] = sent_offset[s] + static_cast<int>(inst.sentences[s].size());
    const int n_raw = sent_offset.back();

    std::unordered_set<int> candidate_set;
    for (int c : inst.candidates) candidate_set.insert(c);

    std::vector<MentionPos> positions;
    for (size_t m = 0; m < inst.mentions.size(); ++m) {
        const Mention& men = inst.mentions[m];
        MentionPos p;
        p.mention_idx = static_cast<int>(m);
        p.raw_begin = sent_offset[men.sentence_index] + men.token_start;
        p.raw_end = sent_offset[men.sentence_index] + men.token_end;
        p.is_candidate = candidate_set.count(static_cast<int>(m)) > 0;
        positions.push_back(p);
    }
    std::sort(positions.begin(), positions.end(),
              [](const MentionPos& a, const MentionPos& b) { return a.raw_begin < b.raw_begin; });
    for (size_t i = 1; i < positions.size(); ++i)
        if (positions[i].raw_begin < positions[i - 1].raw_end)
            throw DataError(where + "overlapping mention spans");

    // Truncation: find the largest raw-token budget t whose sequence fits.
    std::vector<int> all_ends, cand_ends;
    for (const auto& p : positions) {
        all_ends.push_back(p.raw_end);
        if (p.is_candidate) cand_ends.push_back(p.raw_end);
    }
    std::sort(all_ends.begin(), all_ends.end());
    std::sort(cand_ends.begin(), cand_ends.end());
    auto count_le = [](const std::vector<int>& v, int t) {
        return static_cast<int>(std::upper_bound(v.begin(), v.end(), t) - v.begin());
    };
    auto total_len = [&](int t) {
        const int m_all = count_le(all_ends, t);
        const int m_cand = count_le(cand_ends, t);
        const int words = q_len + 1 + t + 2 * m_all;  // header + trailing [SEP] + doc + marks
        return words + 1 + m_cand;                    // + placeholder entity + candidates
    };
    int budget = n_raw;
    while (budget > 0 && total_len(budget) > max_len) --budget;
    if (total_len(budget) > max_len)
        throw DataError(where + "sequence does not fit max_len even with empty document");
    if (count_le(cand_ends, budget) == 0)
        throw DataError(where + "all candidates truncated away");

    TokenSequence seq;
    seq.words.push_back({Vocabulary::kClsId, TokenRole::Cls});
    for (const auto& t : inst.question_tokens) {
        TokenRole role = (t == kPlcToken) ? TokenRole::PlcWord : TokenRole::Question;
        seq.words.push_back({vocab.lookup(t), role});
    }
    seq.words.push_back({Vocabulary::kSepId, TokenRole::Sep});
    seq.words.push_back({Vocabulary::kSepId, TokenRole::Sep});

    std::unordered_map<int, const MentionPos*> begin_at;
    for (const auto& p : positions)
        if (p.raw_end <= budget) begin_at[p.raw_begin] = &p;

    struct Placed {
        const MentionPos* pos;
        int span_begin, span_end;
    };
    std::vector<Placed> placed;
    const MentionPos* open = nullptr;
    int open_begin = -1;
    int raw = 0;
    for (const auto& sent : inst.sentences) {
        for (const auto& tok : sent) {
            if (raw == budget) break;
            auto it = begin_at.find(raw);
            if (it != begin_at.end()) {
                seq.words.push_back({Vocabulary::kEntId, TokenRole::EntMark});
                open = it->second;
                open_begin = seq.word_count();
            }
            seq.words.push_back({vocab.lookup(tok), TokenRole::Doc});
            ++raw;
            if (open && raw == open->raw_end) {
                placed.push_back({open, open_begin, seq.word_count()});
                seq.words.push_back({Vocabulary::kEntId, TokenRole::EntMark});
                open = nullptr;
            }
        }
        if (raw == budget) break;
    }
    seq.words.push_back({Vocabulary::kSepId, TokenRole::Sep});

    seq.entities.push_back({EntityKind::PlcEntity, -1, -1, -1});
    std::unordered_set<int> emitted;
    for (const auto& pl : placed) {
        if (!pl.pos->is_candidate) continue;
        if (!emitted.insert(pl.pos->mention_idx).second) continue;
        seq.entities.push_back({EntityKind::Candidate, pl.pos->mention_idx, pl.span_begin, pl.span_end});
    }
    seq.dropped_mentions = static_cast<int>(positions.size()) - static_cast<int>(placed.size());
    return seq;
}

}  // namespace gesa
