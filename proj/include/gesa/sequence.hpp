#pragma once

#include <vector>

#include "gesa/corpus.hpp"

namespace gesa {

enum class TokenRole { Cls, Question, PlcWord, Sep, Doc, EntMark };

struct WordToken {
    int vocab_id = 0;
    TokenRole role = TokenRole::Doc;
};

enum class EntityKind { PlcEntity, Candidate };

// Entity-input token. All entity tokens carry the shared [MASK] entity
// embedding; identity flows only through the label matrix.
struct EntityToken {
    EntityKind kind = EntityKind::Candidate;
    int mention_ref = -1;   // index into instance mentions (Candidate only)
    int span_begin = -1;    // word-token index range of the mention content,
    int span_end = -1;      // excluding the [ENT] separators (Candidate only)
};

// Assembled model input: word tokens {[CLS], Q, [SEP], [SEP], D, [SEP]} with
// [ENT] separators around every mention, followed by entity tokens
// (placeholder first, then candidates in document order).
struct TokenSequence {
    std::vector<WordToken> words;
    std::vector<EntityToken> entities;
    int dropped_mentions = 0;  // mention annotations cut by truncation

    int word_count() const { return static_cast<int>(words.size()); }
    int entity_count() const { return static_cast<int>(entities.size()); }
    int total_len() const { return word_count() + entity_count(); }
};

// Builds the input sequence. The document is truncated from the end when
// words + entities would exceed max_len; mentions whose span would be cut
// are dropped together with their entity tokens.
// Throws DataError when the question alone exceeds max_q_len, when the
// instance has no candidates, or when truncation removes every candidate.
TokenSequence build_sequence(const ClozeInstance& inst, const Vocabulary& vocab, int max_len,
                             int max_q_len);

}  // namespace gesa
