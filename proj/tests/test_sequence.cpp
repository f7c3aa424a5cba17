#include <random>

#include "doctest.h"
#include "gesa/sequence.hpp"
#include "gesa/train.hpp"
#include "test_util.hpp"

using namespace gesa;

namespace {

ClozeInstance rex_instance() {
    ClozeInstance inst;
    inst.id = "rex";
    inst.question_tokens = {"the", "[PLC]", "won"};
    inst.sentences = {{"Rex", "barked"}};
    inst.mentions = {{"Rex", 0, 0, 1}};
    inst.candidates = {0};
    inst.gold_answers = {"Rex"};
    return inst;
}

std::vector<TokenRole> roles_of(const TokenSequence& seq) {
    std::vector<TokenRole> out;
    for (const auto& w : seq.words) out.push_back(w.role);
    return out;
}

}  // namespace

TEST_CASE("layout follows [CLS] Q [SEP] [SEP] D [SEP] with entity separators") {
    auto inst = rex_instance();
    Vocabulary vocab = build_vocab({inst});
    TokenSequence seq = build_sequence(inst, vocab, 64, 16);

    using R = TokenRole;
    CHECK(roles_of(seq) == std::vector<R>{R::Cls, R::Question, R::PlcWord, R::Question, R::Sep,
                                          R::Sep, R::EntMark, R::Doc, R::EntMark, R::Doc, R::Sep});
    CHECK(seq.words[6].vocab_id == Vocabulary::kEntId);
    CHECK(seq.words[7].vocab_id == vocab.lookup("Rex"));
    CHECK(seq.words[8].vocab_id == Vocabulary::kEntId);
    CHECK(seq.words[9].vocab_id == vocab.lookup("barked"));
    REQUIRE(seq.entities.size() == 2);
    CHECK(seq.entities[0].kind == EntityKind::PlcEntity);
    CHECK(seq.entities[1].kind == EntityKind::Candidate);
    CHECK(seq.entities[1].span_begin == 7);
    CHECK(seq.entities[1].span_end == 8);
}

TEST_CASE("word and entity count identities hold") {
    auto inst = rex_instance();
    Vocabulary vocab = build_vocab({inst});
    TokenSequence seq = build_sequence(inst, vocab, 64, 16);
    const int q = static_cast<int>(inst.question_tokens.size());
    const int d = 2;  // document tokens
    CHECK(seq.word_count() == 1 + q + 3 + d + 2 * 1);
    CHECK(seq.entity_count() == 1 + 1);
}

TEST_CASE("an instance without candidates is rejected") {
    auto inst = rex_instance();
    inst.candidates.clear();
    Vocabulary vocab = build_vocab({inst});
    CHECK_THROWS_WITH_AS(build_sequence(inst, vocab, 64, 16), doctest::Contains("no candidates"),
                         DataError);
}

TEST_CASE("over-long questions are rejected") {
    auto inst = rex_instance();
    Vocabulary vocab = build_vocab({inst});
    CHECK_THROWS_WITH_AS(build_sequence(inst, vocab, 64, 5), doctest::Contains("max_q_len"),
                         DataError);
}

TEST_CASE("truncation drops the document tail and cut mentions") {
    ClozeInstance inst;
    inst.id = "trunc";
    inst.question_tokens = {"who", "[PLC]"};
    inst.sentences = {{"aa", "bb", "cc", "dd"}, {"ee", "ff", "gg", "hh"}};
    inst.mentions = {{"bb", 0, 1, 2}, {"ff", 1, 1, 2}};
    inst.candidates = {0, 1};
    inst.gold_answers = {"bb"};
    Vocabulary vocab = build_vocab({inst});

    TokenSequence full = build_sequence(inst, vocab, 128, 16);
    CHECK(full.entity_count() == 3);
    CHECK(full.dropped_mentions == 0);

    // words for both mentions: 6 header + 8 doc + 4 marks + 1 = 19, entities 3 -> P=22.
    // Cap below that: the second mention and the doc tail must go.
    TokenSequence cut = build_sequence(inst, vocab, 18, 16);
    CHECK(cut.total_len() <= 18);
    CHECK(cut.entity_count() == 2);
    CHECK(cut.dropped_mentions == 1);

    CHECK_THROWS_WITH_AS(build_sequence(inst, vocab, 11, 16),
                         doctest::Contains("all candidates truncated"), DataError);
}

TEST_CASE("count identities hold on synthetic instances") {
    for (uint64_t seed = 0; seed < 20; ++seed) {
        ClozeInstance inst = gen_synthetic(4, 6, 1 + static_cast<int>(seed % 2), seed);
        Vocabulary vocab = build_vocab({inst});
        TokenSequence seq = build_sequence(inst, vocab, 512, 32);
        int doc_tokens = 0;
        for (const auto& s : inst.sentences) doc_tokens += static_cast<int>(s.size());
        const int q = static_cast<int>(inst.question_tokens.size());
        const int n_mentions = static_cast<int>(inst.mentions.size());
        CHECK(seq.word_count() == 1 + q + 3 + doc_tokens + 2 * n_mentions);
        CHECK(seq.entity_count() == 1 + n_mentions);
        CHECK(seq.dropped_mentions == 0);

        // same instance builds identically
        TokenSequence again = build_sequence(inst, vocab, 512, 32);
        CHECK(again.word_count() == seq.word_count());
        CHECK(again.entities.size() == seq.entities.size());
    }
}
