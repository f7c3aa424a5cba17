#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "gesa/errors.hpp"

namespace gesa {

inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kSepToken = "[SEP]";
inline constexpr const char* kEntToken = "[ENT]";
inline constexpr const char* kPlcToken = "[PLC]";
inline constexpr const char* kUnkToken = "[UNK]";

// One occurrence of an entity inside a document sentence. Token spans are
// half-open and relative to the sentence.
struct Mention {
    std::string surface;
    int sentence_index = 0;
    int token_start = 0;
    int token_end = 0;

    bool operator==(const Mention&) const = default;
};

// One cloze question/document/candidates/answer record.
struct ClozeInstance {
    std::string id;
    std::vector<std::string> question_tokens;             // exactly one [PLC]
    std::vector<std::vector<std::string>> sentences;      // pre-segmented document
    std::vector<Mention> mentions;
    std::vector<int> candidates;                          // indices into mentions
    std::vector<std::string> gold_answers;

    bool operator==(const ClozeInstance&) const = default;
};

// Shared answer/surface normalization: lowercase, punctuation stripped,
// articles (a/an/the) dropped, whitespace collapsed. Pinned here and reused
// by graph matching and by the EM/F1 metrics.
std::vector<std::string> normalize_tokens(const std::string& s);
std::string normalize_answer(const std::string& s);

// Throws DataError on any violated ClozeInstance invariant.
void validate_instance(const ClozeInstance& inst);

// True when at least one candidate surface normalizes to a gold answer.
bool answerable_by_candidates(const ClozeInstance& inst);

struct LoadStats {
    int instances = 0;
    int unanswerable = 0;
};

// Native format: one JSON object per line with keys
// id, question, sentences, mentions[{surface,sent,start,end}], candidates, answers.
std::vector<ClozeInstance> parse_native(const std::string& path, LoadStats* stats = nullptr);
void write_native(const std::vector<ClozeInstance>& instances, const std::string& path);

class Vocabulary {
  public:
    static constexpr int kClsId = 0;
    static constexpr int kSepId = 1;
    static constexpr int kEntId = 2;
    static constexpr int kPlcId = 3;
    static constexpr int kUnkId = 4;
    static constexpr int kNumReserved = 5;

    Vocabulary();

    // Returns the existing id or assigns the next one (first-occurrence order).
    int add(const std::string& token);
    // Unknown tokens map to kUnkId.
    int lookup(const std::string& token) const;
    const std::string& token(int id) const;
    int size() const { return static_cast<int>(id_to_token_.size()); }
    const std::vector<std::string>& tokens() const { return id_to_token_; }

    bool operator==(const Vocabulary& o) const { return id_to_token_ == o.id_to_token_; }

  private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
};

// Deterministic function of the concatenated token stream: per instance,
// question tokens then sentence tokens, instances in order.
Vocabulary build_vocab(const std::vector<ClozeInstance>& instances);

}  // namespace gesa
