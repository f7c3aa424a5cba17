#pragma once

#include <string>
#include <vector>

#include "gesa/corpus.hpp"

namespace gesa {

struct ConvertStats {
    int instances = 0;
    int skipped_queries = 0;   // marker absent or ambiguous
    int skipped_no_answers = 0;
    int widened_spans = 0;     // char span did not align with token boundaries
    int clamped_mentions = 0;  // span crossed a sentence boundary
    int invalid_spans = 0;
};

// Converts a ReCoRD-style JSON file (passage text with inclusive character
// entity spans, queries containing a placeholder marker, answer spans) into
// native instances. Passages are whitespace-tokenized, sentence-segmented by
// the fallback segmenter, and spans widened to whole tokens.
std::vector<ClozeInstance> convert_record_style(const std::string& path,
                                                const std::string& placeholder_marker,
                                                ConvertStats* stats = nullptr);

// (?, property, subject) tuple to cloze question tokens:
// ["[PLC]"] + property split on '_' + subject tokens.
std::vector<std::string> convert_wikihop_query(const std::string& property,
                                               const std::vector<std::string>& subject_tokens);

}  // namespace gesa
