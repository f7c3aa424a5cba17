#include "gesa/convert.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>

#include "json.hpp"

#include "gesa/graph.hpp"

namespace gesa {

namespace {

using json = nlohmann::json;

struct TokSpan {
    std::string text;
    int begin = 0;  // character range [begin, end)
    int end = 0;
};

std::vector<TokSpan> whitespace_tokenize(const std::string& text) {
    std::vector<TokSpan> out;
    int i = 0;
    const int n = static_cast<int>(text.size());
    while (i < n) {
        while (i < n && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
        if (i >= n) break;
        int j = i;
        while (j < n && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
        out.push_back({text.substr(i, j - i), i, j});
        i = j;
    }
    return out;
}

std::string join_tokens(const std::vector<std::string>& toks, int begin, int end) {
    std::string s;
    for (int t = begin; t < end; ++t) {
        if (t > begin) s.push_back(' ');
        s += toks[t];
    }
    return s;
}

}  // namespace

std::vector<ClozeInstance> convert_record_style(const std::string& path,
                                                const std::string& placeholder_marker,
                                                ConvertStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    json root;
    try {
        in >> root;
    } catch (const json::exception& e) {
        throw DataError(path + ": malformed JSON: " + std::string(e.what()));
    }
    if (!root.contains("data")) throw DataError(path + ": missing 'data'");

    ConvertStats local;
    ConvertStats& st = stats ? *stats : local;
    std::vector<ClozeInstance> out;

    int data_idx = -1;
    for (const auto& entry : root.at("data")) {
        ++data_idx;
        const auto& passage = entry.at("passage");
        const std::string text = passage.at("text").get<std::string>();
        const auto toks = whitespace_tokenize(text);

        std::vector<std::string> flat;
        flat.reserve(toks.size());
        for (const auto& t : toks) flat.push_back(t.text);
        const auto sentences = segment_sentences(flat);

        // flattened token index -> (sentence, in-sentence index)
        std::vector<std::pair<int, int>> pos;
        for (size_t s = 0; s < sentences.size(); ++s)
            for (size_t x = 0; x < sentences[s].size(); ++x)
                pos.emplace_back(static_cast<int>(s), static_cast<int>(x));

        std::vector<Mention> mentions;
        std::vector<std::pair<int, int>> seen_spans;  // flattened, deduped
        for (const auto& ent : passage.at("entities")) {
            const int cs = ent.at("start").get<int>();
            const int ce = ent.at("end").get<int>();  // inclusive
            // first token overlapping cs, last token overlapping ce
            int t0 = -1, t1 = -1;
            for (size_t t = 0; t < toks.size(); ++t) {
                if (t0 < 0 && toks[t].end > cs) t0 = static_cast<int>(t);
                if (toks[t].begin <= ce) t1 = static_cast<int>(t);
            }
            if (t0 < 0 || t1 < t0 || toks[t0].begin > ce) {
                std::cerr << "warning: " << path << ": entity span [" << cs << "," << ce
                          << "] matches no tokens, skipped\n";
                ++st.invalid_spans;
                continue;
            }
            if (toks[t0].begin != cs || toks[t1].end != ce + 1) {
                ++st.widened_spans;
                std::cerr << "warning: " << path << ": entity span [" << cs << "," << ce
                          << "] widened to token boundaries\n";
            }
            // keep the mention inside the sentence of its first token
            const auto [sent, sent_start] = pos[t0];
            int t_last = t1;
            while (pos[t_last].first != sent) --t_last;
            if (t_last != t1) {
                ++st.clamped_mentions;
                std::cerr << "warning: " << path
                          << ": entity span crosses a sentence boundary, clamped\n";
            }
            if (std::find(seen_spans.begin(), seen_spans.end(), std::make_pair(t0, t_last)) !=
                seen_spans.end())
                continue;
            seen_spans.emplace_back(t0, t_last);
            Mention m;
            m.sentence_index = sent;
            m.token_start = sent_start;
            m.token_end = pos[t_last].second + 1;
            m.surface = join_tokens(sentences[sent], m.token_start, m.token_end);
            mentions.push_back(std::move(m));
        }

        int q_idx = -1;
        for (const auto& qa : entry.at("qas")) {
            ++q_idx;
            const std::string query = qa.at("query").get<std::string>();
            std::vector<std::string> q_tokens;
            int markers = 0;
            for (const auto& t : whitespace_tokenize(query)) {
                if (t.text.find(placeholder_marker) != std::string::npos) {
                    q_tokens.push_back(kPlcToken);
                    ++markers;
                } else {
                    q_tokens.push_back(t.text);
                }
            }
            if (markers != 1) {
                std::cerr << "warning: " << path << ": query with " << markers
                          << " placeholder markers, skipped\n";
                ++st.skipped_queries;
                continue;
            }
            std::vector<std::string> answers;
            if (qa.contains("answers")) {
                for (const auto& ans : qa.at("answers")) {
                    std::string a;
                    if (ans.contains("text"))
                        a = ans.at("text").get<std::string>();
                    else
                        a = text.substr(ans.at("start").get<int>(),
                                        ans.at("end").get<int>() - ans.at("start").get<int>() + 1);
                    if (std::find(answers.begin(), answers.end(), a) == answers.end())
                        answers.push_back(std::move(a));
                }
            }
            if (answers.empty()) {
                std::cerr << "warning: " << path << ": query without answers, skipped\n";
                ++st.skipped_no_answers;
                continue;
            }

            ClozeInstance inst;
            inst.id = qa.contains("id") ? qa.at("id").get<std::string>()
                                        : std::to_string(data_idx) + "-" + std::to_string(q_idx);
            inst.question_tokens = q_tokens;
            inst.sentences = sentences;
            inst.mentions = mentions;
            for (size_t m = 0; m < mentions.size(); ++m)
                inst.candidates.push_back(static_cast<int>(m));
            inst.gold_answers = answers;
            if (inst.candidates.empty()) {
                std::cerr << "warning: " << path << ": passage without entities, query skipped\n";
                ++st.skipped_queries;
                continue;
            }
            validate_instance(inst);
            ++st.instances;
            out.push_back(std::move(inst));
        }
    }
    return out;
}

std::vector<std::string> convert_wikihop_query(const std::string& property,
                                               const std::vector<std::string>& subject_tokens) {
    if (property.empty()) throw DataError("convert_wikihop_query: empty property");
    std::vector<std::string> out{kPlcToken};
    std::string part;
    for (char c : property) {
        if (c == '_') {
            if (!part.empty()) out.push_back(std::move(part));
            part.clear();
        } else {
            part.push_back(c);
        }
    }
    if (!part.empty()) out.push_back(std::move(part));
    out.insert(out.end(), subject_tokens.begin(), subject_tokens.end());
    return out;
}

}  // namespace gesa
