#include "gesa/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace gesa {

using ordered_json = nlohmann::ordered_json;

std::vector<std::string> normalize_tokens(const std::string& s) {
    std::string cleaned;
    cleaned.reserve(s.size());
    for (unsigned char c : s) {
        if (std::ispunct(c))
            cleaned.push_back(' ');
        else
            cleaned.push_back(static_cast<char>(std::tolower(c)));
    }
    std::vector<std::string> out;
    std::istringstream iss(cleaned);
    std::string tok;
    while (iss >> tok) {
        if (tok == "a" || tok == "an" || tok == "the") continue;
        out.push_back(tok);
    }
    return out;
}

std::string normalize_answer(const std::string& s) {
    std::string out;
    for (const auto& tok : normalize_tokens(s)) {
        if (!out.empty()) out.push_back(' ');
        out += tok;
    }
    return out;
}

static std::string join_span(const std::vector<std::string>& sent, int begin, int end) {
    std::string out;
    for (int t = begin; t < end; ++t) {
        if (t > begin) out.push_back(' ');
        out += sent[t];
    }
    return out;
}

void validate_instance(const ClozeInstance& inst) {
    const std::string where = "instance " + inst.id + ": ";
    long plc = std::count(inst.question_tokens.begin(), inst.question_tokens.end(), kPlcToken);
    if (plc != 1)
        throw DataError(where + "placeholder count != 1 (got " + std::to_string(plc) + ")");
    for (size_t m = 0; m < inst.mentions.size(); ++m) {
        const Mention& men = inst.mentions[m];
        const std::string mwhere = where + "mention " + std::to_string(m) + ": ";
        if (men.sentence_index < 0 || men.sentence_index >= static_cast<int>(inst.sentences.size()))
            throw DataError(mwhere + "sentence index out of range");
        const auto& sent = inst.sentences[men.sentence_index];
        if (men.token_start < 0 || men.token_start >= men.token_end ||
            men.token_end > static_cast<int>(sent.size()))
            throw DataError(mwhere + "span out of range");
        if (join_span(sent, men.token_start, men.token_end) != men.surface)
            throw DataError(mwhere + "surface does not match span tokens");
    }
    if (inst.candidates.empty()) throw DataError(where + "candidates empty");
    for (int c : inst.candidates)
        if (c < 0 || c >= static_cast<int>(inst.mentions.size()))
            throw DataError(where + "candidate index out of range");
    if (inst.gold_answers.empty()) throw DataError(where + "answers empty");
}

bool answerable_by_candidates(const ClozeInstance& inst) {
    std::vector<std::string> golds;
    for (const auto& g : inst.gold_answers) golds.push_back(normalize_answer(g));
    for (int c : inst.candidates) {
        const std::string surf = normalize_answer(inst.mentions[c].surface);
        if (std::find(golds.begin(), golds.end(), surf) != golds.end()) return true;
    }
    return false;
}

static ClozeInstance instance_from_json(const ordered_json& j) {
    ClozeInstance inst;
    inst.id = j.at("id").get<std::string>();
    inst.question_tokens = j.at("question").get<std::vector<std::string>>();
    inst.sentences = j.at("sentences").get<std::vector<std::vector<std::string>>>();
    for (const auto& jm : j.at("mentions")) {
        Mention m;
        m.surface = jm.at("surface").get<std::string>();
        m.sentence_index = jm.at("sent").get<int>();
        m.token_start = jm.at("start").get<int>();
        m.token_end = jm.at("end").get<int>();
        inst.mentions.push_back(std::move(m));
    }
    inst.candidates = j.at("candidates").get<std::vector<int>>();
    inst.gold_answers = j.at("answers").get<std::vector<std::string>>();
    return inst;
}

std::vector<ClozeInstance> parse_native(const std::string& path, LoadStats* stats) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<ClozeInstance> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no) + ": ";
        ClozeInstance inst;
        try {
            inst = instance_from_json(ordered_json::parse(line));
        } catch (const ordered_json::exception& e) {
            throw DataError(where + "malformed record: " + e.what());
        }
        try {
            validate_instance(inst);
        } catch (const DataError& e) {
            throw DataError(where + e.what());
        }
        if (stats) {
            ++stats->instances;
            if (!answerable_by_candidates(inst)) ++stats->unanswerable;
        }
        out.push_back(std::move(inst));
    }
    return out;
}

void write_native(const std::vector<ClozeInstance>& instances, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    for (const auto& inst : instances) {
        ordered_json j;
        j["id"] = inst.id;
        j["question"] = inst.question_tokens;
        j["sentences"] = inst.sentences;
        ordered_json jmentions = ordered_json::array();
        for (const auto& m : inst.mentions) {
            ordered_json jm;
            jm["surface"] = m.surface;
            jm["sent"] = m.sentence_index;
            jm["start"] = m.token_start;
            jm["end"] = m.token_end;
            jmentions.push_back(std::move(jm));
        }
        j["mentions"] = std::move(jmentions);
        j["candidates"] = inst.candidates;
        j["answers"] = inst.gold_answers;
        out << j.dump() << "\n";
    }
}

Vocabulary::Vocabulary() {
    id_to_token_ = {kClsToken, kSepToken, kEntToken, kPlcToken, kUnkToken};
    for (int i = 0; i < kNumReserved; ++i) token_to_id_[id_to_token_[i]] = i;
}

int Vocabulary::add(const std::string& token) {
    auto it = token_to_id_.find(token);
    if (it != token_to_id_.end()) return it->second;
    int id = static_cast<int>(id_to_token_.size());
    token_to_id_[token] = id;
    id_to_token_.push_back(token);
    return id;
}

int Vocabulary::lookup(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnkId : it->second;
}

const std::string& Vocabulary::token(int id) const {
    if (id < 0 || id >= size()) throw DataError("vocab id out of range: " + std::to_string(id));
    return id_to_token_[id];
}

Vocabulary build_vocab(const std::vector<ClozeInstance>& instances) {
    Vocabulary vocab;
    for (const auto& inst : instances) {
        for (const auto& t : inst.question_tokens) vocab.add(t);
        for (const auto& sent : inst.sentences)
            for (const auto& t : sent) vocab.add(t);
    }
    return vocab;
}

}  // namespace gesa
