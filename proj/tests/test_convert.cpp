#include <random>
#include <sstream>

#include "doctest.h"
#include "gesa/convert.hpp"
#include "json.hpp"
#include "test_util.hpp"

using namespace gesa;
using json = nlohmann::json;

TEST_CASE("wikihop tuple becomes a cloze question") {
    auto q = convert_wikihop_query("record_label", {"get", "ready"});
    CHECK(q == std::vector<std::string>{"[PLC]", "record", "label", "get", "ready"});
    CHECK(convert_wikihop_query("country", {"paris"}) ==
          std::vector<std::string>{"[PLC]", "country", "paris"});
    CHECK_THROWS_AS(convert_wikihop_query("", {}), DataError);
}

namespace {

// Builds a record-style file around a passage, locating spans by substring.
std::string make_record_file(const std::string& passage,
                             const std::vector<std::string>& entity_texts,
                             const std::vector<std::string>& queries,
                             const std::vector<std::string>& answers) {
    json entities = json::array();
    for (const auto& e : entity_texts) {
        const auto at = passage.find(e);
        REQUIRE(at != std::string::npos);
        entities.push_back({{"start", static_cast<int>(at)},
                            {"end", static_cast<int>(at + e.size() - 1)}});
    }
    json qas = json::array();
    for (size_t i = 0; i < queries.size(); ++i) {
        json ans = json::array();
        if (i < answers.size()) {
            const auto at = passage.find(answers[i]);
            REQUIRE(at != std::string::npos);
            ans.push_back({{"start", static_cast<int>(at)},
                           {"end", static_cast<int>(at + answers[i].size() - 1)},
                           {"text", answers[i]}});
        }
        qas.push_back({{"id", "q" + std::to_string(i)}, {"query", queries[i]}, {"answers", ans}});
    }
    json root = {{"data", json::array({{{"passage", {{"text", passage}, {"entities", entities}}},
                                        {"qas", qas}}})}};
    const std::string path = test::temp_path("record.json");
    test::write_file(path, root.dump());
    return path;
}

}  // namespace

TEST_CASE("record-style conversion replaces the marker and keeps entities") {
    const std::string passage = "Ed Balls warned about tax rises . Osborne made a pledge .";
    const auto path = make_record_file(passage, {"Ed Balls", "Osborne"},
                                       {"X claimed the @placeholder plan"}, {"Ed Balls"});
    ConvertStats stats;
    auto xs = convert_record_style(path, "@placeholder", &stats);
    REQUIRE(xs.size() == 1);
    const auto& inst = xs[0];
    CHECK(inst.question_tokens ==
          std::vector<std::string>{"X", "claimed", "the", "[PLC]", "plan"});
    REQUIRE(inst.mentions.size() == 2);
    CHECK(inst.mentions[0].surface == "Ed Balls");
    CHECK(inst.mentions[0].sentence_index == 0);
    CHECK(inst.mentions[1].surface == "Osborne");
    CHECK(inst.mentions[1].sentence_index == 1);
    CHECK(inst.candidates.size() == 2);
    CHECK(inst.gold_answers == std::vector<std::string>{"Ed Balls"});
    CHECK(stats.widened_spans == 0);
}

TEST_CASE("record-style conversion widens spans ending mid-token") {
    const std::string passage = "Greater Manchester was quiet .";
    // span covers only "Great"
    json root = {{"data",
                  json::array({{{"passage",
                                 {{"text", passage},
                                  {"entities", json::array({{{"start", 0}, {"end", 4}}})}}},
                                {"qas", json::array({{{"id", "q0"},
                                                      {"query", "what is @placeholder here"},
                                                      {"answers",
                                                       json::array({{{"start", 0},
                                                                     {"end", 6},
                                                                     {"text", "Greater"}}})}}})}}})}};
    const std::string path = test::temp_path("widen.json");
    test::write_file(path, root.dump());
    ConvertStats stats;
    auto xs = convert_record_style(path, "@placeholder", &stats);
    REQUIRE(xs.size() == 1);
    CHECK(stats.widened_spans == 1);
    CHECK(xs[0].mentions[0].surface == "Greater");
}

TEST_CASE("record-style conversion skips queries without the marker") {
    const std::string passage = "Ed Balls spoke .";
    const auto path = make_record_file(passage, {"Ed Balls"},
                                       {"no marker here", "the @placeholder spoke"},
                                       {"Ed Balls", "Ed Balls"});
    ConvertStats stats;
    auto xs = convert_record_style(path, "@placeholder", &stats);
    CHECK(xs.size() == 1);
    CHECK(stats.skipped_queries == 1);
}

TEST_CASE("record-style output always satisfies instance invariants") {
    std::mt19937_64 rng(3);
    static const std::vector<std::string> words = {"oak", "fen", "rye", "sod", "ume", "vat."};
    for (int round = 0; round < 30; ++round) {
        std::vector<std::string> toks;
        const int n = 5 + static_cast<int>(rng() % 20);
        for (int i = 0; i < n; ++i) toks.push_back(words[rng() % words.size()]);
        std::string passage;
        std::vector<int> starts;
        for (const auto& t : toks) {
            starts.push_back(static_cast<int>(passage.size()));
            passage += t;
            passage.push_back(' ');
        }
        json entities = json::array();
        const int n_ents = 1 + static_cast<int>(rng() % 4);
        for (int e = 0; e < n_ents; ++e) {
            const int t = static_cast<int>(rng() % toks.size());
            int s = starts[t];
            int end = s + static_cast<int>(toks[t].size()) - 1;
            if (rng() % 3 == 0 && toks[t].size() > 2) ++s;  // misaligned on purpose
            entities.push_back({{"start", s}, {"end", end}});
        }
        json root = {{"data",
                      json::array({{{"passage", {{"text", passage}, {"entities", entities}}},
                                    {"qas", json::array({{{"id", "q"},
                                                          {"query", "find @placeholder now"},
                                                          {"answers",
                                                           json::array({{{"text", toks[0]}}})}}})}}})}};
        const std::string path = test::temp_path("fuzz_record.json");
        test::write_file(path, root.dump());
        auto xs = convert_record_style(path, "@placeholder");
        for (const auto& inst : xs) CHECK_NOTHROW(validate_instance(inst));
    }
}
