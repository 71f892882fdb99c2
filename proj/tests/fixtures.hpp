// Shared corpus fixtures. The vocabulary fixture is sized so every rule has
// a clear margin: 60 copies of each phrase put all seen unigrams and all
// adjacent bigrams far above the dictionary floor, while the glued forms
// (srivenkateswara, annanagar, padmajanagar, ...) stay unseen. chandanagar
// appears only glued, so the merge inequality points the other way for it.
#pragma once

#include <map>
#include <string>
#include <vector>

#include "poiforge/corpus.hpp"

namespace fixtures {

inline std::vector<std::string> vocab_corpus() {
    const std::vector<std::string> phrases = {
        "sri venkateswara nilayam kukatpally hyderabad 500072",
        "flat no xxx n block 18 th street east",
        "anna nagar chennai",
        "padmaja nagar vemana colony hyderabad",
        "chandanagar hyderabad telangana 500050 india",
    };
    std::vector<std::string> corpus;
    for (int i = 0; i < 60; ++i)
        for (const std::string& p : phrases) corpus.push_back(p);
    return corpus;
}

inline poiforge::CorpusStats vocab_stats() {
    return poiforge::build_corpus_stats(vocab_corpus());
}

struct VocabRow {
    std::string raw;
    std::string expected;
};

inline std::vector<VocabRow> vocab_rows() {
    return {
        {"flat No XXX, srivenkateswara Nilayam. Kukatpally. Hyderabad 500072",
         "flat no xxx sri venkateswara nilayam kukatpally hyderabad 500072"},
        {"No XXX N Block 18 th Street East Annanager Chennai",
         "no xxx n block 18 th street east anna nagar chennai"},
        {"XXX, Padmaja Nagar , Vemana Colony, Chanda Nagar , Hyderabad, "
         "Telangana 500050, India",
         "xxx padmaja nagar vemana colony chandanagar hyderabad telangana "
         "500050 india"},
    };
}

// Stop-word fixture: one filler phrase dominates the counts so the top ten
// words of the corpus are exactly its ten tokens; the two content rows are
// present but far below. Localities registered for the same city.
inline poiforge::CorpusStats stop_stats() {
    std::vector<std::string> corpus;
    for (int i = 0; i < 50; ++i)
        corpus.push_back("xx no st floor street road block th nagar chennai");
    for (int i = 0; i < 2; ++i) {
        corpus.push_back(
            "xx navins lakshmi ram apartment ground floor thiruvengadam "
            "street mandaveli chennai 28");
        corpus.push_back(
            "xx sudsun shevroy apts 1 st cross street indiranagar adyar "
            "chennai 600020");
    }
    std::map<std::string, std::vector<std::string>> localities = {
        {"chennai", {"indiranagar", "adyar"}}};
    return poiforge::build_corpus_stats(corpus, localities);
}

struct StopRow {
    std::string input;
    std::string expected;
};

inline std::vector<StopRow> stop_rows() {
    return {
        {"XX navins lakshmi ram apartment ground floor thiruvengadam street "
         "mandaveli chennai 28",
         "navins lakshmi ram apartment ground thiruvengadam mandaveli"},
        {"XX sudsun shevroy apts 1 st cross street indiranagar adyar chennai "
         "600020",
         "sudsun shevroy apts cross"},
    };
}

}  // namespace fixtures
