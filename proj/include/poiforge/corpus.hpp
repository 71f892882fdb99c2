#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "poiforge/text.hpp"

namespace poiforge {

/// Unigram counts, the bigram dictionary, and the per-city stop-word
/// material every preprocessing step draws on. Bigram keys are
/// "left right" (tokens never contain spaces post-clean); ordered
/// containers keep scans deterministic.
struct CorpusStats {
    long long total_tokens = 0;
    std::unordered_map<std::string, long long> token_count;
    std::map<std::string, long long> bigram_count;  // every adjacent pair
    std::set<std::string> bigram_dict;  // pairs with count >= bigram_min_count
    int bigram_min_count = 5;
    std::map<std::string, std::vector<std::string>> top_words;  // per city
    std::map<std::string, std::set<std::string>> locality_unigrams;

    long long vocab_size() const {
        return static_cast<long long>(token_count.size());
    }
};

/// Maximum-likelihood unigram probability; unseen tokens get one pseudo
/// count against an enlarged denominator, so any seen token always beats
/// any unseen one.
inline double word_prob(const CorpusStats& stats, const std::string& tok) {
    if (stats.total_tokens == 0) return 0.0;
    auto it = stats.token_count.find(tok);
    if (it != stats.token_count.end())
        return static_cast<double>(it->second) /
               static_cast<double>(stats.total_tokens);
    return 1.0 / static_cast<double>(stats.total_tokens + stats.vocab_size());
}

/// Top-k tokens by count; ties break lexicographically so the list is
/// stable under re-counting.
inline std::vector<std::string> most_frequent_tokens(const CorpusStats& stats,
                                                     int k) {
    std::vector<std::pair<std::string, long long>> items(
        stats.token_count.begin(), stats.token_count.end());
    std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) return a.second > b.second;
        return a.first < b.first;
    });
    std::vector<std::string> out;
    for (const auto& [tok, count] : items) {
        if (static_cast<int>(out.size()) == k) break;
        out.push_back(tok);
        (void)count;
    }
    return out;
}

inline void add_text_to_stats(CorpusStats& stats, const std::string& raw) {
    std::vector<std::string> toks = tokenize(regex_split(common_clean(raw)));
    for (size_t i = 0; i < toks.size(); ++i) {
        ++stats.token_count[toks[i]];
        ++stats.total_tokens;
        if (i + 1 < toks.size())
            ++stats.bigram_count[toks[i] + " " + toks[i + 1]];
    }
}

/// Counts the corpus and derives the bigram dictionary, per-city top words
/// and locality unigram sets. The corpus is counted once, city-agnostic;
/// every city named in `localities` (plus the "" default) gets the same
/// top-word list, which is what single-corpus mode means.
inline CorpusStats build_corpus_stats(
    const std::vector<std::string>& texts,
    const std::map<std::string, std::vector<std::string>>& localities = {},
    int bigram_min_count = 5, int top_words_count = 10) {
    if (texts.empty())
        throw std::runtime_error("build_corpus_stats: empty corpus");
    CorpusStats stats;
    stats.bigram_min_count = bigram_min_count;
    for (const std::string& t : texts) add_text_to_stats(stats, t);
    for (const auto& [key, count] : stats.bigram_count)
        if (count >= bigram_min_count) stats.bigram_dict.insert(key);

    std::vector<std::string> top = most_frequent_tokens(stats, top_words_count);
    stats.top_words[""] = top;
    for (const auto& [city, names] : localities) {
        stats.top_words[city] = top;
        std::set<std::string>& set = stats.locality_unigrams[city];
        for (const std::string& name : names)
            for (const std::string& tok :
                 tokenize(regex_split(common_clean(name))))
                set.insert(tok);
    }
    return stats;
}

/// Splits a run-together token at the most likely boundary when the two
/// fragments together are more probable than the token itself, then
/// recurses into the fragments. Fragments must be at least two characters;
/// ties on the product pick the leftmost cut.
inline void probabilistic_split(const std::string& tok,
                                const CorpusStats& stats,
                                std::vector<std::string>& out) {
    if (tok.size() >= 4) {
        double best = -1.0;
        size_t best_cut = 0;
        for (size_t cut = 2; cut + 2 <= tok.size(); ++cut) {
            double p = word_prob(stats, tok.substr(0, cut)) *
                       word_prob(stats, tok.substr(cut));
            if (p > best) {
                best = p;
                best_cut = cut;
            }
        }
        if (best > word_prob(stats, tok)) {
            probabilistic_split(tok.substr(0, best_cut), stats, out);
            probabilistic_split(tok.substr(best_cut), stats, out);
            return;
        }
    }
    out.push_back(tok);
}

/// Repairs a (possibly misspelled) concatenation of a dictionary bigram:
/// the token is replaced by the bigram whose glued form is within one edit
/// AND phonetically identical. Among matches, minimum edit distance wins,
/// then lexicographic order of the bigram. The phonetic gate stops
/// coincidental near-misses between unrelated short strings.
inline void bigram_separate(const std::string& tok, const CorpusStats& stats,
                            std::vector<std::string>& out) {
    const std::string tok_key = phonetic_code(tok);
    int best_ed = 2;
    const std::string* best = nullptr;
    for (const std::string& key : stats.bigram_dict) {
        size_t sp = key.find(' ');
        size_t glued_len = key.size() - 1;
        if (glued_len + 1 < tok.size() || tok.size() + 1 < glued_len)
            continue;  // one edit cannot bridge a length gap > 1
        std::string glued = key.substr(0, sp) + key.substr(sp + 1);
        int ed = edit_distance(tok, glued);
        if (ed >= best_ed) continue;
        if (phonetic_code(glued) != tok_key) continue;
        best_ed = ed;
        best = &key;
        if (best_ed == 0) break;  // cannot improve; dict scan is lexicographic
    }
    if (!best) {
        out.push_back(tok);
        return;
    }
    size_t sp = best->find(' ');
    out.push_back(best->substr(0, sp));
    out.push_back(best->substr(sp + 1));
}

/// Single left-to-right pass gluing adjacent pairs whose concatenation is
/// more probable than the pair; after a merge the scan continues past both
/// partners.
inline std::vector<std::string> probabilistic_merge(
    const std::vector<std::string>& toks, const CorpusStats& stats) {
    std::vector<std::string> out;
    size_t i = 0;
    while (i < toks.size()) {
        if (i + 1 < toks.size()) {
            // only glue into words the corpus has actually seen; the
            // smoothing floor would otherwise beat any rare-word product
            std::string glued = toks[i] + toks[i + 1];
            if (stats.token_count.count(glued) &&
                word_prob(stats, glued) >
                    word_prob(stats, toks[i]) * word_prob(stats, toks[i + 1])) {
                out.push_back(glued);
                i += 2;
                continue;
            }
        }
        out.push_back(toks[i]);
        ++i;
    }
    return out;
}

/// The full vocabulary normalizer: clean, digit-split, probabilistic split,
/// bigram repair, probabilistic merge. Idempotent under fixed stats.
inline std::string vocabulary_preprocess(const std::string& raw,
                                         const CorpusStats& stats) {
    std::vector<std::string> toks = tokenize(regex_split(common_clean(raw)));
    std::vector<std::string> split;
    for (const std::string& t : toks) probabilistic_split(t, stats, split);
    std::vector<std::string> separated;
    for (const std::string& t : split) bigram_separate(t, stats, separated);
    return join_tokens(probabilistic_merge(separated, stats));
}

/// Strips everything that cannot name a place: numerals, single characters,
/// the corpus's most frequent words, and known locality tokens.
inline std::string specialized_preprocess(
    const std::string& clean_text,
    const std::unordered_set<std::string>& top,
    const std::unordered_set<std::string>& localities) {
    std::vector<std::string> out;
    for (const std::string& tok : tokenize(common_clean(clean_text))) {
        if (tok.size() <= 1) continue;
        if (is_numeric_token(tok)) continue;
        if (top.count(tok)) continue;
        if (localities.count(tok)) continue;
        out.push_back(tok);
    }
    return join_tokens(out);
}

inline std::string specialized_preprocess(const std::string& clean_text,
                                          const CorpusStats& stats,
                                          const std::string& city) {
    std::unordered_set<std::string> top, loc;
    auto tw = stats.top_words.find(city);
    if (tw == stats.top_words.end()) tw = stats.top_words.find("");
    if (tw != stats.top_words.end())
        top.insert(tw->second.begin(), tw->second.end());
    auto lu = stats.locality_unigrams.find(city);
    if (lu != stats.locality_unigrams.end())
        loc.insert(lu->second.begin(), lu->second.end());
    return specialized_preprocess(clean_text, top, loc);
}

inline nlohmann::json stats_to_json(const CorpusStats& stats) {
    nlohmann::json toks = nlohmann::json::object();
    // ordered emission keeps the file reproducible run to run
    std::map<std::string, long long> ordered(stats.token_count.begin(),
                                             stats.token_count.end());
    for (const auto& [tok, count] : ordered) toks[tok] = count;
    nlohmann::json bigrams = nlohmann::json::object();
    for (const auto& [key, count] : stats.bigram_count) bigrams[key] = count;
    nlohmann::json top = nlohmann::json::object();
    for (const auto& [city, words] : stats.top_words) top[city] = words;
    nlohmann::json loc = nlohmann::json::object();
    for (const auto& [city, words] : stats.locality_unigrams)
        loc[city] = std::vector<std::string>(words.begin(), words.end());
    return nlohmann::json{{"total_tokens", stats.total_tokens},
                          {"tokens", toks},
                          {"bigrams", bigrams},
                          {"bigram_min_count", stats.bigram_min_count},
                          {"top_words", top},
                          {"locality_unigrams", loc}};
}

inline CorpusStats stats_from_json(const nlohmann::json& j) {
    CorpusStats stats;
    try {
        stats.total_tokens = j.at("total_tokens").get<long long>();
        for (const auto& [tok, count] : j.at("tokens").items())
            stats.token_count[tok] = count.get<long long>();
        for (const auto& [key, count] : j.at("bigrams").items())
            stats.bigram_count[key] = count.get<long long>();
        stats.bigram_min_count = j.at("bigram_min_count").get<int>();
        for (const auto& [city, words] : j.at("top_words").items())
            stats.top_words[city] = words.get<std::vector<std::string>>();
        for (const auto& [city, words] : j.at("locality_unigrams").items())
            for (const auto& w : words)
                stats.locality_unigrams[city].insert(w.get<std::string>());
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed stats file: ") +
                                 e.what());
    }
    for (const auto& [key, count] : stats.bigram_count)
        if (count >= stats.bigram_min_count) stats.bigram_dict.insert(key);
    return stats;
}

inline void save_stats(const CorpusStats& stats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write stats file: " + path);
    out << stats_to_json(stats).dump(2) << "\n";
}

inline CorpusStats load_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open stats file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("malformed stats file: ") +
                                 e.what());
    }
    return stats_from_json(j);
}

}  // namespace poiforge
