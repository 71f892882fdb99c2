#pragma once

#include <algorithm>
#include <cctype>
#include <string>
#include <vector>

namespace poiforge {

inline std::vector<std::string> tokenize(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r') {
            if (!cur.empty()) out.push_back(std::move(cur)), cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

inline std::string join_tokens(const std::vector<std::string>& toks) {
    std::string out;
    for (size_t i = 0; i < toks.size(); ++i) {
        if (i) out.push_back(' ');
        out += toks[i];
    }
    return out;
}

/// Lowercases, strips everything but letters, digits and spaces, collapses
/// whitespace runs. The output is a canonical single-spaced token stream.
inline std::string common_clean(const std::string& raw) {
    std::string kept;
    kept.reserve(raw.size());
    for (unsigned char ch : raw) {
        if (std::isalnum(ch))
            kept.push_back(static_cast<char>(std::tolower(ch)));
        else if (std::isspace(ch) || ch == ',' || ch == '.' || ch == '-' ||
                 ch == '/' || ch == '(' || ch == ')' || ch == '#' ||
                 ch == ':' || ch == ';' || ch == '&' || ch == '\'')
            kept.push_back(' ');
        // anything else (stray bytes, emoji fragments) is dropped outright
    }
    return join_tokens(tokenize(kept));
}

/// Splits tokens that glue digits to letters: "18th" -> "18 th",
/// "no12" -> "no 12". A boundary is inserted at every digit/letter flip.
inline std::string regex_split(const std::string& text) {
    std::vector<std::string> out;
    for (const std::string& tok : tokenize(text)) {
        std::string cur;
        for (size_t i = 0; i < tok.size(); ++i) {
            if (i > 0) {
                bool prev_digit = std::isdigit(static_cast<unsigned char>(tok[i - 1]));
                bool this_digit = std::isdigit(static_cast<unsigned char>(tok[i]));
                if (prev_digit != this_digit) {
                    out.push_back(cur);
                    cur.clear();
                }
            }
            cur.push_back(tok[i]);
        }
        if (!cur.empty()) out.push_back(cur);
    }
    return join_tokens(out);
}

/// Levenshtein distance, full DP over two rows.
inline int edit_distance(const std::string& a, const std::string& b) {
    const size_t n = a.size(), m = b.size();
    if (n == 0) return static_cast<int>(m);
    if (m == 0) return static_cast<int>(n);
    std::vector<int> prev(m + 1), cur(m + 1);
    for (size_t j = 0; j <= m; ++j) prev[j] = static_cast<int>(j);
    for (size_t i = 1; i <= n; ++i) {
        cur[0] = static_cast<int>(i);
        for (size_t j = 1; j <= m; ++j) {
            int sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

/// Phonetic key for transliterated Indian place names. Deliberately cruder
/// than Metaphone: the goal is that spelling variants of one name collide
/// while distinct names rarely do. Stages, in order:
///   1. lowercase (input is expected clean but this keeps the key total)
///   2. digraph folds: ph->f, gh->g, w->v
///   3. collapse runs of the same letter ("ss" -> "s")
///   4. keep the first letter; drop vowels a e i o u from the rest
/// Examples: annanagar/annanager -> "anngr"; bhuvana/bhavana -> "bhvn".
inline std::string phonetic_code(const std::string& word) {
    std::string low;
    low.reserve(word.size());
    for (unsigned char ch : word)
        if (std::isalpha(ch)) low.push_back(static_cast<char>(std::tolower(ch)));
    if (low.empty()) return low;

    std::string folded;
    folded.reserve(low.size());
    for (size_t i = 0; i < low.size(); ++i) {
        if (i + 1 < low.size() && low[i] == 'p' && low[i + 1] == 'h') {
            folded.push_back('f');
            ++i;
        } else if (i + 1 < low.size() && low[i] == 'g' && low[i + 1] == 'h') {
            folded.push_back('g');
            ++i;
        } else if (low[i] == 'w') {
            folded.push_back('v');
        } else {
            folded.push_back(low[i]);
        }
    }

    std::string squeezed;
    for (char ch : folded)
        if (squeezed.empty() || squeezed.back() != ch) squeezed.push_back(ch);

    std::string key;
    key.push_back(squeezed[0]);
    for (size_t i = 1; i < squeezed.size(); ++i) {
        char ch = squeezed[i];
        if (ch == 'a' || ch == 'e' || ch == 'i' || ch == 'o' || ch == 'u')
            continue;
        key.push_back(ch);
    }
    return key;
}

inline bool is_numeric_token(const std::string& tok) {
    if (tok.empty()) return false;
    return std::all_of(tok.begin(), tok.end(), [](unsigned char c) {
        return std::isdigit(c) != 0;
    });
}

}  // namespace poiforge
