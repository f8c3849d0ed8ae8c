#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "aidx/corpus.hpp"

namespace aidx::textscore {

using corpus::Cik;

/// Lowercased token stream of one filing.
struct TokenizedDoc {
    Cik cik;
    int filing_year = 0;
    std::vector<std::string> tokens;

    std::size_t length() const { return tokens.size(); }
};

/// One keyword rule: a sequence of adjacent tokens; when `last_is_prefix`
/// the final element matches any token starting with it.
struct KeywordRule {
    std::vector<std::string> tokens;
    bool last_is_prefix = false;

    std::string label() const;
};

struct KeywordSet {
    std::vector<KeywordRule> rules;

    /// "artificial intelligen*", "ai", "a.i."
    static KeywordSet default_set();

    /// Parses "artificial intelligen*;ai;a.i." — rules separated by ';',
    /// tokens inside a rule by spaces, trailing '*' marks a prefix rule.
    static KeywordSet parse(std::string_view text);
};

/// Per company-year AI disclosure metrics.
struct AiScoreRecord {
    Cik cik;
    int filing_year = 0;
    long keyword_count = 0;
    long max_word_freq = 0;  // 0 only for a degenerate empty document
    bool dummy = false;
    double score = 0.0;
};

/// Lowercases and splits on whitespace/punctuation. Periods inside
/// single-letter dotted sequences are kept, so "A.I." becomes the single
/// token "a.i."; pure digit runs are kept; bytes >= 0x80 are treated as
/// word characters and passed through.
TokenizedDoc tokenize(std::string_view text, Cik cik = {}, int filing_year = 0);

struct KeywordCounts {
    long total = 0;
    std::vector<long> per_rule;
};

/// Left-to-right scan; each matched token is consumed once, multi-token
/// rules are tried before shorter ones at the same position.
KeywordCounts count_keywords(const TokenizedDoc& doc, const KeywordSet& kw);

/// Occurrence count of the most common token. Throws ComputationError on an
/// empty document.
long max_word_freq(const TokenizedDoc& doc);

/// term frequency x inverse document frequency:
///   TF  = term_count / doc.length()
///   IDF = ln(corpus_size / doc_freq)
/// Returns 0 when term_count is 0. Throws ComputationError when a term is
/// counted in a document but absent from the corpus tally (doc_freq = 0).
double tfidf(long term_count, const TokenizedDoc& doc, long doc_freq, long corpus_size);

enum class ScoreNormalization {
    ByLength,       // sum of keyword TF-IDF divided by document length
    ByMaxWordFreq,  // alternative: divided by the most-common-word count
};

/// Scores every document of one calendar year. Document frequencies are
/// taken over this year's corpus; the document order does not affect the
/// output, which is sorted by (cik, year).
std::vector<AiScoreRecord> score_year(const std::vector<TokenizedDoc>& year_corpus,
                                      const KeywordSet& kw,
                                      ScoreNormalization norm = ScoreNormalization::ByLength);

/// Number of records with dummy = true, per year.
std::map<int, long> mentions_per_year(const std::vector<AiScoreRecord>& records);

/// `cik,year,keyword_count,max_word_freq,dummy,score`, sorted by (cik, year),
/// score with 12 significant digits, dummy as 1/0.
void write_scores_csv(const std::filesystem::path& path,
                      std::vector<AiScoreRecord> records);

std::vector<AiScoreRecord> read_scores_csv(const std::filesystem::path& path);

/// `year,count` sorted by year.
void write_mentions_csv(const std::filesystem::path& path,
                        const std::map<int, long>& mentions);

}  // namespace aidx::textscore
