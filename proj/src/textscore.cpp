#include "aidx/textscore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

#include "aidx/csv.hpp"
#include "aidx/errors.hpp"

namespace aidx::textscore {

namespace {

bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

bool is_token_char(char c) {
    unsigned char u = static_cast<unsigned char>(c);
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || u >= 0x80;
}

char lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Matches a single-letter dotted sequence starting at `i` ("a.i.", "u.s.a",
// with or without the trailing period). Requires at least two letters.
// Returns the end position (one past the token) or `i` when no match.
std::size_t match_dotted(std::string_view s, std::size_t i) {
    std::size_t pos = i;
    int letters = 0;
    while (pos < s.size() && is_ascii_alpha(s[pos]) &&
           (pos + 1 >= s.size() || !is_token_char(s[pos + 1]))) {
        ++letters;
        ++pos;                                   // consume the letter
        if (pos < s.size() && s[pos] == '.') {
            ++pos;                               // consume the period
            if (pos < s.size() && is_ascii_alpha(s[pos]) &&
                (pos + 1 >= s.size() || !is_token_char(s[pos + 1]) || s[pos + 1] == '.'))
                continue;                        // another single letter follows
            break;                               // trailing period ends the token
        }
        break;                                   // letter not followed by a period
    }
    return letters >= 2 ? pos : i;
}

}  // namespace

TokenizedDoc tokenize(std::string_view text, Cik cik, int filing_year) {
    TokenizedDoc doc;
    doc.cik = std::move(cik);
    doc.filing_year = filing_year;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        char c = text[i];
        if (!is_token_char(c)) {
            ++i;
            continue;
        }
        if (is_ascii_alpha(c) && i + 1 < n && text[i + 1] == '.') {
            std::size_t end = match_dotted(text, i);
            if (end > i) {
                std::string tok(text.substr(i, end - i));
                for (char& ch : tok) ch = lower(ch);
                doc.tokens.push_back(std::move(tok));
                i = end;
                continue;
            }
        }
        std::size_t start = i;
        while (i < n && is_token_char(text[i])) ++i;
        std::string tok(text.substr(start, i - start));
        for (char& ch : tok) ch = lower(ch);
        doc.tokens.push_back(std::move(tok));
    }
    return doc;
}

std::string KeywordRule::label() const {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out += ' ';
        out += tokens[i];
    }
    if (last_is_prefix) out += '*';
    return out;
}

KeywordSet KeywordSet::default_set() {
    return KeywordSet{{
        {{"artificial", "intelligen"}, true},
        {{"ai"}, false},
        {{"a.i."}, false},
    }};
}

KeywordSet KeywordSet::parse(std::string_view text) {
    KeywordSet set;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(';', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view part = text.substr(start, end - start);
        KeywordRule rule;
        std::size_t p = 0;
        while (p < part.size()) {
            while (p < part.size() && part[p] == ' ') ++p;
            std::size_t q = p;
            while (q < part.size() && part[q] != ' ') ++q;
            if (q > p) {
                std::string tok(part.substr(p, q - p));
                for (char& ch : tok) ch = lower(ch);
                rule.tokens.push_back(std::move(tok));
            }
            p = q;
        }
        if (!rule.tokens.empty()) {
            if (rule.tokens.back().size() > 1 && rule.tokens.back().back() == '*') {
                rule.tokens.back().pop_back();
                rule.last_is_prefix = true;
            }
            set.rules.push_back(std::move(rule));
        }
        if (end == text.size()) break;
        start = end + 1;
    }
    if (set.rules.empty()) throw DataError("textscore", "keyword set is empty");
    return set;
}

namespace {

bool rule_matches_at(const KeywordRule& rule, const std::vector<std::string>& tokens,
                     std::size_t pos) {
    if (pos + rule.tokens.size() > tokens.size()) return false;
    for (std::size_t k = 0; k + 1 < rule.tokens.size(); ++k)
        if (tokens[pos + k] != rule.tokens[k]) return false;
    const std::string& want = rule.tokens.back();
    const std::string& have = tokens[pos + rule.tokens.size() - 1];
    if (rule.last_is_prefix) return have.compare(0, want.size(), want) == 0;
    return have == want;
}

}  // namespace

KeywordCounts count_keywords(const TokenizedDoc& doc, const KeywordSet& kw) {
    KeywordCounts counts;
    counts.per_rule.assign(kw.rules.size(), 0);

    // Rule indices ordered longest-first so phrase rules win at a position.
    std::vector<std::size_t> order(kw.rules.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return kw.rules[a].tokens.size() > kw.rules[b].tokens.size();
    });

    std::size_t pos = 0;
    while (pos < doc.tokens.size()) {
        std::size_t advance = 1;
        for (std::size_t idx : order) {
            if (rule_matches_at(kw.rules[idx], doc.tokens, pos)) {
                ++counts.per_rule[idx];
                ++counts.total;
                advance = kw.rules[idx].tokens.size();
                break;
            }
        }
        pos += advance;
    }
    return counts;
}

long max_word_freq(const TokenizedDoc& doc) {
    if (doc.tokens.empty())
        throw ComputationError("textscore", "max_word_freq on empty document");
    std::unordered_map<std::string_view, long> freq;
    for (const auto& t : doc.tokens) ++freq[t];
    long best = 0;
    for (const auto& [tok, n] : freq) best = std::max(best, n);
    return best;
}

double tfidf(long term_count, const TokenizedDoc& doc, long doc_freq, long corpus_size) {
    if (corpus_size < 1) throw ComputationError("textscore", "tfidf with empty corpus");
    if (doc_freq < 0 || doc_freq > corpus_size)
        throw ComputationError("textscore", "tfidf document frequency out of range");
    if (term_count == 0) return 0.0;
    if (doc_freq == 0)
        throw ComputationError(
            "textscore", "tfidf contradiction: term present but corpus tally is zero");
    double tf = static_cast<double>(term_count) / static_cast<double>(doc.length());
    double idf = std::log(static_cast<double>(corpus_size) / static_cast<double>(doc_freq));
    return tf * idf;
}

std::vector<AiScoreRecord> score_year(const std::vector<TokenizedDoc>& year_corpus,
                                      const KeywordSet& kw, ScoreNormalization norm) {
    if (year_corpus.empty()) throw ComputationError("textscore", "score_year on empty corpus");
    const int year = year_corpus.front().filing_year;
    for (const auto& doc : year_corpus)
        if (doc.filing_year != year)
            throw DataError("textscore", "score_year corpus mixes filing years");

    const long corpus_size = static_cast<long>(year_corpus.size());
    std::vector<KeywordCounts> counts;
    counts.reserve(year_corpus.size());
    std::vector<long> doc_freq(kw.rules.size(), 0);
    for (const auto& doc : year_corpus) {
        counts.push_back(count_keywords(doc, kw));
        for (std::size_t k = 0; k < kw.rules.size(); ++k)
            if (counts.back().per_rule[k] > 0) ++doc_freq[k];
    }

    std::vector<AiScoreRecord> records;
    records.reserve(year_corpus.size());
    for (std::size_t d = 0; d < year_corpus.size(); ++d) {
        const auto& doc = year_corpus[d];
        AiScoreRecord rec;
        rec.cik = doc.cik;
        rec.filing_year = doc.filing_year;
        rec.keyword_count = counts[d].total;
        rec.max_word_freq = doc.tokens.empty() ? 0 : max_word_freq(doc);
        rec.dummy = rec.keyword_count > 0;
        if (rec.keyword_count > 0) {
            double sum = 0.0;
            for (std::size_t k = 0; k < kw.rules.size(); ++k)
                sum += tfidf(counts[d].per_rule[k], doc, doc_freq[k], corpus_size);
            double denom = norm == ScoreNormalization::ByLength
                               ? static_cast<double>(doc.length())
                               : static_cast<double>(rec.max_word_freq);
            rec.score = sum / denom;
        }
        records.push_back(std::move(rec));
    }
    std::sort(records.begin(), records.end(), [](const AiScoreRecord& a, const AiScoreRecord& b) {
        return std::tie(a.cik.value, a.filing_year) < std::tie(b.cik.value, b.filing_year);
    });
    return records;
}

std::map<int, long> mentions_per_year(const std::vector<AiScoreRecord>& records) {
    std::map<int, long> out;
    for (const auto& rec : records)
        if (rec.dummy) ++out[rec.filing_year];
    return out;
}

void write_scores_csv(const std::filesystem::path& path, std::vector<AiScoreRecord> records) {
    std::sort(records.begin(), records.end(), [](const AiScoreRecord& a, const AiScoreRecord& b) {
        return std::tie(a.cik.value, a.filing_year) < std::tie(b.cik.value, b.filing_year);
    });
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("textscore", "cannot write " + path.string());
    out << "cik,year,keyword_count,max_word_freq,dummy,score\n";
    for (const auto& r : records)
        out << r.cik.value << ',' << r.filing_year << ',' << r.keyword_count << ','
            << r.max_word_freq << ',' << (r.dummy ? 1 : 0) << ',' << csv::format_g12(r.score)
            << '\n';
}

std::vector<AiScoreRecord> read_scores_csv(const std::filesystem::path& path) {
    auto rows = csv::read_file(path);
    if (rows.empty() || rows.front().size() != 6)
        throw DataError("textscore", "bad scores file " + path.string());
    std::vector<AiScoreRecord> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string where = "scores row " + std::to_string(r + 1);
        AiScoreRecord rec;
        rec.cik = corpus::canonicalize_cik(row[0]);
        rec.filing_year = static_cast<int>(csv::parse_long(row[1], where));
        rec.keyword_count = csv::parse_long(row[2], where);
        rec.max_word_freq = csv::parse_long(row[3], where);
        rec.dummy = csv::parse_long(row[4], where) != 0;
        rec.score = csv::parse_double(row[5], where);
        out.push_back(std::move(rec));
    }
    return out;
}

void write_mentions_csv(const std::filesystem::path& path, const std::map<int, long>& mentions) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("textscore", "cannot write " + path.string());
    out << "year,count\n";
    for (const auto& [year, count] : mentions) out << year << ',' << count << '\n';
}

}  // namespace aidx::textscore
