#include "aidx/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "aidx/csv.hpp"
#include "aidx/errors.hpp"
#include "aidx/sha256.hpp"

namespace aidx::corpus {

namespace fs = std::filesystem;

Cik canonicalize_cik(std::string_view raw) {
    // Leading/trailing whitespace is tolerated; EDGAR exports vary.
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.front()))) raw.remove_prefix(1);
    while (!raw.empty() && std::isspace(static_cast<unsigned char>(raw.back()))) raw.remove_suffix(1);
    if (raw.empty()) throw DataError("corpus", "identifier error: empty CIK");
    if (raw.size() > 10)
        throw DataError("corpus", "identifier error: CIK '" + std::string(raw) + "' exceeds 10 digits");
    for (char c : raw)
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw DataError("corpus", "identifier error: CIK '" + std::string(raw) + "' is not numeric");
    std::string padded(10 - raw.size(), '0');
    padded.append(raw);
    return Cik{std::move(padded)};
}

Cik canonicalize_cik(std::uint64_t raw) {
    return canonicalize_cik(std::to_string(raw));
}

namespace {

bool ascii_ieq(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::tolower(static_cast<unsigned char>(a[i])) !=
            std::tolower(static_cast<unsigned char>(b[i])))
            return false;
    return true;
}

// Tags whose boundaries separate words in the rendered text.
bool is_block_tag(std::string_view name) {
    static const std::set<std::string, std::less<>> block = {
        "address", "article", "aside",   "blockquote", "br",    "caption", "dd",
        "div",     "dl",      "dt",      "fieldset",   "figure", "footer",  "form",
        "h1",      "h2",      "h3",      "h4",         "h5",     "h6",      "header",
        "hr",      "li",      "ol",      "p",          "pre",    "section", "table",
        "tbody",   "td",      "tfoot",   "th",         "thead",  "tr",      "ul"};
    std::string lower(name);
    for (char& c : lower) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return block.count(lower) > 0;
}

// Extracts the element name from the inside of a tag ("/div foo" -> "div").
std::string_view tag_name(std::string_view inside) {
    if (!inside.empty() && inside.front() == '/') inside.remove_prefix(1);
    std::size_t end = 0;
    while (end < inside.size() && (std::isalnum(static_cast<unsigned char>(inside[end])) ||
                                   inside[end] == '-' || inside[end] == ':'))
        ++end;
    return inside.substr(0, end);
}

// Appends the UTF-8 encoding of a code point; invalid points map to U+FFFD.
void append_utf8(std::string& out, unsigned long cp) {
    if (cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) cp = 0xFFFD;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

// Replaces ill-formed UTF-8 sequences with U+FFFD, counting replacements.
std::string validate_utf8(std::string_view in, std::size_t& replaced) {
    std::string out;
    out.reserve(in.size());
    std::size_t i = 0;
    while (i < in.size()) {
        unsigned char c = static_cast<unsigned char>(in[i]);
        std::size_t len = 0;
        unsigned long cp = 0;
        if (c < 0x80) { len = 1; cp = c; }
        else if ((c & 0xE0) == 0xC0) { len = 2; cp = c & 0x1F; }
        else if ((c & 0xF0) == 0xE0) { len = 3; cp = c & 0x0F; }
        else if ((c & 0xF8) == 0xF0) { len = 4; cp = c & 0x07; }
        else { append_utf8(out, 0xFFFD); ++replaced; ++i; continue; }

        if (len == 1) { out += in[i]; ++i; continue; }
        bool ok = i + len <= in.size();
        for (std::size_t k = 1; ok && k < len; ++k) {
            unsigned char cc = static_cast<unsigned char>(in[i + k]);
            if ((cc & 0xC0) != 0x80) ok = false;
            else cp = (cp << 6) | (cc & 0x3F);
        }
        // Reject overlong encodings and surrogates.
        if (ok) {
            if ((len == 2 && cp < 0x80) || (len == 3 && cp < 0x800) ||
                (len == 4 && cp < 0x10000) || cp > 0x10FFFF ||
                (cp >= 0xD800 && cp <= 0xDFFF))
                ok = false;
        }
        if (ok) {
            out.append(in.substr(i, len));
            i += len;
        } else {
            append_utf8(out, 0xFFFD);
            ++replaced;
            ++i;  // resync on the next byte
        }
    }
    return out;
}

// Decodes one entity starting at `i` (which points at '&'). Returns true and
// advances `i` past the entity when recognized; unknown entities are left as
// literal text.
bool decode_entity(std::string_view s, std::size_t& i, std::string& out) {
    std::size_t semi = s.find(';', i + 1);
    if (semi == std::string_view::npos || semi - i > 12) return false;
    std::string_view body = s.substr(i + 1, semi - i - 1);
    if (body.empty()) return false;
    if (body[0] == '#') {
        unsigned long cp = 0;
        bool hex = body.size() > 1 && (body[1] == 'x' || body[1] == 'X');
        std::string_view digits = body.substr(hex ? 2 : 1);
        if (digits.empty()) return false;
        for (char c : digits) {
            int v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (hex && c >= 'a' && c <= 'f') v = c - 'a' + 10;
            else if (hex && c >= 'A' && c <= 'F') v = c - 'A' + 10;
            else return false;
            cp = cp * (hex ? 16 : 10) + static_cast<unsigned long>(v);
            if (cp > 0x10FFFF) return false;
        }
        append_utf8(out, cp);
        i = semi + 1;
        return true;
    }
    struct Named { std::string_view name; std::string_view repl; };
    static constexpr Named named[] = {
        {"amp", "&"}, {"lt", "<"}, {"gt", ">"}, {"quot", "\""},
        {"apos", "'"}, {"nbsp", "\xC2\xA0"}, {"rsquo", "’"},
        {"lsquo", "‘"}, {"ldquo", "“"}, {"rdquo", "”"},
        {"ndash", "–"}, {"mdash", "—"}, {"sect", "§"}};
    for (const auto& n : named) {
        if (ascii_ieq(body, n.name)) {
            out.append(n.repl);
            i = semi + 1;
            return true;
        }
    }
    return false;
}

bool is_collapse_space(std::string_view s, std::size_t i, std::size_t& len) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
        len = 1;
        return true;
    }
    // U+00A0 no-break space, decoded from &nbsp;
    if (c == 0xC2 && i + 1 < s.size() && static_cast<unsigned char>(s[i + 1]) == 0xA0) {
        len = 2;
        return true;
    }
    return false;
}

}  // namespace

CleanedText clean_filing_text(std::string_view raw) {
    CleanedText result;
    std::string valid = validate_utf8(raw, result.replaced_bytes);
    std::string_view s = valid;

    std::string flat;
    flat.reserve(s.size());
    std::size_t i = 0;
    bool skipping = false;            // inside <script>/<style>
    std::string skip_until;           // element name closing the skip
    while (i < s.size()) {
        char c = s[i];
        if (c == '<') {
            // Comments and CDATA-ish declarations.
            if (s.compare(i, 4, "<!--") == 0) {
                std::size_t end = s.find("-->", i + 4);
                i = (end == std::string_view::npos) ? s.size() : end + 3;
                flat += ' ';
                continue;
            }
            std::size_t j = i + 1;
            bool taglike = j < s.size() && (std::isalpha(static_cast<unsigned char>(s[j])) ||
                                            s[j] == '/' || s[j] == '!' || s[j] == '?');
            if (taglike) {
                // Find '>' outside quoted attribute values.
                char quote = 0;
                std::size_t end = std::string_view::npos;
                for (std::size_t k = j; k < s.size(); ++k) {
                    char ck = s[k];
                    if (quote) {
                        if (ck == quote) quote = 0;
                    } else if (ck == '"' || ck == '\'') {
                        quote = ck;
                    } else if (ck == '>') {
                        end = k;
                        break;
                    }
                }
                if (end == std::string_view::npos) { i = s.size(); continue; }
                std::string_view inside = s.substr(i + 1, end - i - 1);
                std::string_view name = tag_name(inside);
                bool closing = !inside.empty() && inside.front() == '/';
                if (skipping) {
                    if (closing && ascii_ieq(name, skip_until)) skipping = false;
                } else if (!closing && (ascii_ieq(name, "script") || ascii_ieq(name, "style"))) {
                    bool self_closed = !inside.empty() && inside.back() == '/';
                    if (!self_closed) {
                        skipping = true;
                        skip_until = std::string(name);
                    }
                    flat += ' ';
                } else if (is_block_tag(name)) {
                    flat += ' ';
                }
                i = end + 1;
                continue;
            }
            // Bare '<' is literal content.
        }
        if (skipping) { ++i; continue; }
        if (c == '&' && decode_entity(s, i, flat)) continue;
        flat += c;
        ++i;
    }

    // Collapse whitespace runs (including U+00A0) to single spaces.
    std::string& out = result.text;
    out.reserve(flat.size());
    std::size_t k = 0;
    bool pending_space = false;
    std::string_view fv = flat;
    while (k < fv.size()) {
        std::size_t len = 0;
        if (is_collapse_space(fv, k, len)) {
            pending_space = true;
            k += len;
        } else {
            if (pending_space && !out.empty()) out += ' ';
            pending_space = false;
            out += fv[k];
            ++k;
        }
    }
    return result;
}

std::map<std::string, ReturnSeries> load_prices(const fs::path& csv_path) {
    auto rows = csv::read_file(csv_path);
    if (rows.empty()) throw DataError("corpus", "price file is empty: " + csv_path.string());
    const auto& header = rows.front();
    if (header.size() < 3 || header[0] != "date" || header[1] != "ticker" || header[2] != "close")
        throw DataError("corpus", "price file header must be date,ticker,close[,market_cap]");

    struct LastBar { Date date; double close; };
    std::map<std::string, LastBar> last;
    std::map<std::string, ReturnSeries> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        std::string where = "row " + std::to_string(r + 1) + " of " + csv_path.filename().string();
        if (row.size() < 3) throw DataError("corpus", "load error: too few fields at " + where);
        Date date;
        try {
            date = Date::parse(row[0]);
        } catch (const DataError&) {
            throw DataError("corpus", "load error: bad date '" + row[0] + "' at " + where);
        }
        const std::string& ticker = row[1];
        double close = csv::parse_double(row[2], where);
        if (!(close > 0.0))
            throw DataError("corpus", "load error: non-positive close at " + where);
        if (row.size() > 3 && !row[3].empty()) {
            double cap = csv::parse_double(row[3], where);
            if (cap < 0.0)
                throw DataError("corpus", "load error: negative market cap at " + where);
        }
        auto it = last.find(ticker);
        if (it != last.end()) {
            if (!(it->second.date < date))
                throw DataError("corpus", "load error: out-of-order date at " + where);
            out[ticker].observations.push_back({date, std::log(close / it->second.close)});
            it->second = {date, close};
        } else {
            last.emplace(ticker, LastBar{date, close});
            out[ticker].ticker = ticker;  // first bar: return dropped, no prior close
        }
    }
    for (auto& [ticker, series] : out) series.ticker = ticker;
    return out;
}

RiskFreeCurve load_risk_free(const fs::path& csv_path) {
    auto rows = csv::read_file(csv_path);
    if (rows.empty()) throw DataError("corpus", "risk-free file is empty: " + csv_path.string());
    if (rows.front().size() < 2 || rows.front()[0] != "date" || rows.front()[1] != "annualized_yield")
        throw DataError("corpus", "risk-free file header must be date,annualized_yield");
    RiskFreeCurve curve;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::string where = "row " + std::to_string(r + 1) + " of " + csv_path.filename().string();
        Date date = Date::parse(rows[r][0]);
        double y = csv::parse_double(rows[r][1], where);
        if (!std::isfinite(y)) throw DataError("corpus", "load error: non-finite yield at " + where);
        if (!curve.observations.empty() && !(curve.observations.back().date < date))
            throw DataError("corpus", "load error: out-of-order date at " + where);
        curve.observations.push_back({date, y});
    }
    return curve;
}

double RiskFreeCurve::daily_rate(const Date& date) const {
    auto it = std::upper_bound(observations.begin(), observations.end(), date,
                               [](const Date& d, const RiskFreeObs& o) { return d < o.date; });
    if (it == observations.begin())
        throw DataError("corpus", "risk-free curve starts after " + date.str());
    return std::prev(it)->annualized_yield / 252.0;
}

fs::path CorpusPaths::filing_path(const Cik& cik, int year) const {
    return root / "filings" / cik.value / (std::to_string(year) + ".txt");
}

fs::path CorpusPaths::manifest_path() const { return root / "manifest.csv"; }

ManifestRow persist_filing(const CorpusPaths& paths, const Filing& filing) {
    fs::path file = paths.filing_path(filing.cik, filing.filing_year);
    fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("corpus", "cannot write " + file.string());
    out.write(filing.text.data(), static_cast<std::streamsize>(filing.text.size()));
    out.close();
    return ManifestRow{filing.cik, filing.filing_year, filing.accession_id, filing.source_uri,
                       sha256_hex(filing.text)};
}

void write_manifest(const CorpusPaths& paths, std::vector<ManifestRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const ManifestRow& a, const ManifestRow& b) {
        return std::tie(a.cik.value, a.year) < std::tie(b.cik.value, b.year);
    });
    fs::create_directories(paths.root);
    std::ofstream out(paths.manifest_path(), std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("corpus", "cannot write " + paths.manifest_path().string());
    out << "cik,year,accession_id,source_uri,sha256\n";
    for (const auto& r : rows)
        out << r.cik.value << ',' << r.year << ',' << r.accession_id << ','
            << r.source_uri << ',' << r.sha256 << '\n';
}

std::vector<ManifestRow> read_manifest(const CorpusPaths& paths) {
    auto rows = csv::read_file(paths.manifest_path());
    std::vector<ManifestRow> out;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != 5)
            throw DataError("corpus", "manifest row " + std::to_string(r + 1) + " malformed");
        out.push_back({canonicalize_cik(row[0]),
                       static_cast<int>(csv::parse_long(row[1], "manifest year")), row[2], row[3],
                       row[4]});
    }
    return out;
}

Filing load_filing(const CorpusPaths& paths, const ManifestRow& row) {
    fs::path file = paths.filing_path(row.cik, row.year);
    std::ifstream in(file, std::ios::binary);
    if (!in) throw DataError("corpus", "missing filing file " + file.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return Filing{row.cik, row.year, row.accession_id, buf.str(), row.source_uri};
}

std::vector<Filing> load_corpus(const CorpusPaths& paths) {
    std::vector<Filing> filings;
    for (const auto& row : read_manifest(paths)) filings.push_back(load_filing(paths, row));
    return filings;
}

}  // namespace aidx::corpus
