#!/usr/bin/env python3
"""Independent reference computation over the bundled fixtures.

Recomputes, from the raw fixture inputs and in plain Python, everything the
toolkit's score -> index -> event-study chain produces: per-filing scores,
mention counts, index weights, chained index levels, market-model fits,
abnormal returns and the cross-sectional statistics. Results are frozen
under tests/oracle/expected/ and the C++ acceptance suite compares against
them numerically.

This file deliberately shares no code with the C++ implementation; the
cleaning/tokenization helpers live in make_fixtures.py and follow the same
documented contracts.
"""

import hashlib
import json
import math
import os
from collections import Counter

from make_fixtures import clean, tokenize, count_keywords

HERE = os.path.dirname(os.path.abspath(__file__))
ROOT = os.path.join(HERE, "..", "..")
FIX = os.path.join(ROOT, "data", "fixtures")
RAW = os.path.join(FIX, "raw")
OUT = os.path.join(HERE, "expected")

EVENT_DATE = "2022-11-30"
EST_LEN = 251
EVT_LEN = 61


def fmt(x):
    return repr(float(x))  # shortest round-trip decimal


# ------------------------------------------------------------- text scores

def load_docs():
    docs = []  # (cik, year, tokens)
    for name in sorted(os.listdir(RAW)):
        cik, year, _ = name.split("_", 2)
        with open(os.path.join(RAW, name), encoding="utf-8") as f:
            text = clean(f.read())
        docs.append((cik, int(year), text, tokenize(text)))
    return docs


def score_docs(docs):
    records = {}  # (cik, year) -> dict
    by_year = {}
    for cik, year, _text, tokens in docs:
        by_year.setdefault(year, []).append((cik, tokens))
    for year, members in by_year.items():
        n = len(members)
        counts = {cik: count_keywords(tokens) for cik, tokens in members}
        df = [sum(1 for c in counts.values() if c[k] > 0) for k in range(3)]
        for cik, tokens in members:
            total = sum(counts[cik])
            length = len(tokens)
            score = 0.0
            if total > 0:
                s = 0.0
                for k in range(3):
                    if counts[cik][k] > 0:
                        tf = counts[cik][k] / length
                        idf = math.log(n / df[k])
                        s += tf * idf
                score = s / length
            records[(cik, year)] = {
                "keyword_count": total,
                "max_word_freq": Counter(tokens).most_common(1)[0][1] if tokens else 0,
                "dummy": total > 0,
                "score": score,
            }
    return records


def write_scores(records):
    lines = ["cik,year,keyword_count,max_word_freq,dummy,score"]
    for (cik, year) in sorted(records):
        r = records[(cik, year)]
        lines.append(f"{cik},{year},{r['keyword_count']},{r['max_word_freq']},"
                     f"{1 if r['dummy'] else 0},{fmt(r['score'])}")
    with open(os.path.join(OUT, "scores.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")

    mentions = Counter(year for (cik, year), r in records.items() if r["dummy"])
    with open(os.path.join(OUT, "mentions.csv"), "w") as f:
        f.write("year,count\n")
        for year in sorted(mentions):
            f.write(f"{year},{mentions[year]}\n")


def write_corpus_hashes(docs):
    lines = ["cik,year,sha256"]
    for cik, year, text, _tokens in docs:
        h = hashlib.sha256(text.encode("utf-8")).hexdigest()
        lines.append(f"{cik},{year},{h}")
    with open(os.path.join(OUT, "corpus_sha.csv"), "w") as f:
        f.write("\n".join(lines) + "\n")


# ------------------------------------------------------------------ prices

def load_prices():
    closes = {}  # ticker -> list of (date, close)
    with open(os.path.join(FIX, "prices.csv")) as f:
        next(f)
        for line in f:
            d, ticker, close = line.strip().split(",")
            closes.setdefault(ticker, []).append((d, float(close)))
    returns = {}
    for ticker, rows in closes.items():
        obs = []
        for i in range(1, len(rows)):
            obs.append((rows[i][0], math.log(rows[i][1] / rows[i - 1][1])))
        returns[ticker] = obs
    return closes, returns


def load_universe():
    out = {}
    with open(os.path.join(FIX, "universe.csv")) as f:
        next(f)
        for line in f:
            ticker, cik = line.strip().split(",")
            out[ticker] = cik
    return out


# ----------------------------------------------------------------- weights

def compute_weights(records, scheme, alpha, filing_year):
    if scheme in ("aii", "saii"):
        members = {cik: r["score"] for (cik, year), r in records.items()
                   if year == filing_year and r["dummy"]}
        if scheme == "aii":
            w = 1.0 / len(members)
            return {cik: w for cik in members}
        total = sum(members.values())
        return {cik: s / total for cik, s in members.items()}
    # taii
    years = sorted({year for (_c, year) in records})
    first = min(y for y in years if y <= filing_year)
    engagement = {}
    ciks = {cik for (cik, _y) in records}
    for cik in ciks:
        d, factor = 0.0, 1.0
        for year in range(filing_year, first - 1, -1):
            rec = records.get((cik, year))
            if rec is not None and rec["dummy"]:
                d += factor
            factor *= alpha
        if d > 0.0:
            engagement[cik] = d
    total = sum(engagement.values())
    return {cik: d / total for cik, d in engagement.items()}


def write_weights(records):
    schemes = [("aii", 0.0), ("saii", 0.0), ("taii05", 0.5), ("taii5x", 5.0)]
    filing_years = sorted({year for (_c, year) in records})
    all_weights = {}
    for name, alpha in schemes:
        rows = ["year,cik,weight"]
        per_year = {}
        for fy in filing_years:
            weights = compute_weights(records, "taii" if name.startswith("taii") else name,
                                      alpha, fy)
            per_year[fy + 1] = weights
            for cik in sorted(weights):
                rows.append(f"{fy + 1},{cik},{fmt(weights[cik])}")
        all_weights[name] = per_year
        with open(os.path.join(OUT, f"weights_{name}.csv"), "w") as f:
            f.write("\n".join(rows) + "\n")
    return all_weights


# ------------------------------------------------------------------- index

def chain_index(weights_by_year, returns_by_cik, calendar):
    level = 100.0
    rows = [(calendar[0], level, 0.0)]
    active = None
    active_year = None
    lookup = {cik: dict(obs) for cik, obs in returns_by_cik.items()}
    for d in calendar[1:]:
        year = int(d[:4])
        if year != active_year:
            active_year = year
            base = weights_by_year[year]
            kept = {c: w for c, w in base.items() if d in lookup.get(c, {})}
            total = sum(kept.values())
            active = {c: w / total for c, w in kept.items()}
        else:
            missing = [c for c in active if d not in lookup[c]]
            if missing:
                kept = {c: w for c, w in active.items() if c not in missing}
                total = sum(kept.values())
                active = {c: w / total for c, w in kept.items()}
        port = 0.0
        for c in sorted(active):
            port += active[c] * math.expm1(lookup[c][d])
        level = level * (1.0 + port)
        rows.append((d, level, port))
    return rows


def write_indices(all_weights, closes, returns, universe):
    returns_by_cik = {universe[t]: returns[t] for t in universe if t in returns}
    spx_dates = [d for d, _ in closes["SPX"]]
    for name, per_year in all_weights.items():
        years = sorted(per_year)
        calendar = [d for d in spx_dates if years[0] <= int(d[:4]) <= years[-1]]
        rows = chain_index(per_year, returns_by_cik, calendar)
        with open(os.path.join(OUT, f"index_{name}.csv"), "w") as f:
            f.write("date,level,daily_return\n")
            for d, level, ret in rows:
                f.write(f"{d},{fmt(level)},{fmt(ret)}\n")


# ------------------------------------------------------------- event study

def ols2(xs, ys):
    n = len(xs)
    sx = sum(xs)
    sy = sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    beta = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    alpha = (sy - beta * sx) / n
    return alpha, beta


def normal_cdf(x):
    return 0.5 * math.erfc(-x / math.sqrt(2.0))


def wilcoxon(values):
    nz = [v for v in values if v != 0.0]
    n = len(nz)
    ranks = []
    for v in nz:
        below = sum(1 for u in nz if abs(u) < abs(v))
        equal = sum(1 for u in nz if abs(u) == abs(v))
        ranks.append(below + (equal + 1) / 2.0)
    w_plus = sum(r for v, r in zip(nz, ranks) if v > 0.0)
    mu = n * (n + 1) / 4.0
    ties = Counter(abs(v) for v in nz)
    tie_corr = sum(t ** 3 - t for t in ties.values())
    var = n * (n + 1) * (2 * n + 1) / 24.0 - tie_corr / 48.0
    cc = -0.5 if w_plus > mu else (0.5 if w_plus < mu else 0.0)
    z = (w_plus - mu + cc) / math.sqrt(var) if var > 0 else 0.0
    # exact two-sided p by convolution over doubled ranks
    r2 = [round(2 * r) for r in ranks]
    total = sum(r2)
    ways = [0.0] * (total + 1)
    ways[0] = 1.0
    reached = 0
    for r in r2:
        reached += r
        for w in range(reached, r - 1, -1):
            ways[w] += ways[w - r]
    w2 = round(2 * w_plus)
    p_le = sum(ways[: w2 + 1]) / 2 ** n
    p_ge = sum(ways[w2:]) / 2 ** n
    p = min(1.0, 2.0 * min(p_le, p_ge))
    return w_plus, z, p


def event_study(returns, universe):
    market = returns["SPX"]
    dates = [d for d, _ in market]
    day0 = next(i for i, d in enumerate(dates) if d >= EVENT_DATE)
    est = range(day0 - EST_LEN, day0)
    evt = range(day0, day0 + EVT_LEN)

    per_security = []
    for ticker in sorted(universe):
        cik = universe[ticker]
        if ticker not in returns:
            continue
        stock = dict(returns[ticker])
        xs, ys = [], []
        for i in est:
            d = dates[i]
            if d in stock:
                xs.append(market[i][1])
                ys.append(stock[d])
        if len(xs) < 30:
            continue
        alpha, beta = ols2(xs, ys)
        ars = []
        for k, i in enumerate(evt):
            d = dates[i]
            if d in stock:
                ars.append((k, stock[d] - (alpha + beta * market[i][1])))
        per_security.append((cik, ticker, alpha, beta, ars))

    n = len(per_security)
    car_paths = []
    for cik, ticker, alpha, beta, ars in per_security:
        path = [0.0] * EVT_LEN
        for k, ar in ars:
            path[k] += ar
        cum = 0.0
        for k in range(EVT_LEN):
            cum += path[k]
            path[k] = cum
        car_paths.append(path)

    caar = [sum(p[k] for p in car_paths) / n for k in range(EVT_LEN)]
    ses = []
    for k in range(EVT_LEN):
        m = caar[k]
        ss = sum((p[k] - m) ** 2 for p in car_paths)
        ses.append(math.sqrt(ss / (n - 1)) / math.sqrt(n))

    cars = [p[-1] for p in car_paths]
    mean_car = sum(cars) / n
    sd_car = math.sqrt(sum((c - mean_car) ** 2 for c in cars) / (n - 1))
    t = mean_car / (sd_car / math.sqrt(n))
    w_plus, z, p = wilcoxon(cars)

    with open(os.path.join(OUT, "event_security.csv"), "w") as f:
        f.write("cik,ticker,alpha,beta,car\n")
        for (cik, ticker, alpha, beta, ars), path in zip(per_security, car_paths):
            f.write(f"{cik},{ticker},{fmt(alpha)},{fmt(beta)},{fmt(path[-1])}\n")
    with open(os.path.join(OUT, "event_caar.csv"), "w") as f:
        f.write("day,caar,se\n")
        for k in range(EVT_LEN):
            f.write(f"{k},{fmt(caar[k])},{fmt(ses[k])}\n")
    with open(os.path.join(OUT, "event_stats.json"), "w") as f:
        json.dump({"n": n, "t_stat": t, "wilcoxon_w": w_plus, "wilcoxon_z": z,
                   "wilcoxon_p": p}, f, indent=1)
        f.write("\n")

    # AR matrix for the fixture panel (event window, gaps as empty fields).
    with open(os.path.join(OUT, "event_ar_matrix.csv"), "w") as f:
        f.write("cik," + ",".join(f"day{k}" for k in range(EVT_LEN)) + "\n")
        for cik, ticker, alpha, beta, ars in per_security:
            row = [""] * EVT_LEN
            for k, ar in ars:
                row[k] = fmt(ar)
            f.write(cik + "," + ",".join(row) + "\n")


def main():
    os.makedirs(OUT, exist_ok=True)
    docs = load_docs()
    records = score_docs(docs)
    write_scores(records)
    write_corpus_hashes(docs)
    closes, returns = load_prices()
    universe = load_universe()
    all_weights = write_weights(records)
    write_indices(all_weights, closes, returns, universe)
    event_study(returns, universe)
    print("oracle expectations written to", OUT)


if __name__ == "__main__":
    main()
