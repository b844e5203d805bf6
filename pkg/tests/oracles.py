"""Independent reference implementations used as test oracles.

Nothing here imports from ``regionrag``. Each function is written the slow,
obvious way so it can be checked by eye.
"""

from __future__ import annotations

import itertools
import math

# same 40-word list the normalizer documents; a data constant, not logic
STOPWORDS = set(
    """a an the and or but if then so is are was were be been being am do does did
    it its this that these those there i you he she we they me my your our their
    what which""".split()
)


def normalize(s: str) -> list[str]:
    """Lowercase, drop punctuation except '.' and ',' between two digits, drop stopwords."""
    s = s.lower()
    kept = []
    for i, ch in enumerate(s):
        if ch.isalnum() or ch.isspace():
            kept.append(ch)
        elif ch in ".," and 0 < i < len(s) - 1 and s[i - 1].isdigit() and s[i + 1].isdigit():
            kept.append(ch)
        else:
            kept.append(" ")
    return [t for t in "".join(kept).split() if t not in STOPWORDS]


def em(pred: str, ref: str) -> int:
    return 1 if normalize(pred) == normalize(ref) else 0


def f1(pred: str, ref: str) -> float:
    p, r = normalize(pred), normalize(ref)
    if not p and not r:
        return 1.0
    if not p or not r:
        return 0.0
    remaining = list(r)
    common = 0
    for t in p:
        if t in remaining:
            remaining.remove(t)
            common += 1
    if common == 0:
        return 0.0
    prec, rec = common / len(p), common / len(r)
    return 2 * prec * rec / (prec + rec)


def _grams(tokens, n):
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def bleu(pred: str, ref: str, eps: float = 0.1) -> float:
    p, r = normalize(pred), normalize(ref)
    if not p and not r:
        return 1.0
    if not p or not r:
        return 0.0
    logs = []
    for n in (1, 2, 3, 4):
        pg = _grams(p, n)
        if not pg:
            break  # effective order: the prediction is shorter than n
        pool = _grams(r, n)
        hit = 0
        for g in pg:
            if g in pool:
                pool.remove(g)
                hit += 1
        logs.append(math.log(hit / len(pg)) if hit else math.log(eps / len(pg)))
    bp = 1.0 if len(p) > len(r) else math.exp(1 - len(r) / len(p))
    return bp * math.exp(sum(logs) / len(logs))


def lcs_brute(a: list[str], b: list[str]) -> int:
    """Longest common subsequence by enumerating subsequences of the shorter list."""
    if len(a) > len(b):
        a, b = b, a
    for size in range(len(a), 0, -1):
        for idx in itertools.combinations(range(len(a)), size):
            sub = [a[i] for i in idx]
            it = iter(b)
            if all(any(x == y for y in it) for x in sub):
                return size
    return 0


def rouge_l(pred: str, ref: str) -> float:
    p, r = normalize(pred), normalize(ref)
    if not p and not r:
        return 1.0
    lcs = lcs_brute(p, r)
    if lcs == 0:
        return 0.0
    prec, rec = lcs / len(p), lcs / len(r)
    return 2 * prec * rec / (prec + rec)


def greedy_bertscore(p_vecs: list[list[float]], r_vecs: list[list[float]]) -> float:
    """Greedy-matching F1 from raw token vectors, pure Python."""

    def cos(u, v):
        nu = math.sqrt(sum(x * x for x in u))
        nv = math.sqrt(sum(x * x for x in v))
        if nu == 0 or nv == 0:
            return 0.0
        return sum(x * y for x, y in zip(u, v)) / (nu * nv)

    prec = sum(max(cos(u, v) for v in r_vecs) for u in p_vecs) / len(p_vecs)
    rec = sum(max(cos(v, u) for u in p_vecs) for v in r_vecs) / len(r_vecs)
    if prec + rec <= 0:
        return 0.0
    return min(1.0, max(0.0, 2 * prec * rec / (prec + rec)))


def haversine(lat1: float, lon1: float, lat2: float, lon2: float, r: float = 6371.0) -> float:
    """Great-circle distance via the spherical law of cosines on unit vectors."""

    def xyz(lat, lon):
        la, lo = math.radians(lat), math.radians(lon)
        return (math.cos(la) * math.cos(lo), math.cos(la) * math.sin(lo), math.sin(la))

    a, b = xyz(lat1, lon1), xyz(lat2, lon2)
    cross = (
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
    sin_t = math.sqrt(sum(c * c for c in cross))
    cos_t = sum(x * y for x, y in zip(a, b))
    return r * math.atan2(sin_t, cos_t)


def fused_order(cands: list[tuple[str, float, float]], alpha: float) -> list[tuple[str, float]]:
    """Sort (chunk_id, s_semantic, s_distance) by the fused score, ties to the smaller id."""
    scored = [(cid, (1 - alpha) * max(sem, 0.0) + alpha * sd) for cid, sem, sd in cands]
    # stable two-pass sort: id ascending first, then score descending
    scored.sort(key=lambda t: t[0])
    scored.sort(key=lambda t: t[1], reverse=True)
    return scored


def cliffs(a: list[float], b: list[float]) -> float:
    gt = lt = 0
    for x in a:
        for y in b:
            if x > y:
                gt += 1
            elif x < y:
                lt += 1
    return (gt - lt) / (len(a) * len(b))


def recall_at_k(approx: list[list[int]], exact: list[list[int]]) -> float:
    return sum(len(set(a) & set(e)) / len(e) for a, e in zip(approx, exact)) / len(exact)
