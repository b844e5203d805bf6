"""Surface-form metrics over normalized tokens: EM, token F1, BLEU-4, ROUGE-L."""

from __future__ import annotations

import math
from collections import Counter

from regionrag.textnorm import normalize_text, normalized_tokens

BLEU_EPSILON = 0.1


def exact_match(pred: str, ref: str) -> int:
    return int(normalize_text(pred) == normalize_text(ref))


def token_f1(pred: str, ref: str) -> float:
    """Harmonic mean of token precision and recall on multiset overlap."""
    p = normalized_tokens(pred)
    r = normalized_tokens(ref)
    if not p and not r:
        return 1.0
    if not p or not r:
        return 0.0
    common = sum((Counter(p) & Counter(r)).values())
    if common == 0:
        return 0.0
    precision = common / len(p)
    recall = common / len(r)
    return 2 * precision * recall / (precision + recall)


def _ngrams(tokens: list[str], n: int) -> Counter:
    return Counter(tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1))


def bleu4(pred: str, ref: str, max_n: int = 4, epsilon: float = BLEU_EPSILON) -> float:
    """Sentence BLEU with uniform weights, brevity penalty and epsilon smoothing.

    An order with no matching n-gram contributes ``epsilon / count`` instead
    of zero, so partial matches keep a small positive score. Orders longer
    than the prediction have no n-grams at all and are left out of the mean
    (the "effective order" convention), so identical short strings score 1.
    """
    p = normalized_tokens(pred)
    r = normalized_tokens(ref)
    if not p and not r:
        return 1.0
    if not p or not r:
        return 0.0
    log_sum = 0.0
    orders = min(max_n, len(p))
    for n in range(1, orders + 1):
        pc = _ngrams(p, n)
        rc = _ngrams(r, n)
        total = len(p) - n + 1
        matched = sum(min(c, rc[g]) for g, c in pc.items())
        prec = matched / total if matched > 0 else epsilon / total
        log_sum += math.log(prec)
    bp = 1.0 if len(p) > len(r) else math.exp(1.0 - len(r) / len(p))
    return bp * math.exp(log_sum / orders)


def lcs_length(a: list[str], b: list[str]) -> int:
    if not a or not b:
        return 0
    prev = [0] * (len(b) + 1)
    for x in a:
        cur = [0]
        for j, y in enumerate(b):
            cur.append(prev[j] + 1 if x == y else max(prev[j + 1], cur[j]))
        prev = cur
    return prev[-1]


def rouge_l(pred: str, ref: str) -> float:
    """LCS-based F-measure with beta = 1."""
    p = normalized_tokens(pred)
    r = normalized_tokens(ref)
    if not p and not r:
        return 1.0
    lcs = lcs_length(p, r)
    if lcs == 0:
        return 0.0
    precision = lcs / len(p)
    recall = lcs / len(r)
    return 2 * precision * recall / (precision + recall)
