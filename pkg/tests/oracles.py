"""Independent brute-force oracles used to cross-check the package.

Everything here is written from first principles (plain loops, no shared
helpers with the package under test) so a bug in the implementation cannot
cancel out in the tests.
"""

import math


def naive_corpus_bleu(hyp_token_lists, ref_token_lists):
    """4-gram BLEU with exponential smoothing from pre-tokenized corpora."""
    correct = [0, 0, 0, 0]
    total = [0, 0, 0, 0]
    hyp_len = 0
    ref_len = 0
    for hyp, ref in zip(hyp_token_lists, ref_token_lists):
        hyp_len += len(hyp)
        ref_len += len(ref)
        for n in range(1, 5):
            hyp_grams = {}
            for i in range(len(hyp) - n + 1):
                g = tuple(hyp[i : i + n])
                hyp_grams[g] = hyp_grams.get(g, 0) + 1
            ref_grams = {}
            for i in range(len(ref) - n + 1):
                g = tuple(ref[i : i + n])
                ref_grams[g] = ref_grams.get(g, 0) + 1
            for g, c in hyp_grams.items():
                total[n - 1] += c
                if g in ref_grams:
                    correct[n - 1] += min(c, ref_grams[g])
    log_sum = 0.0
    smooth = 1.0
    for n in range(1, 5):
        if total[n - 1] == 0:
            p = 0.0
        elif correct[n - 1] == 0:
            smooth *= 2.0
            p = 100.0 / (smooth * total[n - 1])
        else:
            p = 100.0 * correct[n - 1] / total[n - 1]
        log_sum += math.log(p) if p > 0.0 else -9999999999.0
    if hyp_len == 0:
        bp = 0.0
    elif hyp_len < ref_len:
        bp = math.exp(1.0 - ref_len / hyp_len)
    else:
        bp = 1.0
    return bp * math.exp(log_sum / 4.0)


def _char_ngram_counts(text, n):
    s = "".join(text.split())
    counts = {}
    for i in range(len(s) - n + 1):
        g = s[i : i + n]
        counts[g] = counts.get(g, 0) + 1
    return counts


def naive_chrf_statistics(hyps, refs, max_order=6):
    """Summed [hyp, ref, match] counts per character n-gram order."""
    stats = [0] * (3 * max_order)
    for hyp, ref in zip(hyps, refs):
        for n in range(1, max_order + 1):
            hc = _char_ngram_counts(hyp, n)
            rc = _char_ngram_counts(ref, n)
            stats[3 * (n - 1)] += sum(hc.values())
            stats[3 * (n - 1) + 1] += sum(rc.values())
            stats[3 * (n - 1) + 2] += sum(
                min(c, rc[g]) for g, c in hc.items() if g in rc
            )
    return stats


def naive_chrf_from_statistics(stats, max_order=6, beta=2):
    eps = 1e-16
    fsum = 0.0
    effective = 0
    for i in range(max_order):
        n_hyp, n_ref, n_match = stats[3 * i], stats[3 * i + 1], stats[3 * i + 2]
        p = n_match / n_hyp if n_hyp > 0 else eps
        r = n_match / n_ref if n_ref > 0 else eps
        denom = beta * beta * p + r
        fsum += (1 + beta * beta) * p * r / denom if denom > 0 else eps
        if n_hyp > 0 and n_ref > 0:
            effective += 1
    if effective == 0:
        return 0.0
    return 100.0 * fsum / effective


def naive_corpus_chrf(hyps, refs):
    return naive_chrf_from_statistics(naive_chrf_statistics(hyps, refs))


def naive_sentence_chrf(hyp, ref):
    return naive_corpus_chrf([hyp], [ref])


def naive_mbr(candidates, samples, pairwise):
    """Expected utilities by double loop; argmax tie-break = first index."""
    expected = []
    for cand in candidates:
        acc = 0.0
        for sample in samples:
            acc += pairwise(sample, cand)
        expected.append(acc / len(samples))
    best = 0
    for i in range(1, len(expected)):
        if expected[i] > expected[best]:
            best = i
    return best, expected


def naive_levenshtein(a, b):
    """Classic DP edit distance between two sequences."""
    m, n = len(a), len(b)
    dist = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        dist[i][0] = i
    for j in range(n + 1):
        dist[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            dist[i][j] = min(
                dist[i - 1][j] + 1,
                dist[i][j - 1] + 1,
                dist[i - 1][j - 1] + cost,
            )
    return dist[m][n]


def naive_token_similarity(a, b):
    """1 - normalized token edit distance on lowercased tokens."""
    ta = a.lower().split()
    tb = b.lower().split()
    if not ta and not tb:
        return 1.0
    return 1.0 - naive_levenshtein(ta, tb) / max(len(ta), len(tb))


def naive_line_argmax(slopes, intercepts, gamma):
    """Index of the maximal line at gamma; first index wins ties."""
    best = 0
    best_val = slopes[0] * gamma + intercepts[0]
    for i in range(1, len(slopes)):
        val = slopes[i] * gamma + intercepts[i]
        if val > best_val:
            best = i
            best_val = val
    return best
