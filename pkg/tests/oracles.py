"""Independent brute-force oracles used to cross-check the library.

Everything here is deliberately written the slow, obvious way (plain
Python loops, no numpy vectorization) so that it shares no code path with
the implementations it checks.
"""

import math


def oracle_distance(metric, p, q):
    d = len(p)
    if metric == "city_block":
        total = 0.0
        for i in range(d):
            total += abs(p[i] - q[i])
        return total
    if metric == "kulczynski_d":
        num = 0.0
        den = 0.0
        for i in range(d):
            num += abs(p[i] - q[i])
            den += min(p[i], q[i])
        if den == 0.0:
            return 0.0 if num == 0.0 else math.inf
        return num / den
    if metric == "czekanowski":
        num = 0.0
        den = 0.0
        for i in range(d):
            num += min(p[i], q[i])
            den += p[i] + q[i]
        if den == 0.0:
            return 0.0
        return 1.0 - 2.0 * num / den
    if metric == "dice":
        num = 0.0
        den = 0.0
        for i in range(d):
            num += p[i] * q[i]
        for i in range(d):
            den += p[i] * p[i]
        for i in range(d):
            den += q[i] * q[i]
        if den == 0.0:
            return 0.0
        return 1.0 - 2.0 * num / den
    if metric == "squared":
        total = 0.0
        for i in range(d):
            s = p[i] + q[i]
            if s > 0.0:
                total += (p[i] - q[i]) ** 2 / s
        return total
    if metric == "squared_chord":
        total = 0.0
        for i in range(d):
            total += (math.sqrt(p[i]) - math.sqrt(q[i])) ** 2
        return total
    if metric == "jensen_shannon":
        total = 0.0
        for i in range(d):
            s = p[i] + q[i]
            if p[i] > 0.0:
                total += p[i] * math.log(2.0 * p[i] / s)
            if q[i] > 0.0:
                total += q[i] * math.log(2.0 * q[i] / s)
        return 0.5 * total
    raise ValueError(metric)


def brute_force_roc(genuine, impostor):
    """Exhaustive threshold sweep: every candidate threshold, counted by loop.

    Returns (thresholds, far, tar) lists over the sorted unique finite
    scores with -inf and +inf sentinels, acceptance meaning score <= t.
    """
    finite = sorted({x for x in list(genuine) + list(impostor) if math.isfinite(x)})
    thresholds = [-math.inf] + finite + [math.inf]
    far, tar = [], []
    for t in thresholds:
        far.append(sum(1 for x in impostor if x <= t) / len(impostor))
        tar.append(sum(1 for x in genuine if x <= t) / len(genuine))
    return thresholds, far, tar


def normal_cdf(x):
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
