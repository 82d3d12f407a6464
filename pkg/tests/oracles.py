"""Slow, independent reference implementations used by the tests."""

import math


def gower(rec_a, rec_b, schema, ranges):
    """Gower distance from decoded records, written out term by term."""
    total = 0.0
    for attr in schema:
        a, b = rec_a[attr.name], rec_b[attr.name]
        if attr.kind == "categorical":
            total += 0.0 if a == b else 1.0
        elif attr.kind == "ordinal":
            pos = list(attr.categories)
            span = len(pos) - 1
            total += abs(pos.index(a) - pos.index(b)) / span if span else 0.0
        else:
            span = ranges[attr.name]
            total += abs(a - b) / span if span else 0.0
    return total / len(schema)


def ranges_of(dataset):
    out = {}
    for attr in dataset.schema:
        if attr.kind == "continuous":
            col = [dataset.record(p)[attr.name] for p in dataset.point_ids]
            out[attr.name] = max(col) - min(col)
    return out


def all_distances(dataset):
    recs = {p: dataset.record(p) for p in dataset.point_ids}
    ranges = ranges_of(dataset)
    return {
        (p, q): gower(recs[p], recs[q], dataset.schema, ranges)
        for p in dataset.point_ids
        for q in dataset.point_ids
    }


def brute_neighbors(dataset, k, dist=None):
    """k nearest neighbors by full sort on (distance, id)."""
    dist = dist or all_distances(dataset)
    out = {}
    for p in dataset.point_ids:
        others = sorted((dist[p, q], q) for q in dataset.point_ids if q != p)
        out[p] = [q for _, q in others[:k]]
    return out


def knn_scores(dataset, k, alpha, observed):
    neigh = brute_neighbors(dataset, k)
    seen = set(observed)
    return {p: (sum(q in seen for q in neigh[p]) + alpha) / (k + 2 * alpha) for p in dataset.point_ids}


def chi2_sf_quad(x, df, steps=200_000):
    """Upper tail of the chi-square density by composite Simpson on [x, x + 400]."""
    k = df / 2.0
    logc = -k * math.log(2.0) - math.lgamma(k)

    def pdf(t):
        if t <= 0:
            return 0.0
        return math.exp(logc + (k - 1) * math.log(t) - t / 2)

    a, b = x, x + 400.0
    if df == 1 and a == 0:
        # integrable singularity at 0: use 1 - P(Z^2 <= x) form instead
        return 1.0
    h = (b - a) / steps
    s = pdf(a) + pdf(b)
    for i in range(1, steps):
        s += (4 if i % 2 else 2) * pdf(a + i * h)
    return s * h / 3


def ecdf_sup(a, b):
    grid = sorted(set(a) | set(b))
    return max(abs(sum(x <= g for x in a) / len(a) - sum(x <= g for x in b) / len(b)) for g in grid)


def logsumexp(values):
    m = max(values)
    return m + math.log(sum(math.exp(v - m) for v in values))


def cm_enumerate(dataset, observed, bandwidth=0.1, alpha=1.0, digits=50):
    """Competing models by explicit loops over every subset and point.

    Works in ``digits``-digit arithmetic so that rescaled scores stay exact
    even when the raw mixture is nearly flat. Returns ``(posterior, rank,
    bias)``: posterior keyed by frozenset, raw BMA relevance per point id and
    bias per attribute, all as mpmath numbers.
    """
    from itertools import combinations

    import mpmath as mp

    mp.mp.dps = digits
    ids = list(dataset.point_ids)
    recs = {p: {k: mp.mpf(v) if isinstance(v, float) else v for k, v in dataset.record(p).items()} for p in ids}
    schema = list(dataset.schema)
    names = [a.name for a in schema]
    subsets = [frozenset(c) for r in range(len(names) + 1) for c in combinations(names, r)]
    bounds = {}
    for a in schema:
        if a.kind == "continuous":
            col = [recs[p][a.name] for p in ids]
            bounds[a.name] = (min(col), max(col))

    def phi(z):
        return (1 + mp.erf(z / mp.sqrt(2))) / 2

    def term(a, x, hist):
        if a.kind == "continuous":
            lo, hi = bounds[a.name]
            if hi <= lo:
                return mp.mpf(1)
            h = bandwidth * (hi - lo)
            tot = mp.mpf(0)
            for v in hist:
                c = recs[v][a.name]
                z = (recs[x][a.name] - c) / h
                dens = mp.exp(-z * z / 2) / mp.sqrt(2 * mp.pi) / h
                tot += dens / (phi((hi - c) / h) - phi((lo - c) / h))
            return tot / len(hist)
        hits = sum(recs[v][a.name] == recs[x][a.name] for v in hist)
        return mp.mpf(hits + alpha) / (len(hist) + alpha * len(a.categories))

    def pred(S, hist):
        if not hist:
            return {p: mp.mpf(1) / len(ids) for p in ids}
        g = {}
        for p in ids:
            val = mp.mpf(1)
            for a in schema:
                if a.name in S:
                    val *= term(a, p, hist)
            g[p] = val
        z = sum(g.values())
        return {p: v / z for p, v in g.items()}

    post = {S: mp.mpf(1) / len(subsets) for S in subsets}
    hist = []
    for x in observed:
        for S in subsets:
            post[S] *= pred(S, hist)[x]
        z = sum(post.values())
        post = {S: v / z for S, v in post.items()}
        hist.append(x)
    rank = {p: mp.mpf(0) for p in ids}
    for S in subsets:
        ps = pred(S, hist)
        for p in ids:
            rank[p] += post[S] * ps[p]
    bias = {a: sum(v for S, v in post.items() if a in S) for a in names}
    return post, rank, bias


def minmax(d):
    lo, hi = min(d.values()), max(d.values())
    if hi == lo:
        return {k: 0.5 for k in d}
    return {k: (v - lo) / (hi - lo) for k, v in d.items()}


def nb_posterior(train, labels, query, levels, alpha=1.0):
    """Unweighted categorical naive Bayes Pr(y=1 | x) by counting."""
    post = []
    for x in query:
        joint = []
        for c in (0, 1):
            rows = [r for r, y in zip(train, labels) if y == c]
            lp = math.log(len(rows) / len(train))
            for j, m in enumerate(levels):
                hits = sum(r[j] == x[j] for r in rows)
                lp += math.log((hits + alpha) / (len(rows) + alpha * m))
            joint.append(lp)
        post.append(1.0 / (1.0 + math.exp(joint[0] - joint[1])))
    return post
