"""Discretization, Gower distance, neighbor lists and concept extraction."""

import json
from dataclasses import dataclass

import numpy as np

from .core import CATEGORICAL, CONTINUOUS, ORDINAL
from .exceptions import DegenerateAttribute, KTooLarge, MissingBinning, ValidationError

DEFAULT_BIN_COUNT = 10


@dataclass(frozen=True)
class BinningSpec:
    """Equal-width bins for one continuous attribute.

    Bins are left-closed; values below the first edge fall in bin 0 and
    values at or above the last edge (including the maximum) in the last bin.
    """

    attribute: str
    bin_count: int
    edges: tuple

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(float(e) for e in self.edges))
        if self.bin_count < 2:
            raise ValidationError(f"{self.attribute}: bin_count must be >= 2")
        if len(self.edges) != self.bin_count - 1:
            raise ValidationError(f"{self.attribute}: expected {self.bin_count - 1} edges")
        if any(b <= a for a, b in zip(self.edges, self.edges[1:])):
            raise ValidationError(f"{self.attribute}: edges must be strictly ascending")

    def assign(self, values):
        idx = np.searchsorted(np.asarray(self.edges), np.asarray(values, dtype=float), side="right")
        return np.clip(idx, 0, self.bin_count - 1)

    def to_dict(self):
        return {"attribute": self.attribute, "bin_count": self.bin_count, "edges": list(self.edges)}

    @classmethod
    def from_dict(cls, raw):
        return cls(raw["attribute"], int(raw["bin_count"]), tuple(raw["edges"]))


def equal_width_bins(dataset, attribute, bin_count=DEFAULT_BIN_COUNT):
    attr = dataset.attribute(attribute)
    if not attr.is_continuous:
        raise ValidationError(f"{attribute!r} is {attr.kind}; only continuous attributes are binned")
    col = dataset.column(attribute)
    lo, hi = float(col.min()), float(col.max())
    if not hi > lo:
        raise DegenerateAttribute(f"{attribute!r}: all values equal {lo}")
    width = (hi - lo) / bin_count
    return BinningSpec(attribute, bin_count, tuple(lo + width * k for k in range(1, bin_count)))


def default_bins(dataset, bin_count=DEFAULT_BIN_COUNT):
    """Bins for every non-degenerate continuous attribute."""
    out = []
    for attr in dataset.schema:
        if attr.is_continuous:
            try:
                out.append(equal_width_bins(dataset, attr.name, bin_count))
            except DegenerateAttribute:
                continue
    return out


def save_bins(bins, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump([b.to_dict() for b in bins], fh, indent=2)
        fh.write("\n")


def load_bins(path):
    with open(path, encoding="utf-8") as fh:
        return [BinningSpec.from_dict(b) for b in json.load(fh)]


def discretize(dataset, bins):
    """Per-attribute level codes and level counts.

    Continuous attributes need a :class:`BinningSpec` unless they are
    constant, in which case they collapse to a single level.
    """
    by_name = {b.attribute: b for b in bins}
    codes = np.empty((dataset.n, dataset.d), dtype=np.int64)
    levels = []
    for j, attr in enumerate(dataset.schema):
        col = dataset.values[:, j]
        if attr.is_continuous:
            spec = by_name.get(attr.name)
            if spec is None:
                if col.min() == col.max():
                    codes[:, j] = 0
                    levels.append(1)
                    continue
                raise MissingBinning(f"no binning for continuous attribute {attr.name!r}")
            codes[:, j] = spec.assign(col)
            levels.append(spec.bin_count)
        else:
            codes[:, j] = col.astype(np.int64)
            levels.append(attr.n_categories)
    return codes, levels


def concept_codes(dataset, bins):
    """Map each point's attribute values to ids in a shared concept vocabulary.

    Returns ``(ids, tokens)`` where ``ids`` is ``(n, d)`` and ``tokens[k]`` is
    the ``"attribute:value"`` string of concept ``k``.
    """
    codes, levels = discretize(dataset, bins)
    tokens = []
    ids = np.empty_like(codes)
    offset = 0
    for j, attr in enumerate(dataset.schema):
        if attr.is_continuous:
            tokens.extend(f"{attr.name}:{b}" for b in range(levels[j]))
        else:
            tokens.extend(f"{attr.name}:{c}" for c in attr.categories)
        ids[:, j] = codes[:, j] + offset
        offset += levels[j]
    return ids, tuple(tokens)


def extract_concepts(dataset, bins):
    ids, tokens = concept_codes(dataset, bins)
    return {pid: frozenset(tokens[k] for k in ids[i]) for i, pid in enumerate(dataset.point_ids)}


# -- distance -------------------------------------------------------------------


def attribute_scales(dataset):
    """Divisor turning each attribute difference into a [0, 1] dissimilarity.

    Zero marks an attribute that contributes nothing (constant continuous
    column or single-level ordinal).
    """
    scales = np.zeros(dataset.d)
    for j, attr in enumerate(dataset.schema):
        if attr.kind == CONTINUOUS:
            col = dataset.values[:, j]
            scales[j] = col.max() - col.min()
        elif attr.kind == ORDINAL:
            scales[j] = attr.n_categories - 1
        else:
            scales[j] = 1.0
    return scales


def _term(kind, scale, a, b):
    if kind == CATEGORICAL:
        return (a != b) * 1.0
    diff = np.abs(a - b)
    return diff / scale if scale > 0 else diff * 0.0


def gower_distance(a, b, dataset, scales=None):
    """Mean per-attribute dissimilarity between two points (ids or coded rows)."""
    if scales is None:
        scales = attribute_scales(dataset)
    xa = dataset.values[dataset.index[a]] if isinstance(a, str) else np.asarray(a, dtype=float)
    xb = dataset.values[dataset.index[b]] if isinstance(b, str) else np.asarray(b, dtype=float)
    total = 0.0
    for j, attr in enumerate(dataset.schema):
        total += float(_term(attr.kind, scales[j], xa[j], xb[j]))
    return total / dataset.d


def gower_matrix(dataset, rows=None, scales=None):
    """Distances from ``rows`` (default: every point) to every point."""
    if scales is None:
        scales = attribute_scales(dataset)
    X = dataset.values
    A = X if rows is None else X[rows]
    D = np.zeros((A.shape[0], X.shape[0]))
    for j, attr in enumerate(dataset.schema):
        D += _term(attr.kind, scales[j], A[:, j, None], X[None, :, j])
    D /= dataset.d
    return D


@dataclass(frozen=True)
class NeighborMatrix:
    k: int
    indices: np.ndarray
    distances: np.ndarray
    point_ids: tuple

    def neighbors(self, point_id):
        i = self.point_ids.index(point_id)
        return [(self.point_ids[j], float(dist)) for j, dist in zip(self.indices[i], self.distances[i])]


def build_neighbor_matrix(dataset, k, chunk_size=256):
    """Exact k nearest neighbors under Gower distance.

    Ties at equal distance go to the lexically smaller point id. Work is
    O(n^2 d) for the distances plus a partial selection per row.
    """
    n = dataset.n
    if not 1 <= k < n:
        raise KTooLarge(f"k={k} must satisfy 1 <= k < n={n}")
    scales = attribute_scales(dataset)
    indices = np.empty((n, k), dtype=np.int64)
    distances = np.empty((n, k))
    id_rank = dataset.id_rank
    for start in range(0, n, chunk_size):
        rows = np.arange(start, min(start + chunk_size, n))
        D = gower_matrix(dataset, rows, scales)
        D[np.arange(len(rows)), rows] = np.inf
        kth = np.partition(D, k - 1, axis=1)[:, k - 1]
        for r, i in enumerate(rows):
            cand = np.flatnonzero(D[r] <= kth[r])
            order = cand[np.lexsort((id_rank[cand], D[r, cand]))][:k]
            indices[i] = order
            distances[i] = D[r, order]
    return NeighborMatrix(k, indices, distances, dataset.point_ids)
