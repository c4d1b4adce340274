"""Composite dissimilarity matrix over data points and attribute nodes.

Three blocks feed the fusion: data-data Euclidean distances (DD),
attribute-attribute correlation dissimilarities (AA), and data-attribute
affinities (DA).  Each block is max-normalized, weighted, and assembled
into one symmetric (n+d) x (n+d) matrix whose first n indices are data
points and last d indices are attribute nodes.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ShapeMismatch


@dataclass(frozen=True)
class DissimilarityBlock:
    values: np.ndarray
    kind: str  # DD | AA | DA

    def __post_init__(self):
        v = self.values
        if not np.all(np.isfinite(v)) or np.any(v < 0):
            raise ValueError("dissimilarities must be finite and nonnegative")
        if self.kind in ("DD", "AA"):
            if v.shape[0] != v.shape[1]:
                raise ValueError(f"{self.kind} block must be square")
            if not np.allclose(v, v.T) or np.any(np.diag(v) != 0):
                raise ValueError(f"{self.kind} block must be symmetric, zero-diagonal")


@dataclass(frozen=True)
class FusionWeights:
    w_dd: float = 1.0
    w_aa: float = 1.0
    w_da: float = 1.0

    def __post_init__(self):
        if min(self.w_dd, self.w_aa, self.w_da) < 0:
            raise ValueError("fusion weights must be nonnegative")
        if max(self.w_dd, self.w_aa, self.w_da) <= 0:
            raise ValueError("at least one fusion weight must be positive")


@dataclass(frozen=True)
class CompositeMatrix:
    values: np.ndarray  # (n+d, n+d)
    n_data: int
    n_attr: int

    @property
    def size(self):
        return self.n_data + self.n_attr

    def node_kind(self, i):
        return "data" if i < self.n_data else "attribute"


def data_distance_block(nds):
    """Pairwise Euclidean distances between normalized data rows."""
    x = nds.values
    sq = np.sum(x * x, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d2, 0.0, out=d2)
    dd = np.sqrt(d2)
    np.fill_diagonal(dd, 0.0)
    dd = 0.5 * (dd + dd.T)
    return DissimilarityBlock(dd, "DD")


def attribute_dissimilarity_block(nds):
    """1 - |pearson r| between attribute columns; constant columns get r = 0."""
    x = nds.values
    d = x.shape[1]
    centered = x - x.mean(axis=0)
    norms = np.sqrt(np.sum(centered * centered, axis=0))
    aa = np.ones((d, d))
    for k in range(d):
        for l in range(k + 1, d):
            if norms[k] == 0.0 or norms[l] == 0.0:
                r = 0.0
            else:
                r = float(centered[:, k] @ centered[:, l] / (norms[k] * norms[l]))
                r = min(1.0, max(-1.0, r))
            aa[k, l] = aa[l, k] = 1.0 - abs(r)
    np.fill_diagonal(aa, 0.0)
    return DissimilarityBlock(aa, "AA")


def data_attribute_block(nds):
    """Affinity dissimilarity 1 - v: high attribute values sit near the node."""
    return DissimilarityBlock(1.0 - nds.values, "DA")


def fuse(dd, aa, da, weights=FusionWeights()):
    """Assemble the weighted, per-block max-normalized composite matrix."""
    n = dd.values.shape[0]
    d = aa.values.shape[0]
    if da.values.shape != (n, d):
        raise ShapeMismatch(
            f"DA block is {da.values.shape}, expected ({n}, {d})"
        )

    def scaled(block, w):
        m = block.values.max()
        if m == 0.0:
            return block.values * w
        return block.values * (w / m)

    out = np.zeros((n + d, n + d))
    out[:n, :n] = scaled(dd, weights.w_dd)
    out[n:, n:] = scaled(aa, weights.w_aa)
    out[:n, n:] = scaled(da, weights.w_da)
    out[n:, :n] = out[:n, n:].T
    np.fill_diagonal(out, 0.0)
    return CompositeMatrix(out, n, d)


def composite_from_dataset(nds, weights=FusionWeights()):
    """Convenience path: normalized dataset straight to composite matrix."""
    return fuse(
        data_distance_block(nds),
        attribute_dissimilarity_block(nds),
        data_attribute_block(nds),
        weights,
    )


def dump_composite_csv(cm, labels, path):
    """Debug dump with node labels as row/column headers."""
    import csv

    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([""] + labels)
        for lab, row in zip(labels, cm.values):
            w.writerow([lab] + [repr(float(v)) for v in row])
