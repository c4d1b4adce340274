"""2D embedding of a dissimilarity matrix by SMACOF stress majorization.

Initialization is classical (Torgerson) scaling by default, which makes
runs deterministic without a seed; each SMACOF iteration is a Guttman
transform with uniform weights, so the stress trace never increases.
"""

from dataclasses import dataclass, field

import numpy as np

EPS_COINCIDENT = 1e-12


@dataclass(frozen=True)
class Embedding:
    coords: np.ndarray  # (m, 2)
    node_kinds: tuple  # "data" | "attribute" per index

    def __post_init__(self):
        if self.coords.ndim != 2 or self.coords.shape[1] != 2:
            raise ValueError("coords must be (m, 2)")
        if len(self.node_kinds) != self.coords.shape[0]:
            raise ValueError("node_kinds length mismatch")
        if not np.all(np.isfinite(self.coords)):
            raise ValueError("coordinates must be finite")

    @property
    def m(self):
        return self.coords.shape[0]

    def bbox(self):
        return (
            float(self.coords[:, 0].min()),
            float(self.coords[:, 1].min()),
            float(self.coords[:, 0].max()),
            float(self.coords[:, 1].max()),
        )


@dataclass(frozen=True)
class StressReport:
    trace: list = field(default_factory=list)  # stress after init, then per step
    final_stress: float = 0.0
    iterations: int = 0
    converged: bool = False


@dataclass(frozen=True)
class MdsParams:
    max_iter: int = 300
    rel_tol: float = 1e-7
    init_mode: str = "classical"  # or "random"
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if self.rel_tol <= 0:
            raise ValueError("rel_tol must be positive")
        if self.init_mode not in ("classical", "random"):
            raise ValueError(f"unknown init_mode {self.init_mode!r}")


def _matrix_and_kinds(D):
    # Accept either a CompositeMatrix or a bare square ndarray.
    if hasattr(D, "values"):
        kinds = tuple(
            "data" if i < D.n_data else "attribute" for i in range(D.size)
        )
        return D.values, kinds
    D = np.asarray(D, dtype=float)
    return D, ("data",) * D.shape[0]


def _pairwise(X):
    diff = X[:, None, :] - X[None, :, :]
    return np.sqrt(np.sum(diff * diff, axis=2))


def stress(D, X):
    """Kruskal stress-1 between target dissimilarities and embedded distances."""
    delta, _ = _matrix_and_kinds(D)
    coords = X.coords if isinstance(X, Embedding) else np.asarray(X, float)
    dist = _pairwise(coords)
    iu = np.triu_indices(delta.shape[0], k=1)
    denom = np.sum(delta[iu] ** 2)
    if denom == 0.0:
        return 0.0
    num = np.sum((dist[iu] - delta[iu]) ** 2)
    return float(np.sqrt(num / denom))


def classical_init(D):
    """Torgerson double centering; top-2 eigenpairs give the start layout."""
    delta, kinds = _matrix_and_kinds(D)
    m = delta.shape[0]
    d2 = delta * delta
    row_mean = d2.mean(axis=0)
    grand = d2.mean()
    b = -0.5 * (d2 - row_mean[None, :] - row_mean[:, None] + grand)
    evals, evecs = np.linalg.eigh(b)
    order = np.argsort(evals)[::-1][:2]
    coords = np.zeros((m, 2))
    for axis, idx in enumerate(order):
        lam = max(evals[idx], 0.0)
        coords[:, axis] = evecs[:, idx] * np.sqrt(lam)
    return Embedding(coords, kinds)


def random_init(D, seed=0):
    delta, kinds = _matrix_and_kinds(D)
    rng = np.random.default_rng(seed)
    scale = delta.max() if delta.max() > 0 else 1.0
    coords = rng.uniform(-0.5, 0.5, size=(delta.shape[0], 2)) * scale
    return Embedding(coords, kinds)


def smacof_step(D, X):
    """One Guttman transform with uniform weights: X' = B(X) X / m."""
    delta, kinds = _matrix_and_kinds(D)
    coords = X.coords if isinstance(X, Embedding) else np.asarray(X, float)
    m = delta.shape[0]
    dist = _pairwise(coords)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(dist < EPS_COINCIDENT, 0.0, delta / np.where(dist == 0, 1.0, dist))
    b = -ratio
    np.fill_diagonal(b, 0.0)
    np.fill_diagonal(b, -b.sum(axis=1))
    new_coords = (b @ coords) / m
    kinds_out = X.node_kinds if isinstance(X, Embedding) else kinds
    return Embedding(new_coords, kinds_out)


def run_mds(D, params=MdsParams()):
    """Iterate SMACOF until the relative stress change drops below rel_tol."""
    if params.init_mode == "classical":
        X = classical_init(D)
    else:
        X = random_init(D, params.seed)
    trace = [stress(D, X)]
    converged = False
    iterations = 0
    for _ in range(params.max_iter):
        X = smacof_step(D, X)
        s = stress(D, X)
        trace.append(s)
        iterations += 1
        prev = trace[-2]
        if prev == 0.0 or abs(prev - s) / prev < params.rel_tol:
            converged = True
            break
    report = StressReport(
        trace=trace,
        final_stress=trace[-1],
        iterations=iterations,
        converged=converged,
    )
    return X, report


def procrustes_rms(A, B):
    """RMS residual after rigidly aligning point set B onto A.

    Allows translation, rotation, and reflection (no scaling); used to
    compare embeddings that are equivalent up to rigid motion.
    """
    A = np.asarray(A, float)
    B = np.asarray(B, float)
    A0 = A - A.mean(axis=0)
    B0 = B - B.mean(axis=0)
    u, _, vt = np.linalg.svd(B0.T @ A0)
    r = u @ vt
    resid = A0 - B0 @ r
    return float(np.sqrt(np.mean(np.sum(resid * resid, axis=1))))
