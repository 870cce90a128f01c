"""Dense small-d symmetric linear algebra and the adaptive dataset model.

Everything downstream (weight recursion, estimators, simulators) works on the
two value types defined here: an ordered dataset whose row order encodes the
collection order, and exactly-symmetric matrices stored as packed upper
triangles.  Dimensions are small by design (d <= ~64), so all matrix work is
dense and O(d^3) routines are acceptable.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

__all__ = [
    "Observation",
    "AdaptiveDataset",
    "SymmetricMatrix",
    "SampleCovariance",
    "sample_covariance",
    "sym_eigh",
    "sym_sqrt",
    "sym_inv_sqrt",
    "solve_spd",
    "read_dataset_csv",
    "write_dataset_csv",
]


def _as_matrix(S) -> np.ndarray:
    if isinstance(S, SampleCovariance):
        S = S.S
    if isinstance(S, SymmetricMatrix):
        return S.array
    A = np.asarray(S, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    return A


@dataclass(frozen=True)
class Observation:
    """One covariate/response pair (x_i, y_i)."""

    x: np.ndarray
    y: float

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        if x.ndim != 1:
            raise ValueError("covariate must be a vector")
        if not np.all(np.isfinite(x)) or not math.isfinite(self.y):
            raise ValueError("observation has non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", float(self.y))


class AdaptiveDataset:
    """Ordered regression rows; row i may depend only on rows < i.

    The ordering is semantically meaningful (it encodes the filtration), so
    the dataset is immutable once built.  Internally rows live in a dense
    (n, d) design matrix plus a response vector.
    """

    __slots__ = ("X", "y", "meta")

    def __init__(self, X, y, meta: dict | None = None):
        X = np.ascontiguousarray(X, dtype=float)
        y = np.ascontiguousarray(y, dtype=float)
        if X.ndim != 2:
            raise ValueError("design must be two-dimensional")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("response length must match row count")
        if not np.all(np.isfinite(X)) or not np.all(np.isfinite(y)):
            raise ValueError("dataset has non-finite entries")
        self.X = X
        self.y = y
        self.meta = dict(meta or {})
        self.X.setflags(write=False)
        self.y.setflags(write=False)

    @classmethod
    def from_rows(cls, rows: Sequence[Observation], meta: dict | None = None) -> "AdaptiveDataset":
        if not rows:
            raise ValueError("empty dataset")
        d = rows[0].x.shape[0]
        for obs in rows:
            if obs.x.shape[0] != d:
                raise ValueError("all rows must share dimension d")
        X = np.stack([obs.x for obs in rows])
        y = np.array([obs.y for obs in rows])
        return cls(X, y, meta)

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n(self) -> int:
        return self.X.shape[0]

    def __len__(self) -> int:
        return self.X.shape[0]

    def rows(self) -> Iterator[Observation]:
        for i in range(self.n):
            yield Observation(self.X[i].copy(), float(self.y[i]))

    def extended(self, X_new, y_new, meta_update: dict | None = None) -> "AdaptiveDataset":
        """New dataset with extra rows appended (collection order preserved)."""
        X_new = np.atleast_2d(np.asarray(X_new, dtype=float))
        y_new = np.atleast_1d(np.asarray(y_new, dtype=float))
        meta = dict(self.meta)
        meta.update(meta_update or {})
        return AdaptiveDataset(np.vstack([self.X, X_new]), np.concatenate([self.y, y_new]), meta)

    def __repr__(self) -> str:
        return f"AdaptiveDataset(n={self.n}, d={self.d}, meta={self.meta!r})"


class SymmetricMatrix:
    """d x d real symmetric matrix, stored as its packed upper triangle.

    Reconstruction mirrors the upper triangle into the lower one, so
    A[j, k] == A[k, j] holds exactly by construction.
    """

    __slots__ = ("d", "_packed")

    def __init__(self, packed: np.ndarray, d: int):
        packed = np.asarray(packed, dtype=float)
        if packed.shape != (d * (d + 1) // 2,):
            raise ValueError("packed length does not match dimension")
        self.d = d
        self._packed = packed

    @classmethod
    def from_array(cls, A, symmetrize: bool = True) -> "SymmetricMatrix":
        A = _as_matrix(A)
        d = A.shape[0]
        if symmetrize:
            A = 0.5 * (A + A.T)
        elif not np.array_equal(A, A.T):
            raise ValueError("matrix is not symmetric")
        iu = np.triu_indices(d)
        return cls(A[iu].copy(), d)

    @classmethod
    def from_diag(cls, diag) -> "SymmetricMatrix":
        diag = np.asarray(diag, dtype=float)
        return cls.from_array(np.diag(diag), symmetrize=False)

    @classmethod
    def zeros(cls, d: int) -> "SymmetricMatrix":
        return cls(np.zeros(d * (d + 1) // 2), d)

    @classmethod
    def identity(cls, d: int) -> "SymmetricMatrix":
        return cls.from_diag(np.ones(d))

    @property
    def array(self) -> np.ndarray:
        A = np.zeros((self.d, self.d))
        iu = np.triu_indices(self.d)
        A[iu] = self._packed
        A.T[iu] = self._packed
        return A

    def diagonal(self) -> np.ndarray:
        return np.diag(self.array).copy()

    def __repr__(self) -> str:
        return f"SymmetricMatrix({self.array!r})"


@dataclass
class SampleCovariance:
    """S = sum_i x_i x_i^T together with the number of absorbed rows."""

    S: SymmetricMatrix
    n: int

    @property
    def array(self) -> np.ndarray:
        return self.S.array

    def updated(self, x) -> "SampleCovariance":
        x = np.asarray(x, dtype=float)
        return SampleCovariance(SymmetricMatrix.from_array(self.array + np.outer(x, x)), self.n + 1)


def sample_covariance(dataset: AdaptiveDataset) -> SampleCovariance:
    """Sum of covariate outer products over all rows."""
    if len(dataset) == 0:
        raise ValueError("empty dataset")
    S = dataset.X.T @ dataset.X
    return SampleCovariance(SymmetricMatrix.from_array(S), len(dataset))


def sym_eigh(S, tol_scale: float = 1e-13) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Sweeps run until every off-diagonal entry is below tol_scale * ||S||_F.
    Returns (eigenvalues ascending, eigenvectors as columns).  d is small
    throughout this package, so the O(d^3)-per-sweep cost is irrelevant.
    """
    A = _as_matrix(S).copy()
    d = A.shape[0]
    if not np.allclose(A, A.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(A).max(initial=0.0))):
        raise ValueError("matrix is not symmetric")
    A = 0.5 * (A + A.T)
    V = np.eye(d)
    if d == 1:
        return A[0, :1].copy(), V
    fro = float(np.linalg.norm(A))
    thresh = tol_scale * fro
    if fro == 0.0:
        return np.zeros(d), V
    for _ in range(60):  # sweeps; quadratic convergence makes this generous
        off = 0.0
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = A[p, q]
                off = max(off, abs(apq))
                if abs(apq) <= thresh:
                    continue
                # classical 2x2 rotation zeroing A[p, q]
                theta = (A[q, q] - A[p, p]) / (2.0 * apq)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.sqrt(1.0 + t * t)
                s = t * c
                rot_p = c * A[:, p] - s * A[:, q]
                rot_q = s * A[:, p] + c * A[:, q]
                A[:, p], A[:, q] = rot_p, rot_q
                rot_p = c * A[p, :] - s * A[q, :]
                rot_q = s * A[p, :] + c * A[q, :]
                A[p, :], A[q, :] = rot_p, rot_q
                A[p, q] = A[q, p] = 0.0
                rot_p = c * V[:, p] - s * V[:, q]
                rot_q = s * V[:, p] + c * V[:, q]
                V[:, p], V[:, q] = rot_p, rot_q
        if off <= thresh:
            break
    evals = np.diag(A).copy()
    order = np.argsort(evals)
    return evals[order], V[:, order]


def _psd_eigvals(S, context: str) -> tuple[np.ndarray, np.ndarray]:
    evals, vecs = sym_eigh(S)
    lam_max = float(evals[-1])
    op_norm = max(abs(float(evals[0])), abs(lam_max))
    if evals[0] < -1e-8 * op_norm:
        raise ValueError(f"not PSD: min eigenvalue {evals[0]:.3e} ({context})")
    # round-off guard for rank-deficient early-round covariances
    evals = np.where((evals < 0.0) & (evals >= -1e-8 * max(lam_max, 0.0)), 0.0, evals)
    evals = np.maximum(evals, 0.0)
    return evals, vecs


def sym_sqrt(S) -> SymmetricMatrix:
    """Symmetric PSD square root R with R @ R ~= S."""
    evals, vecs = _psd_eigvals(S, "sym_sqrt")
    R = (vecs * np.sqrt(evals)) @ vecs.T
    return SymmetricMatrix.from_array(R)


def sym_inv_sqrt(S) -> SymmetricMatrix:
    """Symmetric R with R @ S @ R ~= I; requires S positive definite."""
    evals, vecs = _psd_eigvals(S, "sym_inv_sqrt")
    lam_max = float(evals[-1])
    if lam_max <= 0.0 or evals[0] <= 1e-12 * lam_max:
        raise ValueError("singular covariance")
    R = (vecs / np.sqrt(evals)) @ vecs.T
    return SymmetricMatrix.from_array(R)


def solve_spd(S, b) -> np.ndarray:
    """Solve S u = b for symmetric positive definite S."""
    A = _as_matrix(S)
    b = np.asarray(b, dtype=float)
    try:
        np.linalg.cholesky(A)
    except np.linalg.LinAlgError:
        raise ValueError("singular covariance") from None
    return np.linalg.solve(A, b)


# ---------------------------------------------------------------------------
# CSV ingest: header `x1,...,xd,y`, one row per observation in collection
# order; plain IEEE-754 decimal text, NaN/Inf rejected.

def write_dataset_csv(dataset: AdaptiveDataset, path, sidecar: bool = True) -> None:
    d = dataset.d
    header = ",".join([f"x{j + 1}" for j in range(d)] + ["y"])
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for i in range(len(dataset)):
            cells = [repr(float(v)) for v in dataset.X[i]] + [repr(float(dataset.y[i]))]
            fh.write(",".join(cells) + "\n")
    if sidecar and dataset.meta:
        with open(str(path) + ".json", "w") as fh:
            json.dump(dataset.meta, fh, indent=2, sort_keys=True, default=str)
            fh.write("\n")


def read_dataset_csv(path) -> AdaptiveDataset:
    with open(path) as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if len(cols) < 2 or cols[-1] != "y" or cols[:-1] != [f"x{j + 1}" for j in range(len(cols) - 1)]:
            raise ValueError(f"bad dataset header {header!r}; expected x1,...,xd,y")
        d = len(cols) - 1
        X_rows, y_rows = [], []
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != d + 1:
                raise ValueError(f"line {lineno}: expected {d + 1} cells, got {len(cells)}")
            vals = [float(c) for c in cells]
            if not all(math.isfinite(v) for v in vals):
                raise ValueError(f"line {lineno}: non-finite value")
            X_rows.append(vals[:-1])
            y_rows.append(vals[-1])
    if not X_rows:
        raise ValueError("empty dataset")
    meta = {}
    try:
        with open(str(path) + ".json") as fh:
            meta = json.load(fh)
    except (OSError, json.JSONDecodeError):
        pass
    return AdaptiveDataset(np.array(X_rows), np.array(y_rows), meta)
