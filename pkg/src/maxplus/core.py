"""Max-plus scalar and matrix arithmetic.

Matrices are plain ``numpy`` float arrays. The bottom element of the
semiring is ``BOTTOM`` (``-inf``); ``+inf`` and ``nan`` are rejected on
input so that every sum stays well defined.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Tuple, Union

import numpy as np

BOTTOM = -math.inf
DEFAULT_TOL = 1e-9


class MaxPlusError(ValueError):
    """Raised when an input violates an operation's contract."""


def default_tol() -> float:
    """Tolerance used when a function gets ``tol=None``.

    The ``TROPICAL_TOL`` environment variable overrides ``DEFAULT_TOL``.
    """
    env = os.environ.get("TROPICAL_TOL")
    if env:
        return float(env)
    return DEFAULT_TOL


def resolve_tol(tol: Optional[float]) -> float:
    return default_tol() if tol is None else float(tol)


def is_bottom(x) -> np.ndarray:
    return np.isneginf(x)


def as_matrix(A, square: bool = True) -> np.ndarray:
    """Coerce ``A`` to a 2-d float array over R_max.

    Strings ``"-inf"`` are accepted as bottom.
    """
    arr = np.array(A, dtype=object if _has_strings(A) else None)
    if arr.dtype == object:
        arr = np.vectorize(_parse_weight, otypes=[float])(arr)
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 2:
        raise MaxPlusError(f"expected a 2-d matrix, got shape {arr.shape}")
    if square and arr.shape[0] != arr.shape[1]:
        raise MaxPlusError(f"expected a square matrix, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise MaxPlusError("matrix must have at least one row and column")
    _check_values(arr)
    return arr


def as_vector(x) -> np.ndarray:
    arr = np.array(x, dtype=object if _has_strings(x) else None)
    if arr.dtype == object:
        arr = np.vectorize(_parse_weight, otypes=[float])(arr)
    arr = np.asarray(arr, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise MaxPlusError(f"expected a non-empty 1-d vector, got shape {arr.shape}")
    _check_values(arr)
    return arr


def _has_strings(x) -> bool:
    if isinstance(x, str):
        return True
    if isinstance(x, (list, tuple)):
        return any(_has_strings(v) for v in x)
    return False


def _parse_weight(v) -> float:
    if isinstance(v, str):
        s = v.strip().lower()
        if s in ("-inf", "-infinity", "bottom"):
            return BOTTOM
        return float(s)
    return float(v)


def _check_values(arr: np.ndarray) -> None:
    if np.isnan(arr).any():
        raise MaxPlusError("nan is not an element of R_max")
    if np.isposinf(arr).any():
        raise MaxPlusError("+inf is not an element of R_max")


def identity(k: int) -> np.ndarray:
    """Max-plus identity: 0 on the diagonal, bottom elsewhere."""
    out = np.full((k, k), BOTTOM)
    np.fill_diagonal(out, 0.0)
    return out


def bottom_matrix(k: int, m: Optional[int] = None) -> np.ndarray:
    return np.full((k, k if m is None else m), BOTTOM)


def otimes(A, B) -> np.ndarray:
    """Max-plus product ``A ⊗ B``.

    ``B`` may be a matrix or a vector; the result has the matching shape.
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    vec = B.ndim == 1
    if vec:
        B = B[:, None]
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise MaxPlusError(f"dimension mismatch: {A.shape} ⊗ {B.shape}")
    # -inf + finite = -inf, and +inf never occurs, so plain addition is total.
    out = (A[:, :, None] + B[None, :, :]).max(axis=1)
    return out[:, 0] if vec else out


def oplus(A, B) -> np.ndarray:
    """Entrywise maximum."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise MaxPlusError(f"dimension mismatch: {A.shape} ⊕ {B.shape}")
    return np.maximum(A, B)


def scalar_otimes(a: float, A) -> np.ndarray:
    return np.asarray(A, dtype=float) + a


def mat_power(A, n: int) -> np.ndarray:
    """``n``-th max-plus power by repeated squaring; ``n = 0`` gives the identity."""
    A = as_matrix(A)
    if n < 0:
        raise MaxPlusError("power must be nonnegative")
    result = identity(A.shape[0])
    base = A
    while n:
        if n & 1:
            result = otimes(result, base)
        n >>= 1
        if n:
            base = otimes(base, base)
    return result


def product(matrices: Sequence) -> np.ndarray:
    """Left-ordered product ``M[n-1] ⊗ ... ⊗ M[0]`` of a word read first-to-last."""
    if not matrices:
        raise MaxPlusError("empty product")
    out = np.asarray(matrices[0], dtype=float)
    for M in matrices[1:]:
        out = otimes(M, out)
    return out


def normalize_max(A) -> np.ndarray:
    """Shift ``A`` so its largest entry is 0 (projective representative)."""
    A = np.asarray(A, dtype=float)
    top = A.max()
    if top == BOTTOM:
        return A.copy()
    return A - top


@dataclass(frozen=True)
class MatrixClassification:
    in_Mk: bool
    primitive: bool
    primitivity_index: Optional[int] = None


def support(A) -> np.ndarray:
    return ~is_bottom(np.asarray(A, dtype=float))


def classify_matrix(A) -> MatrixClassification:
    """Test membership in M_k (no bottom row) and primitivity.

    Primitivity is decided on the boolean support pattern; Wielandt's bound
    ``(k-1)^2 + 1`` limits the number of powers to try.
    """
    A = as_matrix(A)
    k = A.shape[0]
    S = support(A)
    in_mk = bool(S.any(axis=1).all())
    if not in_mk:
        return MatrixClassification(False, False, None)
    P = S.copy()
    for n in range(1, (k - 1) ** 2 + 2):
        if P.all():
            return MatrixClassification(True, True, n)
        P = (P.astype(np.int64) @ S.astype(np.int64)) > 0
    return MatrixClassification(True, False, None)


def rank1(A, tol: Optional[float] = None) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """Return ``(a, b)`` with ``A[i, j] = a[i] + b[j]`` if ``A`` has rank 1, else ``None``.

    Bottom columns count as proportional to every column. The support of a
    rank-1 matrix is therefore a full rectangle (rows R) x (columns C).
    """
    tol = resolve_tol(tol)
    A = as_matrix(A, square=False)
    S = support(A)
    if not S.any():
        raise MaxPlusError("rank is undefined for the all-bottom matrix")
    rows = S.any(axis=1)
    cols = S.any(axis=0)
    if not (S[np.ix_(rows, cols)]).all():
        return None
    i0 = int(np.argmax(rows))
    j0 = int(np.argmax(cols))
    a = np.where(rows, A[:, j0], BOTTOM)
    b = np.where(cols, A[i0, :] - A[i0, j0], BOTTOM)
    sub = A[np.ix_(rows, cols)]
    recon = a[rows][:, None] + b[cols][None, :]
    if np.max(np.abs(sub - recon)) > tol:
        return None
    return a, b


def proportional(x, y, tol: Optional[float] = None) -> Optional[float]:
    """Return ``lam`` with ``x = lam ⊗ y`` (finite ``lam``), or ``None``."""
    tol = resolve_tol(tol)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    sx, sy = ~is_bottom(x), ~is_bottom(y)
    if not np.array_equal(sx, sy) or not sx.any():
        return None
    d = x[sx] - y[sx]
    if np.ptp(d) > tol:
        return None
    return float(d[0])


@dataclass(frozen=True)
class LinearForm:
    """Linear form ``sum alpha_q V_q`` on R_max^Q; bottom if a used entry is bottom.

    Keys are ``(i, j)`` entry indices, or ``(slot, i, j)`` with ``slot`` in
    ``{"A", "B"}`` for forms on pairs of matrices. Zero coefficients are dropped.
    """

    coefficients: Mapping[tuple, float] = field(default_factory=dict)

    def __post_init__(self):
        clean = {key: float(v) for key, v in self.coefficients.items() if v != 0}
        object.__setattr__(self, "coefficients", clean)

    def __call__(self, V) -> float:
        return eval_linear_form(self, V)

    def __add__(self, other: "LinearForm") -> "LinearForm":
        out = dict(self.coefficients)
        for key, v in other.coefficients.items():
            out[key] = out.get(key, 0.0) + v
        return LinearForm(out)

    def __neg__(self) -> "LinearForm":
        return LinearForm({key: -v for key, v in self.coefficients.items()})

    def __sub__(self, other: "LinearForm") -> "LinearForm":
        return self + (-other)

    def scaled(self, c: float) -> "LinearForm":
        return LinearForm({key: c * v for key, v in self.coefficients.items()})

    @property
    def is_zero(self) -> bool:
        return not self.coefficients


def eval_linear_form(f: LinearForm, V) -> float:
    """Evaluate ``f`` at a matrix ``V`` or at a pair ``V = (A, B)``."""
    if isinstance(V, (tuple, list)) and len(V) == 2 and np.ndim(V[0]) == 2:
        slots = {"A": np.asarray(V[0], dtype=float), "B": np.asarray(V[1], dtype=float)}
    else:
        slots = {None: np.asarray(V, dtype=float)}
    total = 0.0
    for key, alpha in f.coefficients.items():
        if len(key) == 3:
            slot, i, j = key
        else:
            slot, (i, j) = None, key
        if slot not in slots:
            raise MaxPlusError(f"form index {key!r} does not fit the argument")
        x = slots[slot][i, j]
        if x == BOTTOM:
            return BOTTOM
        total += alpha * x
    return total


def arctan_distance(A, B) -> float:
    """``max |arctan A_ij - arctan B_ij|`` with ``arctan(-inf) = -pi/2``."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if A.shape != B.shape:
        raise MaxPlusError(f"dimension mismatch: {A.shape} vs {B.shape}")
    return float(np.max(np.abs(np.arctan(A) - np.arctan(B))))


Matrix = Union[np.ndarray, Sequence[Sequence[float]]]
