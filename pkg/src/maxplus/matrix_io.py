"""Plain-text matrix files and JSON model files.

Matrix text format: the first line holds ``k``; each of the next ``k``
lines holds ``k`` whitespace-separated tokens, either a decimal literal or
``-inf``. Blank lines and lines starting with ``#`` are ignored.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .core import BOTTOM, MaxPlusError, as_matrix


class MatrixFormatError(MaxPlusError):
    def __init__(self, message: str, line: int, column: int = 1, source: str = "<string>"):
        super().__init__(f"{source}:{line}:{column}: {message}")
        self.line = line
        self.column = column


def format_weight(x: float) -> str:
    if x == BOTTOM:
        return "-inf"
    if float(x).is_integer() and abs(x) < 2**53:
        return str(int(x))
    return format(float(x), ".17g")


def dumps_matrix(A) -> str:
    A = as_matrix(A)
    lines = [str(A.shape[0])]
    lines += [" ".join(format_weight(x) for x in row) for row in A]
    return "\n".join(lines) + "\n"


def _token_columns(line: str):
    col = 0
    for tok in line.split():
        col = line.index(tok, col)
        yield tok, col + 1
        col += len(tok)


def loads_matrix(text: str, source: str = "<string>") -> np.ndarray:
    rows = [(n, raw) for n, raw in enumerate(text.splitlines(), start=1)
            if raw.strip() and not raw.lstrip().startswith("#")]
    if not rows:
        raise MatrixFormatError("empty matrix file", 1, 1, source)
    lineno, header = rows[0]
    try:
        k = int(header.strip())
    except ValueError:
        raise MatrixFormatError(f"expected dimension, got {header.strip()!r}", lineno, 1, source)
    if k < 1:
        raise MatrixFormatError("dimension must be positive", lineno, 1, source)
    body = rows[1:]
    if len(body) != k:
        last = body[-1][0] if body else lineno
        raise MatrixFormatError(f"expected {k} rows, found {len(body)}", last, 1, source)
    out = np.empty((k, k))
    for i, (lineno, raw) in enumerate(body):
        toks = list(_token_columns(raw))
        if len(toks) != k:
            raise MatrixFormatError(f"expected {k} entries, found {len(toks)}", lineno, 1, source)
        for j, (tok, col) in enumerate(toks):
            if tok.lower() == "-inf":
                out[i, j] = BOTTOM
                continue
            try:
                x = float(tok)
            except ValueError:
                raise MatrixFormatError(f"bad token {tok!r}", lineno, col, source)
            if not math.isfinite(x):
                raise MatrixFormatError(f"token {tok!r} is not finite", lineno, col, source)
            out[i, j] = x
    return out


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    return loads_matrix(path.read_text(), source=str(path))


def write_matrix(path, A) -> None:
    Path(path).write_text(dumps_matrix(A))


def matrix_to_json(A):
    """Nested lists with ``"-inf"`` strings for bottom entries."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        return [_json_weight(x) for x in A]
    return [[_json_weight(x) for x in row] for row in A]


def _json_weight(x):
    if x == BOTTOM:
        return "-inf"
    x = float(x)
    return int(x) if x.is_integer() and abs(x) < 2**53 else x


def load_model_json(path):
    """Parse a model file into a ``StochasticModel`` or ``SamplerModel``."""
    from .stochastic import SamplerModel, StochasticModel

    data = json.loads(Path(path).read_text())
    if "sampler" in data:
        return SamplerModel(data["sampler"], data.get("params", {}))
    gens = [as_matrix(g) for g in data["generators"]]
    k = data.get("k")
    if k is not None and any(g.shape[0] != k for g in gens):
        raise MaxPlusError(f"generator dimension does not match k={k}")
    p = data.get("p")
    return StochasticModel(gens, p)
