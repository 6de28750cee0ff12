"""Protograph base matrices and spatially coupled (terminated/tail-biting) constructions.

A protograph is a small Tanner graph given by an integer base matrix whose
entry (i, j) counts the edges between check node i and variable node j.
Coupling replicates the protograph L times and spreads its edges over w+1
consecutive time positions; termination appends extra check rows while
tail-biting wraps them around.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .errors import InvalidLength, ShapeMismatch, SpreadingMismatch


@dataclass(frozen=True)
class BaseMatrix:
    """Nonnegative integer protograph matrix with per-column puncture flags."""

    entries: np.ndarray
    punctured: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.int64)
        if entries.ndim != 2:
            raise ShapeMismatch("base matrix must be two-dimensional")
        if np.any(entries < 0):
            raise ValueError("base matrix entries must be nonnegative")
        if np.any(entries.sum(axis=1) == 0) or np.any(entries.sum(axis=0) == 0):
            raise ValueError("base matrix must have no all-zero row or column")
        punct = self.punctured
        if punct is None:
            punct = np.zeros(entries.shape[1], dtype=bool)
        punct = np.asarray(punct, dtype=bool)
        if punct.shape != (entries.shape[1],):
            raise ShapeMismatch("puncture flags must have one entry per column")
        entries.setflags(write=False)
        punct.setflags(write=False)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "punctured", punct)

    @property
    def rows(self) -> int:
        return self.entries.shape[0]

    @property
    def cols(self) -> int:
        return self.entries.shape[1]

    def column_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=0)

    def row_degrees(self) -> np.ndarray:
        return self.entries.sum(axis=1)


@dataclass(frozen=True)
class CouplingSpec:
    """Edge-spreading of a base matrix into w+1 submatrices B_0..B_w."""

    submatrices: tuple[np.ndarray, ...]
    punctured: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        subs = tuple(np.asarray(s, dtype=np.int64) for s in self.submatrices)
        if len(subs) < 2:
            raise SpreadingMismatch("need at least w+1 = 2 submatrices")
        shape = subs[0].shape
        for s in subs:
            if s.shape != shape:
                raise ShapeMismatch("all submatrices must share the base shape")
            if np.any(s < 0):
                raise ValueError("submatrix entries must be nonnegative")
        punct = self.punctured
        if punct is None:
            punct = np.zeros(shape[1], dtype=bool)
        punct = np.asarray(punct, dtype=bool)
        if punct.shape != (shape[1],):
            raise ShapeMismatch("puncture flags must have one entry per column")
        for s in subs:
            s.setflags(write=False)
        punct.setflags(write=False)
        object.__setattr__(self, "submatrices", subs)
        object.__setattr__(self, "punctured", punct)

    @property
    def coupling_width(self) -> int:
        return len(self.submatrices) - 1

    @property
    def base(self) -> BaseMatrix:
        total = sum(self.submatrices[1:], start=self.submatrices[0].copy())
        return BaseMatrix(total, self.punctured)


def decompose_edge_spreading(base: BaseMatrix, w: int, rule) -> CouplingSpec:
    """Validate an edge-spreading ``rule`` (sequence of w+1 matrices) against ``base``."""
    if w < 1:
        raise InvalidLength("coupling width must be at least 1")
    subs = [np.asarray(s, dtype=np.int64) for s in rule]
    if len(subs) != w + 1:
        raise SpreadingMismatch(f"rule must supply w+1 = {w + 1} submatrices, got {len(subs)}")
    for s in subs:
        if s.shape != base.entries.shape:
            raise ShapeMismatch(
                f"submatrix shape {s.shape} differs from base {base.entries.shape}")
    total = np.sum(subs, axis=0)
    if not np.array_equal(total, base.entries):
        raise SpreadingMismatch("submatrices do not sum to the base matrix")
    return CouplingSpec(tuple(subs), base.punctured)


def build_terminated(spec: CouplingSpec, coupling_length: int) -> BaseMatrix:
    """Block-banded terminated coupling of ``spec`` over ``coupling_length`` positions."""
    w = spec.coupling_width
    if coupling_length <= w:
        raise InvalidLength(f"coupling length must exceed w={w}")
    mp, np_ = spec.submatrices[0].shape
    out = np.zeros((mp * (coupling_length + w), np_ * coupling_length), dtype=np.int64)
    for t in range(coupling_length):
        for k, sub in enumerate(spec.submatrices):
            r = (t + k) * mp
            out[r:r + mp, t * np_:(t + 1) * np_] = sub
    punct = np.tile(spec.punctured, coupling_length)
    return BaseMatrix(out, punct)


def build_tailbiting(spec: CouplingSpec, coupling_length: int) -> BaseMatrix:
    """Tail-biting coupling: terminated matrix with its tail rows folded onto the head."""
    w = spec.coupling_width
    te = build_terminated(spec, coupling_length)
    mp = spec.submatrices[0].shape[0]
    body = te.entries[:mp * coupling_length].copy()
    body[:mp * w] += te.entries[mp * coupling_length:]
    return BaseMatrix(body, te.punctured)


def code_rate(base: BaseMatrix) -> Fraction:
    """Design rate with punctured columns excluded from the transmitted length."""
    n_tx = base.cols - int(base.punctured.sum())
    if n_tx <= 0 or base.cols <= base.rows:
        raise ValueError("rate undefined: no transmitted columns in excess of checks")
    return Fraction(base.cols - base.rows, n_tx)


def te_rate(spec: CouplingSpec, coupling_length: int) -> Fraction:
    """Rate of the terminated coupling at finite length."""
    w = spec.coupling_width
    if coupling_length <= w:
        raise InvalidLength(f"coupling length must exceed w={w}")
    r = code_rate(spec.base)
    return 1 - Fraction(coupling_length + w, coupling_length) * (1 - r)


# --- built-in family -------------------------------------------------------

def regular_36() -> BaseMatrix:
    """The regular (3,6) protograph: one check, two variables, triple edges."""
    return BaseMatrix(np.array([[3, 3]]))


def regular_36_coupling() -> CouplingSpec:
    """Symmetric unit edge-spreading of the (3,6) protograph with w = 2."""
    one = np.array([[1, 1]])
    return decompose_edge_spreading(regular_36(), 2, [one, one, one])


# --- plain-text exchange format --------------------------------------------

def _parse_matrix_lines(lines: list[str]):
    header = lines[0].split()
    if len(header) != 2:
        raise ValueError("expected header 'rows cols'")
    mp, np_ = int(header[0]), int(header[1])
    rows = []
    for line in lines[1:1 + mp]:
        row = [int(x) for x in line.split()]
        if len(row) != np_:
            raise ValueError(f"expected {np_} entries per row, got {len(row)}")
        rows.append(row)
    punct = np.zeros(np_, dtype=bool)
    rest = lines[1 + mp:]
    if rest and rest[0].startswith("punctured:"):
        idx = [int(x) for x in rest[0].split(":", 1)[1].split()]
        punct[idx] = True
        rest = rest[1:]
    return np.array(rows, dtype=np.int64), punct, rest


def loads_base_matrix(text: str) -> BaseMatrix:
    """Parse the plain-text format: 'm_p n_p' header, rows, optional puncture line."""
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    entries, punct, rest = _parse_matrix_lines(lines)
    if rest:
        raise ValueError(f"unexpected trailing content: {rest[0]!r}")
    return BaseMatrix(entries, punct)


def load_base_matrix(path) -> BaseMatrix:
    return loads_base_matrix(Path(path).read_text())


def dumps_base_matrix(base: BaseMatrix) -> str:
    out = [f"{base.rows} {base.cols}"]
    out += [" ".join(str(x) for x in row) for row in base.entries]
    if base.punctured.any():
        out.append("punctured: " + " ".join(str(j) for j in np.flatnonzero(base.punctured)))
    return "\n".join(out) + "\n"


def loads_coupling_spec(text: str) -> CouplingSpec:
    """Parse 'w' on the first line followed by w+1 stacked matrices.

    The matrix block carries a single 'm_p n_p' header and (w+1)*m_p rows,
    B_0 first.  A trailing 'punctured:' line applies per protograph column.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    w = int(lines[0])
    header = lines[1].split()
    mp, np_ = int(header[0]), int(header[1])
    stacked = [("%s %s" % ((w + 1) * mp, np_))] + lines[2:]
    entries, punct, rest = _parse_matrix_lines(stacked)
    if rest:
        raise ValueError(f"unexpected trailing content: {rest[0]!r}")
    subs = tuple(entries[k * mp:(k + 1) * mp] for k in range(w + 1))
    return CouplingSpec(subs, punct)


def load_coupling_spec(path) -> CouplingSpec:
    return loads_coupling_spec(Path(path).read_text())


def dumps_coupling_spec(spec: CouplingSpec) -> str:
    mp, np_ = spec.submatrices[0].shape
    out = [str(spec.coupling_width), f"{mp} {np_}"]
    for sub in spec.submatrices:
        out += [" ".join(str(x) for x in row) for row in sub]
    if spec.punctured.any():
        out.append("punctured: " + " ".join(str(j) for j in np.flatnonzero(spec.punctured)))
    return "\n".join(out) + "\n"
