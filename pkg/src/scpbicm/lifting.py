"""Girth-aware PEG lifting of base matrices and systematic GF(2) encoding.

Each multiplicity-b protograph edge bundle becomes b*Z single edges
between the corresponding Z-node groups, placed one at a time on the
check node farthest from the variable in the current graph (PEG).  Coded
bits are ordered lexicographically by (protograph column, lift index),
so the first columns of a coupled base matrix occupy the start of the
codeword — the ordering the block-matched interleavers rely on.

Encoding uses a one-time full GF(2) elimination of H (bit-packed rows):
dependent rows are dropped for the encoder only, pivots become parity
positions, and the remaining columns carry the information bits.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import LiftTooSmall, RankDeficiencyUnresolved
from .protograph import BaseMatrix


class _PegStuck(Exception):
    """No eligible check node remains for the edge being placed."""


class LiftedCode:
    """Sparse parity-check matrix plus encoder and bit-ordering metadata."""

    def __init__(self, h: sp.csr_matrix, lift_factor: int, base: BaseMatrix,
                 seed: int):
        self.h = h
        self.lift_factor = lift_factor
        self.base = base
        self.seed = seed
        pivot_cols, free_cols, parity = _gf2_encoder(h)
        if len(free_cols) == 0:
            raise RankDeficiencyUnresolved("no information positions remain")
        self.pivot_cols = pivot_cols
        self.free_cols = free_cols
        self._parity = parity

    @property
    def n_bits(self) -> int:
        return self.h.shape[1]

    @property
    def n_checks(self) -> int:
        return self.h.shape[0]

    @property
    def rank(self) -> int:
        return len(self.pivot_cols)

    @property
    def info_len(self) -> int:
        return len(self.free_cols)

    @property
    def rate(self) -> float:
        return self.info_len / self.n_bits

    @cached_property
    def vn_of_bit(self) -> np.ndarray:
        """(n_bits, 2) array of (protograph column, lift index) per coded bit."""
        bits = np.arange(self.n_bits)
        return np.column_stack([bits // self.lift_factor, bits % self.lift_factor])

    @cached_property
    def decode_arrays(self):
        """Edge lists consumed by the BP kernels."""
        h = self.h
        chk_indptr = h.indptr.astype(np.int32)
        chk_evar = h.indices.astype(np.int32)
        order = np.argsort(chk_evar, kind="stable").astype(np.int32)
        var_indptr = np.searchsorted(
            chk_evar[order], np.arange(self.n_bits + 1)).astype(np.int32)
        return chk_indptr, chk_evar, var_indptr, order

    def encode(self, info: np.ndarray) -> np.ndarray:
        """Systematic encoding: info bits land on the free columns."""
        info = np.asarray(info, dtype=np.uint8)
        if len(info) != self.info_len:
            raise ValueError(f"expected {self.info_len} info bits, got {len(info)}")
        word = np.zeros(self.n_bits, dtype=np.uint8)
        word[self.free_cols] = info
        packed = np.packbits(info, bitorder="little")
        par = (np.bitwise_count(self._parity & packed).sum(axis=1) & 1).astype(np.uint8)
        word[self.pivot_cols] = par
        return word

    def extract_info(self, codeword: np.ndarray) -> np.ndarray:
        return np.asarray(codeword, dtype=np.uint8)[self.free_cols]

    def syndrome(self, bits: np.ndarray) -> np.ndarray:
        return (self.h @ np.asarray(bits, dtype=np.uint8)) & 1


def lift_peg(base: BaseMatrix, lift_factor: int, seed: int = 0,
             max_attempts: int = 12) -> LiftedCode:
    """PEG-lift ``base`` by ``lift_factor``, deterministic for a fixed seed."""
    b = base.entries
    if lift_factor < int(b.max()):
        raise LiftTooSmall(
            f"lift factor {lift_factor} cannot separate multiplicity {int(b.max())}")
    root = np.random.SeedSequence(seed)
    last = None
    for child in root.spawn(max_attempts):
        rng = np.random.default_rng(child)
        try:
            h = _peg_attempt(b, lift_factor, rng)
        except _PegStuck as exc:
            last = exc
            continue
        return LiftedCode(h, lift_factor, base, seed)
    raise _PegStuck(f"PEG failed after {max_attempts} attempts: {last}")


def _peg_attempt(b: np.ndarray, z: int, rng) -> sp.csr_matrix:
    mp, npc = b.shape
    n_var, n_chk = npc * z, mp * z
    col_deg = b.sum(axis=0)
    row_deg = b.sum(axis=1)
    var_adj = np.full((n_var, int(col_deg.max())), -1, dtype=np.int32)
    var_cnt = np.zeros(n_var, dtype=np.int32)
    chk_adj = np.full((n_chk, int(row_deg.max())), -1, dtype=np.int32)
    chk_cnt = np.zeros(n_chk, dtype=np.int32)
    bundle = np.zeros((n_chk, npc), dtype=np.int32)  # edges to column group j

    for j in range(npc):
        targets = np.flatnonzero(b[:, j])
        for zi in range(z):
            v = j * z + zi
            for i in targets:
                for _ in range(b[i, j]):
                    c = _select_cn(v, i, j, b, z, var_adj, var_cnt,
                                   chk_adj, chk_cnt, bundle, rng)
                    var_adj[v, var_cnt[v]] = c
                    var_cnt[v] += 1
                    chk_adj[c, chk_cnt[c]] = v
                    chk_cnt[c] += 1
                    bundle[c, j] += 1

    rows = np.repeat(np.arange(n_chk), chk_cnt)
    cols = chk_adj[chk_adj >= 0]
    h = sp.coo_matrix(
        (np.ones(len(cols), dtype=np.uint8), (rows, cols)),
        shape=(n_chk, n_var)).tocsr()
    h.sort_indices()
    return h


def _select_cn(v, i, j, b, z, var_adj, var_cnt, chk_adj, chk_cnt, bundle, rng):
    """PEG choice: an eligible CN in row group i at maximal distance from v.

    Eligible means spare capacity toward column group j and not already a
    neighbor of v.  Unreached CNs beat reached ones; ties go to the CN of
    smallest current degree, then uniformly at random from the seeded
    generator.
    """
    n_chk = chk_adj.shape[0]
    group = np.arange(i * z, (i + 1) * z)
    eligible = np.zeros(n_chk, dtype=bool)
    eligible[group[bundle[group, j] < b[i, j]]] = True
    nbrs = var_adj[v, :var_cnt[v]]
    eligible[nbrs[nbrs >= 0]] = False
    if not eligible.any():
        raise _PegStuck(f"no eligible check for variable {v} toward row group {i}")

    visited_v = np.zeros(var_adj.shape[0], dtype=bool)
    visited_c = np.zeros(n_chk, dtype=bool)
    visited_v[v] = True
    frontier_v = np.array([v], dtype=np.int64)
    uncovered = eligible.copy()
    candidates = None
    while True:
        cand = var_adj[frontier_v].ravel()
        cand = cand[cand >= 0]
        cand = cand[~visited_c[cand]]
        if len(cand) == 0:
            candidates = np.flatnonzero(uncovered)  # unreachable: distance inf
            break
        frontier_c = np.unique(cand)
        visited_c[frontier_c] = True
        new_eligible = frontier_c[eligible[frontier_c]]
        uncovered[new_eligible] = False
        if not uncovered.any():
            candidates = new_eligible  # deepest level that finished the cover
            break
        nxt = chk_adj[frontier_c].ravel()
        nxt = nxt[nxt >= 0]
        nxt = nxt[~visited_v[nxt]]
        if len(nxt) == 0:
            candidates = np.flatnonzero(uncovered)
            break
        frontier_v = np.unique(nxt)
        visited_v[frontier_v] = True
    degs = chk_cnt[candidates]
    best = candidates[degs == degs.min()]
    return int(best[rng.integers(len(best))])


# --- GF(2) elimination (bit-packed) -----------------------------------------

def _gf2_encoder(h: sp.csr_matrix):
    """Full RREF of H; returns (pivot_cols, free_cols, parity_table).

    ``parity_table`` is bit-packed over the free columns: pivot bit r is
    the parity of (row r of the table) AND (the info bits).
    """
    m, n = h.shape
    bits = np.asarray(h.todense(), dtype=np.uint8)
    work = np.packbits(bits, axis=1, bitorder="little")
    rank = 0
    pivots = []
    for col in range(n):
        byte, bit = divmod(col, 8)
        column = (work[rank:, byte] >> bit) & 1
        nz = np.flatnonzero(column)
        if len(nz) == 0:
            continue
        pr = rank + int(nz[0])
        if pr != rank:
            work[[rank, pr]] = work[[pr, rank]]
        mask = ((work[:, byte] >> bit) & 1).astype(bool)
        mask[rank] = False
        if mask.any():
            work[mask] ^= work[rank]
        pivots.append(col)
        rank += 1
        if rank == m:
            break
    pivot_cols = np.array(pivots, dtype=np.int64)
    free_cols = np.setdiff1d(np.arange(n), pivot_cols)
    unpacked = np.unpackbits(work[:rank], axis=1, bitorder="little", count=n)
    parity = np.packbits(unpacked[:, free_cols], axis=1, bitorder="little")
    return pivot_cols, free_cols, parity


# --- alist exchange format ---------------------------------------------------

def to_alist(h: sp.csr_matrix) -> str:
    """Serialize H in the standard alist format (1-based, zero padded)."""
    h = h.tocsr()
    m, n = h.shape
    hc = h.tocsc()
    col_deg = np.diff(hc.indptr)
    row_deg = np.diff(h.indptr)
    lines = [f"{n} {m}", f"{col_deg.max()} {row_deg.max()}"]
    lines.append(" ".join(str(d) for d in col_deg))
    lines.append(" ".join(str(d) for d in row_deg))
    for jcol in range(n):
        nbrs = (hc.indices[hc.indptr[jcol]:hc.indptr[jcol + 1]] + 1).tolist()
        nbrs += [0] * (col_deg.max() - len(nbrs))
        lines.append(" ".join(str(x) for x in nbrs))
    for irow in range(m):
        nbrs = (h.indices[h.indptr[irow]:h.indptr[irow + 1]] + 1).tolist()
        nbrs += [0] * (row_deg.max() - len(nbrs))
        lines.append(" ".join(str(x) for x in nbrs))
    return "\n".join(lines) + "\n"


def from_alist(text: str) -> sp.csr_matrix:
    """Parse the standard alist format (padded or not) into a sparse matrix."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    n, m = (int(x) for x in lines[0].split())
    rows, cols = [], []
    for jcol, line in enumerate(lines[4:4 + n]):
        for r in (int(x) for x in line.split()):
            if r:
                rows.append(r - 1)
                cols.append(jcol)
    return sp.coo_matrix(
        (np.ones(len(rows), dtype=np.uint8), (rows, cols)), shape=(m, n)).tocsr()
