"""Constellation geometries, label maps, protection profiles, and capacity estimators.

Geometries are unit-average-energy PSK rings and square QAM grids with a
nearest-neighbor adjacency relation.  A label map is a bijection from
m-bit labels to constellation points; capacity estimators are seeded
Monte-Carlo averages (antithetic noise pairs, fixed chunking) so results
are independent of how work is split across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import UnknownMapper, UnsupportedOrder

_LN2 = float(np.log(2.0))
_CHUNK_PAIRS = 1 << 14  # antithetic pairs per MC chunk


@dataclass(frozen=True)
class Constellation:
    """Unit-energy complex constellation with a neighbor relation."""

    points: np.ndarray
    m: int
    adjacency: tuple[tuple[int, ...], ...]
    name: str

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=complex)
        if len(pts) != 2**self.m:
            raise UnsupportedOrder(f"need 2^{self.m} points, got {len(pts)}")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def order(self) -> int:
        return len(self.points)

    def adjacent_pairs(self) -> np.ndarray:
        """Unique unordered neighbor pairs as an (n_pairs, 2) index array."""
        pairs = {(min(a, b), max(a, b))
                 for a, nbrs in enumerate(self.adjacency) for b in nbrs}
        return np.array(sorted(pairs), dtype=np.int64)


def make_psk(m: int) -> Constellation:
    """2^m points on the unit circle; neighbors are the two ring neighbors."""
    if m < 2:
        raise UnsupportedOrder("PSK needs at least 2 bits per symbol")
    order = 2**m
    pts = np.exp(2j * np.pi * np.arange(order) / order)
    adj = tuple((int((p - 1) % order), int((p + 1) % order)) for p in range(order))
    return Constellation(pts, m, adj, f"psk{order}")


def make_qam(m: int) -> Constellation:
    """Square 2^m-QAM grid scaled to unit average energy; 4-neighborhood adjacency.

    Point index is v*side + u with u indexing the in-phase level (left to
    right) and v the quadrature level (bottom to top).
    """
    if m < 2 or m % 2:
        raise UnsupportedOrder("square QAM needs an even number of bits per symbol")
    side = 2 ** (m // 2)
    levels = 2 * np.arange(side) - (side - 1)
    energy = np.mean(levels.astype(float) ** 2) * 2
    scale = 1.0 / np.sqrt(energy)
    u, v = np.meshgrid(np.arange(side), np.arange(side))
    pts = (levels[u] + 1j * levels[v]).ravel() * scale
    adj = []
    for p in range(side * side):
        pu, pv = p % side, p // side
        nbrs = []
        for du, dv in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            qu, qv = pu + du, pv + dv
            if 0 <= qu < side and 0 <= qv < side:
                nbrs.append(qv * side + qu)
        adj.append(tuple(nbrs))
    return Constellation(pts, m, tuple(adj), f"qam{side * side}")


@dataclass(frozen=True)
class LabelMap:
    """Bijection from m-bit labels to constellation point indices.

    Bit 1 of a label is the most significant bit of its integer value.
    """

    constellation: Constellation
    point_of_label: np.ndarray
    name: str

    def __post_init__(self):
        pol = np.asarray(self.point_of_label, dtype=np.int64)
        order = self.constellation.order
        if sorted(pol.tolist()) != list(range(order)):
            raise ValueError("labeling must be a bijection onto the points")
        pol.setflags(write=False)
        object.__setattr__(self, "point_of_label", pol)

    @property
    def m(self) -> int:
        return self.constellation.m

    @property
    def label_of_point(self) -> np.ndarray:
        inv = np.empty_like(self.point_of_label)
        inv[self.point_of_label] = np.arange(len(inv))
        return inv

    @property
    def points_by_label(self) -> np.ndarray:
        """Complex coordinates indexed by label integer."""
        return self.constellation.points[self.point_of_label]

    def label_bits(self) -> np.ndarray:
        """(order, m) array: bit k (0-based, MSB first) of each label integer."""
        order, m = self.constellation.order, self.m
        lab = np.arange(order)[:, None]
        return ((lab >> (m - 1 - np.arange(m))) & 1).astype(np.uint8)


@dataclass(frozen=True)
class ProtectionProfile:
    """Per-position AMIs of a labeling at a reference SNR."""

    per_position_ami: np.ndarray
    esn0_db: float
    tie_tol: float = 0.005
    ranking: np.ndarray = field(init=False)
    m_prime: int = field(init=False)

    def __post_init__(self):
        ami = np.asarray(self.per_position_ami, dtype=float)
        ami.setflags(write=False)
        ranking = np.argsort(-ami, kind="stable")
        m_prime = int(np.sum(ami >= ami.max() - self.tie_tol))
        object.__setattr__(self, "per_position_ami", ami)
        object.__setattr__(self, "ranking", ranking)
        object.__setattr__(self, "m_prime", m_prime)

    @property
    def m(self) -> int:
        return len(self.per_position_ami)


def _esn0_to_sigma2(esn0_db: float) -> float:
    """Per-dimension noise variance at unit symbol energy."""
    return 0.5 / 10 ** (esn0_db / 10)


def _chunk_rngs(seed, total_pairs):
    n_chunks = (total_pairs + _CHUNK_PAIRS - 1) // _CHUNK_PAIRS
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    sizes = [_CHUNK_PAIRS] * (n_chunks - 1)
    sizes.append(total_pairs - _CHUNK_PAIRS * (n_chunks - 1))
    return [(np.random.default_rng(c), s) for c, s in zip(children, sizes)]


def _logsumexp_cols(metric, cols):
    sub = metric[:, cols]
    mx = sub.max(axis=1)
    return mx + np.log(np.exp(sub - mx[:, None]).sum(axis=1))


def cm_capacity(constellation: Constellation, esn0_db: float,
                samples: int = 10**5, seed: int = 0) -> float:
    """Monte-Carlo symbol-wise AMI of the constellation on complex AWGN (bits)."""
    sigma2 = _esn0_to_sigma2(esn0_db)
    pts = constellation.points
    acc = 0.0
    total = 0
    for rng, pairs in _chunk_rngs(seed, (samples + 1) // 2):
        idx = rng.integers(0, len(pts), size=pairs)
        noise = (rng.normal(size=pairs) + 1j * rng.normal(size=pairs)) * np.sqrt(sigma2)
        for y in (pts[idx] + noise, pts[idx] - noise):
            metric = -np.abs(y[:, None] - pts) ** 2 / (2 * sigma2)
            lse = _logsumexp_cols(metric, slice(None))
            own = metric[np.arange(pairs), idx]
            acc += float(np.sum(lse - own))
            total += pairs
    return constellation.m - acc / (total * _LN2)


def per_position_ami(constellation: Constellation, labelmap: LabelMap,
                     esn0_db: float, samples: int = 10**5, seed: int = 0) -> np.ndarray:
    """Monte-Carlo AMI of each labeling position's binary sub-channel (bits).

    The per-position values are the m summands of the parallel-channel
    decomposition, so their sum is the BICM capacity estimate for the
    same (samples, seed).
    """
    if labelmap.constellation is not constellation and not np.array_equal(
            labelmap.constellation.points, constellation.points):
        raise ValueError("label map belongs to a different constellation")
    sigma2 = _esn0_to_sigma2(esn0_db)
    m = labelmap.m
    z = labelmap.points_by_label
    bits = labelmap.label_bits()
    subsets = [(np.flatnonzero(bits[:, k] == 0), np.flatnonzero(bits[:, k] == 1))
               for k in range(m)]
    acc = np.zeros(m)
    total = 0
    for rng, pairs in _chunk_rngs(seed, (samples + 1) // 2):
        lab = rng.integers(0, len(z), size=pairs)
        noise = (rng.normal(size=pairs) + 1j * rng.normal(size=pairs)) * np.sqrt(sigma2)
        for y in (z[lab] + noise, z[lab] - noise):
            metric = -np.abs(y[:, None] - z) ** 2 / (2 * sigma2)
            lse_all = _logsumexp_cols(metric, slice(None))
            for k in range(m):
                lse0 = _logsumexp_cols(metric, subsets[k][0])
                lse1 = _logsumexp_cols(metric, subsets[k][1])
                lse_tx = np.where(bits[lab, k] == 0, lse0, lse1)
                acc[k] += float(np.sum(lse_all - lse_tx))
            total += pairs
    return 1.0 - acc / (total * _LN2)


def bicm_capacity(constellation: Constellation, labelmap: LabelMap,
                  esn0_db: float, samples: int = 10**5, seed: int = 0) -> float:
    """Monte-Carlo parallel-channel AMI of the labeled constellation (bits)."""
    return float(per_position_ami(constellation, labelmap, esn0_db, samples, seed).sum())


def bit_protection_profile(constellation: Constellation, labelmap: LabelMap,
                           esn0_db: float, samples: int = 10**5, seed: int = 0,
                           tie_tol: float = 0.005) -> ProtectionProfile:
    """Protection degrees (per-position AMIs) of a labeling at a reference SNR."""
    ami = per_position_ami(constellation, labelmap, esn0_db, samples, seed)
    return ProtectionProfile(ami, esn0_db, tie_tol)


def cm_capacity_quad(constellation: Constellation, esn0_db: float,
                     nodes: int = 48) -> float:
    """Deterministic Gauss-Hermite evaluation of the symbol-wise AMI (bits)."""
    sigma2 = _esn0_to_sigma2(esn0_db)
    x, w = np.polynomial.hermite.hermgauss(nodes)
    t = np.sqrt(2.0 * sigma2) * x
    w = w / np.sqrt(np.pi)
    noise = (t[:, None] + 1j * t[None, :]).ravel()
    weight = (w[:, None] * w[None, :]).ravel()
    pts = constellation.points
    acc = 0.0
    for p in pts:
        y = p + noise
        metric = -np.abs(y[:, None] - pts) ** 2 / (2 * sigma2)
        mx = metric.max(axis=1)
        lse = mx + np.log(np.exp(metric - mx[:, None]).sum(axis=1))
        own = -np.abs(noise) ** 2 / (2 * sigma2)
        acc += float(np.dot(weight, lse - own))
    return constellation.m - acc / (len(pts) * _LN2)


def reference_esn0(constellation: Constellation, rate: float = 0.5,
                   tol_db: float = 0.005) -> float:
    """Es/N0 (dB) at which the symbol-wise AMI equals rate * m.

    This is the operating point used to rank labeling-bit protection
    degrees for mapper and interleaver design.
    """
    target = rate * constellation.m
    lo, hi = -15.0, 40.0
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if cm_capacity_quad(constellation, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def builtin_mapper(name: str, constellation: Constellation) -> LabelMap:
    """One of the named labelings: gray, sp, msew, antigray."""
    from . import labeling

    return labeling.make_builtin(name, constellation)


def design_lbpm(constellation: Constellation, snr_ref_db: float | None = None,
                seed: int = 0, samples: int = 2 * 10**5) -> LabelMap:
    """Two-step labeling design: protected positions first, then adjacent distance."""
    from . import labeling

    return labeling.design_lbpm(constellation, snr_ref_db, seed, samples)


# --- mapper exchange format -------------------------------------------------

def save_mapper(labelmap: LabelMap, path) -> None:
    """One line per label: 'bits point_index re im'."""
    lines = []
    m = labelmap.m
    pts = labelmap.constellation.points
    for lab, p in enumerate(labelmap.point_of_label):
        bits = format(lab, f"0{m}b")
        lines.append(f"{bits} {p} {pts[p].real!r} {pts[p].imag!r}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_mapper(path, constellation: Constellation, name: str | None = None) -> LabelMap:
    """Read the 'bits point_index re im' format back onto ``constellation``."""
    pol = np.full(constellation.order, -1, dtype=np.int64)
    for line in Path(path).read_text().splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        bits, pidx, re, im = line.split()
        lab = int(bits, 2)
        p = int(pidx)
        if not np.isclose(constellation.points[p], float(re) + 1j * float(im), atol=1e-6):
            raise UnknownMapper(
                f"point {p} coordinates in file disagree with the constellation")
        pol[lab] = p
    if (pol < 0).any():
        raise UnknownMapper("mapper file does not cover every label")
    return LabelMap(constellation, pol, name or Path(path).stem)
