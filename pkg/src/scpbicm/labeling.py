"""Named constellation labelings and the two-step protected-position design.

Built-ins: reflected Gray, set partitioning (natural ring order / lattice
partition chain), anti-Gray (interleaved complements on PSK, a frozen
distance-optimal table on 16-QAM), and MSEW (tables frozen from the
criterion searches in this module).  ``design_lbpm`` implements the
two-step design: keep the maximal set of top-protection bit patterns in
the leading positions, then assign remaining positions one at a time to
maximize the minimum (then total) Hamming distance between labels of
adjacent points.
"""

from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .constellation import (
    Constellation,
    LabelMap,
    bit_protection_profile,
    reference_esn0,
)
from .errors import UnknownMapper

_EXHAUSTIVE_LIMIT = 5000


def _gray_code(i):
    return i ^ (i >> 1)


def _labelmap_from_label_of_point(constellation, label_of_point, name):
    lop = np.asarray(label_of_point, dtype=np.int64)
    pol = np.empty_like(lop)
    pol[lop] = np.arange(len(lop))
    return LabelMap(constellation, pol, name)


def gray_labels(constellation: Constellation) -> LabelMap:
    """Reflected Gray labeling (ring Gray on PSK, per-axis Gray on QAM)."""
    m = constellation.m
    order = constellation.order
    if constellation.name.startswith("psk"):
        lop = _gray_code(np.arange(order))
    else:
        side = 2 ** (m // 2)
        u = np.arange(order) % side
        v = np.arange(order) // side
        lop = (_gray_code(u) << (m // 2)) | _gray_code(v)
    return _labelmap_from_label_of_point(constellation, lop, "gray")


def sp_labels(constellation: Constellation) -> LabelMap:
    """Set-partition labeling: natural ring order on PSK, lattice chain on QAM.

    Each successive partition bit doubles the intra-subset minimum
    distance; bit m (the least significant) is the first split.
    """
    m = constellation.m
    order = constellation.order
    if constellation.name.startswith("psk"):
        lop = np.arange(order)
    else:
        side = 2 ** (m // 2)
        u = np.arange(order) % side
        v = np.arange(order) // side
        lop = np.zeros(order, dtype=np.int64)
        for s in range(m // 2):
            z_odd = ((u >> s) + (v >> s)) & 1
            z_even = (v >> s) & 1
            lop |= z_odd << (2 * s)
            lop |= z_even << (2 * s + 1)
    return _labelmap_from_label_of_point(constellation, lop, "sp")


def antigray_labels(constellation: Constellation) -> LabelMap:
    """Anti-Gray labeling: complements interleaved around the PSK ring.

    For 16-QAM a frozen table from the adjacency-distance search below is
    used (minimum adjacent Hamming distance 3, the achievable optimum).
    """
    if constellation.name.startswith("psk"):
        order = constellation.order
        half = _gray_code(np.arange(order // 2))
        lop = np.empty(order, dtype=np.int64)
        lop[0::2] = half
        lop[1::2] = half ^ (order - 1)
        return _labelmap_from_label_of_point(constellation, lop, "antigray")
    if constellation.name == "qam16":
        return _labelmap_from_label_of_point(
            constellation, _ANTIGRAY_QAM16, "antigray")
    raise UnknownMapper(f"no anti-Gray construction for {constellation.name}")


def msew_labels(constellation: Constellation) -> LabelMap:
    """MSEW labeling: complement-label pairs pushed to maximal distance.

    Tables are frozen from the deterministic searches in this module
    (exhaustive for 8-PSK, multi-start ascent for 16-QAM).
    """
    if constellation.name == "psk8":
        return _labelmap_from_label_of_point(constellation, _MSEW_PSK8, "msew")
    if constellation.name == "qam16":
        return _labelmap_from_label_of_point(constellation, _MSEW_QAM16, "msew")
    raise UnknownMapper(f"no MSEW construction for {constellation.name}")


def make_builtin(name: str, constellation: Constellation) -> LabelMap:
    builders = {
        "gray": gray_labels,
        "sp": sp_labels,
        "antigray": antigray_labels,
        "msew": msew_labels,
    }
    if name not in builders:
        raise UnknownMapper(f"unknown mapper {name!r}; expected one of {sorted(builders)}")
    return builders[name](constellation)


# --- labeling criteria ------------------------------------------------------

def adjacent_hamming_distances(constellation: Constellation,
                               label_of_point: np.ndarray) -> np.ndarray:
    """Hamming distance between the labels of each adjacent point pair."""
    pairs = constellation.adjacent_pairs()
    x = np.asarray(label_of_point)[pairs[:, 0]] ^ np.asarray(label_of_point)[pairs[:, 1]]
    return np.array([bin(v).count("1") for v in x])


def adjacency_score(constellation, label_of_point):
    """(min, total) adjacent-label Hamming distance; larger is better."""
    d = adjacent_hamming_distances(constellation, label_of_point)
    return int(d.min()), int(d.sum())


def complement_pair_distances(constellation: Constellation,
                              label_of_point: np.ndarray) -> np.ndarray:
    """Squared Euclidean distance for every pair of labels differing in one bit."""
    lop = np.asarray(label_of_point)
    pol = np.empty_like(lop)
    pol[lop] = np.arange(len(lop))
    m = constellation.m
    out = []
    for lab in range(constellation.order):
        for k in range(m):
            other = lab ^ (1 << k)
            if other > lab:
                d = constellation.points[pol[lab]] - constellation.points[pol[other]]
                out.append(abs(d) ** 2)
    return np.array(out)


def sew_score(constellation, label_of_point):
    """(min pair, total, min per-label sum) squared distances over 1-bit pairs."""
    lop = np.asarray(label_of_point)
    pol = np.empty_like(lop)
    pol[lop] = np.arange(len(lop))
    m = constellation.m
    order = constellation.order
    pair_d = np.empty((order, m))
    for lab in range(order):
        for k in range(m):
            d = constellation.points[pol[lab]] - constellation.points[pol[lab ^ (1 << k)]]
            pair_d[lab, k] = abs(d) ** 2
    r = lambda v: round(float(v), 9)  # noqa: E731  (kill float tie noise)
    return (r(pair_d.min()), r(pair_d.sum() / 2), r(pair_d.sum(axis=1).min()))


def _hill_climb(constellation, score_fn, restarts, seed):
    """Steepest-ascent over label swaps from seeded random starts."""
    order = constellation.order
    rng = np.random.default_rng(seed)
    best = None
    best_score = None
    for _ in range(restarts):
        lop = rng.permutation(order)
        score = score_fn(constellation, lop)
        improved = True
        while improved:
            improved = False
            for a in range(order - 1):
                for b in range(a + 1, order):
                    lop[a], lop[b] = lop[b], lop[a]
                    s = score_fn(constellation, lop)
                    if s > score:
                        score = s
                        improved = True
                    else:
                        lop[a], lop[b] = lop[b], lop[a]
        if best_score is None or score > best_score:
            best_score = score
            best = lop.copy()
    return best, best_score


def search_antigray(constellation, restarts=64, seed=0):
    """Search a labeling maximizing (min, total) adjacent Hamming distance."""
    return _hill_climb(constellation, adjacency_score, restarts, seed)


def search_msew(constellation, restarts=64, seed=0):
    """Search a labeling maximizing the complement-pair distance criterion."""
    if constellation.order <= 8:
        best, best_score = None, None
        for perm in itertools.permutations(range(1, constellation.order)):
            lop = np.array((0,) + perm)
            s = sew_score(constellation, lop)
            if best_score is None or s > best_score:
                best, best_score = lop, s
        return best, best_score
    return _hill_climb(constellation, sew_score, restarts, seed)


# --- frozen searched tables (label_of_point, point order as in make_*) ------

# criterion optima; the tests re-derive the scores with the searches above.
# anti-Gray 16-QAM: adjacent Hamming distance (min 3, total 80).
_ANTIGRAY_QAM16 = np.array(
    [0, 15, 2, 13, 7, 8, 5, 10, 9, 6, 11, 4, 14, 1, 12, 3], dtype=np.int64)
# MSEW 8-PSK: even-weight labels on one semicircle (min pair distance 90 deg).
_MSEW_PSK8 = np.array([0, 3, 5, 6, 1, 2, 4, 7], dtype=np.int64)
# MSEW 16-QAM: complement-pair distances (min 0.8, total 108.8) at unit energy.
_MSEW_QAM16 = np.array(
    [0, 3, 6, 5, 10, 9, 12, 15, 13, 14, 11, 8, 7, 4, 1, 2], dtype=np.int64)


# --- two-step protected-position design -------------------------------------

def _classes_from_bits(fixed_bits):
    """Points grouped by their fixed-position bit tuples, deterministically."""
    groups: dict[tuple, list[int]] = {}
    for p, row in enumerate(fixed_bits):
        groups.setdefault(tuple(row.tolist()), []).append(p)
    return [groups[k] for k in sorted(groups)]


def _column_score(pair_base, pair_diff, decided):
    d = pair_base[decided] + pair_diff[decided]
    return (int(d.min()), int(d.sum())) if d.size else (0, 0)


def _lex_key(col):
    """Ties prefer the lexicographically smallest bit column (maximized key)."""
    return tuple(-int(b) for b in col)


def _assign_position(constellation, fixed_bits, pairs):
    """Choose the next position's bit column maximizing adjacent distance.

    Candidates are balanced splits of every fixed-bit class (keeping the
    final map bijective).  Exhaustive over the candidate product when
    small; otherwise greedy class by class with re-optimization passes.
    Ties break toward the lexicographically smallest bit column.
    """
    order = constellation.order
    classes = _classes_from_bits(fixed_bits)
    pair_base = np.array([int((fixed_bits[a] != fixed_bits[b]).sum()) for a, b in pairs])
    splits_per_class = [
        [frozenset(cmb) for cmb in itertools.combinations(cls, len(cls) // 2)]
        for cls in classes
    ]
    total = 1
    for s in splits_per_class:
        total *= len(s)
        if total > _EXHAUSTIVE_LIMIT:
            break

    def column_for(choice):
        col = np.zeros(order, dtype=np.uint8)
        for ones in choice:
            for p in ones:
                col[p] = 1
        return col

    if total <= _EXHAUSTIVE_LIMIT:
        decided = np.ones(len(pairs), dtype=bool)
        best_col, best_key = None, None
        for choice in itertools.product(*splits_per_class):
            col = column_for(choice)
            diff = col[pairs[:, 0]] != col[pairs[:, 1]]
            score = _column_score(pair_base, diff, decided)
            key = (score, _lex_key(col))
            if best_key is None or key > best_key:
                best_key, best_col = key, col
        return best_col

    # greedy, then local re-optimization with the other classes held fixed
    col = np.zeros(order, dtype=np.uint8)
    assigned = np.zeros(order, dtype=bool)
    choice_idx = [0] * len(classes)
    for ci, (cls, splits) in enumerate(zip(classes, splits_per_class)):
        best_key = None
        for si, ones in enumerate(splits):
            col[list(cls)] = [1 if p in ones else 0 for p in cls]
            assigned[list(cls)] = True
            decided = assigned[pairs[:, 0]] & assigned[pairs[:, 1]]
            diff = col[pairs[:, 0]] != col[pairs[:, 1]]
            key = (_column_score(pair_base, diff, decided), _lex_key(col))
            if best_key is None or key > best_key:
                best_key, choice_idx[ci] = key, si
        ones = splits[choice_idx[ci]]
        col[list(cls)] = [1 if p in ones else 0 for p in cls]
    for _ in range(8):
        changed = False
        for ci, (cls, splits) in enumerate(zip(classes, splits_per_class)):
            best_key, best_si = None, choice_idx[ci]
            for si, ones in enumerate(splits):
                col[list(cls)] = [1 if p in ones else 0 for p in cls]
                diff = col[pairs[:, 0]] != col[pairs[:, 1]]
                key = (_column_score(pair_base, diff, np.ones(len(pairs), bool)),
                       _lex_key(col))
                if best_key is None or key > best_key:
                    best_key, best_si = key, si
            if best_si != choice_idx[ci]:
                changed = True
                choice_idx[ci] = best_si
            ones = splits[choice_idx[ci]]
            col[list(cls)] = [1 if p in ones else 0 for p in cls]
        if not changed:
            break
    return col


def design_lbpm(constellation: Constellation, snr_ref_db: float | None = None,
                seed: int = 0, samples: int = 2 * 10**5) -> LabelMap:
    """Two-step labeling design (protected positions, then adjacent distance).

    Step 1 ranks the seed (Gray) labeling's bit patterns by protection
    degree at the reference SNR and keeps the tied-at-maximum set in the
    leading positions (capped at m-1 so at least one position remains for
    step 2).  Step 2 fills each remaining position with the balanced
    class split maximizing the minimum, then total, adjacent-label
    Hamming distance.  Deterministic given (constellation, snr, seed).
    """
    if snr_ref_db is None:
        snr_ref_db = reference_esn0(constellation)
    m = constellation.m
    order = constellation.order
    gray = gray_labels(constellation)
    profile = bit_protection_profile(
        constellation, gray, snr_ref_db, samples, seed)
    m_prime = min(profile.m_prime, m - 1)
    gray_point_bits = gray.label_bits()[gray.label_of_point]
    bits = np.zeros((order, m), dtype=np.uint8)
    bits[:, :m_prime] = gray_point_bits[:, profile.ranking[:m_prime]]
    pairs = constellation.adjacent_pairs()
    for pos in range(m_prime, m):
        bits[:, pos] = _assign_position(constellation, bits[:, :pos], pairs)
    weights = 1 << np.arange(m - 1, -1, -1)
    lop = bits @ weights
    return _labelmap_from_label_of_point(constellation, lop, "lbpm")
