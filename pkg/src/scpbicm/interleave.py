"""Bit-level interleavers assigning codeword blocks to labeling positions.

The codeword is cut into m sequential blocks of n/m bits; symbol j is
assembled from bit j of selected blocks.  The block-matched schemes send
the two end blocks to the two most protected labeling positions (or, in
the optimized variant, pair blocks from the ends inward with positions
grouped into ceil(m/2) priority classes), which is what seeds a
convergence wave from the ends of a tail-biting coupled chain.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .constellation import ProtectionProfile
from .errors import BlockMismatch, LengthMismatch, ProfileMismatch

KINDS = ("vnmm", "vnmm_opt", "random", "identity")


@dataclass(frozen=True)
class InterleaverSpec:
    """Length-n permutation: interleaved slot t carries coded bit permutation[t].

    Slot t feeds labeling position t mod m of symbol t // m.  For the
    block-matched kinds, ``block_to_position[k]`` is the labeling
    position (0-based) receiving block k.
    """

    kind: str
    n: int
    m: int
    permutation: np.ndarray
    block_to_position: tuple[int, ...] | None = None
    seed: int | None = None

    def __post_init__(self):
        perm = np.asarray(self.permutation, dtype=np.int64)
        if len(perm) != self.n:
            raise LengthMismatch("permutation length disagrees with n")
        perm.setflags(write=False)
        object.__setattr__(self, "permutation", perm)

    @property
    def inverse(self) -> np.ndarray:
        inv = np.empty_like(self.permutation)
        inv[self.permutation] = np.arange(self.n)
        return inv


def _perm_from_block_map(n, m, block_to_position):
    n_sym = n // m
    perm = np.empty(n, dtype=np.int64)
    sym = np.arange(n_sym)
    for block, pos in enumerate(block_to_position):
        perm[sym * m + pos] = block * n_sym + sym
    return perm


def _check_divisible(n, m):
    if n % m:
        raise BlockMismatch(f"codeword length {n} is not divisible by m={m}")


def vnmm(n: int, m: int, profile: ProtectionProfile,
         middle_order: str = "index") -> InterleaverSpec:
    """Block-matched interleaver: end blocks onto the two protected positions.

    ``middle_order`` places the remaining blocks on the generally
    protected positions by ascending position index (default) or by
    descending protection ("ami").
    """
    _check_divisible(n, m)
    if m < 3:
        raise ProfileMismatch("block-matched mapping needs at least 3 positions")
    if profile.m != m:
        raise ProfileMismatch(f"profile has {profile.m} positions, expected {m}")
    if profile.m_prime != 2:
        raise ProfileMismatch(
            f"scheme requires exactly 2 highly protected positions, got {profile.m_prime}")
    ranking = [int(p) for p in profile.ranking]
    hp = sorted(ranking[:2])
    rest = [p for p in range(m) if p not in hp]
    if middle_order == "ami":
        rest = [p for p in ranking if p in rest]
    elif middle_order != "index":
        raise ValueError("middle_order must be 'index' or 'ami'")
    block_to_position = [hp[0]] + rest + [hp[1]]
    perm = _perm_from_block_map(n, m, block_to_position)
    return InterleaverSpec("vnmm", n, m, perm, tuple(block_to_position))


def vnmm_optimized(n: int, m: int, profile: ProtectionProfile) -> InterleaverSpec:
    """Block matching with ceil(m/2) priority classes, paired from the ends inward."""
    _check_divisible(n, m)
    if m < 4:
        raise ProfileMismatch("the optimized scheme needs at least 4 positions")
    if profile.m != m:
        raise ProfileMismatch(f"profile has {profile.m} positions, expected {m}")
    ranking = [int(p) for p in profile.ranking]
    block_to_position = [-1] * m
    for c in range((m + 1) // 2):
        members = sorted(ranking[2 * c:2 * c + 2])
        left, right = c, m - 1 - c
        if left == right:
            block_to_position[left] = members[0]
        else:
            block_to_position[left] = members[0]
            block_to_position[right] = members[1]
    perm = _perm_from_block_map(n, m, block_to_position)
    return InterleaverSpec("vnmm_opt", n, m, perm, tuple(block_to_position))


def random_interleaver(n: int, m: int, seed: int) -> InterleaverSpec:
    """Uniform random permutation (Fisher-Yates) from the experiment seed."""
    _check_divisible(n, m)
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    return InterleaverSpec("random", n, m, rng.permutation(n), None, seed)


def identity_interleaver(n: int, m: int) -> InterleaverSpec:
    _check_divisible(n, m)
    return InterleaverSpec("identity", n, m, np.arange(n), None)


def build_interleaver(kind: str, n: int, m: int,
                      profile: ProtectionProfile | None = None,
                      seed: int | None = None,
                      middle_order: str = "index") -> InterleaverSpec:
    """Factory over all interleaver kinds."""
    if kind == "vnmm":
        return vnmm(n, m, profile, middle_order)
    if kind == "vnmm_opt":
        return vnmm_optimized(n, m, profile)
    if kind == "random":
        return random_interleaver(n, m, 0 if seed is None else seed)
    if kind == "identity":
        return identity_interleaver(n, m)
    raise ValueError(f"unknown interleaver kind {kind!r}")


def with_length(spec: InterleaverSpec, n: int, seed: int | None = None) -> InterleaverSpec:
    """Same scheme rebuilt for a different length (used by the transfer MC)."""
    _check_divisible(n, spec.m)
    if spec.kind in ("vnmm", "vnmm_opt"):
        perm = _perm_from_block_map(n, spec.m, spec.block_to_position)
        return InterleaverSpec(spec.kind, n, spec.m, perm, spec.block_to_position)
    if spec.kind == "random":
        use = spec.seed if seed is None else seed
        return random_interleaver(n, spec.m, 0 if use is None else use)
    return identity_interleaver(n, spec.m)


def apply_interleaver(spec: InterleaverSpec, values: np.ndarray) -> np.ndarray:
    """Permute codeword-ordered values into symbol (slot) order."""
    values = np.asarray(values)
    if len(values) != spec.n:
        raise LengthMismatch(f"expected length {spec.n}, got {len(values)}")
    return values[spec.permutation]


def deinterleave(spec: InterleaverSpec, values: np.ndarray) -> np.ndarray:
    """Inverse of :func:`apply_interleaver` (slot order back to codeword order)."""
    values = np.asarray(values)
    if len(values) != spec.n:
        raise LengthMismatch(f"expected length {spec.n}, got {len(values)}")
    out = np.empty_like(values)
    out[spec.permutation] = values
    return out


def save_spec(spec: InterleaverSpec, path) -> None:
    """Audit format: 'kind n m' header, then one permutation index per line."""
    lines = [f"{spec.kind} {spec.n} {spec.m}"]
    lines += [str(int(i)) for i in spec.permutation]
    Path(path).write_text("\n".join(lines) + "\n")


def load_spec(path) -> InterleaverSpec:
    lines = Path(path).read_text().split()
    kind, n, m = lines[0], int(lines[1]), int(lines[2])
    perm = np.array([int(x) for x in lines[3:]], dtype=np.int64)
    return InterleaverSpec(kind, n, m, perm)
