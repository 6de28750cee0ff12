"""Hierarchical EXIT analysis: demapper Monte-Carlo transfer wrapped around
closed-form protograph MI propagation, with threshold search on top.

One outer iteration = measure the demapper's per-position extrinsic MI by
simulation (with consistent-Gaussian priors synthesized from the decoder
feedback), load it as channel MI onto the base-matrix variable nodes,
run T2 rounds of variable/check MI updates, then produce the feedback
MIs and the per-VN a-posteriori MIs.  Convergence means every VN's
a-posteriori MI reaches 1 - APP_EPS within T1 outer iterations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constellation import LabelMap
from .errors import BlockMismatch, BracketError
from .interleave import InterleaverSpec, apply_interleaver, deinterleave, with_length
from .jfun import default_table
from .phy import map_demap, maxlog_demap
from .protograph import BaseMatrix, code_rate

_LN2 = float(np.log(2.0))

#: a-posteriori MI considered "one" (exact unity is unreachable numerically)
APP_EPS = 1e-4

#: synthesized priors treat MI above this as perfect feedback
_MI_CEIL = 1.0 - 1e-12


@dataclass
class ExitState:
    """Per-edge and per-node MIs of the base-matrix propagation."""

    base: BaseMatrix
    edge_row: np.ndarray = field(init=False)
    edge_col: np.ndarray = field(init=False)
    edge_mult: np.ndarray = field(init=False)
    i_av: np.ndarray = field(init=False)
    i_ev: np.ndarray = field(init=False)
    i_ch: np.ndarray = field(init=False)
    i_app: np.ndarray = field(init=False)

    def __post_init__(self):
        rows, cols = np.nonzero(self.base.entries)
        self.edge_row = rows
        self.edge_col = cols
        self.edge_mult = self.base.entries[rows, cols].astype(float)
        self.i_av = np.zeros(len(rows))
        self.i_ev = np.zeros(len(rows))
        self.i_ch = np.zeros(self.base.cols)
        self.i_app = np.zeros(self.base.cols)

    # aliases matching the usual EXIT naming: inside an inner iteration the
    # a-priori of one side is the extrinsic of the other
    @property
    def i_ac(self) -> np.ndarray:
        return self.i_ev

    @property
    def i_ec(self) -> np.ndarray:
        return self.i_av

    def reset_edges(self) -> None:
        self.i_av[:] = 0.0
        self.i_ev[:] = 0.0


def exit_vn_update(state: ExitState) -> None:
    """Variable-to-check update: combine channel MI with the other inbound edges.

    A multiplicity-b edge contributes b times on the inbound side and
    b - 1 times on its own extrinsic, which collapses to the full column
    sum minus one contribution of the edge itself.
    """
    table = default_table()
    sig2 = table.inverse(state.i_av) ** 2
    col_sum = np.zeros(state.base.cols)
    np.add.at(col_sum, state.edge_col, state.edge_mult * sig2)
    ch2 = table.inverse(state.i_ch) ** 2
    arg = col_sum[state.edge_col] - sig2 + ch2[state.edge_col]
    state.i_ev[:] = table.forward(np.sqrt(np.maximum(arg, 0.0)))


def exit_cn_update(state: ExitState) -> None:
    """Check-to-variable update in the 1 - J(...) complement form."""
    table = default_table()
    sig2 = table.inverse(1.0 - state.i_ac) ** 2
    row_sum = np.zeros(state.base.rows)
    np.add.at(row_sum, state.edge_row, state.edge_mult * sig2)
    arg = row_sum[state.edge_row] - sig2
    state.i_av[:] = 1.0 - table.forward(np.sqrt(np.maximum(arg, 0.0)))


def _decoder_output_sigma2(state: ExitState) -> np.ndarray:
    """Per-VN combined variance of all inbound check messages."""
    table = default_table()
    sig2 = table.inverse(state.i_av) ** 2
    col_sum = np.zeros(state.base.cols)
    np.add.at(col_sum, state.edge_col, state.edge_mult * sig2)
    return col_sum


def exit_feedback(state: ExitState, m: int, block_aligned: bool) -> np.ndarray:
    """Average extrinsic MI flowing back to the demapper, per labeling block.

    Block-aligned mode averages each m-th of the VN columns separately;
    otherwise the interleaving spreads every VN over all positions and a
    single global average applies.
    """
    table = default_table()
    per_vn = table.forward(np.sqrt(_decoder_output_sigma2(state)))
    if not block_aligned:
        return np.full(m, per_vn.mean())
    n_p = state.base.cols
    if n_p % m:
        raise BlockMismatch(f"{n_p} VN columns do not split into m={m} blocks")
    return per_vn.reshape(m, n_p // m).mean(axis=1)


def exit_app(state: ExitState) -> np.ndarray:
    """A-posteriori MI of every VN (all check messages plus the channel MI)."""
    table = default_table()
    ch2 = table.inverse(state.i_ch) ** 2
    state.i_app = table.forward(np.sqrt(_decoder_output_sigma2(state) + ch2))
    return state.i_app


def demapper_transfer_mc(labelmap: LabelMap, ilspec: InterleaverSpec,
                         ebn0_db: float, i_ad: np.ndarray, num_symbols: int,
                         seed, rate: float = 0.5,
                         demapper: str = "map") -> np.ndarray:
    """Monte-Carlo demapper transfer: per-block extrinsic MI out of the demapper.

    Draws a random binary word, interleaves, modulates, and adds noise at
    the given Eb/N0; priors per coded bit are consistent Gaussians with
    sigma_k from the block's a-priori MI; the extrinsic MI of block k is
    the time-average estimator over that block's bits.  ``demapper``
    selects the exact APP rule ("map", the analysis default) or the
    receiver's max-sum approximation ("maxlog").
    """
    m = labelmap.m
    if num_symbols < 1:
        raise ValueError("need at least one symbol")
    n = m * num_symbols
    ss = _as_seedseq(seed)
    il = with_length(ilspec, n, seed=_derive_int(ss, 0xA5))
    rng = np.random.default_rng(ss)
    bits = rng.integers(0, 2, size=n, dtype=np.int64)
    tx_sign = 1.0 - 2.0 * bits  # +1 for a zero bit, matching L = log P0/P1

    interleaved = apply_interleaver(il, bits)
    weights = 1 << np.arange(m - 1, -1, -1)
    labels = interleaved.reshape(-1, m) @ weights
    y_clean = labelmap.points_by_label[labels]
    sigma2 = 1.0 / (2.0 * rate * m * 10 ** (ebn0_db / 10))
    noise = rng.normal(size=num_symbols) + 1j * rng.normal(size=num_symbols)
    y = y_clean + np.sqrt(sigma2) * noise

    table = default_table()
    sig_a = table.inverse(np.clip(np.asarray(i_ad, dtype=float), 0.0, _MI_CEIL))
    sig_block = np.repeat(sig_a, n // m)
    prior_code = (0.5 * sig_block**2) * tx_sign + sig_block * rng.normal(size=n)
    prior_sym = apply_interleaver(il, prior_code).reshape(num_symbols, m)

    demap = {"map": map_demap, "maxlog": maxlog_demap}[demapper]
    extr_sym = demap(y, labelmap, sigma2, prior_sym)
    extr_code = deinterleave(il, extr_sym.ravel())
    info_loss = np.logaddexp(0.0, -tx_sign * extr_code) / _LN2
    i_ed = 1.0 - info_loss.reshape(m, n // m).mean(axis=1)
    return np.clip(i_ed, 0.0, 1.0)


def _as_seedseq(seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def _derive_int(seed, salt: int) -> int:
    entropy = int(_as_seedseq(seed).generate_state(1, np.uint64)[0])
    return int(np.random.SeedSequence(entropy, spawn_key=(salt,)).generate_state(1)[0])


@dataclass(frozen=True)
class ExitResult:
    converged: bool
    outer_iters: int
    app_trace: np.ndarray  # (outer_iters, n_vn)
    i_ed_trace: np.ndarray  # (outer_iters, m)


def hierarchical_exit(base: BaseMatrix, labelmap: LabelMap, ilspec: InterleaverSpec,
                      ebn0_db: float, t1: int, t2: int,
                      mc_symbols: int = 10**5, seed=0,
                      rate: float | None = None,
                      demapper: str = "map") -> ExitResult:
    """Run the nested demapper-MC / protograph-analytic schedule at one Eb/N0.

    Block-matched interleavers map the demapper's per-block MI onto the
    matching VN columns; random/identity interleaving spreads the average
    over every VN.  Edge MIs restart each outer iteration, mirroring a
    receiver whose decoder runs fresh on the latest demapper output.
    """
    m = labelmap.m
    block_aligned = ilspec.kind in ("vnmm", "vnmm_opt")
    if block_aligned and base.cols % m:
        raise BlockMismatch(
            f"{base.cols} VN columns do not split into m={m} blocks")
    rate = float(code_rate(base)) if rate is None else rate
    state = ExitState(base)
    i_ad = np.zeros(m)
    app_trace = []
    ed_trace = []
    converged = False
    outer = 0
    mc_seeds = _as_seedseq(seed).spawn(t1)
    for outer in range(1, t1 + 1):
        i_ed = demapper_transfer_mc(labelmap, ilspec, ebn0_db, i_ad,
                                    mc_symbols, mc_seeds[outer - 1], rate,
                                    demapper)
        ed_trace.append(i_ed)
        if block_aligned:
            state.i_ch = np.repeat(i_ed, base.cols // m)
        else:
            state.i_ch = np.full(base.cols, i_ed.mean())
        state.i_ch = np.where(base.punctured, 0.0, state.i_ch)
        state.reset_edges()
        for _ in range(t2):
            exit_vn_update(state)
            exit_cn_update(state)
        i_ad = exit_feedback(state, m, block_aligned)
        app_trace.append(exit_app(state).copy())
        if app_trace[-1].min() >= 1.0 - APP_EPS:
            converged = True
            break
    return ExitResult(converged, outer, np.array(app_trace), np.array(ed_trace))


@dataclass(frozen=True)
class ThresholdResult:
    threshold_db: float
    probes: tuple  # (ebn0_db, votes_converged, trials) per probe


def _probe_converges(base, labelmap, ilspec, ebn0_db, t1, t2, mc_symbols,
                     trials, seed, map_fn, demapper) -> int:
    args = [(base, labelmap, ilspec, ebn0_db, t1, t2, mc_symbols,
             np.random.SeedSequence(seed, spawn_key=(trial,)), demapper)
            for trial in range(trials)]
    return sum(map_fn(_one_trial, args))


def _one_trial(arg) -> bool:
    base, labelmap, ilspec, ebn0_db, t1, t2, mc_symbols, ss, demapper = arg
    return hierarchical_exit(base, labelmap, ilspec, ebn0_db, t1, t2,
                             mc_symbols, ss, demapper=demapper).converged


def threshold_search(base: BaseMatrix, labelmap: LabelMap, ilspec: InterleaverSpec,
                     t1: int = 8, t2: int = 25, lo_db: float = 0.0,
                     hi_db: float = 8.0, resolution_db: float = 0.01,
                     trials: int = 5, mc_symbols: int = 10**5, seed=0,
                     map_fn=map, demapper: str = "map") -> ThresholdResult:
    """Bisect for the smallest Eb/N0 whose a-posteriori MIs all converge.

    Convergence at each probe is decided by majority over ``trials``
    independent MC repetitions; the bracket must genuinely straddle the
    threshold or :class:`BracketError` is raised.  ``map_fn`` lets a
    harness distribute trials over workers.
    """
    probes = []

    def vote(ebn0):
        votes = _probe_converges(base, labelmap, ilspec, ebn0, t1, t2,
                                 mc_symbols, trials, seed, map_fn, demapper)
        probes.append((round(ebn0, 6), votes, trials))
        return 2 * votes > trials

    if vote(lo_db):
        raise BracketError(f"already converges at the lower bracket {lo_db} dB")
    if not vote(hi_db):
        raise BracketError(f"still diverges at the upper bracket {hi_db} dB")
    lo, hi = lo_db, hi_db
    while hi - lo > resolution_db:
        mid = 0.5 * (lo + hi)
        if vote(mid):
            hi = mid
        else:
            lo = mid
    return ThresholdResult(hi, tuple(probes))


def wave_trace(result: ExitResult, positions: int) -> np.ndarray:
    """(outer_iters, positions) mean a-posteriori MI per coupling position."""
    t, n_vn = result.app_trace.shape
    if n_vn % positions:
        raise BlockMismatch(f"{n_vn} VNs do not split into {positions} positions")
    return result.app_trace.reshape(t, positions, n_vn // positions).mean(axis=2)
