"""AWGN channel, max-log demapping, BP decoding, and the BICM-ID receive loop.

LLR sign convention everywhere: L = log P(bit=0) / P(bit=1).  LLRs are
saturated at +-LLR_CLAMP when crossing component boundaries, which also
bounds the tanh-domain check updates.  Frame simulation derives one RNG
per (experiment seed, SNR index, frame index), so bit-exact results are
independent of worker count and scheduling.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constellation import LabelMap
from .errors import ConfigError, LengthMismatch
from .interleave import InterleaverSpec, apply_interleaver, deinterleave
from .lifting import LiftedCode

LLR_CLAMP = 50.0


@dataclass(frozen=True)
class ChannelParams:
    """Eb/N0 operating point of a rate-R code over a 2^m-ary channel."""

    ebn0_db: float
    rate: float
    bits_per_symbol: int

    @property
    def sigma2(self) -> float:
        """Per-dimension noise variance at unit symbol energy."""
        return 1.0 / (2.0 * self.rate * self.bits_per_symbol
                      * 10 ** (self.ebn0_db / 10))


def awgn(symbols: np.ndarray, sigma2: float, rng: np.random.Generator) -> np.ndarray:
    """Complex AWGN with variance ``sigma2`` per real dimension."""
    if sigma2 < 0:
        raise ValueError("noise variance must be nonnegative")
    if sigma2 == 0:
        return np.asarray(symbols, dtype=complex).copy()
    noise = rng.normal(size=len(symbols)) + 1j * rng.normal(size=len(symbols))
    return symbols + np.sqrt(sigma2) * noise


def modulate(interleaved_bits: np.ndarray, labelmap: LabelMap) -> np.ndarray:
    """Map each group of m interleaved bits (MSB first) onto a point."""
    m = labelmap.m
    bits = np.asarray(interleaved_bits, dtype=np.int64)
    if len(bits) % m:
        raise LengthMismatch(f"bit count {len(bits)} not divisible by m={m}")
    weights = 1 << np.arange(m - 1, -1, -1)
    labels = bits.reshape(-1, m) @ weights
    return labelmap.points_by_label[labels]


def _demap_inputs(y, labelmap, apriori):
    y = np.asarray(y, dtype=complex)
    m = labelmap.m
    if apriori is None:
        apriori = np.zeros((len(y), m))
    apriori = np.ascontiguousarray(apriori, dtype=np.float64)
    if apriori.shape != (len(y), m):
        raise LengthMismatch("a-priori array must be (n_symbols, m)")
    if not np.isfinite(apriori).all():
        raise ValueError("a-priori LLRs must be finite")
    return y, apriori


def maxlog_demap(y: np.ndarray, labelmap: LabelMap, sigma2: float,
                 apriori: np.ndarray | None = None) -> np.ndarray:
    """Extrinsic max-log LLRs per labeling position, given per-bit priors.

    ``apriori`` is an (n_symbols, m) array in the L = log P(0)/P(1)
    convention (zeros when None); each output excludes its own prior.
    """
    y, apriori = _demap_inputs(y, labelmap, apriori)
    z = labelmap.points_by_label
    return kernels.maxlog_demap(
        np.ascontiguousarray(y.real), np.ascontiguousarray(y.imag),
        np.ascontiguousarray(z.real), np.ascontiguousarray(z.imag),
        labelmap.m, apriori, 1.0 / (2.0 * sigma2))


def map_demap(y: np.ndarray, labelmap: LabelMap, sigma2: float,
              apriori: np.ndarray | None = None) -> np.ndarray:
    """Exact (log-sum-exp) APP demapping, extrinsic in each position.

    Same contract as :func:`maxlog_demap`; used by the transfer analysis,
    where the max-sum approximation is not part of the model.
    """
    y, apriori = _demap_inputs(y, labelmap, apriori)
    m = labelmap.m
    z = labelmap.points_by_label
    labels = np.arange(len(z))
    bits = ((labels[:, None] >> (m - 1 - np.arange(m))) & 1).astype(np.float64)
    metric = (-np.abs(y[:, None] - z) ** 2 / (2.0 * sigma2)) - apriori @ bits.T
    out = np.empty_like(apriori)
    for k in range(m):
        one = bits[:, k] == 1.0
        m0 = metric[:, ~one]
        m1 = metric[:, one]
        mx0 = m0.max(axis=1)
        mx1 = m1.max(axis=1)
        lse0 = mx0 + np.log(np.exp(m0 - mx0[:, None]).sum(axis=1))
        lse1 = mx1 + np.log(np.exp(m1 - mx1[:, None]).sum(axis=1))
        out[:, k] = lse0 - lse1 - apriori[:, k]
    return out


@dataclass(frozen=True)
class BpResult:
    posterior: np.ndarray
    extrinsic: np.ndarray
    hard_bits: np.ndarray
    converged: bool
    iterations: int


def bp_decode(code: LiftedCode, channel_llrs: np.ndarray, max_iter: int,
              early_stop: bool = True) -> BpResult:
    """Flooding sum-product decoding of ``channel_llrs`` over the code graph."""
    llr = np.ascontiguousarray(channel_llrs, dtype=np.float64)
    if len(llr) != code.n_bits:
        raise LengthMismatch(f"expected {code.n_bits} LLRs, got {len(llr)}")
    chk_indptr, chk_evar, var_indptr, var_eids = code.decode_arrays
    posterior, iterations, converged = kernels.bp_decode(
        llr, chk_indptr, chk_evar, var_indptr, var_eids,
        int(max_iter), LLR_CLAMP, early_stop)
    hard = (posterior < 0).astype(np.uint8)
    return BpResult(posterior, posterior - llr, hard, bool(converged), iterations)


@dataclass(frozen=True)
class RxResult:
    hard_bits: np.ndarray
    info_bits: np.ndarray
    converged: bool
    outer_iters_used: int


def bicm_id_receive(code: LiftedCode, labelmap: LabelMap, ilspec: InterleaverSpec,
                    y: np.ndarray, params: ChannelParams,
                    t1: int, t2: int) -> RxResult:
    """Iterative demap/decode: decoder extrinsic feeds back as demapper prior.

    The first pass uses zero priors (t1 = 1 is plain non-iterative
    reception); the loop exits early on a zero syndrome.
    """
    m = labelmap.m
    if len(y) * m != ilspec.n or ilspec.n != code.n_bits:
        raise LengthMismatch("symbol count, interleaver, and code length disagree")
    n_sym = len(y)
    apriori = np.zeros((n_sym, m))
    result = None
    outer = 0
    for outer in range(1, t1 + 1):
        extr = maxlog_demap(y, labelmap, params.sigma2, apriori)
        llrs = deinterleave(ilspec, np.clip(extr.ravel(), -LLR_CLAMP, LLR_CLAMP))
        result = bp_decode(code, llrs, t2, early_stop=True)
        if result.converged:
            break
        if outer < t1:
            fed = np.clip(result.extrinsic, -LLR_CLAMP, LLR_CLAMP)
            apriori = apply_interleaver(ilspec, fed).reshape(n_sym, m)
    return RxResult(result.hard_bits, code.extract_info(result.hard_bits),
                    result.converged, outer)


# --- frame-level BER simulation ----------------------------------------------

@dataclass(frozen=True)
class BerPoint:
    ebn0_db: float
    frames: int
    bit_errors: int
    frame_errors: int
    info_len: int
    elapsed_s: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / (max(self.frames, 1) * self.info_len)

    @property
    def fer(self) -> float:
        return self.frame_errors / max(self.frames, 1)


_CTX: dict = {}


def _init_worker(code, labelmap, ilspec, t1, t2, seed, rate):
    _CTX.update(code=code, labelmap=labelmap, ilspec=ilspec,
                t1=t1, t2=t2, seed=seed, rate=rate)


def _frame_rng(seed, point_idx, frame_idx):
    return np.random.default_rng(
        np.random.SeedSequence(seed, spawn_key=(point_idx, frame_idx)))


def _run_chunk(args):
    point_idx, ebn0_db, start, count = args
    code: LiftedCode = _CTX["code"]
    labelmap: LabelMap = _CTX["labelmap"]
    ilspec: InterleaverSpec = _CTX["ilspec"]
    params = ChannelParams(ebn0_db, _CTX["rate"], labelmap.m)
    bit_errors = 0
    frame_errors = 0
    for frame in range(start, start + count):
        rng = _frame_rng(_CTX["seed"], point_idx, frame)
        info = rng.integers(0, 2, size=code.info_len, dtype=np.uint8)
        word = code.encode(info)
        tx = apply_interleaver(ilspec, word)
        y = awgn(modulate(tx, labelmap), params.sigma2, rng)
        rx = bicm_id_receive(code, labelmap, ilspec, y, params,
                             _CTX["t1"], _CTX["t2"])
        errs = int(np.count_nonzero(rx.info_bits != info))
        bit_errors += errs
        frame_errors += errs > 0
    return bit_errors, frame_errors


def ber_experiment(code: LiftedCode, labelmap: LabelMap, ilspec: InterleaverSpec,
                   ebn0_grid, *, t1: int = 8, t2: int = 25,
                   target_bit_errors: int = 100, max_frames: int = 10**6,
                   seed: int = 0, workers: int = 1, chunk_frames: int = 25,
                   rate: float | None = None) -> list[BerPoint]:
    """Per-SNR Monte-Carlo until the bit-error target or the frame cap.

    Frames are simulated in fixed chunks consumed in order, so the
    stopping frame and all counters are reproducible for a given seed
    regardless of ``workers``.
    """
    if target_bit_errors < 0 or max_frames < 0 or chunk_frames <= 0:
        raise ConfigError("stop rule must be nonnegative and chunks positive")
    if ilspec.n != code.n_bits or ilspec.m != labelmap.m:
        raise ConfigError("interleaver does not match code length / symbol size")
    rate = code.rate if rate is None else rate
    points: list[BerPoint] = []
    if max_frames == 0:
        return points
    init = (code, labelmap, ilspec, t1, t2, seed, rate)
    pool = None
    if workers > 1:
        pool = ProcessPoolExecutor(max_workers=workers,
                                   initializer=_init_worker, initargs=init)
    _init_worker(*init)
    try:
        for point_idx, ebn0_db in enumerate(ebn0_grid):
            t_start = time.perf_counter()
            frames = bit_errors = frame_errors = 0
            n_chunks = (max_frames + chunk_frames - 1) // chunk_frames

            def chunk_spec(c, _e=float(ebn0_db), _p=point_idx):
                return (_p, _e, c * chunk_frames,
                        min(chunk_frames, max_frames - c * chunk_frames))

            if pool is None:
                for c in range(n_chunks):
                    be, fe = _run_chunk(chunk_spec(c))
                    frames += chunk_spec(c)[3]
                    bit_errors += be
                    frame_errors += fe
                    if bit_errors >= target_bit_errors or frames >= max_frames:
                        break
            else:
                # sliding submission window; results consumed strictly in order
                window = 3 * workers
                inflight = {}
                submit_next = 0
                consume = 0
                while consume < n_chunks:
                    while len(inflight) < window and submit_next < n_chunks:
                        inflight[submit_next] = pool.submit(
                            _run_chunk, chunk_spec(submit_next))
                        submit_next += 1
                    be, fe = inflight.pop(consume).result()
                    frames += chunk_spec(consume)[3]
                    bit_errors += be
                    frame_errors += fe
                    consume += 1
                    if bit_errors >= target_bit_errors or frames >= max_frames:
                        break
                for fut in inflight.values():
                    fut.cancel()
            points.append(BerPoint(float(ebn0_db), frames, bit_errors,
                                   frame_errors, code.info_len,
                                   time.perf_counter() - t_start))
    finally:
        if pool is not None:
            pool.shutdown(cancel_futures=True)
    return points
