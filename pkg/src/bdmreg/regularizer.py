"""Perturbation gradient of expected block-decomposition complexity.

The decoded edge-probability matrix is treated as N^2 independent Bernoulli
variables.  For a sampled realization, every entry's contribution to the
gradient of the expected complexity is the difference between the values
with that entry forced to 1 and to 0 — an O(1) flip difference — and the
sample mean over m realizations is an unbiased estimate of the true
gradient.  The regularization term itself is linear in the probabilities
with the sampled gradient held constant, so its backward contribution is
just the scaled gradient matrix.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import validation
from .bdm import _pack_block_keys, _pad, bdm, flip_delta, make_state
from .ctm import ConstantCtmTable
from .errors import DimensionMismatch, MissingBlock, TooLarge

_MODES = ("kol", "cw", "none")
# Per-entry flips are vectorized through a dense value array indexed by
# packed block key; beyond this many bits per block use the state fallback.
_DENSE_BITS = 24
_EXACT_BITS = 20


@dataclass(frozen=True)
class RegConfig:
    """Regularizer settings: strength, sample count, mode, and seed.

    ``mode`` is ``"kol"`` (per-block table lookups), ``"cw"`` (every lookup
    replaced by ``cw_constant``), or ``"none"``.  ``cw_constant`` is required
    for (and only used by) the ``"cw"`` mode.
    """

    lam: float = 0.0
    m: int = 1
    mode: str = "kol"
    cw_constant: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")
        if self.m < 1:
            raise ValueError("sample count m must be >= 1")
        if self.mode not in _MODES:
            raise ValueError(f"mode must be one of {_MODES}")
        if self.mode == "cw":
            if self.cw_constant is None or not self.cw_constant > 0:
                raise ValueError("cw mode needs a positive cw_constant")


@dataclass(frozen=True)
class GradientSample:
    """Per-entry estimates of d E[complexity] / d p_ij, in bits.

    ``m`` is the number of Monte-Carlo samples averaged; 0 marks an exact
    (enumerated) gradient.
    """

    n: int
    values: np.ndarray
    m: int


def sample_adjacency(p, rng) -> np.ndarray:
    """One realization of the Bernoulli matrix: entry (i,j) is 1 w.p. p_ij.

    All N^2 entries are sampled independently; no symmetrization.
    """
    p = validation.probability_matrix(p)
    return (rng.random(p.shape) < p).astype(np.uint8)


def _effective_table(table, cfg: RegConfig):
    if cfg.mode == "cw":
        dimension = getattr(table, "dimension", 2) if table is not None else 2
        return ConstantCtmTable(dimension, cfg.cw_constant)
    return table


def _grad_one_sample_dense(a_pad, n, r, counts_arr, dense, key_of_entry,
                           bit_of_entry, fail_policy):
    """Flip differences for all real entries of one padded realization."""
    c_u = counts_arr[key_of_entry]
    v = key_of_entry ^ bit_of_entry
    c_v = counts_arr[v]
    k_u = dense[key_of_entry]
    k_v = dense[v]
    if fail_policy:
        bad = ((c_u == 1) & np.isnan(k_u)) | ((c_v == 0) & np.isnan(k_v))
        if bad.any():
            raise MissingBlock("sampled block absent from table (fail policy)")
    with np.errstate(divide="ignore", invalid="ignore"):
        term_u = np.where(
            c_u == 1,
            -k_u,
            np.log2(np.maximum(c_u - 1, 1)) - np.log2(c_u),
        )
        term_v = np.where(
            c_v == 0,
            k_v,
            np.log2(c_v + 1) - np.log2(np.maximum(c_v, 1)),
        )
    sign = 1.0 - 2.0 * a_pad[:n, :n].ravel()
    return sign * (term_u + term_v)


def grad_sample(p, table, cfg: RegConfig, r: int | None = None) -> GradientSample:
    """Monte-Carlo estimate of the gradient of expected complexity.

    Averages, over ``cfg.m`` sampled realizations, the per-entry flip
    difference value(entry=1) - value(entry=0).  Deterministic per
    ``cfg.seed``.  Mode ``"none"`` returns zeros without sampling.
    """
    p = validation.probability_matrix(p)
    n = p.shape[0]
    if cfg.mode == "none":
        return GradientSample(n=n, values=np.zeros((n, n)), m=cfg.m)
    if cfg.mode == "kol" and table is None:
        raise ValueError("kol mode needs a complexity table")
    table = _effective_table(table, cfg)
    if table.dimension != 2:
        raise DimensionMismatch("matrix gradients need a 2-D table")
    if r is None:
        r = table.block_side
    if r is None:
        raise ValueError("block side r is required for this table")
    r = int(r)

    rng = np.random.default_rng(cfg.seed)
    if r * r > _DENSE_BITS:
        return _grad_sample_state(p, table, cfg, r, rng)

    n_padded = -(-n // r) * r
    side = n_padded // r
    # Per-entry constants: owning block index and in-block bit mask.
    ii, jj = np.divmod(np.arange(n * n), n)
    block_of_entry = (ii // r) * side + (jj // r)
    bit_of_entry = np.int64(1) << (
        r * r - 1 - ((ii % r) * r + (jj % r))
    ).astype(np.int64)
    dense = table.dense_values(r)
    fail_policy = table.missing_policy == "fail"

    acc = np.zeros(n * n)
    for _ in range(cfg.m):
        a_pad = np.zeros((n_padded, n_padded), dtype=np.uint8)
        a_pad[:n, :n] = rng.random((n, n)) < p
        keys = np.asarray(_pack_block_keys(a_pad, r), dtype=np.int64)
        counts_arr = np.bincount(keys, minlength=1 << (r * r))
        key_of_entry = keys[block_of_entry]
        acc += _grad_one_sample_dense(
            a_pad, n, r, counts_arr, dense, key_of_entry, bit_of_entry,
            fail_policy,
        )
    return GradientSample(n=n, values=(acc / cfg.m).reshape(n, n), m=cfg.m)


def _grad_sample_state(p, table, cfg, r, rng):
    """Fallback path through the incremental flip-delta state."""
    n = p.shape[0]
    acc = np.zeros((n, n))
    for _ in range(cfg.m):
        a = (rng.random((n, n)) < p).astype(np.uint8)
        state = make_state(a, table, r)
        for i in range(n):
            for j in range(n):
                d1, d0 = flip_delta(state, i, j)
                acc[i, j] += d1 - d0
    return GradientSample(n=n, values=acc / cfg.m, m=cfg.m)


def _enumerate_realizations(p, table, r):
    """Probability and complexity of every realization of the matrix.

    Bit ``n*n - 1 - (i*n + j)`` of realization index k holds entry (i, j),
    i.e. entry (0, 0) is the most significant bit.
    """
    n = p.shape[0]
    n_bits = n * n
    if n_bits > _EXACT_BITS:
        raise TooLarge(
            f"exact enumeration needs 2^{n_bits} realizations; "
            f"the bound is 2^{_EXACT_BITS}"
        )
    count = 1 << n_bits
    idx = np.arange(count, dtype=np.int64)
    p_flat = p.ravel()
    probs = np.ones(count)
    for f in range(n_bits):
        bit = (idx >> (n_bits - 1 - f)) & 1
        probs *= np.where(bit == 1, p_flat[f], 1.0 - p_flat[f])
    values = np.empty(count)
    a = np.empty((n, n), dtype=np.uint8)
    shifts = n_bits - 1 - np.arange(n_bits)
    for k in range(count):
        a.ravel()[:] = (k >> shifts) & 1
        values[k] = bdm(a, table, r)
    return idx, probs, values


def exact_expected_bdm(p, table, r: int | None = None) -> float:
    """Exact E[complexity] by enumerating all 2^(N^2) realizations.

    Feasible only for tiny matrices (N^2 <= 20); raises TooLarge beyond.
    """
    p = validation.probability_matrix(p)
    r = r if r is not None else table.block_side
    _idx, probs, values = _enumerate_realizations(p, table, int(r))
    return float(probs @ values)


def exact_gradient(p, table, r: int | None = None) -> GradientSample:
    """Exact conditional-expectation gradient by enumeration.

    Entry (i, j) is E[complexity | entry = 1] - E[complexity | entry = 0];
    ``m`` is recorded as 0 to mark exactness.
    """
    p = validation.probability_matrix(p)
    n = p.shape[0]
    r = r if r is not None else table.block_side
    idx, probs, values = _enumerate_realizations(p, table, int(r))
    n_bits = n * n
    weighted = probs * values
    g = np.empty(n_bits)
    p_flat = p.ravel()
    for f in range(n_bits):
        bit = (idx >> (n_bits - 1 - f)) & 1
        sel = bit == 1
        e1 = weighted[sel].sum() / p_flat[f]
        e0 = weighted[~sel].sum() / (1.0 - p_flat[f])
        g[f] = e1 - e0
    return GradientSample(n=n, values=g.reshape(n, n), m=0)


def reg_term(p, g: GradientSample, lam: float) -> float:
    """Regularization scalar: lam * sum_ij p_ij * g_ij (for logging)."""
    p = validation.probability_matrix(p)
    if p.shape != g.values.shape:
        raise ValueError(
            f"shape mismatch: probabilities {p.shape}, gradient "
            f"{g.values.shape}"
        )
    return float(lam) * float(np.sum(p * g.values))


def reg_backward(g: GradientSample, lam: float) -> np.ndarray:
    """Gradient of the regularization term w.r.t. the probabilities.

    The sampled gradient matrix is treated as a constant, so this is simply
    ``lam * g`` elementwise.
    """
    return float(lam) * g.values.copy()
