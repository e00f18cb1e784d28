"""Block decomposition: complexity of a matrix from its block frequencies.

A binary matrix is zero-padded on the right and bottom to the next multiple
of the block side R, cut into non-overlapping R x R blocks (row-major scan),
and scored as

    sum over unique blocks U of  lookup(U) + log2(count(U)).

The string form does the same over consecutive length-r slices.  Because the
score depends only on the block frequency multiset, setting a single matrix
entry moves exactly one block occurrence from one pattern to another, and the
resulting change is computable in O(1) from the two counts involved.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from . import validation
from .errors import DimensionMismatch

# Vectorized bit packing uses an int64 dot product; beyond 62 bits per block
# fall back to Python integers.
_PACK_LIMIT = 62


def _pack_block_keys(padded: np.ndarray, r: int) -> list:
    """Pack every R x R block into an integer key, row-major block order.

    Bit (0, 0) of the block is the most significant bit, matching both the
    table file format and dense table indexing.
    """
    side = padded.shape[0] // r
    blocks = (
        padded.reshape(side, r, side, r)
        .transpose(0, 2, 1, 3)
        .reshape(side * side, r * r)
    )
    n_bits = r * r
    if n_bits <= _PACK_LIMIT:
        weights = (1 << np.arange(n_bits - 1, -1, -1)).astype(np.int64)
        return list(blocks.astype(np.int64) @ weights)
    keys = []
    for row in blocks:
        key = 0
        for bit in row:
            key = (key << 1) | int(bit)
        keys.append(key)
    return keys


def _pad(a: np.ndarray, r: int) -> np.ndarray:
    n = a.shape[0]
    n_padded = -(-n // r) * r
    if n_padded == n:
        return a.copy()
    out = np.zeros((n_padded, n_padded), dtype=np.uint8)
    out[:n, :n] = a
    return out


def block_key_string(key: int, r: int, dimension: int = 2) -> str:
    """Canonical table key for a packed block integer."""
    if dimension == 1:
        return format(key, f"0{r}b")
    return f"{r}x{r}:" + format(key, f"0{r * r}b")


@dataclass
class BlockCounts:
    """Block frequency multiset of a partitioned matrix.

    ``counts`` maps packed block keys to their occurrence counts; the counts
    sum to ``total_blocks``, the number of blocks in the padded matrix.
    """

    r: int
    n_padded: int
    counts: dict
    total_blocks: int


def partition(a, r: int) -> BlockCounts:
    """Zero-pad ``a`` to a multiple of ``r`` and count its R x R blocks."""
    a = validation.binary_matrix(a)
    if r < 1:
        raise ValueError("block side must be >= 1")
    padded = _pad(a, r)
    keys = _pack_block_keys(padded, r)
    side = padded.shape[0] // r
    return BlockCounts(
        r=r,
        n_padded=padded.shape[0],
        counts=dict(Counter(keys)),
        total_blocks=side * side,
    )


def _value_from_counts(counts: dict, table, r: int) -> float:
    total = 0.0
    for key, count in counts.items():
        total += table.lookup(block_key_string(key, r)) + math.log2(count)
    return total


def _require_r(table, r) -> int:
    if r is None:
        r = table.block_side
    if r is None:
        raise ValueError("block side r is required for this table")
    if r < 1:
        raise ValueError("block side must be >= 1")
    return int(r)


def bdm(a, table, r: int | None = None) -> float:
    """Block-decomposition complexity of a binary matrix, in bits.

    ``r`` defaults to the table's block side.  Missing blocks follow the
    table's policy.
    """
    if table.dimension != 2:
        raise DimensionMismatch("matrix form needs a 2-D table")
    r = _require_r(table, r)
    bc = partition(a, r)
    return _value_from_counts(bc.counts, table, r)


def bdm_string(s: str, r: int, table) -> float:
    """Block-decomposition complexity of a binary string, in bits.

    The string is zero-padded to a multiple of ``r`` and cut into
    consecutive slices, mirroring the matrix convention.
    """
    if table.dimension != 1:
        raise DimensionMismatch("string form needs a 1-D table")
    s = validation.binary_string(s)
    if r < 1:
        raise ValueError("slice length must be >= 1")
    if len(s) % r:
        s = s + "0" * (r - len(s) % r)
    counts = Counter(s[i : i + r] for i in range(0, len(s), r))
    total = 0.0
    for slice_, count in counts.items():
        total += table.lookup(slice_) + math.log2(count)
    return total


def cw_value(a, c0: float, r: int) -> float:
    """Constant-weight analog of :func:`bdm`: every block is priced ``c0``.

    Equals ``n_unique * c0 + sum(log2(count))`` over the block multiset.
    """
    if not c0 > 0:
        raise ValueError("constant weight must be > 0")
    bc = partition(a, r)
    total = len(bc.counts) * float(c0)
    for count in bc.counts.values():
        total += math.log2(count)
    return total


@dataclass
class BdmState:
    """Live block-frequency state supporting O(1) single-entry flip deltas.

    ``value`` always equals the full recomputation from ``counts``; flips on
    padding cells are rejected because padding is bookkeeping, not data.
    Single-writer: share one state per worker.
    """

    n: int
    counts: BlockCounts
    table: object
    value: float
    padded: np.ndarray
    block_keys: list = field(repr=False)

    def _locate(self, i: int, j: int):
        if not (0 <= i < self.n and 0 <= j < self.n):
            raise IndexError(f"entry ({i}, {j}) outside the {self.n}-sized matrix")
        r = self.counts.r
        side = self.counts.n_padded // r
        block_index = (i // r) * side + (j // r)
        bit = 1 << (r * r - 1 - ((i % r) * r + (j % r)))
        return block_index, bit


def make_state(a, table, r: int | None = None) -> BdmState:
    """Build counts, per-block keys, and the current value in one pass."""
    if table.dimension != 2:
        raise DimensionMismatch("matrix form needs a 2-D table")
    r = _require_r(table, r)
    a = validation.binary_matrix(a)
    padded = _pad(a, r)
    keys = _pack_block_keys(padded, r)
    side = padded.shape[0] // r
    bc = BlockCounts(
        r=r,
        n_padded=padded.shape[0],
        counts=dict(Counter(keys)),
        total_blocks=side * side,
    )
    value = _value_from_counts(bc.counts, table, r)
    return BdmState(
        n=a.shape[0],
        counts=bc,
        table=table,
        value=value,
        padded=padded,
        block_keys=keys,
    )


def _transfer(state: BdmState, u: int, v: int) -> float:
    """Value change from moving one block occurrence from u to v != u."""
    counts = state.counts.counts
    r = state.counts.r
    c_u = counts[u]
    c_v = counts.get(v, 0)
    if c_u == 1:
        delta = -state.table.lookup(block_key_string(u, r))
    else:
        delta = math.log2((c_u - 1) / c_u)
    if c_v == 0:
        delta += state.table.lookup(block_key_string(v, r))
    else:
        delta += math.log2((c_v + 1) / c_v)
    return delta


def flip_delta(state: BdmState, i: int, j: int) -> tuple[float, float]:
    """Value changes from setting entry (i, j) to 1 and to 0, in O(1).

    Returns ``(delta_set1, delta_set0)``; the delta for the entry's current
    value is 0.  The state is not modified.
    """
    block_index, bit = state._locate(i, j)
    u = state.block_keys[block_index]
    flipped = _transfer(state, u, u ^ bit)
    if state.padded[i, j]:
        return 0.0, flipped
    return flipped, 0.0


def apply_flip(state: BdmState, i: int, j: int, value: int) -> float:
    """Set entry (i, j) to ``value``, updating the state incrementally.

    Returns the change in the complexity value (0 for a no-op).
    """
    if value not in (0, 1):
        raise ValueError("entry value must be 0 or 1")
    block_index, bit = state._locate(i, j)
    if state.padded[i, j] == value:
        return 0.0
    u = state.block_keys[block_index]
    v = u ^ bit
    delta = _transfer(state, u, v)
    counts = state.counts.counts
    if counts[u] == 1:
        del counts[u]
    else:
        counts[u] -= 1
    counts[v] = counts.get(v, 0) + 1
    state.block_keys[block_index] = v
    state.padded[i, j] = value
    state.value += delta
    return delta
