"""Exhaustive enumeration of small Turing machines and complexity tables.

The machine class ``(n, 2)`` is the set of n-state 2-symbol machines in the
busy-beaver formalism: every (state, read-symbol) pair maps to a
(write-symbol, head-move, next-state) triple, where the next state is either
one of the n working states or the distinguished halt pseudo-state.  Halting
transitions write a symbol and move the head right; this keeps the class size
at exactly ``(4n + 2) ** (2n)`` machines for the 1-D tape (``(8n + 2) ** (2n)``
for the four-direction 2-D variant).

Running every machine in the class from a blank tape and tallying who halts
with which output yields an output-frequency distribution; its negative
base-2 logarithm is the complexity estimate stored in a :class:`CtmTable`.
"""

from __future__ import annotations

import itertools
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterator, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTable,
    MissingBlock,
    ParseError,
    ZeroHaltingMachines,
)

HALT = 0

# Head moves.  1-D: integer offsets; 2-D: (row, col) offsets with halting
# transitions fixed to move right in both cases.
_MOVES_1D = (-1, 1)
_MOVES_2D = ((-1, 0), (1, 0), (0, -1), (0, 1))
_HALT_MOVE = {1: 1, 2: (0, 1)}

# Safely above the known maximal halting step counts for each state count.
DEFAULT_STEP_LIMITS = {1: 10, 2: 10, 3: 50, 4: 200}


class RunStatus(Enum):
    HALTED = "halted"
    STEP_LIMIT_EXCEEDED = "step_limit_exceeded"


@dataclass(frozen=True)
class RunOutcome:
    """Result of running one machine from a blank tape.

    ``output`` is the tape contents over the contiguous interval of cells the
    head visited (bounding box for 2-D machines), read out only when the
    machine halted; it is empty otherwise.
    """

    status: RunStatus
    output: str | tuple[str, ...]
    steps: int

    @property
    def halted(self) -> bool:
        return self.status is RunStatus.HALTED


@dataclass(frozen=True)
class TuringMachine:
    """An n-state 2-symbol machine with a flat transition table.

    ``transitions[2 * (state - 1) + read]`` is the ``(write, move, next_state)``
    triple for 1-based ``state`` reading ``read``; ``next_state == HALT`` (0)
    stops the machine after the write and move are applied.
    """

    n_states: int
    transitions: tuple
    dimension: int = 1

    def __post_init__(self):
        if self.n_states < 1:
            raise ValueError("n_states must be positive")
        if self.dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if len(self.transitions) != 2 * self.n_states:
            raise ValueError(
                f"expected {2 * self.n_states} transition entries, "
                f"got {len(self.transitions)}"
            )
        for write, _move, nxt in self.transitions:
            if write not in (0, 1):
                raise ValueError("write symbol must be 0 or 1")
            if not (0 <= nxt <= self.n_states):
                raise ValueError("next state out of range")


def machine_count(n: int, dimension: int = 1) -> int:
    """Size of the machine class (n, 2) under this formalism."""
    per_entry = (4 * n + 2) if dimension == 1 else (8 * n + 2)
    return per_entry ** (2 * n)


def _entry_options(n: int, dimension: int) -> tuple:
    """Every possible (write, move, next_state) triple for one table slot."""
    moves = _MOVES_1D if dimension == 1 else _MOVES_2D
    options = [
        (write, move, nxt)
        for nxt in range(1, n + 1)
        for move in moves
        for write in (0, 1)
    ]
    options += [(write, _HALT_MOVE[dimension], HALT) for write in (0, 1)]
    return tuple(options)


def iter_machines(n: int, dimension: int = 1) -> Iterator[TuringMachine]:
    """Yield every machine in (n, 2), in a fixed deterministic order."""
    options = _entry_options(n, dimension)
    for transitions in itertools.product(options, repeat=2 * n):
        yield TuringMachine(n, transitions, dimension)


def run_tm(machine: TuringMachine, step_limit: int) -> RunOutcome:
    """Run ``machine`` from a blank tape for at most ``step_limit`` steps.

    The tape is all-zero, the head starts at the origin and the machine in
    state 1.  Each applied transition (halting ones included) counts as one
    step.  Cells count as visited once the head has occupied them, so the
    final post-move position of a halting machine is part of the output.
    """
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    if machine.dimension == 1:
        out, steps = _run_1d(machine.transitions, step_limit)
    else:
        out, steps = _run_2d(machine.transitions, step_limit)
    if out is None:
        empty = "" if machine.dimension == 1 else ()
        return RunOutcome(RunStatus.STEP_LIMIT_EXCEEDED, empty, steps)
    return RunOutcome(RunStatus.HALTED, out, steps)


def _run_1d(transitions, step_limit):
    tape = {}
    get = tape.get
    pos = 0
    lo = hi = 0
    base = 0  # 2 * (state - 1)
    for step in range(1, step_limit + 1):
        write, move, nxt = transitions[base + get(pos, 0)]
        tape[pos] = write
        pos += move
        if pos < lo:
            lo = pos
        elif pos > hi:
            hi = pos
        if nxt == HALT:
            return "".join("01"[get(c, 0)] for c in range(lo, hi + 1)), step
        base = 2 * nxt - 2
    return None, step_limit


def _run_2d(transitions, step_limit):
    tape = {}
    get = tape.get
    r = c = 0
    rlo = rhi = clo = chi = 0
    base = 0
    for step in range(1, step_limit + 1):
        write, (dr, dc), nxt = transitions[base + get((r, c), 0)]
        tape[r, c] = write
        r += dr
        c += dc
        if r < rlo:
            rlo = r
        elif r > rhi:
            rhi = r
        if c < clo:
            clo = c
        elif c > chi:
            chi = c
        if nxt == HALT:
            rows = tuple(
                "".join("01"[get((i, j), 0)] for j in range(clo, chi + 1))
                for i in range(rlo, rhi + 1)
            )
            return rows, step
        base = 2 * nxt - 2
    return None, step_limit


def _check_enumeration_scale(n: int, dimension: int) -> None:
    if dimension == 2 and n > 2:
        raise ValueError(
            "exhaustive 2-D enumeration is capped at 2 states; "
            "load a published table instead"
        )
    if dimension == 1 and n > 4:
        raise ValueError("exhaustive 1-D enumeration supports at most 4 states")
    if dimension == 1 and n == 4:
        warnings.warn(
            "enumerating all 18**8 four-state machines takes a very long time",
            stacklevel=3,
        )


def enumerate_distribution(
    n: int, step_limit: int, dimension: int = 1
) -> dict:
    """Output-frequency distribution over all halting machines in (n, 2).

    Returns a mapping from output (string for 1-D, tuple of row strings for
    2-D) to its exact frequency ratio as a :class:`fractions.Fraction`; the
    values sum to exactly 1.  Raises :class:`ZeroHaltingMachines` if the step
    limit is too small for any machine to halt.

    Enumeration is exhaustive: expect minutes for ``n = 3`` and far longer
    for ``n = 4``.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if step_limit < 1:
        raise ValueError("step_limit must be >= 1")
    _check_enumeration_scale(n, dimension)

    counts: Counter = Counter()
    halting = 0
    options = _entry_options(n, dimension)
    run = _run_1d if dimension == 1 else _run_2d
    for transitions in itertools.product(options, repeat=2 * n):
        out, _steps = run(transitions, step_limit)
        if out is not None:
            halting += 1
            counts[out] += 1
    if halting == 0:
        raise ZeroHaltingMachines(
            f"no machine in ({n}, 2) halted within {step_limit} steps"
        )
    return {s: Fraction(c, halting) for s, c in counts.items()}


# ---------------------------------------------------------------------------
# Complexity tables


def _canonical_key(dimension: int, block) -> str:
    """Canonical string key for a block.

    1-D keys are the bit string itself.  2-D keys carry their shape:
    ``"<rows>x<cols>:<row-major bits>"``.  Accepts bit strings, sequences of
    row strings, 2-D arrays, or already-canonical keys.
    """
    if dimension == 1:
        if not isinstance(block, str):
            block = "".join("01"[int(b)] for b in np.asarray(block).ravel())
        if block == "" or any(ch not in "01" for ch in block):
            raise ValueError(f"not a binary string: {block!r}")
        return block

    if isinstance(block, str):
        if ":" in block:
            shape, _, bits = block.partition(":")
            h, _, w = shape.partition("x")
            if not (h.isdigit() and w.isdigit()) or len(bits) != int(h) * int(w):
                raise ValueError(f"malformed 2-D block key: {block!r}")
            if bits and any(ch not in "01" for ch in bits):
                raise ValueError(f"malformed 2-D block key: {block!r}")
            return block
        # Bare bit string: must be square.
        side = math.isqrt(len(block))
        if side * side != len(block) or any(ch not in "01" for ch in block):
            raise ValueError(f"cannot infer shape of 2-D block {block!r}")
        return f"{side}x{side}:{block}"
    if isinstance(block, (tuple, list)) and block and isinstance(block[0], str):
        h, w = len(block), len(block[0])
        if any(len(row) != w for row in block):
            raise ValueError("ragged 2-D block")
        return f"{h}x{w}:" + "".join(block)
    arr = np.asarray(block)
    if arr.ndim != 2:
        raise ValueError("2-D block expected")
    bits = "".join("01"[int(b)] for b in arr.ravel())
    return f"{arr.shape[0]}x{arr.shape[1]}:{bits}"


def _key_width(dimension: int, key: str) -> int:
    """Side length (1-D: string length; 2-D: max bounding side) of a key."""
    if dimension == 1:
        return len(key)
    shape, _, _bits = key.partition(":")
    h, _, w = shape.partition("x")
    return max(int(h), int(w))


class CtmTable:
    """Mapping from binary blocks to complexity estimates in bits.

    Immutable after construction and safe for shared concurrent reads.
    ``missing_policy`` controls lookups of absent blocks: ``"max_plus_one"``
    prices them one bit above the costliest stored block, ``"fail"`` raises
    :class:`MissingBlock`.

    Tables loaded from files hold blocks of a single size (``block_side``);
    tables built by local enumeration store the full output support and may
    mix sizes (``uniform`` is False), in which case ``block_side`` is the
    largest stored side.
    """

    def __init__(self, dimension, entries, missing_policy="max_plus_one",
                 block_side=None):
        if dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        if missing_policy not in ("max_plus_one", "fail"):
            raise ValueError(f"unknown missing policy {missing_policy!r}")
        canonical = {}
        for key, value in dict(entries).items():
            value = float(value)
            if not value >= 0.0:
                raise ValueError(f"complexity value must be >= 0, got {value}")
            canonical[_canonical_key(dimension, key)] = value
        self.dimension = dimension
        self.entries = canonical
        self.missing_policy = missing_policy
        widths = {_key_width(dimension, k) for k in canonical}
        self.uniform = len(widths) <= 1 and all(
            self._is_square(k) for k in canonical
        )
        if block_side is None:
            block_side = max(widths) if widths else 1
        elif self.uniform and widths and widths != {block_side}:
            raise DimensionMismatch(
                f"declared block side {block_side} but keys have side {widths}"
            )
        self.block_side = int(block_side)
        self._max_value = max(canonical.values()) if canonical else None
        self._dense_cache: dict[int, np.ndarray] = {}

    def _is_square(self, key: str) -> bool:
        if self.dimension == 1:
            return True
        shape = key.partition(":")[0]
        h, _, w = shape.partition("x")
        return h == w

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, block) -> bool:
        return _canonical_key(self.dimension, block) in self.entries

    def __eq__(self, other) -> bool:
        if not isinstance(other, CtmTable):
            return NotImplemented
        return (
            self.dimension == other.dimension
            and self.block_side == other.block_side
            and self.missing_policy == other.missing_policy
            and self.entries == other.entries
        )

    @property
    def max_value(self) -> float:
        if self._max_value is None:
            raise EmptyTable("table has no entries")
        return self._max_value

    def lookup(self, block) -> float:
        """Complexity of ``block``, applying the missing-entry policy."""
        key = _canonical_key(self.dimension, block)
        if self.uniform and self.entries:
            if _key_width(self.dimension, key) != self.block_side:
                raise DimensionMismatch(
                    f"key {key!r} does not match table block side "
                    f"{self.block_side}"
                )
        value = self.entries.get(key)
        if value is not None:
            return value
        if self.missing_policy == "fail":
            raise MissingBlock(key)
        return self.max_value + 1.0

    def average(self) -> float:
        """Arithmetic mean of all stored values."""
        if not self.entries:
            raise EmptyTable("cannot average an empty table")
        return math.fsum(self.entries.values()) / len(self.entries)

    def dense_values(self, side: int) -> np.ndarray:
        """Values for every possible block of ``side`` as a flat array.

        Index ``k`` holds the value of the block whose row-major bit packing
        (bit (0, 0) most significant) equals ``k``.  Absent blocks carry the
        missing-policy value (NaN under the ``"fail"`` policy, so callers can
        detect and report them in vectorized code).
        """
        n_bits = side * side if self.dimension == 2 else side
        if n_bits > 24:
            raise ValueError(f"dense table for {n_bits}-bit keys is too large")
        if side in self._dense_cache:
            return self._dense_cache[side]
        if self.missing_policy == "fail":
            fill = np.nan
        else:
            fill = self.max_value + 1.0
        values = np.full(1 << n_bits, fill, dtype=np.float64)
        prefix = f"{side}x{side}:" if self.dimension == 2 else ""
        for key, value in self.entries.items():
            if prefix:
                if not key.startswith(prefix):
                    continue
                bits = key[len(prefix):]
            else:
                if len(key) != side:
                    continue
                bits = key
            values[int(bits, 2)] = value
        self._dense_cache[side] = values
        return values


class ConstantCtmTable:
    """Table stand-in that prices every block at one constant value.

    Used by the constant-weight control: the block aggregation rule is kept
    while all per-block complexity estimates collapse to ``value``.  Exposes
    the same read interface as :class:`CtmTable`.
    """

    def __init__(self, dimension: int, value: float, block_side=None):
        if dimension not in (1, 2):
            raise ValueError("dimension must be 1 or 2")
        value = float(value)
        if not value > 0.0:
            raise ValueError(f"constant value must be > 0, got {value}")
        self.dimension = dimension
        self.value = value
        self.block_side = block_side
        self.uniform = False
        self.missing_policy = "max_plus_one"

    @property
    def max_value(self) -> float:
        return self.value

    def lookup(self, block) -> float:
        _canonical_key(self.dimension, block)
        return self.value

    def average(self) -> float:
        return self.value

    def dense_values(self, side: int) -> np.ndarray:
        n_bits = side * side if self.dimension == 2 else side
        if n_bits > 24:
            raise ValueError(f"dense table for {n_bits}-bit keys is too large")
        return np.full(1 << n_bits, self.value, dtype=np.float64)


def lookup(table: CtmTable, block) -> float:
    """Functional alias for :meth:`CtmTable.lookup`."""
    return table.lookup(block)


def average_ctm(table: CtmTable) -> float:
    """Functional alias for :meth:`CtmTable.average`."""
    return table.average()


def build_ctm_table(
    n: int,
    step_limit: int | None = None,
    dimension: int = 1,
    missing_policy: str = "max_plus_one",
) -> CtmTable:
    """Build a complexity table by exhaustive enumeration of (n, 2).

    Every output in the halting distribution's support is stored with value
    ``-log2`` of its frequency ratio, so ``sum(2 ** -v)`` over the stored
    entries is 1.  ``step_limit`` defaults to a bound safely above the known
    maximal halting step count for ``n``.
    """
    if step_limit is None:
        try:
            step_limit = DEFAULT_STEP_LIMITS[n]
        except KeyError:
            raise ValueError(f"no default step limit for n={n}") from None
    dist = enumerate_distribution(n, step_limit, dimension)
    entries = {
        _canonical_key(dimension, out): -math.log2(ratio)
        for out, ratio in dist.items()
    }
    return CtmTable(dimension, entries, missing_policy)


# ---------------------------------------------------------------------------
# Table file format
#
#   line 1:  ctm r=<R> dim=<1|2>            (plus " ragged=1" for mixed sizes)
#   others:  <hex key> <decimal value>
#
# Keys are the row-major bit packing of the block, most significant bit at
# cell (0, 0), zero-padded to ceil(R/4) hex digits (dim=1) or ceil(R*R/4)
# (dim=2).  Ragged tables prefix each key with its actual size: "<L>:<hex>"
# for 1-D and "<H>x<W>:<hex>" for 2-D.


def _format_value(value: float) -> str:
    text = repr(float(value))
    return text


def _key_to_line_key(dimension: int, key: str, uniform: bool, r: int) -> str:
    if dimension == 1:
        bits = key
        shape_prefix = "" if uniform else f"{len(bits)}:"
        width = r if uniform else len(bits)
    else:
        shape, _, bits = key.partition(":")
        h, _, w = shape.partition("x")
        shape_prefix = "" if uniform else f"{h}x{w}:"
        width = r * r if uniform else int(h) * int(w)
    hex_digits = -(-width // 4)
    return shape_prefix + format(int(bits, 2), f"0{hex_digits}x")


def save_ctm_table(table: CtmTable, path) -> None:
    """Write ``table`` in the text format read by :func:`load_ctm_table`."""
    lines = [f"ctm r={table.block_side} dim={table.dimension}"]
    if not table.uniform:
        lines[0] += " ragged=1"
    for key in sorted(table.entries):
        line_key = _key_to_line_key(
            table.dimension, key, table.uniform, table.block_side
        )
        lines.append(f"{line_key} {_format_value(table.entries[key])}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_hex_key(dimension, token, r, ragged, lineno):
    """Decode one line's key token into a canonical entry key."""
    if ragged and ":" not in token and "x" not in token:
        raise ParseError(f"ragged table line missing size prefix: {token!r}",
                         line=lineno)
    if dimension == 1:
        if ":" in token:
            size_text, _, hex_text = token.partition(":")
            if not size_text.isdigit():
                raise ParseError(f"bad key size {size_text!r}", line=lineno)
            n_bits = int(size_text)
        else:
            hex_text, n_bits = token, r
        shape = None
    else:
        if ":" in token:
            shape_text, _, hex_text = token.partition(":")
            h, sep, w = shape_text.partition("x")
            if not (sep and h.isdigit() and w.isdigit()):
                raise ParseError(f"bad key shape {shape_text!r}", line=lineno)
            shape = (int(h), int(w))
        else:
            hex_text, shape = token, (r, r)
        n_bits = shape[0] * shape[1]
    if n_bits < 1:
        raise ParseError("zero-size key", line=lineno)
    expected_digits = -(-n_bits // 4)
    if len(hex_text) != expected_digits:
        raise DimensionMismatch(
            f"line {lineno}: key {token!r} has {len(hex_text)} hex digits, "
            f"expected {expected_digits} for {n_bits} bits"
        )
    try:
        packed = int(hex_text, 16)
    except ValueError:
        raise ParseError(f"bad hex key {hex_text!r}", line=lineno) from None
    if packed >> n_bits:
        raise DimensionMismatch(
            f"line {lineno}: key {token!r} does not fit in {n_bits} bits"
        )
    bits = format(packed, f"0{n_bits}b")
    if dimension == 1:
        return bits
    return f"{shape[0]}x{shape[1]}:{bits}"


def load_ctm_table(path, missing_policy: str = "max_plus_one") -> CtmTable:
    """Load a complexity table saved by :func:`save_ctm_table`.

    Raises :class:`ParseError` (with the line number) on malformed lines or
    duplicate keys, and :class:`DimensionMismatch` when a key's width
    disagrees with the declared block size.
    """
    with open(path, "r", encoding="utf-8") as fh:
        raw_lines = fh.read().splitlines()
    if not raw_lines:
        raise ParseError("empty table file", line=1)
    header = raw_lines[0].split()
    if not header or header[0] != "ctm":
        raise ParseError(f"bad header {raw_lines[0]!r}", line=1)
    fields = {}
    for item in header[1:]:
        name, sep, value = item.partition("=")
        if not sep:
            raise ParseError(f"bad header field {item!r}", line=1)
        fields[name] = value
    try:
        r = int(fields["r"])
        dimension = int(fields["dim"])
    except (KeyError, ValueError):
        raise ParseError(f"bad header {raw_lines[0]!r}", line=1) from None
    if dimension not in (1, 2) or r < 1:
        raise ParseError(f"bad header {raw_lines[0]!r}", line=1)
    ragged = fields.get("ragged") == "1"

    entries = {}
    for lineno, line in enumerate(raw_lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"expected '<key> <value>', got {line!r}",
                             line=lineno)
        key = _parse_hex_key(dimension, parts[0], r, ragged, lineno)
        if key in entries:
            raise ParseError(f"duplicate key {parts[0]!r}", line=lineno)
        try:
            value = float(parts[1])
        except ValueError:
            raise ParseError(f"bad value {parts[1]!r}", line=lineno) from None
        if not ragged and _key_width(dimension, key) != r:
            raise DimensionMismatch(
                f"line {lineno}: key width disagrees with declared r={r}"
            )
        entries[key] = value
    side = None if ragged else r
    return CtmTable(dimension, entries, missing_policy, block_side=side)
