"""Binary key sources: seeded memoryless bit streams and user-supplied key files.

Random keys are potentially infinite strings of independent bits with
P(1) = p.  Every bit is a pure function of (seed, key id, bit index), computed
by a counter-mode keyed hash, so the same bit always has the same value no
matter when, where, or in what order it is materialized.  That makes key sets
safe to share across threads and makes parallel simulations reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "SourceParams",
    "Key",
    "KeySet",
    "KeyFileError",
    "DuplicateKeyError",
    "KeyExhaustedError",
    "generate_keys",
    "load_keys",
    "parse_key_line",
    "prefix_probability",
    "prefix_log_probability",
]

_U64 = np.uint64
_MASK64 = 0xFFFFFFFFFFFFFFFF
_FMIX_C1 = 0xFF51AFD7ED558CCD
_FMIX_C2 = 0xC4CEB9FE1A85EC53
_GOLDEN = 0x9E3779B97F4A7C15

MAX_KEYS = 1 << 32       # key ids and bit indices are packed into one 64-bit word
MAX_BIT_INDEX = 1 << 32


class KeyFileError(ValueError):
    """A key file line failed to parse. Carries the 1-based line number."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DuplicateKeyError(KeyFileError):
    """Two lines of a key file produced the same bit string."""


class KeyExhaustedError(LookupError):
    """A finite key was asked for a bit beyond its length."""

    def __init__(self, key_id: int, bit_index: int, length: int):
        super().__init__(
            f"key {key_id} has only {length} bits, bit {bit_index} requested"
        )
        self.key_id = key_id
        self.bit_index = bit_index
        self.length = length


def _fmix64_scalar(x: int) -> int:
    """Murmur3 64-bit finalizer on a Python int (mod 2**64)."""
    x &= _MASK64
    x ^= x >> 33
    x = (x * _FMIX_C1) & _MASK64
    x ^= x >> 33
    x = (x * _FMIX_C2) & _MASK64
    x ^= x >> 33
    return x


def _fmix64(x: np.ndarray) -> np.ndarray:
    # vectorized copy of _fmix64_scalar; uint64 arithmetic wraps mod 2**64
    x = x ^ (x >> _U64(33))
    x *= _U64(_FMIX_C1)
    x ^= x >> _U64(33)
    x *= _U64(_FMIX_C2)
    x ^= x >> _U64(33)
    return x


@dataclass(frozen=True)
class SourceParams:
    """Memoryless source: probability of a 1-bit and a 64-bit seed."""

    p: float
    seed: int

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise ValueError(f"p must lie strictly between 0 and 1, got {self.p}")
        if not (0 <= self.seed < 1 << 64):
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def q(self) -> float:
        return 1.0 - self.p


class Key:
    """A single key: a view into its KeySet.

    Random keys extend on demand; finite keys raise KeyExhaustedError past
    their end.  Reading the same bit twice always yields the same value.
    """

    __slots__ = ("keyset", "id")

    def __init__(self, keyset: "KeySet", key_id: int):
        self.keyset = keyset
        self.id = key_id

    @property
    def length(self) -> int | None:
        """Number of available bits, or None for lazily extendable keys."""
        return self.keyset.key_length(self.id)

    def bit(self, i: int) -> int:
        return int(
            self.keyset.bit_block(np.array([self.id], dtype=np.int64), i, 1)[0, 0]
        )

    def prefix(self, k: int) -> tuple[int, ...]:
        """First k bits as a tuple."""
        block = self.keyset.bit_block(np.array([self.id], dtype=np.int64), 0, k)
        return tuple(int(b) for b in block[0])

    def __repr__(self):
        return f"Key(id={self.id})"


class KeySet:
    """Ordered collection of keys, either seeded-random or loaded from a file.

    Random sets are unbounded in depth; finite sets carry explicit lengths.
    Instances are immutable and safe for concurrent reads: random bits are
    recomputed from (seed, key id, bit index) rather than cached, so there is
    no mutable state to race on.
    """

    def __init__(self, *, params: SourceParams | None, n: int,
                 finite_bits: np.ndarray | None = None,
                 lengths: np.ndarray | None = None,
                 origin: str = "random"):
        self.params = params
        self._n = n
        self._finite_bits = finite_bits    # (n, max_len) uint8, zero padded
        self._lengths = lengths            # (n,) int64, or None for random sets
        self.origin = origin
        if params is not None:
            # fold the seed into two whitening words used by the bit hash
            self._s1 = _U64(_fmix64_scalar(params.seed ^ _GOLDEN))
            self._s2 = _U64(_fmix64_scalar(params.seed + _GOLDEN))

    # -- constructors -------------------------------------------------------

    @classmethod
    def random(cls, params: SourceParams, n: int) -> "KeySet":
        if n < 0:
            raise ValueError("n must be nonnegative")
        if n >= MAX_KEYS:
            raise ValueError(f"at most {MAX_KEYS - 1} random keys are supported")
        return cls(params=params, n=n, origin="random")

    @classmethod
    def from_lines(cls, lines: Iterable[str], origin: str = "<lines>") -> "KeySet":
        keys: list[tuple[int, ...]] = []
        seen: dict[tuple[int, ...], int] = {}
        for line_no, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            bits = parse_key_line(line, line_no)
            if bits in seen:
                raise DuplicateKeyError(
                    f"duplicate key {line!r} (same bits as line {seen[bits]})",
                    line_no,
                )
            seen[bits] = line_no
            keys.append(bits)
        n = len(keys)
        max_len = max((len(b) for b in keys), default=0)
        mat = np.zeros((n, max_len), dtype=np.uint8)
        lengths = np.zeros(n, dtype=np.int64)
        for i, b in enumerate(keys):
            lengths[i] = len(b)
            if b:
                mat[i, : len(b)] = b
        return cls(params=None, n=n, finite_bits=mat, lengths=lengths,
                   origin=origin)

    @classmethod
    def from_file(cls, path) -> "KeySet":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_lines(fh, origin=str(path))

    # -- basic container behaviour ------------------------------------------

    def __len__(self) -> int:
        return self._n

    def __getitem__(self, key_id: int) -> Key:
        if not (0 <= key_id < self._n):
            raise IndexError(f"key id {key_id} out of range (n={self._n})")
        return Key(self, key_id)

    def __iter__(self):
        return (Key(self, i) for i in range(self._n))

    @property
    def is_random(self) -> bool:
        return self._lengths is None

    def key_length(self, key_id: int) -> int | None:
        if self._lengths is None:
            return None
        return int(self._lengths[key_id])

    # -- bit access ----------------------------------------------------------

    def bit_block(self, ids: np.ndarray, start: int, width: int) -> np.ndarray:
        """Bits [start, start+width) of the given keys as a (len(ids), width)
        uint8 array.  Raises KeyExhaustedError if any finite key is too short.
        """
        ids = np.asarray(ids, dtype=np.int64)
        if width == 0:
            return np.zeros((len(ids), 0), dtype=np.uint8)
        if self._lengths is not None:
            end = start + width
            short = np.flatnonzero(self._lengths[ids] < end)
            if len(short) > 0:
                kid = int(ids[short[0]])
                raise KeyExhaustedError(kid, end - 1, int(self._lengths[kid]))
            return self._finite_bits[ids, start:end]
        if start + width > MAX_BIT_INDEX:
            raise ValueError("bit index out of supported range")
        cols = np.arange(start, start + width, dtype=np.uint64)
        z = (ids.astype(np.uint64)[:, None] << _U64(32)) | cols[None, :]
        h = _fmix64(z ^ self._s1)
        h = _fmix64(h ^ self._s2)
        u = (h >> _U64(11)).astype(np.float64) * 2.0**-53
        return (u < self.params.p).astype(np.uint8)

    def bit_column(self, ids: np.ndarray, level: int) -> np.ndarray:
        return self.bit_block(ids, level, 1)[:, 0]

    def bit_matrix(self, upto: int) -> np.ndarray:
        """Bits [0, upto) of every key; convenience for bulk inspection."""
        return self.bit_block(np.arange(self._n, dtype=np.int64), 0, upto)

    def __repr__(self):
        kind = "random" if self.is_random else "finite"
        return f"KeySet(n={self._n}, {kind}, origin={self.origin!r})"


def generate_keys(params: SourceParams, n: int) -> KeySet:
    """n lazily extendable random keys drawn from the memoryless source."""
    return KeySet.random(params, n)


def load_keys(path) -> KeySet:
    """Load finite keys from a file of 0/1 lines or IPv4 CIDR prefixes.

    Lines starting with '#' and blank lines are skipped.  Duplicate keys and
    malformed lines raise errors carrying the offending line number.
    """
    return KeySet.from_file(path)


def parse_key_line(line: str, line_no: int = 0) -> tuple[int, ...]:
    """Parse one key file line: either a 0/1 string or "a.b.c.d/len"."""
    if "/" in line:
        addr, _, plen_s = line.partition("/")
        try:
            plen = int(plen_s)
        except ValueError:
            raise KeyFileError(f"bad prefix length {plen_s!r}", line_no) from None
        if not (0 <= plen <= 32):
            raise KeyFileError(f"prefix length {plen} outside 0..32", line_no)
        octets = addr.split(".")
        if len(octets) != 4:
            raise KeyFileError(f"bad IPv4 address {addr!r}", line_no)
        value = 0
        for o in octets:
            if not o.isdigit():
                raise KeyFileError(f"bad IPv4 octet {o!r}", line_no)
            v = int(o)
            if v > 255:
                raise KeyFileError(f"IPv4 octet {v} exceeds 255", line_no)
            value = (value << 8) | v
        return tuple((value >> (31 - i)) & 1 for i in range(plen))
    if not all(c in "01" for c in line):
        raise KeyFileError(f"expected 0/1 characters or CIDR, got {line!r}", line_no)
    return tuple(int(c) for c in line)


def _ones(r: Sequence[int] | str) -> tuple[int, int]:
    """(number of ones, length) of a bit string given as str or int sequence."""
    if isinstance(r, str):
        if not all(c in "01" for c in r):
            raise ValueError(f"bit string must contain only 0/1, got {r!r}")
        return r.count("1"), len(r)
    bits = list(r)
    if any(b not in (0, 1) for b in bits):
        raise ValueError("bit sequence must contain only 0 and 1")
    return sum(bits), len(bits)


def prefix_probability(params: SourceParams, r: Sequence[int] | str) -> float:
    """Probability that a random key starts with the bit string r:
    p^ones(r) * q^(|r| - ones(r)).  Underflows to 0 for very long r; use
    prefix_log_probability in that regime.
    """
    ones, length = _ones(r)
    return params.p**ones * params.q ** (length - ones)


def prefix_log_probability(params: SourceParams, r: Sequence[int] | str) -> float:
    """Natural log of prefix_probability, stable for long r."""
    ones, length = _ones(r)
    return ones * math.log(params.p) + (length - ones) * math.log(params.q)


def trial_seed(seed: int, trial: int) -> int:
    """Derive an independent 64-bit seed for one trial of an experiment."""
    return _fmix64_scalar(_fmix64_scalar(seed ^ _GOLDEN) ^ (trial + 1))
