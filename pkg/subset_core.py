"""
Universe, subset and configuration arithmetic on the Boolean lattice B_S.

Subsets of an n-element universe are plain ints (bit i set iff element i is
in the subset). A configuration is a set of such subsets, stored as a dense
boolean vector of length 2^n indexed by mask. The same pair of partial
operations (disjoint union, subset complement) works on both, so witness
trees can be evaluated over element-sets and over configurations alike.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Dict, Iterable, Iterator, List, Tuple, Union

import numpy as np

from config import UNIVERSE_CONFIG
from errors import (
    IntFuncOverflowError,
    NotSubsetError,
    OverlapError,
    UniverseError,
    UniverseMismatchError,
)

MAX_ELEMENTS = UNIVERSE_CONFIG['max_elements']
_VALUE_MIN = -(1 << (UNIVERSE_CONFIG['value_bits'] - 1))
_VALUE_MAX = (1 << (UNIVERSE_CONFIG['value_bits'] - 1)) - 1


def popcount(mask: int) -> int:
    return bin(mask).count("1")


def parity(mask: int) -> int:
    return popcount(mask) & 1


def lowest_bit(mask: int) -> int:
    """Index of the lowest set bit (mask must be non-zero)."""
    return (mask & -mask).bit_length() - 1


def bits_of(mask: int) -> List[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def is_subset(a: int, b: int) -> bool:
    return a & ~b == 0


def comparable(a: int, b: int) -> bool:
    both = a & b
    return both == a or both == b


def _is_mask(x) -> bool:
    return isinstance(x, (int, np.integer)) and not isinstance(x, bool)


# =============================================================================
# UNIVERSE
# =============================================================================

@dataclass(frozen=True)
class Universe:
    """Ordered, distinct element labels; label i is bit i of every mask."""

    labels: Tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(label) for label in self.labels)
        object.__setattr__(self, 'labels', labels)
        if len(set(labels)) != len(labels):
            raise UniverseError(f"duplicate labels in {list(labels)}")
        if len(labels) > MAX_ELEMENTS:
            raise UniverseError(f"{len(labels)} elements exceeds the cap of {MAX_ELEMENTS}")

    @classmethod
    def letters(cls, n: int) -> "Universe":
        pool = UNIVERSE_CONFIG['default_labels']
        if not 0 <= n <= len(pool):
            raise UniverseError(f"no default labels for n={n}")
        return cls(tuple(pool[:n]))

    @property
    def n(self) -> int:
        return len(self.labels)

    @property
    def size(self) -> int:
        return 1 << self.n

    @property
    def full_mask(self) -> int:
        return self.size - 1

    @cached_property
    def _positions(self) -> Dict[str, int]:
        return {label: i for i, label in enumerate(self.labels)}

    def index(self, label: str) -> int:
        try:
            return self._positions[str(label)]
        except KeyError:
            raise UniverseError(f"unknown element {label!r}") from None

    def mask_of(self, labels: Iterable[str]) -> int:
        mask = 0
        for label in labels:
            mask |= 1 << self.index(label)
        return mask

    def labels_of(self, mask: int) -> List[str]:
        return [self.labels[i] for i in bits_of(self.validate(mask))]

    def validate(self, mask) -> int:
        if not _is_mask(mask) or not 0 <= int(mask) < self.size:
            raise UniverseError(f"{mask!r} is not a subset of a {self.n}-element universe")
        return int(mask)

    def render(self, mask: int) -> str:
        """Compact text form: 'abd' for one-character labels, '{x1,x2}' otherwise."""
        labels = self.labels_of(mask)
        if not labels:
            return "∅"
        if all(len(label) == 1 for label in self.labels):
            return "".join(labels)
        return "{" + ",".join(labels) + "}"


@lru_cache(maxsize=None)
def _indices(n: int) -> np.ndarray:
    idx = np.arange(1 << n, dtype=np.int64)
    idx.setflags(write=False)
    return idx


@lru_cache(maxsize=None)
def cardinalities(n: int) -> np.ndarray:
    """|X| for every mask X of B_n."""
    idx = _indices(n)
    card = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        card += (idx >> i) & 1
    card.setflags(write=False)
    return card


@lru_cache(maxsize=None)
def _signs(n: int) -> np.ndarray:
    signs = 1 - 2 * (cardinalities(n) & 1)
    signs.setflags(write=False)
    return signs


def _same_universe(a, b):
    if a.universe != b.universe:
        raise UniverseMismatchError(f"{a.universe.labels} vs {b.universe.labels}")


# =============================================================================
# CONFIGURATIONS
# =============================================================================

class Config:
    """An immutable set of subsets of one universe (a configuration of B_S)."""

    __slots__ = ('universe', '_members')

    def __init__(self, universe: Universe, indicator):
        arr = np.array(indicator, dtype=bool)
        if arr.shape != (universe.size,):
            raise UniverseError(f"indicator of length {arr.size} for a {universe.n}-element universe")
        arr.setflags(write=False)
        self.universe = universe
        self._members = arr

    @classmethod
    def _wrap(cls, universe: Universe, arr: np.ndarray) -> "Config":
        obj = cls.__new__(cls)
        arr.setflags(write=False)
        obj.universe = universe
        obj._members = arr
        return obj

    @classmethod
    def empty(cls, universe: Universe) -> "Config":
        return cls._wrap(universe, np.zeros(universe.size, dtype=bool))

    @classmethod
    def full(cls, universe: Universe) -> "Config":
        return cls._wrap(universe, np.ones(universe.size, dtype=bool))

    @classmethod
    def from_masks(cls, universe: Universe, masks: Iterable[int]) -> "Config":
        arr = np.zeros(universe.size, dtype=bool)
        for mask in masks:
            arr[universe.validate(mask)] = True
        return cls._wrap(universe, arr)

    @classmethod
    def from_bits(cls, universe: Universe, bits: int) -> "Config":
        """Inverse of to_bits: bit X of the integer marks X as a member."""
        size = universe.size
        if bits < 0 or bits >> size:
            raise UniverseError(f"bit pattern wider than 2^{universe.n}")
        raw = np.frombuffer(bits.to_bytes((size + 7) // 8, 'little'), dtype=np.uint8)
        arr = np.unpackbits(raw, bitorder='little')[:size].astype(bool)
        return cls._wrap(universe, arr)

    def to_bits(self) -> int:
        packed = np.packbits(self._members, bitorder='little')
        return int.from_bytes(packed.tobytes(), 'little')

    @property
    def indicator(self) -> np.ndarray:
        return self._members

    def members(self) -> List[int]:
        return np.flatnonzero(self._members).tolist()

    def __contains__(self, mask) -> bool:
        return _is_mask(mask) and 0 <= mask < self.universe.size and bool(self._members[mask])

    def __len__(self) -> int:
        return int(np.count_nonzero(self._members))

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __bool__(self) -> bool:
        return bool(self._members.any())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Config):
            return NotImplemented
        return self.universe == other.universe and np.array_equal(self._members, other._members)

    def __hash__(self) -> int:
        return hash((self.universe, np.packbits(self._members).tobytes()))

    def __repr__(self) -> str:
        body = ", ".join(self.universe.render(m) for m in self.members())
        return f"Config({{{body}}})"

    def union(self, other: "Config") -> "Config":
        _same_universe(self, other)
        return Config._wrap(self.universe, np.logical_or(self._members, other._members))

    def intersection(self, other: "Config") -> "Config":
        _same_universe(self, other)
        return Config._wrap(self.universe, np.logical_and(self._members, other._members))

    def difference(self, other: "Config") -> "Config":
        _same_universe(self, other)
        return Config._wrap(self.universe, np.logical_and(self._members, ~other._members))

    def issubset(self, other: "Config") -> bool:
        _same_universe(self, other)
        return not np.logical_and(self._members, ~other._members).any()

    def isdisjoint(self, other: "Config") -> bool:
        _same_universe(self, other)
        return not np.logical_and(self._members, other._members).any()

    def with_member(self, mask: int) -> "Config":
        arr = self._members.copy()
        arr[self.universe.validate(mask)] = True
        return Config._wrap(self.universe, arr)

    def without_member(self, mask: int) -> "Config":
        arr = self._members.copy()
        arr[self.universe.validate(mask)] = False
        return Config._wrap(self.universe, arr)


Atoms = Union[int, Config]


# =============================================================================
# DOT OPERATIONS
# =============================================================================

def _dunion_pair(a: Atoms, b: Atoms) -> Atoms:
    if isinstance(a, Config) and isinstance(b, Config):
        _same_universe(a, b)
        both = np.logical_and(a._members, b._members)
        if both.any():
            witness = int(np.flatnonzero(both)[0])
            raise OverlapError(witness, f"operands share {a.universe.render(witness)}")
        return Config._wrap(a.universe, np.logical_or(a._members, b._members))
    if _is_mask(a) and _is_mask(b):
        overlap = int(a) & int(b)
        if overlap:
            raise OverlapError(lowest_bit(overlap))
        return int(a) | int(b)
    raise TypeError(f"cannot combine {type(a).__name__} with {type(b).__name__}")


def dunion(*operands: Atoms) -> Atoms:
    """Disjoint union of one or more operands; OverlapError names a shared atom."""
    if not operands:
        raise ValueError("dunion needs at least one operand")
    result = operands[0]
    for other in operands[1:]:
        result = _dunion_pair(result, other)
    return result


def scomp(a: Atoms, b: Atoms) -> Atoms:
    """a with b removed, defined only when b is contained in a."""
    if isinstance(a, Config) and isinstance(b, Config):
        _same_universe(a, b)
        missing = np.logical_and(b._members, ~a._members)
        if missing.any():
            witness = int(np.flatnonzero(missing)[0])
            raise NotSubsetError(witness, f"{a.universe.render(witness)} is not in the left operand")
        return Config._wrap(a.universe, np.logical_and(a._members, ~b._members))
    if _is_mask(a) and _is_mask(b):
        missing = int(b) & ~int(a)
        if missing:
            raise NotSubsetError(lowest_bit(missing))
        return int(a) & ~int(b)
    raise TypeError(f"cannot combine {type(a).__name__} with {type(b).__name__}")


# =============================================================================
# UPSETS, DOWNSETS, EULER CHARACTERISTIC
# =============================================================================

def principal_downset(universe: Universe, x: int) -> Config:
    x = universe.validate(x)
    idx = _indices(universe.n)
    return Config._wrap(universe, (idx & x) == idx)


def principal_upset(universe: Universe, x: int) -> Config:
    x = universe.validate(x)
    idx = _indices(universe.n)
    return Config._wrap(universe, (idx & x) == x)


def downset_closure(g: Config) -> Config:
    arr = g.indicator.copy()
    for i in range(g.universe.n):
        view = arr.reshape(-1, 2, 1 << i)
        view[:, 0, :] |= view[:, 1, :]
    return Config._wrap(g.universe, arr)


def upset_closure(g: Config) -> Config:
    arr = g.indicator.copy()
    for i in range(g.universe.n):
        view = arr.reshape(-1, 2, 1 << i)
        view[:, 1, :] |= view[:, 0, :]
    return Config._wrap(g.universe, arr)


def is_downset(c: Config) -> bool:
    return downset_closure(c) == c


def maximal_members(c: Config) -> List[int]:
    """Members with no strict superset in c, ascending."""
    n = c.universe.n
    # covered[Y]: some member contains Y
    covered = downset_closure(c).indicator
    idx = _indices(n)
    strict = np.zeros(c.universe.size, dtype=bool)
    for i in range(n):
        bit = 1 << i
        lacks = (idx & bit) == 0
        strict[lacks] |= covered[idx[lacks] | bit]
    return np.flatnonzero(c.indicator & ~strict).tolist()


def lift_config(c: Config, z: int) -> Config:
    """{X : X ∪ z ∈ c}."""
    z = c.universe.validate(z)
    return Config._wrap(c.universe, c.indicator[_indices(c.universe.n) | z].copy())


def euler(c: Config) -> int:
    """Σ_{X∈c} (−1)^|X|."""
    return int(_signs(c.universe.n)[c.indicator].sum())


def hamming_neighbors(mask: int, n: int) -> List[int]:
    return sorted(mask ^ (1 << i) for i in range(n))


def is_connected(g: Config) -> bool:
    members = g.members()
    if not members:
        return True
    arr = g.indicator
    seen = np.zeros(g.universe.size, dtype=bool)
    seen[members[0]] = True
    queue = deque([members[0]])
    reached = 1
    while queue:
        x = queue.popleft()
        for i in range(g.universe.n):
            y = x ^ (1 << i)
            if arr[y] and not seen[y]:
                seen[y] = True
                reached += 1
                queue.append(y)
    return reached == len(members)


# =============================================================================
# INTEGER FUNCTIONS ON B_S
# =============================================================================

class IntFunc:
    """A function B_S -> Z held as 2^n 32-bit values indexed by mask."""

    __slots__ = ('universe', '_values')

    def __init__(self, universe: Universe, values):
        arr = np.asarray(values)
        if arr.shape != (universe.size,):
            raise UniverseError(f"{arr.size} values for a {universe.n}-element universe")
        if arr.dtype.kind not in 'iub':
            raise TypeError(f"IntFunc needs integer values, got {arr.dtype}")
        wide = arr.astype(np.int64)
        if wide.size and (wide.min() < _VALUE_MIN or wide.max() > _VALUE_MAX):
            raise IntFuncOverflowError(f"values outside [{_VALUE_MIN}, {_VALUE_MAX}]")
        stored = wide.astype(np.int32)
        stored.setflags(write=False)
        self.universe = universe
        self._values = stored

    @classmethod
    def zeros(cls, universe: Universe) -> "IntFunc":
        return cls(universe, np.zeros(universe.size, dtype=np.int64))

    @classmethod
    def indicator(cls, c: Config) -> "IntFunc":
        return cls(c.universe, c.indicator.astype(np.int64))

    @property
    def values(self) -> np.ndarray:
        return self._values

    def __getitem__(self, mask: int) -> int:
        return int(self._values[self.universe.validate(mask)])

    def __eq__(self, other) -> bool:
        if not isinstance(other, IntFunc):
            return NotImplemented
        return self.universe == other.universe and np.array_equal(self._values, other._values)

    __hash__ = None

    def __add__(self, other: "IntFunc") -> "IntFunc":
        _same_universe(self, other)
        return IntFunc(self.universe, self._values.astype(np.int64) + other._values)

    def __sub__(self, other: "IntFunc") -> "IntFunc":
        _same_universe(self, other)
        return IntFunc(self.universe, self._values.astype(np.int64) - other._values)

    def nonzero(self) -> List[int]:
        return np.flatnonzero(self._values).tolist()

    def as_dict(self, skip_zero: bool = True) -> Dict[str, int]:
        masks = self.nonzero() if skip_zero else range(self.universe.size)
        return {self.universe.render(m): int(self._values[m]) for m in masks}

    def __repr__(self) -> str:
        return f"IntFunc({self.as_dict()})"


def _sweep(values: np.ndarray, n: int, sign: int) -> np.ndarray:
    out = values.astype(np.int64).copy()
    for i in range(n):
        view = out.reshape(-1, 2, 1 << i)
        view[:, 0, :] += sign * view[:, 1, :]
    return out


def superset_zeta(f: IntFunc) -> IntFunc:
    """g(X) = Σ_{X⊆X'} f(X'), one dimension at a time."""
    return IntFunc(f.universe, _sweep(f.values, f.universe.n, 1))


def superset_mobius(g: IntFunc) -> IntFunc:
    """f(X) = Σ_{X⊆X'} (−1)^{|X'|−|X|} g(X'); inverse of superset_zeta."""
    return IntFunc(g.universe, _sweep(g.values, g.universe.n, -1))
