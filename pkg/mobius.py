"""
Möbius values of lattices toward their top (or from their bottom), the
generalized Möbius vector of a configuration, and the non-cancelling sets
and zero predicates built on them.
"""

from __future__ import annotations

from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from config import UNIVERSE_CONFIG
from errors import NotADownsetError, UniverseError
from intersection_lattice import IntersectionLattice, LatticeBase, UnionLattice
from subset_core import (
    Config,
    IntFunc,
    bits_of,
    cardinalities,
    is_downset,
    is_subset,
    superset_mobius,
)


class MobiusVec:
    """Signed integers indexed by lattice node or by subset mask."""

    __slots__ = ('values', '_render')

    def __init__(self, values, render: Callable[[int], str] = str):
        arr = np.asarray(values, dtype=np.int64).copy()
        arr.setflags(write=False)
        self.values = arr
        self._render = render

    def __getitem__(self, i: int) -> int:
        return int(self.values[i])

    def __len__(self) -> int:
        return len(self.values)

    def label(self, i: int) -> str:
        return self._render(i)

    def nonzero(self) -> List[int]:
        return np.flatnonzero(self.values).tolist()

    def as_dict(self, skip_zero: bool = False) -> Dict[str, int]:
        keys = self.nonzero() if skip_zero else range(len(self.values))
        return {self._render(i): int(self.values[i]) for i in keys}

    def __eq__(self, other) -> bool:
        if not isinstance(other, MobiusVec):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    __hash__ = None

    def __repr__(self) -> str:
        return f"MobiusVec({self.as_dict(skip_zero=True)})"


# =============================================================================
# LATTICE SIDE
# =============================================================================

def mobius_from_bottom(l: LatticeBase) -> MobiusVec:
    """μ(0̂, U) for every node U."""
    mu = np.zeros(l.size, dtype=np.int64)
    for i in l.linear_extension:
        mu[i] = 1 if i == l.bottom else -mu[l.strictly_below(i)].sum()
    return MobiusVec(mu, l.node_label)


def mobius_to_top(l: LatticeBase) -> MobiusVec:
    """μ(U, 1̂) for every node U; union lattices are read from their bottom."""
    if isinstance(l, UnionLattice):
        return mobius_from_bottom(l)
    mu = np.zeros(l.size, dtype=np.int64)
    for i in reversed(l.linear_extension):
        mu[i] = 1 if i == l.top else -mu[l.strictly_above(i)].sum()
    return MobiusVec(mu, l.node_label)


def nti(l: LatticeBase) -> List[int]:
    return l.nti()


def nci(l: LatticeBase, mu: Optional[MobiusVec] = None) -> List[int]:
    mu = mu if mu is not None else mobius_to_top(l)
    return [i for i in l.nti() if mu[i] != 0]


def ncu(ul: UnionLattice, mu: Optional[MobiusVec] = None) -> List[int]:
    mu = mu if mu is not None else mobius_from_bottom(ul)
    return [i for i in range(ul.size) if i != ul.bottom and mu[i] != 0]


def inclusion_exclusion_total(l: IntersectionLattice, weights: Optional[Sequence[int]] = None) -> int:
    """−Σ_{U≠1̂} μ(U,1̂)·ξ(U) for the additive measure with the given element weights."""
    n = l.universe.n
    w = np.ones(n, dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
    if w.shape != (n,):
        raise UniverseError(f"{w.size} weights for {n} elements")
    mu = mobius_to_top(l)
    return -sum(mu[i] * measure(l.nodes[i], w) for i in l.nti())


def measure(mask: int, weights: np.ndarray) -> int:
    return int(sum(weights[x] for x in bits_of(mask)))


# =============================================================================
# BOOLEAN SIDE
# =============================================================================

def generalized_mobius(c: Config) -> MobiusVec:
    """μ̂ of a configuration: the superset Möbius transform of its indicator."""
    f = superset_mobius(IntFunc.indicator(c))
    return MobiusVec(f.values, c.universe.render)


def generalized_mobius_naive(c: Config) -> MobiusVec:
    """Top-down recurrence μ̂(X) = [X∈C] − Σ_{X⊊X'} μ̂(X'); reference oracle."""
    n = c.universe.n
    if n > UNIVERSE_CONFIG['naive_mobius_max']:
        raise UniverseError(f"naive Möbius is limited to n <= {UNIVERSE_CONFIG['naive_mobius_max']}")
    full = c.universe.full_mask
    mu = np.zeros(c.universe.size, dtype=np.int64)
    for x in range(full, -1, -1):
        free = full & ~x
        acc = 0
        sub = free
        while sub:
            acc += mu[x | sub]
            sub = (sub - 1) & free
        mu[x] = (1 if x in c else 0) - acc
    return MobiusVec(mu, c.universe.render)


def mobius_via_euler(c: Config, x: int) -> int:
    """(−1)^{|X|} · eul(C ∩ ↑X), computed directly."""
    card = cardinalities(c.universe.n)
    members = np.flatnonzero(c.indicator)
    above = members[(members & x) == x]
    sign = -1 if card[x] & 1 else 1
    return sign * int((1 - 2 * (card[above] & 1)).sum())


def ncpd(c: Config, mu: Optional[MobiusVec] = None) -> List[int]:
    """Generators X with μ̂(X) ≠ 0, ascending by mask."""
    mu = mu if mu is not None else generalized_mobius(c)
    return mu.nonzero()


def _require_downset(i: Config):
    if not is_downset(i):
        raise NotADownsetError(f"{i!r} is not a downset")


def ntz(i: Config, mu: Optional[MobiusVec] = None) -> List[int]:
    """Members of the downset with μ̂ = 0."""
    _require_downset(i)
    mu = mu if mu is not None else generalized_mobius(i)
    return [z for z in i.members() if mu[z] == 0]


def _minimal_zeros_above(zeros: Sequence[int], x: int) -> List[int]:
    above = [z for z in zeros if z != x and is_subset(x, z)]
    return [z for z in above if not any(w != z and is_subset(w, z) for w in above)]


def ntcz(i: Config, x: int, mu: Optional[MobiusVec] = None) -> List[int]:
    """Minimal non-trivial zeros strictly above x."""
    x = i.universe.validate(x)
    return _minimal_zeros_above(ntz(i, mu), x)


def is_k_decomposable(i: Config, k: int, mu: Optional[MobiusVec] = None) -> bool:
    zeros = ntz(i, mu)
    return all(len(_minimal_zeros_above(zeros, x)) <= k for x in range(i.universe.size))
