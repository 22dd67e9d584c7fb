"""
Intersection lattices, union lattices and abstract finite lattices.

Every lattice carries a reflexive order matrix (order[i, j] is True iff node
i <= node j) and derives its Hasse covers, linear extension and ranks from it.
Set lattices index their nodes by (cardinality, mask), so index order is
already a linear extension and the top is the last node.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.isomorphism import DiGraphMatcher

from errors import (
    CoTrivialFamilyError,
    DegenerateLatticeError,
    NotALatticeError,
    NotTightError,
    TrivialFamilyError,
    UniverseError,
)
from subset_core import Universe, bits_of, popcount


# =============================================================================
# SET FAMILIES
# =============================================================================

@dataclass(frozen=True)
class SetFamily:
    """Pairwise distinct finite sets over one universe."""

    universe: Universe
    sets: Tuple[int, ...]

    def __post_init__(self):
        sets = tuple(self.universe.validate(s) for s in self.sets)
        if len(set(sets)) != len(sets):
            raise UniverseError("family contains a repeated set")
        object.__setattr__(self, 'sets', sets)

    @classmethod
    def from_labels(cls, universe: Universe, sets: Iterable[Iterable[str]]) -> "SetFamily":
        return cls(universe, tuple(universe.mask_of(s) for s in sets))

    def __len__(self) -> int:
        return len(self.sets)

    @property
    def union_mask(self) -> int:
        out = 0
        for s in self.sets:
            out |= s
        return out

    @property
    def intersection_mask(self) -> int:
        if not self.sets:
            return 0
        out = self.universe.full_mask
        for s in self.sets:
            out &= s
        return out

    def render(self) -> List[str]:
        return [self.universe.render(s) for s in self.sets]

    def __repr__(self) -> str:
        return f"SetFamily({self.render()})"


def is_trivial(f: SetFamily) -> bool:
    return not f.sets or f.union_mask in f.sets


def is_cotrivial(f: SetFamily) -> bool:
    return not f.sets or f.intersection_mask in f.sets


def dualize_family(f: SetFamily, ground: Optional[int] = None) -> SetFamily:
    """Maps every set X to ground∖X; ground defaults to the union of f."""
    ground = f.union_mask if ground is None else f.universe.validate(ground)
    for s in f.sets:
        if s & ~ground:
            raise UniverseError(f"{f.universe.render(s)} is not inside the ground set")
    return SetFamily(f.universe, tuple(ground & ~s for s in f.sets))


def _close(sets: Sequence[int], op) -> set:
    closed = set(sets)
    frontier = list(closed)
    while frontier:
        snapshot = list(closed)
        fresh = []
        for a in frontier:
            for b in snapshot:
                c = op(a, b)
                if c not in closed:
                    closed.add(c)
                    fresh.append(c)
        frontier = fresh
    return closed


# =============================================================================
# LATTICE BASE
# =============================================================================

class LatticeBase:
    """Shared order bookkeeping for every finite lattice kind."""

    def __init__(self, order: np.ndarray, top: int, bottom: int):
        order = np.array(order, dtype=bool)
        order.setflags(write=False)
        self.order = order
        self.top = int(top)
        self.bottom = int(bottom)

    @property
    def size(self) -> int:
        return self.order.shape[0]

    def le(self, i: int, j: int) -> bool:
        return bool(self.order[i, j])

    def lt(self, i: int, j: int) -> bool:
        return i != j and bool(self.order[i, j])

    def node_label(self, i: int) -> str:
        return str(i)

    @cached_property
    def covers(self) -> List[Tuple[int, int]]:
        """Hasse edges as (lower, upper) pairs, sorted."""
        strict = nx.DiGraph()
        strict.add_nodes_from(range(self.size))
        rows, cols = np.nonzero(self.order & ~np.eye(self.size, dtype=bool))
        strict.add_edges_from(zip(rows.tolist(), cols.tolist()))
        return sorted(nx.transitive_reduction(strict).edges())

    @cached_property
    def upper_covers(self) -> List[List[int]]:
        ups = [[] for _ in range(self.size)]
        for lo, hi in self.covers:
            ups[lo].append(hi)
        return ups

    @cached_property
    def lower_covers(self) -> List[List[int]]:
        downs = [[] for _ in range(self.size)]
        for lo, hi in self.covers:
            downs[hi].append(lo)
        return downs

    def coatoms(self) -> List[int]:
        return list(self.lower_covers[self.top])

    def nti(self) -> List[int]:
        return [i for i in range(self.size) if i != self.top]

    def hasse_graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        for i in range(self.size):
            g.add_node(i, label=self.node_label(i), rank=self.ranks[i])
        g.add_edges_from(self.covers)
        return g

    @cached_property
    def linear_extension(self) -> List[int]:
        """Bottom-to-top order compatible with the lattice order."""
        g = nx.DiGraph()
        g.add_nodes_from(range(self.size))
        g.add_edges_from(self.covers)
        return list(nx.lexicographical_topological_sort(g))

    @cached_property
    def ranks(self) -> List[int]:
        rank = [0] * self.size
        for i in self.linear_extension:
            for j in self.upper_covers[i]:
                rank[j] = max(rank[j], rank[i] + 1)
        return rank

    def strictly_above(self, i: int) -> np.ndarray:
        above = self.order[i].copy()
        above[i] = False
        return np.flatnonzero(above)

    def strictly_below(self, i: int) -> np.ndarray:
        below = self.order[:, i].copy()
        below[i] = False
        return np.flatnonzero(below)

    def as_abstract(self) -> "AbstractLattice":
        labels = [self.node_label(i) for i in range(self.size)]
        return AbstractLattice(self.size, self.covers, top=self.top, bottom=self.bottom, labels=labels)

    def reversed(self) -> "AbstractLattice":
        labels = [self.node_label(i) for i in range(self.size)]
        flipped = [(hi, lo) for lo, hi in self.covers]
        return AbstractLattice(self.size, flipped, top=self.bottom, bottom=self.top, labels=labels)


def _subset_order(masks: Sequence[int]) -> np.ndarray:
    arr = np.asarray(masks, dtype=np.int64)
    return (arr[:, None] & ~arr[None, :]) == 0


def _sorted_masks(masks: Iterable[int]) -> List[int]:
    return sorted(masks, key=lambda m: (popcount(m), m))


# =============================================================================
# INTERSECTION AND UNION LATTICES
# =============================================================================

class IntersectionLattice(LatticeBase):
    """All intersections of a non-trivial family plus its union as top."""

    def __init__(self, family: SetFamily):
        if is_trivial(family):
            raise TrivialFamilyError(f"family {family.render()} is trivial")
        self.family = family
        self.universe = family.universe
        top_mask = family.union_mask
        masks = _sorted_masks(_close(family.sets, lambda a, b: a & b) | {top_mask})
        self.nodes = masks
        self._index = {m: i for i, m in enumerate(masks)}
        super().__init__(_subset_order(masks), top=len(masks) - 1, bottom=0)
        self.generators = [self._index[s] for s in family.sets]
        self.min_of = {}
        for x in bits_of(top_mask):
            meet = top_mask
            for s in family.sets:
                if s >> x & 1:
                    meet &= s
            self.min_of[x] = self._index[meet]

    @cached_property
    def linear_extension(self) -> List[int]:
        return list(range(self.size))

    def index_of(self, mask: int) -> int:
        try:
            return self._index[mask]
        except KeyError:
            raise UniverseError(f"{self.universe.render(mask)} is not a node") from None

    def node_label(self, i: int) -> str:
        return self.universe.render(self.nodes[i])

    @property
    def top_mask(self) -> int:
        return self.nodes[self.top]

    def __repr__(self) -> str:
        return f"IntersectionLattice({[self.node_label(i) for i in range(self.size)]})"


class UnionLattice(LatticeBase):
    """All unions of a non-co-trivial family plus its intersection as bottom."""

    def __init__(self, family: SetFamily):
        if is_cotrivial(family):
            raise CoTrivialFamilyError(f"family {family.render()} is co-trivial")
        self.family = family
        self.universe = family.universe
        bottom_mask = family.intersection_mask
        masks = _sorted_masks(_close(family.sets, lambda a, b: a | b) | {bottom_mask})
        self.nodes = masks
        self._index = {m: i for i, m in enumerate(masks)}
        super().__init__(_subset_order(masks), top=len(masks) - 1, bottom=0)
        self.generators = [self._index[s] for s in family.sets]

    @cached_property
    def linear_extension(self) -> List[int]:
        return list(range(self.size))

    def index_of(self, mask: int) -> int:
        try:
            return self._index[mask]
        except KeyError:
            raise UniverseError(f"{self.universe.render(mask)} is not a node") from None

    def node_label(self, i: int) -> str:
        return self.universe.render(self.nodes[i])

    @property
    def bottom_mask(self) -> int:
        return self.nodes[self.bottom]

    def __repr__(self) -> str:
        return f"UnionLattice({[self.node_label(i) for i in range(self.size)]})"


def build_intersection_lattice(f: SetFamily) -> IntersectionLattice:
    return IntersectionLattice(f)


def build_union_lattice(f: SetFamily) -> UnionLattice:
    return UnionLattice(f)


# =============================================================================
# ABSTRACT LATTICES
# =============================================================================

def _has_unique_extremum(order: np.ndarray, candidates: np.ndarray) -> bool:
    # a greatest element among candidates: every candidate lies below it
    return any(order[candidates, k].all() for k in candidates)


class AbstractLattice(LatticeBase):
    """A finite lattice given by cover edges (lower, upper) on nodes 0..m-1."""

    def __init__(self, m: int, covers: Iterable[Tuple[int, int]], top: Optional[int] = None,
                 bottom: Optional[int] = None, labels: Optional[Sequence[str]] = None):
        if m < 1:
            raise NotALatticeError("a lattice needs at least one node")
        g = nx.DiGraph()
        g.add_nodes_from(range(m))
        for lo, hi in covers:
            if not (0 <= lo < m and 0 <= hi < m) or lo == hi:
                raise NotALatticeError(f"bad cover edge ({lo}, {hi})")
            g.add_edge(int(lo), int(hi))
        if not nx.is_directed_acyclic_graph(g):
            raise NotALatticeError("cover relation has a cycle")
        closure = nx.transitive_closure_dag(g)
        order = np.eye(m, dtype=bool)
        for lo, hi in closure.edges():
            order[lo, hi] = True

        tops = [i for i in range(m) if order[:, i].all()]
        bottoms = [i for i in range(m) if order[i, :].all()]
        if not tops or not bottoms:
            raise NotALatticeError("no unique top and bottom")
        if top is not None and top != tops[0]:
            raise NotALatticeError(f"node {top} is not the top")
        if bottom is not None and bottom != bottoms[0]:
            raise NotALatticeError(f"node {bottom} is not the bottom")

        for i in range(m):
            for j in range(i + 1, m):
                lower = np.flatnonzero(order[:, i] & order[:, j])
                upper = np.flatnonzero(order[i, :] & order[j, :])
                if not _has_unique_extremum(order, lower):
                    raise NotALatticeError(f"nodes {i} and {j} have no meet")
                if not _has_unique_extremum(order.T, upper):
                    raise NotALatticeError(f"nodes {i} and {j} have no join")

        if labels is not None:
            labels = [str(label) for label in labels]
            if len(labels) != m:
                raise NotALatticeError(f"{len(labels)} labels for {m} nodes")
        self.labels = labels
        super().__init__(order, top=tops[0], bottom=bottoms[0])

    def node_label(self, i: int) -> str:
        return self.labels[i] if self.labels else str(i)

    def __repr__(self) -> str:
        return f"AbstractLattice(m={self.size}, covers={self.covers})"


# =============================================================================
# FULLNESS, TIGHTNESS, TIGHTIFICATION
# =============================================================================

def private_elements(l: IntersectionLattice) -> Dict[int, List[int]]:
    """Node index -> elements x whose smallest containing node is that node."""
    private = {i: [] for i in range(l.size)}
    for x, node in sorted(l.min_of.items()):
        private[node].append(x)
    return private


def _private_counts(l: IntersectionLattice) -> List[int]:
    if not isinstance(l, IntersectionLattice):
        raise TypeError("private elements are defined for intersection lattices only")
    private = private_elements(l)
    return [len(private[i]) for i in l.nti()]


def is_full(l: IntersectionLattice) -> bool:
    return all(c >= 1 for c in _private_counts(l))


def is_tight(l: IntersectionLattice) -> bool:
    return all(c == 1 for c in _private_counts(l))


def tightify(l: LatticeBase) -> SetFamily:
    """Principal downsets of the non-top nodes, one fresh atom per non-top node."""
    if l.size < 2:
        raise DegenerateLatticeError("a single-node lattice has no non-top nodes")
    below_top = l.nti()
    for u in below_top:
        if all(l.order[v, u] for v in below_top):
            raise NotTightError(f"{l!r}: {l.node_label(u) or u} is the only coatom, "
                                "so the tightified family would be trivial")
    names = [l.node_label(i) for i in below_top]
    if len(set(names)) != len(names) or any(not name for name in names):
        names = [f"u{i}" for i in below_top]
    universe = Universe(tuple(names))
    sets = []
    for u in below_top:
        mask = 0
        for bit, v in enumerate(below_top):
            if l.order[v, u]:
                mask |= 1 << bit
        sets.append(mask)
    return SetFamily(universe, tuple(sets))


def lattice_isomorphic(l1: LatticeBase, l2: LatticeBase) -> Optional[Dict[int, int]]:
    """An order isomorphism l1 -> l2 as a node map, or None."""
    if l1.size != l2.size:
        return None
    if np.array_equal(l1.order, l2.order):
        return {i: i for i in range(l1.size)}
    g1, g2 = l1.hasse_graph(), l2.hasse_graph()
    for g in (g1, g2):
        for i in g.nodes:
            g.nodes[i]['up'] = g.out_degree(i)
            g.nodes[i]['down'] = g.in_degree(i)

    def same_shape(a, b):
        return a['rank'] == b['rank'] and a['up'] == b['up'] and a['down'] == b['down']

    matcher = DiGraphMatcher(g1, g2, node_match=same_shape)
    for mapping in matcher.isomorphisms_iter():
        return {int(k): int(v) for k, v in mapping.items()}
    return None


def is_order_isomorphism(l1: LatticeBase, l2: LatticeBase, iso: Dict[int, int]) -> bool:
    if l1.size != l2.size or sorted(iso) != list(range(l1.size)):
        return False
    if sorted(iso.values()) != list(range(l2.size)):
        return False
    perm = np.array([iso[i] for i in range(l1.size)])
    return np.array_equal(l1.order, l2.order[np.ix_(perm, perm)])
