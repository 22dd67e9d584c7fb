"""
Constructive witness builders.

allreach expresses any configuration from the principal downsets below it;
nti_express expresses subsets of the top of a tight lattice from its
non-top nodes. The rest of the module rewrites configurations one adjacent
pair at a time (erase, teleport, fetch, eul_equiv_steps) and assembles those
rewrites into a witness for a downset that never uses one of its zeros
(avoid_zero).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from dot_expr import (
    EMPTY,
    BaseCatalog,
    DUnion,
    Leaf,
    Node,
    SComp,
    Witness,
    fold_sequence,
    relabel,
    splice,
)
from errors import (
    AllSameParityError,
    BadPathError,
    DisconnectedError,
    EulerMismatchError,
    LeafFormError,
    NotADownsetError,
    NotAZeroError,
    NotTightError,
    TraceError,
    UniverseError,
)
from intersection_lattice import IntersectionLattice, private_elements
from mobius import generalized_mobius
from subset_core import (
    Config,
    Universe,
    bits_of,
    downset_closure,
    euler,
    is_connected,
    is_downset,
    lift_config,
    maximal_members,
    parity,
    popcount,
    principal_downset,
    principal_upset,
)


# =============================================================================
# DOWNSET LEAF POOL
# =============================================================================

class DownsetPool:
    """Hands out leaf indices for principal downsets I(X), one per generator."""

    def __init__(self, universe: Universe, allowed: Optional[Config] = None):
        self.universe = universe
        self.allowed = allowed
        self.generators: List[int] = []
        self._index: Dict[int, int] = {}

    def leaf(self, x: int) -> Leaf:
        if x not in self._index:
            if self.allowed is not None and x not in self.allowed:
                raise LeafFormError(f"I({self.universe.render(x)}) is not an allowed leaf")
            self._index[x] = len(self.generators)
            self.generators.append(x)
        return Leaf(self._index[x])

    def adopt(self, witness: Witness) -> Node:
        """Re-indexes a downset witness's leaves into this pool."""
        base = witness.base
        if base.generators is None or base.universe != self.universe:
            raise LeafFormError("only downset witnesses over the same universe can be adopted")
        mapping = {i: self.leaf(x).index for i, x in enumerate(base.generators)}
        return relabel(witness.tree, mapping)

    def catalog(self) -> BaseCatalog:
        return BaseCatalog.of_downsets(self.universe, self.generators)


# =============================================================================
# ALLREACH
# =============================================================================

def _allreach_tree(c: Config, pool: DownsetPool) -> Node:
    memo: Dict[int, Node] = {}
    stack = [c]
    while stack:
        cur = stack[-1]
        key = cur.to_bits()
        if key in memo:
            stack.pop()
            continue
        if not cur:
            memo[key] = EMPTY
            stack.pop()
            continue
        x = maximal_members(cur)[0]
        rest = cur.without_member(x)
        inner = principal_downset(cur.universe, x).without_member(x) if x else None
        pending = [d for d in (rest, inner) if d is not None and d.to_bits() not in memo]
        if pending:
            stack.extend(pending)
            continue
        stack.pop()
        # {X} = I(X) ∖̇ (I(X)∖{X}); I(∅) is already {∅}
        piece = pool.leaf(x) if x == 0 else SComp(pool.leaf(x), memo[inner.to_bits()])
        memo[key] = piece if not rest else DUnion((memo[rest.to_bits()], piece))
    return memo[c.to_bits()]


def allreach(c: Config) -> Witness:
    """Witness for c over the principal downsets of its downset closure."""
    pool = DownsetPool(c.universe)
    for x in downset_closure(c).members():
        pool.leaf(x)
    tree = _allreach_tree(c, pool)
    return Witness(tree, pool.catalog())


# =============================================================================
# NTI EXPRESSIONS ON TIGHT LATTICES
# =============================================================================

def _single_privates(l: IntersectionLattice) -> Dict[int, Optional[int]]:
    private = private_elements(l)
    out = {}
    for node in l.nti():
        owned = private[node]
        if len(owned) > 1:
            raise NotTightError(f"node {l.node_label(node)} has {len(owned)} private elements")
        out[node] = owned[0] if owned else None
    return out


def nti_express(l: IntersectionLattice, target: Optional[int] = None, left_linear: bool = False) -> Witness:
    """Witness for target ⊆ 1̂ over the non-top nodes of a lattice with at most one private element per node."""
    target = l.top_mask if target is None else l.universe.validate(target)
    if target & ~l.top_mask:
        raise UniverseError(f"{l.universe.render(target)} is not inside the top")
    owner = _single_privates(l)
    nodes = l.nti()
    base = BaseCatalog.of_lattice_nodes(l, nodes)
    slot = {node: k for k, node in enumerate(nodes)}

    if left_linear:
        steps = _moves(l, nodes, owner, len(nodes), 0, target)
        return Witness(fold_sequence((sign, Leaf(slot[node])) for sign, node in steps), base)

    singleton: Dict[int, Node] = {}
    for node in nodes:
        x = owner[node]
        if x is None:
            continue
        rest = [singleton[y] for y in bits_of(l.nodes[node] & ~(1 << x))]
        if not rest:
            singleton[x] = Leaf(slot[node])
        elif len(rest) == 1:
            singleton[x] = SComp(Leaf(slot[node]), rest[0])
        else:
            singleton[x] = SComp(Leaf(slot[node]), DUnion(tuple(rest)))
    parts = [singleton[x] for x in bits_of(target)]
    if not parts:
        return Witness(EMPTY, base)
    return Witness(parts[0] if len(parts) == 1 else DUnion(tuple(parts)), base)


def _moves(l, nodes, owner, k, a, b) -> List[Tuple[int, int]]:
    """±node steps turning a into b, using only the first k non-top nodes.

    a and b only contain elements private to those nodes; elements private to
    later nodes are untouched, so every step stays valid on a larger set.
    """
    if k == 0 or a == b:
        return []
    node = nodes[k - 1]
    x = owner[node]
    if x is None:
        return _moves(l, nodes, owner, k - 1, a, b)
    bit = 1 << x
    u = l.nodes[node]
    if a & bit and not b & bit:
        return (_moves(l, nodes, owner, k - 1, a & ~bit, u & ~bit)
                + [(-1, node)]
                + _moves(l, nodes, owner, k - 1, 0, b))
    if b & bit and not a & bit:
        return (_moves(l, nodes, owner, k - 1, a, 0)
                + [(1, node)]
                + _moves(l, nodes, owner, k - 1, u & ~bit, b & ~bit))
    return _moves(l, nodes, owner, k - 1, a & ~bit, b & ~bit)


# =============================================================================
# ADJACENT PAIRS AND REWRITE TRACES
# =============================================================================

@dataclass(frozen=True)
class AdjacentPair:
    """{upper, upper∖{element}}: one edge of the Hamming graph."""

    upper: int
    element: int

    def __post_init__(self):
        if not self.upper >> self.element & 1:
            raise TraceError(f"element {self.element} is not in mask {self.upper}")

    @classmethod
    def between(cls, a: int, b: int) -> "AdjacentPair":
        diff = a ^ b
        if popcount(diff) != 1:
            raise BadPathError(f"masks {a} and {b} are not adjacent")
        return cls(max(a, b), diff.bit_length() - 1)

    @property
    def lower(self) -> int:
        return self.upper & ~(1 << self.element)

    def members(self) -> Tuple[int, int]:
        return (self.lower, self.upper)

    def as_config(self, universe: Universe) -> Config:
        return Config.from_masks(universe, self.members())

    def render(self, universe: Universe) -> str:
        return "{" + universe.render(self.upper) + ", " + universe.render(self.lower) + "}"


Step = Tuple[int, AdjacentPair]


def _apply(arr: np.ndarray, sign: int, pair: AdjacentPair, universe: Universe, at: int):
    lo, hi = pair.members()
    if sign > 0:
        if arr[lo] or arr[hi]:
            raise TraceError(f"step {at}: +{pair.render(universe)} overlaps the configuration")
        arr[lo] = arr[hi] = True
    else:
        if not (arr[lo] and arr[hi]):
            raise TraceError(f"step {at}: −{pair.render(universe)} is not contained in the configuration")
        arr[lo] = arr[hi] = False


@dataclass(frozen=True)
class RewriteTrace:
    start: Config
    steps: Tuple[Step, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'steps', tuple(self.steps))

    def __len__(self) -> int:
        return len(self.steps)

    def replay(self) -> List[Config]:
        """Configuration before the first step and after every step."""
        arr = self.start.indicator.copy()
        snapshots = [self.start]
        for at, (sign, pair) in enumerate(self.steps):
            _apply(arr, sign, pair, self.start.universe, at)
            snapshots.append(Config(self.start.universe, arr))
        return snapshots

    @cached_property
    def end(self) -> Config:
        arr = self.start.indicator.copy()
        for at, (sign, pair) in enumerate(self.steps):
            _apply(arr, sign, pair, self.start.universe, at)
        return Config(self.start.universe, arr)

    def reversed(self) -> "RewriteTrace":
        return RewriteTrace(self.end, tuple((-sign, pair) for sign, pair in reversed(self.steps)))

    def concat(self, other: "RewriteTrace") -> "RewriteTrace":
        if other.start != self.end:
            raise TraceError("traces do not meet")
        return RewriteTrace(self.start, self.steps + other.steps)

    def pairs(self) -> List[AdjacentPair]:
        """Distinct pairs in first-use order."""
        seen = {}
        for _, pair in self.steps:
            seen.setdefault(pair, None)
        return list(seen)


# =============================================================================
# ERASE, TELEPORT, FETCH
# =============================================================================

def _check_path(c: Config, path: Sequence[int]):
    if len(path) < 2:
        raise BadPathError("a path needs two endpoints")
    if len(set(path)) != len(path):
        raise BadPathError("path revisits a node")
    for a, b in zip(path, path[1:]):
        if popcount(a ^ b) != 1:
            raise BadPathError(f"{c.universe.render(a)} and {c.universe.render(b)} are not adjacent")
    for y in path[1:-1]:
        if y in c:
            raise BadPathError(f"interior node {c.universe.render(y)} is in the configuration")


def _chain_steps(path: Sequence[int], closing: bool) -> List[Step]:
    steps = []
    interior = len(path) - 2
    rounds = interior // 2 if closing else (interior + 1) // 2
    for j in range(rounds):
        steps.append((1, AdjacentPair.between(path[2 * j + 1], path[2 * j + 2])))
        steps.append((-1, AdjacentPair.between(path[2 * j], path[2 * j + 1])))
    if closing:
        steps.append((-1, AdjacentPair.between(path[-2], path[-1])))
    return steps


def erase(c: Config, path: Sequence[int]) -> RewriteTrace:
    """Removes both endpoints of a path with an even number of interior nodes."""
    path = list(path)
    _check_path(c, path)
    if (len(path) - 2) % 2:
        raise BadPathError("erasing needs an even number of interior nodes")
    if path[0] not in c or path[-1] not in c:
        raise BadPathError("both endpoints must be in the configuration")
    return RewriteTrace(c, tuple(_chain_steps(path, closing=True)))


def teleport(c: Config, path: Sequence[int]) -> RewriteTrace:
    """Moves the first endpoint to the last along a path with an odd number of interior nodes."""
    path = list(path)
    _check_path(c, path)
    if (len(path) - 2) % 2 == 0:
        raise BadPathError("teleporting needs an odd number of interior nodes")
    if path[0] not in c or path[-1] in c:
        raise BadPathError("the start must be in the configuration and the end outside it")
    return RewriteTrace(c, tuple(_chain_steps(path, closing=False)))


def find_path(g: Config, a: int, b: int) -> List[int]:
    """Shortest path from a to b inside g; neighbours are tried in ascending mask order."""
    if a not in g or b not in g:
        raise DisconnectedError("path endpoints must lie in the graph")
    n = g.universe.n
    parent = {a: None}
    queue = deque([a])
    while queue:
        x = queue.popleft()
        if x == b:
            break
        for y in sorted(x ^ (1 << i) for i in range(n)):
            if y in g and y not in parent:
                parent[y] = x
                queue.append(y)
    if b not in parent:
        raise DisconnectedError(f"no path from {g.universe.render(a)} to {g.universe.render(b)}")
    path = [b]
    while parent[path[-1]] is not None:
        path.append(parent[path[-1]])
    return path[::-1]


def fetch(g: Config, c: Config) -> Tuple[int, int, List[int]]:
    """Two members of c with opposite parity joined inside g by a path avoiding c."""
    if not c.issubset(g):
        raise BadPathError("configuration is not inside the graph")
    members = c.members()
    evens = [x for x in members if not parity(x)]
    odds = [x for x in members if parity(x)]
    if not evens or not odds:
        raise AllSameParityError("configuration has members of one parity only")
    start = members[0]
    other = (odds if not parity(start) else evens)[0]
    path = find_path(g, start, other)
    hits = [k for k, y in enumerate(path) if y in c]
    for lo, hi in zip(hits, hits[1:]):
        # parity alternates along the path, so an odd gap means opposite parity
        if (hi - lo) % 2:
            return path[lo], path[hi], path[lo:hi + 1]
    raise AllSameParityError("no opposite-parity members along the path")


class _TraceBuilder:
    def __init__(self, start: Config):
        self.start = start
        self.current = start
        self.steps: List[Step] = []

    def extend(self, trace: RewriteTrace):
        if trace.start != self.current:
            raise TraceError("trace does not start at the current configuration")
        self.steps.extend(trace.steps)
        self.current = trace.end

    def build(self) -> RewriteTrace:
        return RewriteTrace(self.start, tuple(self.steps))


def _reduce_parity(g: Config, c: Config) -> RewriteTrace:
    builder = _TraceBuilder(c)
    cur = c
    while True:
        members = cur.members()
        if len({parity(x) for x in members}) < 2:
            return builder.build()
        _, _, path = fetch(g, cur)
        builder.extend(erase(cur, path))
        cur = builder.current


def eul_equiv_steps(g: Config, c1: Config, c2: Config) -> RewriteTrace:
    """Trace from c1 to c2 using only pairs inside the connected configuration g."""
    if euler(c1) != euler(c2):
        raise EulerMismatchError(f"Euler characteristics {euler(c1)} and {euler(c2)} differ")
    if not is_connected(g):
        raise DisconnectedError("the ambient configuration is not connected")
    if not c1.issubset(g) or not c2.issubset(g):
        raise BadPathError("configurations must lie inside the ambient configuration")

    first = _reduce_parity(g, c1)
    second = _reduce_parity(g, c2)
    builder = _TraceBuilder(c1)
    builder.extend(first)

    target = second.end
    leaving = builder.current.difference(target).members()
    arriving = target.difference(builder.current).members()
    for x, y in zip(leaving, arriving):
        path = find_path(g, x, y)
        hits = [k for k, w in enumerate(path) if w in builder.current]
        # shift every occupied node on the path one slot forward, last one first
        stops = hits + [len(path) - 1]
        for lo, hi in reversed(list(zip(stops, stops[1:]))):
            builder.extend(teleport(builder.current, path[lo:hi + 1]))

    builder.extend(second.reversed())
    return builder.build()


# =============================================================================
# RELATIVE FRAMES AND LIFTING
# =============================================================================

class RelativeFrame:
    """The upset F(z) of B_S identified with B_{S∖z} via X' ↦ X' ∪ z."""

    def __init__(self, universe: Universe, z: int):
        self.universe = universe
        self.z = universe.validate(z)
        self.free = [i for i in range(universe.n) if not z >> i & 1]
        self.relative = Universe(tuple(universe.labels[i] for i in self.free))
        idx = np.arange(self.relative.size, dtype=np.int64)
        spread = np.full(self.relative.size, self.z, dtype=np.int64)
        for j, bit in enumerate(self.free):
            spread |= ((idx >> j) & 1) << bit
        spread.setflags(write=False)
        self._spread = spread

    def embed(self, mask: int) -> int:
        return int(self._spread[self.relative.validate(mask)])

    def project(self, mask: int) -> int:
        mask = self.universe.validate(mask)
        if mask & self.z != self.z:
            raise LeafFormError(f"{self.universe.render(mask)} is not above {self.universe.render(self.z)}")
        out = 0
        for j, bit in enumerate(self.free):
            if mask >> bit & 1:
                out |= 1 << j
        return out

    def embed_config(self, c: Config) -> Config:
        arr = np.zeros(self.universe.size, dtype=bool)
        arr[self._spread] = c.indicator
        return Config(self.universe, arr)

    def project_config(self, c: Config) -> Config:
        """The members of c above z, in relative coordinates."""
        return Config(self.relative, c.indicator[self._spread])


def transport_witness(witness: Witness, frame: RelativeFrame) -> Witness:
    """Moves a downset witness over B_{S∖z} into F(z); leaves become I(X∪z) ∩ F(z)."""
    base = witness.base
    if base.universe != frame.relative or base.generators is None:
        raise LeafFormError("transport needs a downset witness over the relative universe")
    entries = [frame.embed_config(e) for e in base.entries]
    generators = [frame.embed(x) for x in base.generators]
    z_name = frame.universe.render(frame.z)
    names = [f"I({frame.universe.render(x)})∩F({z_name})" for x in generators]
    catalog = BaseCatalog(frame.universe, entries, names=names, generators=generators, is_config=True)
    return Witness(witness.tree, catalog)


def lift_tree(witness: Witness, z: int) -> Witness:
    """Replaces every leaf I(X) ∩ F(z) by I(X); the result evaluates to lift_config(value, z)."""
    base = witness.base
    universe = base.universe
    z = universe.validate(z)
    if base.generators is None:
        raise LeafFormError("leaves must carry their generators")
    upset = principal_upset(universe, z)
    for i, (entry, x) in enumerate(zip(base.entries, base.generators)):
        if x & z != z or entry != principal_downset(universe, x).intersection(upset):
            raise LeafFormError(f"leaf {base.name(i)} is not of the form I(X) ∩ F({universe.render(z)})")
    return Witness(witness.tree, BaseCatalog.of_downsets(universe, base.generators))


def pair_to_downsets(universe: Universe, p: AdjacentPair) -> Witness:
    """Witness for the pair over {I(Y) : ∅ ⊊ Y ⊆ upper}."""
    x_bit = 1 << p.element
    pool = DownsetPool(universe)
    if p.upper == x_bit:
        return Witness(pool.leaf(p.upper), pool.catalog())
    frame = RelativeFrame(universe, x_bit)
    # {Y : {x} ⊆ Y ⊊ X} is the relative downset below X∖{x}, minus its top
    rel_top = frame.project(p.upper)
    inner = principal_downset(frame.relative, rel_top).without_member(rel_top)
    lifted = lift_tree(transport_witness(allreach(inner), frame), x_bit)
    top_leaf = pool.leaf(p.upper)
    return Witness(SComp(top_leaf, pool.adopt(lifted)), pool.catalog())


# =============================================================================
# TRACES AS WITNESSES
# =============================================================================

def trace_witness(trace: RewriteTrace) -> Witness:
    """Left-linear witness for the end of a trace that starts at ∅, over its pairs."""
    if trace.start:
        raise TraceError("only traces from the empty configuration fold into a witness")
    universe = trace.start.universe
    pairs = trace.pairs()
    slot = {pair: k for k, pair in enumerate(pairs)}
    catalog = BaseCatalog(universe, [pair.as_config(universe) for pair in pairs],
                          names=[pair.render(universe) for pair in pairs], is_config=True)
    tree = fold_sequence((sign, Leaf(slot[pair])) for sign, pair in trace.steps)
    return Witness(tree, catalog)


# =============================================================================
# AVOIDING ONE ZERO
# =============================================================================

def avoid_zero(i: Config, z: int) -> Witness:
    """Witness for the downset i over {I(X) : X ∈ i, X ≠ z}, for a zero z of μ̂_i."""
    if not is_downset(i):
        raise NotADownsetError(f"{i!r} is not a downset")
    universe = i.universe
    z = universe.validate(z)
    if z not in i or generalized_mobius(i)[z] != 0:
        raise NotAZeroError(f"{universe.render(z)} is not a non-trivial zero")

    # members above z, euler 0, rebuilt from ∅ one pair at a time
    frame = RelativeFrame(universe, z)
    upper_rel = frame.project_config(i)
    trace = eul_equiv_steps(upper_rel, upper_rel, Config.empty(frame.relative)).reversed()
    skeleton = trace_witness(trace)
    rel_pool = DownsetPool(frame.relative)
    subtrees = {k: rel_pool.adopt(pair_to_downsets(frame.relative, pair))
                for k, pair in enumerate(trace.pairs())}
    upper_tree = Witness(splice(skeleton.tree, subtrees), rel_pool.catalog())
    lifted = lift_tree(transport_witness(upper_tree, frame), z)

    upper = frame.embed_config(upper_rel)
    spill = lift_config(upper, z).difference(upper)
    below = i.difference(upper)

    allowed = i.without_member(z)
    pool = DownsetPool(universe, allowed=allowed)
    tree = pool.adopt(lifted)
    if spill:
        tree = SComp(tree, pool.adopt(allreach(spill)))
    if below:
        tree = DUnion((tree, pool.adopt(allreach(below))))
    return Witness(tree, pool.catalog())
