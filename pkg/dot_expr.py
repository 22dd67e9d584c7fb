"""
Witnessing trees of the dot-algebra.

A tree is built from three immutable node kinds: Leaf (a base catalog index,
or None for the empty set), DUnion (k-ary disjoint union) and SComp (binary
subset complement). Nodes compare by identity and may be shared, so a tree is
really a DAG; every walk below is an iterative fold memoized on node identity,
which keeps deep and heavily shared trees cheap.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from errors import (
    CatalogError,
    ContextMismatchError,
    InvalidNodeError,
    NciError,
    ParseError,
    UniverseError,
)
from intersection_lattice import IntersectionLattice, is_full
from mobius import generalized_mobius, mobius_to_top
from subset_core import (
    Atoms,
    Config,
    Universe,
    dunion,
    is_downset,
    principal_downset,
    scomp,
)


# =============================================================================
# TREE NODES
# =============================================================================

@dataclass(frozen=True, eq=False)
class Leaf:
    index: Optional[int] = None

    @property
    def children(self) -> Tuple:
        return ()


@dataclass(frozen=True, eq=False)
class DUnion:
    children: Tuple

    def __post_init__(self):
        object.__setattr__(self, 'children', tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("a disjoint union node needs at least two children")


@dataclass(frozen=True, eq=False)
class SComp:
    left: object
    right: object

    @property
    def children(self) -> Tuple:
        return (self.left, self.right)


Node = Union[Leaf, DUnion, SComp]

EMPTY = Leaf(None)


def leaf(index: Optional[int]) -> Leaf:
    return EMPTY if index is None else Leaf(index)


def fold(root: Node, on_leaf: Callable, on_dunion: Callable, on_scomp: Callable):
    """Bottom-up evaluation visiting each distinct node once.

    on_dunion receives the list of child results, on_scomp the pair. An
    NciError raised by a callback is re-raised as InvalidNodeError with the
    path from the root to the failing node.
    """
    memo = {}
    stack = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        key = id(node)
        if key in memo:
            continue
        try:
            if isinstance(node, Leaf):
                memo[key] = on_leaf(node)
                continue
            if not expanded:
                stack.append((node, True))
                for kid in reversed(node.children):
                    if id(kid) not in memo:
                        stack.append((kid, False))
                continue
            values = [memo[id(kid)] for kid in node.children]
            if isinstance(node, DUnion):
                memo[key] = on_dunion(values)
            else:
                memo[key] = on_scomp(values[0], values[1])
        except NciError as e:
            if isinstance(e, InvalidNodeError):
                raise
            raise InvalidNodeError(path_to(root, node), e) from e
    return memo[id(root)]


def path_to(root: Node, target: Node) -> List[int]:
    """Child positions leading from root to the first occurrence of target."""
    stack = [(root, [])]
    seen = set()
    while stack:
        node, path = stack.pop()
        if node is target:
            return path
        if id(node) in seen:
            continue
        seen.add(id(node))
        for pos in range(len(node.children) - 1, -1, -1):
            stack.append((node.children[pos], path + [pos]))
    return []


def map_leaves(root: Node, replace: Callable[[Leaf], Node]) -> Node:
    """Copy of the tree with every leaf replaced; shared structure stays shared."""
    return fold(
        root,
        replace,
        lambda kids: DUnion(tuple(kids)),
        lambda left, right: SComp(left, right),
    )


def splice(root: Node, subtrees: Dict[int, Node]) -> Node:
    """Substitutes the leaves whose index appears in subtrees."""
    return map_leaves(root, lambda l: subtrees.get(l.index, l) if l.index is not None else l)


def relabel(root: Node, mapping: Dict[int, Optional[int]]) -> Node:
    return map_leaves(root, lambda l: leaf(mapping[l.index]) if l.index is not None else l)


def binarize(root: Node) -> Node:
    """Rewrites every k-ary disjoint union as a left fold of binary ones."""
    def nest(kids):
        acc = kids[0]
        for kid in kids[1:]:
            acc = DUnion((acc, kid))
        return acc
    return fold(root, lambda l: l, nest, lambda left, right: SComp(left, right))


def leaf_indices(root: Node) -> List[int]:
    found = set()
    fold(root, lambda l: found.add(l.index), lambda kids: None, lambda a, b: None)
    return sorted(i for i in found if i is not None)


def uses_empty_leaf(root: Node) -> bool:
    found = []
    fold(root, lambda l: found.append(l.index is None), lambda kids: None, lambda a, b: None)
    return any(found)


def node_count(root: Node) -> int:
    return fold(root, lambda l: 1, lambda kids: 1 + sum(kids), lambda a, b: 1 + a + b)


def fold_sequence(steps: Iterable[Tuple[int, Node]]) -> Node:
    """Left-linear tree from (sign, subtree) steps applied to the empty set."""
    acc = None
    for sign, sub in steps:
        if acc is None:
            acc = sub if sign > 0 else SComp(EMPTY, sub)
        elif sign > 0:
            acc = DUnion((acc, sub))
        else:
            acc = SComp(acc, sub)
    return EMPTY if acc is None else acc


# =============================================================================
# BASE CATALOGS
# =============================================================================

class BaseCatalog:
    """Indexed, distinct ground sets (ints) or configurations the leaves refer to."""

    def __init__(self, universe: Universe, entries: Sequence[Atoms], names: Optional[Sequence[str]] = None,
                 generators: Optional[Sequence[int]] = None, node_ids: Optional[Sequence[int]] = None,
                 is_config: Optional[bool] = None):
        entries = list(entries)
        kinds = {isinstance(e, Config) for e in entries}
        if len(kinds) > 1:
            raise CatalogError("catalog mixes sets and configurations")
        if is_config is not None and kinds and kinds != {is_config}:
            raise CatalogError("catalog entries do not match the declared kind")
        self.universe = universe
        self.is_config = kinds == {True} if is_config is None else is_config
        if self.is_config:
            for e in entries:
                if e.universe != universe:
                    raise CatalogError("catalog entry over another universe")
            keys = [e.to_bits() for e in entries]
        else:
            entries = [universe.validate(e) for e in entries]
            keys = entries
        if len(set(keys)) != len(keys):
            raise CatalogError("catalog entries must be distinct")
        self.entries = entries
        self._index = {k: i for i, k in enumerate(keys)}
        self.names = list(names) if names is not None else None
        self.generators = list(generators) if generators is not None else None
        self.node_ids = list(node_ids) if node_ids is not None else None

    @classmethod
    def of_sets(cls, universe: Universe, masks: Sequence[int], names=None) -> "BaseCatalog":
        return cls(universe, masks, names=names)

    @classmethod
    def of_downsets(cls, universe: Universe, generators: Sequence[int]) -> "BaseCatalog":
        """Principal downsets I(X), one per generator X."""
        generators = [universe.validate(x) for x in generators]
        entries = [principal_downset(universe, x) for x in generators]
        names = [f"I({universe.render(x)})" for x in generators]
        return cls(universe, entries, names=names, generators=generators, is_config=True)

    @classmethod
    def of_lattice_nodes(cls, l: IntersectionLattice, node_ids: Sequence[int]) -> "BaseCatalog":
        node_ids = list(node_ids)
        entries = [l.nodes[i] for i in node_ids]
        return cls(l.universe, entries, names=[l.node_label(i) for i in node_ids], node_ids=node_ids)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i: int) -> Atoms:
        return self.entries[i]

    def index_of(self, entry: Atoms) -> Optional[int]:
        key = entry.to_bits() if isinstance(entry, Config) else entry
        return self._index.get(key)

    def empty(self) -> Atoms:
        return Config.empty(self.universe) if self.is_config else 0

    def name(self, i: Optional[int]) -> str:
        if i is None:
            return "∅"
        if self.names is not None:
            return self.names[i]
        return self.render_value(self.entries[i])

    def render_value(self, value: Atoms) -> str:
        if isinstance(value, Config):
            return "{" + ", ".join(self.universe.render(m) for m in value.members()) + "}"
        return self.universe.render(value)

    def render(self) -> List[str]:
        return [self.name(i) for i in range(len(self.entries))]

    def __repr__(self) -> str:
        return f"BaseCatalog({self.render()})"


@dataclass(frozen=True, eq=False)
class Witness:
    tree: Node
    base: BaseCatalog

    def evaluate(self) -> Atoms:
        return evaluate(self.tree, self.base)


# =============================================================================
# EVALUATION AND ACCOUNTING
# =============================================================================

def _leaf_value(base: BaseCatalog):
    def value(l: Leaf):
        if l.index is None:
            return base.empty()
        if not 0 <= l.index < len(base):
            raise CatalogError(f"leaf L{l.index} outside a catalog of {len(base)} entries")
        return base.entries[l.index]
    return value


def evaluate(t: Node, base: BaseCatalog) -> Atoms:
    """Value of the tree; InvalidNodeError names the first undefined operation."""
    return fold(t, _leaf_value(base), lambda kids: dunion(*kids), scomp)


def is_valid(t: Node, base: BaseCatalog) -> bool:
    try:
        evaluate(t, base)
    except InvalidNodeError:
        return False
    return True


def node_values(t: Node, base: BaseCatalog) -> Dict[int, Atoms]:
    """id(node) -> value for every distinct node of a valid tree."""
    value = _leaf_value(base)
    values = {}
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in values:
            continue
        if isinstance(node, Leaf):
            values[id(node)] = value(node)
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((kid, False) for kid in reversed(node.children) if id(kid) not in values)
            continue
        kids = [values[id(kid)] for kid in node.children]
        values[id(node)] = dunion(*kids) if isinstance(node, DUnion) else scomp(kids[0], kids[1])
    return values


def multiplicities(t: Node, base: Optional[BaseCatalog] = None) -> Dict[int, int]:
    """Signed leaf counts: each leaf contributes (−1)^(right complement edges above it)."""
    def add(parts):
        out = {}
        for part in parts:
            for k, v in part.items():
                out[k] = out.get(k, 0) + v
        return out

    def sub(left, right):
        out = dict(left)
        for k, v in right.items():
            out[k] = out.get(k, 0) - v
        return out

    counts = fold(t, lambda l: {} if l.index is None else {l.index: 1}, add, sub)
    if base is not None:
        full = {i: 0 for i in range(len(base))}
        full.update(counts)
        return full
    return counts


def is_left_linear(t: Node) -> bool:
    """Every complement's right child and every non-first union child is a leaf."""
    ok = {}
    stack = [(t, False)]
    while stack:
        node, expanded = stack.pop()
        if id(node) in ok:
            continue
        if isinstance(node, Leaf):
            ok[id(node)] = True
            continue
        if not expanded:
            stack.append((node, True))
            stack.extend((kid, False) for kid in reversed(node.children) if id(kid) not in ok)
            continue
        first, rest = node.children[0], node.children[1:]
        ok[id(node)] = ok[id(first)] and all(isinstance(kid, Leaf) for kid in rest)
    return ok[id(t)]


# =============================================================================
# MULTIPLICITY LAWS
# =============================================================================

@dataclass(frozen=True)
class MultiplicityReport:
    checked: int
    violation: Optional[Tuple[str, int, int]] = None    # (entry, multiplicity, expected)

    @property
    def ok(self) -> bool:
        return self.violation is None


def check_multiplicity_laws(t: Node, base: BaseCatalog, context: Union[IntersectionLattice, Config]) -> MultiplicityReport:
    """Compares leaf multiplicities with −μ(U,1̂) on a full lattice or with μ̂(X) on a downset."""
    mult = multiplicities(t, base)
    value = evaluate(t, base)

    if isinstance(context, IntersectionLattice):
        if base.is_config:
            raise ContextMismatchError("lattice context needs a catalog of sets")
        if not is_full(context):
            raise ContextMismatchError("the lattice is not full")
        if value != context.top_mask:
            raise ContextMismatchError("tree does not evaluate to the top of the lattice")
        by_node = {}
        for i, entry in enumerate(base.entries):
            try:
                node = context.index_of(entry)
            except UniverseError:
                raise ContextMismatchError(f"{base.name(i)} is not a lattice node") from None
            if node == context.top:
                raise ContextMismatchError("catalog contains the top node")
            by_node[node] = mult[i]
        mu = mobius_to_top(context)
        for node in context.nti():
            got, want = by_node.get(node, 0), -mu[node]
            if got != want:
                return MultiplicityReport(len(context.nti()), (context.node_label(node), got, want))
        return MultiplicityReport(len(context.nti()))

    if isinstance(context, Config):
        if not base.is_config or base.generators is None:
            raise ContextMismatchError("downset context needs a catalog of principal downsets")
        if not is_downset(context):
            raise ContextMismatchError("context configuration is not a downset")
        if value != context:
            raise ContextMismatchError("tree does not evaluate to the context downset")
        by_gen = {x: mult[i] for i, x in enumerate(base.generators)}
        mu = generalized_mobius(context)
        members = context.members()
        for x in members:
            got, want = by_gen.get(x, 0), mu[x]
            if got != want:
                return MultiplicityReport(len(members), (context.universe.render(x), got, want))
        inside = set(members)
        for i in leaf_indices(t):
            x = base.generators[i]
            if x not in inside:
                return MultiplicityReport(len(members), (context.universe.render(x), mult.get(i, 0), 0))
        return MultiplicityReport(len(members))

    raise ContextMismatchError(f"unsupported context {type(context).__name__}")


# =============================================================================
# TEXT FORM
# =============================================================================

def serialize(t: Node) -> str:
    """Canonical s-expression: (du ...), (sc left right), Lk leaves and E for ∅."""
    return fold(
        t,
        lambda l: "E" if l.index is None else f"L{l.index}",
        lambda kids: "(du " + " ".join(kids) + ")",
        lambda left, right: f"(sc {left} {right})",
    )


_TOKEN = re.compile(r"\s*(?:(\()|(\))|([^\s()]+))")
_LEAF = re.compile(r"L(\d+)$")


def parse(text: str) -> Node:
    """Inverse of serialize; whitespace-insensitive."""
    frames = []          # [op, children, start position]
    root = None
    pos = 0
    while True:
        match = _TOKEN.match(text, pos)
        if not match:
            if text[pos:].strip():
                raise ParseError(pos, "unexpected character")
            break
        start = match.start(match.lastindex)
        pos = match.end()
        opening, closing, word = match.groups()
        if root is not None:
            raise ParseError(start, "trailing input after the tree")
        if opening:
            op_match = _TOKEN.match(text, pos)
            op = op_match.group(3) if op_match else None
            if op not in ("du", "sc"):
                raise ParseError(pos, f"expected 'du' or 'sc', got {op!r}")
            pos = op_match.end()
            frames.append([op, [], start])
            continue
        if closing:
            if not frames:
                raise ParseError(start, "unbalanced ')'")
            op, kids, _ = frames.pop()
            if op == "sc" and len(kids) != 2:
                raise ParseError(start, f"sc needs 2 children, got {len(kids)}")
            if op == "du" and len(kids) < 2:
                raise ParseError(start, f"du needs at least 2 children, got {len(kids)}")
            node = SComp(kids[0], kids[1]) if op == "sc" else DUnion(tuple(kids))
        else:
            if word == "E":
                node = EMPTY
            else:
                leaf_match = _LEAF.match(word)
                if not leaf_match:
                    raise ParseError(start, f"bad leaf {word!r}")
                node = Leaf(int(leaf_match.group(1)))
        if frames:
            frames[-1][1].append(node)
        else:
            root = node
    if frames:
        raise ParseError(len(text), "unclosed '('")
    if root is None:
        raise ParseError(0, "empty input")
    return root


# =============================================================================
# DOT-ALGEBRA CLOSURE
# =============================================================================

def dot_closure(base: BaseCatalog, limit: int = 1 << 16) -> List[Atoms]:
    """Explicit •(base): ∅ and the entries closed under ⊔ and ∖̇."""
    if base.is_config:
        seeds = [e.to_bits() for e in base.entries]
    else:
        seeds = list(base.entries)
    closed = {0, *seeds}
    frontier = list(closed)
    while frontier:
        snapshot = list(closed)
        fresh = []
        for a in frontier:
            for b in snapshot:
                for c in _dot_results(a, b):
                    if c not in closed:
                        closed.add(c)
                        fresh.append(c)
                        if len(closed) > limit:
                            raise CatalogError(f"closure exceeds {limit} members")
        frontier = fresh
    ordered = sorted(closed, key=lambda m: (bin(m).count("1"), m))
    if base.is_config:
        return [Config.from_bits(base.universe, m) for m in ordered]
    return ordered


def _dot_results(a: int, b: int) -> List[int]:
    out = []
    if not a & b:
        out.append(a | b)
    if not b & ~a:
        out.append(a & ~b)
    if not a & ~b:
        out.append(b & ~a)
    return out
