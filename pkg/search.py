"""
Witness search and instance enumeration.

Both engines look for left-linear witnesses: a sequence of steps, each adding
(disjointly) or removing (as a subset) one base entry, that turns ∅ into the
target. Sets and configurations are handled alike by working on their bit
patterns (a configuration's pattern has one bit per member).
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from config import RANDOM_CONFIG, SAT_CONFIG, SEARCH_CONFIG
from dot_expr import EMPTY, BaseCatalog, Leaf, Witness, fold_sequence
from errors import NotADownsetError, SolverUnavailableError, TrivialFamilyError
from intersection_lattice import IntersectionLattice, SetFamily, UnionLattice, dualize_family, is_trivial
from mobius import generalized_mobius, mobius_from_bottom, mobius_to_top, nci, ncpd, ncu
from subset_core import Atoms, Config, Universe, bits_of, comparable, downset_closure, is_downset

try:
    import z3
except ImportError:  # pragma: no cover - exercised only without the solver installed
    z3 = None


# =============================================================================
# OPTIONS AND VERDICTS
# =============================================================================

@dataclass(frozen=True)
class SearchOptions:
    polarity_constrained: bool = SEARCH_CONFIG['polarity_constrained']
    max_steps: Optional[int] = None
    time_budget: Optional[float] = SEARCH_CONFIG['time_budget']     # seconds
    engine: str = SEARCH_CONFIG['engine']
    emit_cnf: Optional[str] = SAT_CONFIG['emit_cnf']
    check_interval: int = SEARCH_CONFIG['check_interval']

    def __post_init__(self):
        if self.engine not in ('exhaustive', 'sat'):
            raise ValueError(f"unknown engine {self.engine!r}")
        if self.max_steps is not None and self.max_steps < 0:
            raise ValueError("max_steps must be non-negative")

    def bound_for(self, target_size: int, basis_size: int) -> int:
        """Explicit max_steps, else factor × |target| raised to the basis size and the floor."""
        if self.max_steps is not None:
            if self.max_steps < basis_size:
                raise ValueError(f"max_steps {self.max_steps} is below the basis size {basis_size}")
            return self.max_steps
        return max(SEARCH_CONFIG['max_steps_factor'] * target_size, basis_size, SEARCH_CONFIG['min_max_steps'])


@dataclass(frozen=True, eq=False)
class Verdict:
    kind: str                          # witness | refuted | timeout
    witness: Optional[Witness] = None
    steps: Optional[int] = None
    bound: Optional[int] = None
    millis: int = 0
    engine: str = 'exhaustive'
    exhausted: bool = False            # refuted because no new state is reachable at all

    @property
    def is_witness(self) -> bool:
        return self.kind == 'witness'

    @property
    def is_refuted(self) -> bool:
        return self.kind == 'refuted'


def _bits(value: Atoms) -> int:
    return value.to_bits() if isinstance(value, Config) else int(value)


def _target_size(value: Atoms) -> int:
    return len(value) if isinstance(value, Config) else bin(value).count("1")


def _millis(started: float) -> int:
    return int((time.monotonic() - started) * 1000)


def _tree(moves: Sequence[Tuple[int, int]]):
    return fold_sequence((sign, Leaf(i)) for sign, i in moves)


# =============================================================================
# EXHAUSTIVE ENGINE
# =============================================================================

def exhaustive_witness(base: BaseCatalog, target: Atoms, opts: Optional[SearchOptions] = None,
                       required: Optional[Dict[int, int]] = None) -> Verdict:
    """Breadth-first search over step sequences, shortest witness first."""
    opts = opts or SearchOptions()
    if not opts.polarity_constrained:
        required = None
    started = time.monotonic()
    entries = [_bits(e) for e in base.entries]
    goal = _bits(target)
    bound = opts.bound_for(_target_size(target), len(entries))
    req = tuple(required.get(i, 0) for i in range(len(entries))) if required is not None else None
    moves = [i for i, e in enumerate(entries) if e or req is not None]

    zero = tuple(0 for _ in entries) if req is not None else None
    start = (0, zero)
    if goal == 0 and (req is None or req == zero):
        return Verdict('witness', Witness(EMPTY, base), 0, bound, _millis(started), 'exhaustive')

    parents = {start: None}
    frontier = [start]
    depth = 0
    expanded = 0
    while frontier and depth < bound:
        depth += 1
        remaining = bound - depth
        fresh = []
        for state in frontier:
            cur, counts = state
            for i in moves:
                e = entries[i]
                for sign in (1, -1):
                    if sign > 0:
                        if cur & e:
                            continue
                        nxt = cur | e
                    else:
                        if e & ~cur:
                            continue
                        nxt = cur & ~e
                    if counts is not None:
                        new_counts = counts[:i] + (counts[i] + sign,) + counts[i + 1:]
                        if sum(abs(r - c) for r, c in zip(req, new_counts)) > remaining:
                            continue
                    else:
                        new_counts = None
                    key = (nxt, new_counts)
                    if key in parents:
                        continue
                    parents[key] = (state, sign, i)
                    if nxt == goal and (req is None or new_counts == req):
                        path = _unwind(parents, key)
                        return Verdict('witness', Witness(_tree(path), base), len(path), bound,
                                       _millis(started), 'exhaustive')
                    fresh.append(key)
            expanded += 1
            if opts.time_budget is not None and expanded % opts.check_interval == 0:
                if time.monotonic() - started > opts.time_budget:
                    return Verdict('timeout', None, None, bound, _millis(started), 'exhaustive')
        frontier = fresh
    return Verdict('refuted', None, None, bound, _millis(started), 'exhaustive', exhausted=not frontier and req is None)


def _unwind(parents, key) -> List[Tuple[int, int]]:
    path = []
    while parents[key] is not None:
        prev, sign, i = parents[key]
        path.append((sign, i))
        key = prev
    return path[::-1]


# =============================================================================
# SAT ENGINE
# =============================================================================

class CnfBuilder:
    def __init__(self):
        self.count = 0
        self.clauses: List[Tuple[int, ...]] = []

    def var(self) -> int:
        self.count += 1
        return self.count

    def add(self, *lits: int):
        self.clauses.append(tuple(lits))

    def dimacs(self) -> str:
        problem = [f"p cnf {self.count} {len(self.clauses)}"]
        for clause in self.clauses:
            problem.append(" ".join(map(str, clause)) + " 0")
        return "\n".join(problem) + "\n"


def encode_sequence(entries: Sequence[int], goal: int, k: int,
                    required: Optional[Sequence[int]] = None) -> Tuple[CnfBuilder, Dict[Tuple[int, int, int], int]]:
    """CNF for a k-step sequence from ∅ to goal; returns the builder and the choice variables."""
    cnf = CnfBuilder()
    relevant = goal
    for e in entries:
        relevant |= e
    atoms = bits_of(relevant)
    moves = [i for i, e in enumerate(entries) if e or required is not None]

    state = [{a: cnf.var() for a in atoms} for _ in range(k + 1)]
    for a in atoms:
        cnf.add(-state[0][a])

    choice = {}
    for t in range(1, k + 1):
        options = []
        for i in moves:
            for sign in (1, -1):
                v = cnf.var()
                choice[(t, i, sign)] = v
                options.append(v)
        cnf.add(*options)
        for p, q in itertools.combinations(options, 2):
            cnf.add(-p, -q)
        before, after = state[t - 1], state[t]
        for i in moves:
            e = entries[i]
            for sign in (1, -1):
                c = choice[(t, i, sign)]
                for a in atoms:
                    if e >> a & 1:
                        if sign > 0:
                            cnf.add(-c, -before[a])
                            cnf.add(-c, after[a])
                        else:
                            cnf.add(-c, before[a])
                            cnf.add(-c, -after[a])
                    else:
                        cnf.add(-c, -before[a], after[a])
                        cnf.add(-c, before[a], -after[a])

    for a in atoms:
        cnf.add(state[k][a] if goal >> a & 1 else -state[k][a])

    if required is not None:
        # counters[t][i][v]: leaf i has net count v after t steps
        counters = [{i: {0: cnf.var()} for i in moves}]
        for i in moves:
            cnf.add(counters[0][i][0])
        for t in range(1, k + 1):
            layer = {i: {v: cnf.var() for v in range(-t, t + 1)} for i in moves}
            for i in moves:
                plus, minus = choice[(t, i, 1)], choice[(t, i, -1)]
                for v, y in counters[t - 1][i].items():
                    cnf.add(-y, -plus, layer[i][v + 1])
                    cnf.add(-y, -minus, layer[i][v - 1])
                    cnf.add(-y, plus, minus, layer[i][v])
            counters.append(layer)
        for i in range(len(entries)):
            want = required[i]
            if i not in counters[k]:
                continue
            for v, y in counters[k][i].items():
                if v != want:
                    cnf.add(-y)
            if want not in counters[k][i]:
                cnf.add()   # the count cannot be reached in k steps
    return cnf, choice


def _solve(cnf: CnfBuilder, timeout_ms: Optional[int]):
    solver = z3.Solver()
    if timeout_ms is not None:
        solver.set("timeout", max(1, int(timeout_ms)))
    lits = [None] + [z3.Bool(f"v{v}") for v in range(1, cnf.count + 1)]
    for clause in cnf.clauses:
        if not clause:
            return False
        solver.add(z3.Or([lits[l] if l > 0 else z3.Not(lits[-l]) for l in clause]))
    result = solver.check()
    if result == z3.sat:
        model = solver.model()
        return {v for v in range(1, cnf.count + 1) if z3.is_true(model.eval(lits[v], model_completion=True))}
    if result == z3.unsat:
        return False
    return None


def sat_witness(base: BaseCatalog, target: Atoms, opts: Optional[SearchOptions] = None,
                required: Optional[Dict[int, int]] = None) -> Verdict:
    """Asks the solver for a k-step sequence, k = 1, 2, ... up to the bound."""
    opts = opts or SearchOptions(engine='sat')
    if not opts.polarity_constrained:
        required = None
    started = time.monotonic()
    entries = [_bits(e) for e in base.entries]
    goal = _bits(target)
    bound = opts.bound_for(_target_size(target), len(entries))
    req = [required.get(i, 0) for i in range(len(entries))] if required is not None else None

    if goal == 0 and (req is None or not any(req)):
        return Verdict('witness', Witness(EMPTY, base), 0, bound, _millis(started), 'sat')

    for k in range(1, bound + 1):
        cnf, choice = encode_sequence(entries, goal, k, req)
        if opts.emit_cnf:
            with open(opts.emit_cnf.format(k=k), 'w') as fp:
                fp.write(cnf.dimacs())
        if z3 is None:
            raise SolverUnavailableError("z3 is not installed; CNF emission only")
        timeout_ms = None
        if opts.time_budget is not None:
            timeout_ms = (opts.time_budget - (time.monotonic() - started)) * 1000
            if timeout_ms <= 0:
                return Verdict('timeout', None, None, bound, _millis(started), 'sat')
        elif SAT_CONFIG['solver_timeout_ms']:
            timeout_ms = SAT_CONFIG['solver_timeout_ms']
        model = _solve(cnf, timeout_ms)
        if model is None:
            return Verdict('timeout', None, None, bound, _millis(started), 'sat')
        if model:
            moves = []
            for t in range(1, k + 1):
                for (step, i, sign), v in choice.items():
                    if step == t and v in model:
                        moves.append((sign, i))
                        break
            return Verdict('witness', Witness(_tree(moves), base), k, bound, _millis(started), 'sat')
    return Verdict('refuted', None, None, bound, _millis(started), 'sat')


def find_witness(base: BaseCatalog, target: Atoms, opts: Optional[SearchOptions] = None,
                 required: Optional[Dict[int, int]] = None) -> Verdict:
    opts = opts or SearchOptions()
    engine = sat_witness if opts.engine == 'sat' else exhaustive_witness
    return engine(base, target, opts, required)


# =============================================================================
# CONJECTURE CHECKS
# =============================================================================

def nci_instance(f: SetFamily) -> Tuple[BaseCatalog, int, Dict[int, int]]:
    """Base over nci(L), the top, and the multiplicities −μ a polarity-pure witness must show."""
    l = IntersectionLattice(f)
    mu = mobius_to_top(l)
    nodes = nci(l, mu)
    return BaseCatalog.of_lattice_nodes(l, nodes), l.top_mask, {k: -mu[n] for k, n in enumerate(nodes)}


def ncpd_instance(i: Config) -> Tuple[BaseCatalog, Config, Dict[int, int]]:
    mu = generalized_mobius(i)
    gens = ncpd(i, mu)
    return BaseCatalog.of_downsets(i.universe, gens), i, {k: mu[x] for k, x in enumerate(gens)}


def union_instance(ul: UnionLattice) -> Tuple[BaseCatalog, int, Dict[int, int]]:
    """Base over ncu(U), the bottom, and the multiplicities −μ(0̂,U) a polarity-pure witness must show."""
    mu = mobius_from_bottom(ul)
    nodes = ncu(ul, mu)
    base = BaseCatalog(ul.universe, [ul.nodes[n] for n in nodes],
                       names=[ul.node_label(n) for n in nodes], node_ids=nodes)
    return base, ul.bottom_mask, {k: -mu[n] for k, n in enumerate(nodes)}


def ncu_instance(f: SetFamily) -> Tuple[BaseCatalog, int, Dict[int, int]]:
    """The NCU formulation paired with f: the union lattice of dual(f), whose bottom is ∅."""
    return union_instance(UnionLattice(dualize_family(f)))


def check_nci(f: SetFamily, opts: Optional[SearchOptions] = None) -> Verdict:
    base, target, required = nci_instance(f)
    return find_witness(base, target, opts, required)


def check_ncpd(i: Config, opts: Optional[SearchOptions] = None, require_downset: bool = True) -> Verdict:
    if require_downset and not is_downset(i):
        raise NotADownsetError(f"{i!r} is not a downset")
    base, target, required = ncpd_instance(i)
    return find_witness(base, target, opts, required)


def check_ncu(f: SetFamily, opts: Optional[SearchOptions] = None) -> Verdict:
    base, target, required = ncu_instance(f)
    return find_witness(base, target, opts, required)


# =============================================================================
# ENUMERATION
# =============================================================================

@lru_cache(maxsize=None)
def permutation_table(n: int) -> np.ndarray:
    """Row p maps every mask to its image under the p-th relabelling of the n elements."""
    idx = np.arange(1 << n, dtype=np.int64)
    rows = []
    for perm in itertools.permutations(range(n)):
        out = np.zeros(1 << n, dtype=np.int64)
        for i, target in enumerate(perm):
            out |= ((idx >> i) & 1) << target
        rows.append(out)
    table = np.array(rows, dtype=np.int64).reshape(len(rows), 1 << n)
    table.setflags(write=False)
    return table


def canonical_form(masks: Sequence[int], n: int) -> Tuple[int, ...]:
    """Lexicographically least sorted mask list over all relabellings."""
    if not masks:
        return ()
    images = np.sort(permutation_table(n)[:, list(masks)], axis=1)
    best = np.lexsort(images.T[::-1])[0]
    return tuple(images[best].tolist())


def antichains(n: int) -> Iterator[Tuple[int, ...]]:
    """Every antichain of B_n, as an ascending mask tuple."""
    size = 1 << n
    chosen: List[int] = []

    def extend(start: int):
        yield tuple(chosen)
        for m in range(start, size):
            if all(not comparable(m, c) for c in chosen):
                chosen.append(m)
                yield from extend(m + 1)
                chosen.pop()

    yield from extend(0)


def sperner_families(n: int) -> Iterator[Tuple[int, ...]]:
    """One canonical antichain per relabelling orbit, by size then lexicographically."""
    level = {()}
    size = 1 << n
    while level:
        yield from sorted(level)
        fresh = set()
        for family in level:
            for m in range(size):
                if m in family or any(comparable(m, c) for c in family):
                    continue
                fresh.add(canonical_form(family + (m,), n))
        level = fresh


def enumerate_downsets(n: int) -> Iterator[Config]:
    universe = Universe.letters(n)
    for family in antichains(n):
        yield downset_closure(Config.from_masks(universe, family))


def random_family(n: int, count_range: Tuple[int, int] = RANDOM_CONFIG['count_range'],
                  seed: Optional[int] = None) -> SetFamily:
    """A seeded non-trivial family of distinct random subsets of an n-element universe."""
    rng = np.random.default_rng(seed)
    universe = Universe.letters(n)
    lo, hi = count_range
    hi = min(hi, universe.size)
    if universe.size < 2 or hi < lo:
        raise TrivialFamilyError(f"no non-trivial family of {lo}..{hi} sets over {n} elements")
    for _ in range(RANDOM_CONFIG['max_attempts']):
        k = int(rng.integers(lo, hi + 1))
        sets = tuple(int(m) for m in rng.choice(universe.size, size=k, replace=False))
        family = SetFamily(universe, sets)
        if not is_trivial(family):
            return family
    raise TrivialFamilyError(f"no non-trivial family after {RANDOM_CONFIG['max_attempts']} draws")
