"""
Translations between the three formulations of the conjecture.

A family F embeds into B_S as the downset its sets generate; the lattice of
the powersets 2^X (X in F) then lives on the members of that downset as
atoms, so a configuration and a node of that lattice are literally the same
set. Pull-back moves a witness along an order isomorphism into a full
lattice; dualization moves witnesses between intersection and union lattices.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from dot_expr import BaseCatalog, Witness, evaluate
from errors import (
    InvalidNodeError,
    MismatchError,
    NotFullError,
    NotTightError,
    NotTopError,
    UniverseError,
)
from intersection_lattice import (
    IntersectionLattice,
    LatticeBase,
    SetFamily,
    UnionLattice,
    dualize_family,
    is_full,
    is_tight,
    private_elements,
)
from mobius import nci, ncu
from search import SearchOptions, find_witness
from subset_core import Config, Universe, bits_of, downset_closure


# =============================================================================
# FAMILY <-> DOWNSET
# =============================================================================

@dataclass(frozen=True, eq=False)
class DownsetEmbedding:
    family: SetFamily
    downset: Config
    lattice: IntersectionLattice     # of the powersets 2^X, over downset members as atoms
    atoms: List[int]                 # atom bit j is the subset atoms[j] of the family universe
    node_to_mask: Dict[int, int]     # non-top node -> its generator X (node = I(X))
    mask_to_node: Dict[int, int]

    def config_of(self, atom_mask: int) -> Config:
        return Config.from_masks(self.family.universe, [self.atoms[j] for j in bits_of(atom_mask)])


def family_to_downset(f: SetFamily) -> DownsetEmbedding:
    """The downset generated by f and the intersection lattice of {2^X : X ∈ f}."""
    downset = downset_closure(Config.from_masks(f.universe, f.sets))
    atoms = downset.members()
    try:
        atom_universe = Universe(tuple(f.universe.render(y) for y in atoms))
    except UniverseError as e:
        raise UniverseError(f"downset has {len(atoms)} members: {e}") from None
    slot = {y: j for j, y in enumerate(atoms)}

    def powerset(x: int) -> int:
        mask = 0
        for y in atoms:
            if y & ~x == 0:
                mask |= 1 << slot[y]
        return mask

    lattice = IntersectionLattice(SetFamily(atom_universe, tuple(powerset(x) for x in f.sets)))
    node_to_mask = {}
    for node in lattice.nti():
        generator = 0
        for j in bits_of(lattice.nodes[node]):
            generator |= atoms[j]
        node_to_mask[node] = generator
    mask_to_node = {x: node for node, x in node_to_mask.items()}
    return DownsetEmbedding(f, downset, lattice, atoms, node_to_mask, mask_to_node)


def downset_witness_to_lattice(emb: DownsetEmbedding, witness: Witness) -> Witness:
    """Leaves I(X) become the lattice nodes 2^X; values are the same sets of atoms."""
    base = witness.base
    if base.generators is None:
        raise MismatchError("witness leaves must be principal downsets")
    nodes = []
    for x in base.generators:
        if x not in emb.mask_to_node:
            raise MismatchError(f"I({emb.family.universe.render(x)}) is not a node of the powerset lattice")
        nodes.append(emb.mask_to_node[x])
    return Witness(witness.tree, BaseCatalog.of_lattice_nodes(emb.lattice, nodes))


def lattice_witness_to_downsets(emb: DownsetEmbedding, witness: Witness) -> Witness:
    """Inverse of downset_witness_to_lattice."""
    generators = []
    for entry in witness.base.entries:
        node = emb.lattice.index_of(entry)
        if node == emb.lattice.top:
            raise MismatchError("the top of the powerset lattice is not a principal downset")
        generators.append(emb.node_to_mask[node])
    return Witness(witness.tree, BaseCatalog.of_downsets(emb.family.universe, generators))


# =============================================================================
# PULL-BACK FROM A FULL LATTICE
# =============================================================================

def pull_back_map(l: IntersectionLattice, lf: IntersectionLattice, iso: Dict[int, int]) -> Callable[[int], int]:
    """Preimage map X' ↦ {x ∈ 1̂ : g(x) ∈ X'} with g(x) the chosen private element of iso(min(x))."""
    if not is_full(lf):
        raise NotFullError("the target lattice is not full")
    private = private_elements(lf)
    alpha = {node: private[node][0] for node in lf.nti()}
    g = {x: alpha[iso[node]] for x, node in l.min_of.items()}

    def preimage(target: int) -> int:
        out = 0
        for x, gx in g.items():
            if target >> gx & 1:
                out |= 1 << x
        return out

    return preimage


def pull_back_tree(l: IntersectionLattice, lf: IntersectionLattice, iso: Dict[int, int],
                   witness: Witness) -> Witness:
    """Witness for 1̂ of l over its nodes, from a witness for 1̂ of the full lattice lf."""
    preimage = pull_back_map(l, lf, iso)
    if evaluate(witness.tree, witness.base) != lf.top_mask:
        raise NotTopError("witness does not evaluate to the top of the full lattice")
    nodes = []
    for entry in witness.base.entries:
        mask = preimage(entry)
        try:
            nodes.append(l.index_of(mask))
        except UniverseError:
            raise MismatchError(f"preimage {l.universe.render(mask)} is not a node") from None
    return Witness(witness.tree, BaseCatalog.of_lattice_nodes(l, nodes))


def powerset_isomorphism(l: IntersectionLattice, emb: DownsetEmbedding) -> Dict[int, int]:
    """S_T ↦ 2^{S_T}, top to top."""
    iso = {l.top: emb.lattice.top}
    for node in l.nti():
        iso[node] = emb.mask_to_node[l.nodes[node]]
    return iso


def ncpd_witness_to_nci(f: SetFamily, witness: Witness) -> Witness:
    """NCI witness for 1̂ of a tight family from a downset witness of the downset it generates."""
    l = IntersectionLattice(f)
    if not is_tight(l):
        raise NotTightError(f"family {f.render()} is not tight")
    emb = family_to_downset(f)
    on_lattice = downset_witness_to_lattice(emb, witness)
    return pull_back_tree(l, emb.lattice, powerset_isomorphism(l, emb), on_lattice)


# =============================================================================
# NCI <-> NCU
# =============================================================================

def _check_side(witness: Witness, lattice: LatticeBase, allowed: List[int], goal: int, side: str):
    universe = witness.base.universe
    for entry in witness.base.entries:
        try:
            node = lattice.index_of(entry)
        except UniverseError:
            raise MismatchError(f"{universe.render(entry)} is not a node of the {side} lattice") from None
        if node not in allowed:
            raise MismatchError(f"{lattice.node_label(node) or '∅'} is cancelling in the {side} lattice")
    try:
        value = evaluate(witness.tree, witness.base)
    except InvalidNodeError as e:
        raise MismatchError(f"input is not a valid {side} witness: {e}") from e
    if value != goal:
        raise MismatchError(f"input evaluates to {universe.render(value) or '∅'}, "
                            f"not the {side} goal {universe.render(goal) or '∅'}")


def _dual_base(base: BaseCatalog, ground: int, target: LatticeBase) -> BaseCatalog:
    nodes = [target.index_of(ground & ~entry) for entry in base.entries]
    return BaseCatalog(base.universe, [target.nodes[n] for n in nodes],
                       names=[target.node_label(n) for n in nodes], node_ids=nodes)


def dualize_witness(f: SetFamily, witness: Witness, to: str = 'nci',
                    opts: Optional[SearchOptions] = None) -> Witness:
    """Carries a witness across ∪f-complementation and re-witnesses the other goal.

    to='nci': the input witnesses 0̂ = ∅ of the union lattice of dual(f) over
    its ncu nodes; the output witnesses 1̂ of the intersection lattice of f.
    to='ncu': the reverse direction. The input is validated against its own
    formulation first. Complementing leaves in place never yields a valid
    tree for the other goal, so the complemented leaves become the base and
    the output tree is searched over them.
    """
    ground = f.union_mask
    primal = IntersectionLattice(f)
    dual = UnionLattice(dualize_family(f))
    if to == 'nci':
        _check_side(witness, dual, ncu(dual), dual.bottom_mask, 'NCU')
        target, goal = primal, primal.top_mask
    elif to == 'ncu':
        _check_side(witness, primal, nci(primal), primal.top_mask, 'NCI')
        target, goal = dual, dual.bottom_mask
    else:
        raise ValueError(f"unknown direction {to!r}")
    base = _dual_base(witness.base, ground, target)
    verdict = find_witness(base, goal, opts)
    if not verdict.is_witness:
        raise MismatchError(f"no witness of {f.universe.render(goal) or '∅'} over the dualized leaves "
                            f"({verdict.kind} within {verdict.bound} steps)")
    return verdict.witness
