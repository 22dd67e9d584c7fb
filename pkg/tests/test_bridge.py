import pytest

from bridge import (
    downset_witness_to_lattice,
    dualize_witness,
    family_to_downset,
    lattice_witness_to_downsets,
    ncpd_witness_to_nci,
    pull_back_tree,
    powerset_isomorphism,
)
from dot_expr import BaseCatalog, Leaf, Witness, leaf_indices, parse
from errors import MismatchError, NotFullError, NotTightError, NotTopError, UniverseError
from intersection_lattice import IntersectionLattice, SetFamily, UnionLattice, dualize_family, is_trivial
from mobius import nci, ncpd, ncu
from search import check_nci, check_ncpd, check_ncu, sperner_families
from subset_core import Universe


def _families(n):
    universe = Universe.letters(n)
    for masks in sperner_families(n):
        f = SetFamily(universe, masks)
        if len(masks) >= 2 and not is_trivial(f):
            yield f


# =============================================================================
# FAMILY <-> DOWNSET
# =============================================================================

@pytest.mark.parametrize("n", [2, 3])
def test_nci_matches_ncpd(n):
    for f in _families(n):
        emb = family_to_downset(f)
        assert sorted(emb.node_to_mask[x] for x in nci(emb.lattice)) == ncpd(emb.downset)


@pytest.mark.slow
def test_nci_matches_ncpd_n4():
    for f in _families(4):
        emb = family_to_downset(f)
        assert sorted(emb.node_to_mask[x] for x in nci(emb.lattice)) == ncpd(emb.downset)


def test_embedding_of_shared_point(load_family):
    emb = family_to_downset(load_family("shared_point"))
    assert len(emb.atoms) == 8
    assert emb.lattice.top_mask == 0xFF
    assert sorted(emb.mask_to_node) == [0b1000, 0b1001, 0b1010, 0b1100]
    assert emb.config_of(emb.lattice.top_mask) == emb.downset


def test_embedding_size_limit(load_family):
    with pytest.raises(UniverseError):
        family_to_downset(load_family("tight_triangle"))


def test_downset_witness_round_trip(load_family):
    emb = family_to_downset(load_family("shared_point"))
    verdict = check_ncpd(emb.downset)
    assert verdict.is_witness
    on_lattice = downset_witness_to_lattice(emb, verdict.witness)
    assert on_lattice.evaluate() == emb.lattice.top_mask
    back = lattice_witness_to_downsets(emb, on_lattice)
    assert back.evaluate() == emb.downset


def test_downset_witness_needs_lattice_nodes(load_family):
    f = load_family("shared_point")
    emb = family_to_downset(f)
    stray = Witness(Leaf(0), BaseCatalog.of_downsets(f.universe, [0b0011]))
    with pytest.raises(MismatchError):
        downset_witness_to_lattice(emb, stray)


# =============================================================================
# PULL-BACK
# =============================================================================

def _explicit_iso(l, lf):
    pairs = {
        "": "a", "a": "ad", "b": "ac", "c": "ab",
        "ab": "acdg", "ac": "abdf", "bc": "abce", "d": "ah",
    }
    iso = {l.index_of(l.universe.mask_of(k)): lf.index_of(lf.universe.mask_of(v)) for k, v in pairs.items()}
    iso[l.top] = lf.top
    return iso


def test_pull_back_chain_tree(load_family, load_witness):
    l = IntersectionLattice(load_family("triangle_plus_point"))
    lf = IntersectionLattice(load_family("tight_triangle"))
    pulled = pull_back_tree(l, lf, _explicit_iso(l, lf), load_witness("tree_t1_chain.json"))
    assert pulled.base.render() == ["ab", "b", "bc", "c", "d", "a", "ac"]
    assert pulled.evaluate() == l.top_mask
    assert set(pulled.base.node_ids) <= set(nci(l))


def test_pull_back_needs_full_target(load_family, load_witness):
    l = IntersectionLattice(load_family("triangle_plus_point"))
    lf = IntersectionLattice(load_family("tight_triangle"))
    inverse = {v: k for k, v in _explicit_iso(l, lf).items()}
    with pytest.raises(NotFullError):
        pull_back_tree(lf, l, inverse, load_witness("tree_t1_chain.json"))


def test_pull_back_needs_the_top(load_family):
    l = IntersectionLattice(load_family("triangle_plus_point"))
    lf = IntersectionLattice(load_family("tight_triangle"))
    partial = Witness(Leaf(0), BaseCatalog.of_sets(lf.universe, [lf.universe.mask_of("acdg")]))
    with pytest.raises(NotTopError):
        pull_back_tree(l, lf, _explicit_iso(l, lf), partial)


def test_ncpd_witness_to_nci(load_family):
    f = load_family("shared_point")
    emb = family_to_downset(f)
    verdict = check_ncpd(emb.downset)
    w = ncpd_witness_to_nci(f, verdict.witness)
    l = IntersectionLattice(f)
    assert w.evaluate() == l.top_mask
    used = [w.base.node_ids[k] for k in leaf_indices(w.tree)]
    assert set(used) <= set(nci(l))


def test_powerset_isomorphism(load_family):
    f = load_family("shared_point")
    l = IntersectionLattice(f)
    iso = powerset_isomorphism(l, family_to_downset(f))
    assert sorted(iso) == list(range(l.size))
    assert len(set(iso.values())) == l.size


def test_ncpd_witness_to_nci_needs_tightness():
    f = SetFamily.from_labels(Universe.letters(4), ["abc", "ad"])
    with pytest.raises(NotTightError):
        ncpd_witness_to_nci(f, Witness(Leaf(0), BaseCatalog.of_downsets(f.universe, [1])))


# =============================================================================
# DUALIZATION
# =============================================================================

def test_ncu_nodes_are_complements_of_nci_nodes(load_family):
    f = load_family("shared_point")
    l = IntersectionLattice(f)
    dual = UnionLattice(dualize_family(f))
    ground = f.union_mask
    assert sorted(ground & ~dual.nodes[n] for n in ncu(dual)) == sorted(l.nodes[n] for n in nci(l))


def test_dualize_search_found_ncu_witness(load_family):
    f = load_family("shared_point")
    found = check_ncu(f)
    assert found.is_witness
    out = dualize_witness(f, found.witness, to="nci")
    l = IntersectionLattice(f)
    assert out.evaluate() == l.top_mask
    assert sorted(out.base.render()) == ["ad", "bd", "cd", "d"]
    assert set(out.base.node_ids) <= set(nci(l))


def test_dualize_hand_built_ncu_witness(load_family):
    f = load_family("shared_point")
    u = f.universe
    # a, b and c each cut out of abc, joined back to abc and removed
    tree = parse("(sc (du (sc L3 L0) (sc L3 L1) (sc L3 L2)) L3)")
    ncu_side = Witness(tree, BaseCatalog.of_sets(u, [u.mask_of(s) for s in ("bc", "ac", "ab", "abc")]))
    assert ncu_side.evaluate() == 0
    out = dualize_witness(f, ncu_side, to="nci")
    assert out.evaluate() == 0b1111
    assert out.base.render() == ["ad", "bd", "cd", "d"]


def test_dualize_round_trip_keeps_the_leaves(load_family, load_witness):
    f = load_family("shared_point")
    nci_side = load_witness("tree_shared_point.json")
    ncu_side = dualize_witness(f, nci_side, to="ncu")
    assert ncu_side.evaluate() == 0
    assert ncu_side.base.render() == ["abc", "bc", "ac", "ab"]
    back = dualize_witness(f, ncu_side, to="nci")
    assert back.base.entries == nci_side.base.entries
    assert back.evaluate() == 0b1111


@pytest.mark.parametrize("n", [2, 3])
def test_every_nci_witness_dualizes(n):
    for f in _families(n):
        found = check_nci(f)
        assert found.is_witness
        ncu_side = dualize_witness(f, found.witness, to="ncu")
        dual = UnionLattice(dualize_family(f))
        assert ncu_side.evaluate() == dual.bottom_mask
        assert set(ncu_side.base.node_ids) <= set(ncu(dual))
        assert dualize_witness(f, ncu_side, to="nci").evaluate() == f.union_mask


def test_dualize_rejects_an_invalid_input(load_family):
    f = load_family("shared_point")
    u = f.universe
    # valid once complemented, but L0 ∖̇ L1 is undefined on the union lattice side
    tree = parse("(du (sc L1 L0) (sc L2 L0) L3)")
    ncu_side = Witness(tree, BaseCatalog.of_sets(u, [u.mask_of(s) for s in ("abc", "bc", "ac", "ab")]))
    with pytest.raises(MismatchError, match="not a valid NCU witness"):
        dualize_witness(f, ncu_side, to="nci")


def test_dualize_rejects_leaves_from_the_wrong_side(load_witness, load_family):
    f = load_family("shared_point")
    with pytest.raises(MismatchError, match="not a node of the NCU lattice"):
        dualize_witness(f, load_witness("tree_shared_point.json"), to="nci")


def test_dualize_rejects_a_wrong_goal(load_family):
    f = load_family("shared_point")
    u = f.universe
    partial = Witness(Leaf(0), BaseCatalog.of_sets(u, [u.mask_of("ad")]))
    with pytest.raises(MismatchError, match="not the NCI goal"):
        dualize_witness(f, partial, to="ncu")


def test_dualize_unknown_direction(load_family, load_witness):
    with pytest.raises(ValueError):
        dualize_witness(load_family("shared_point"), load_witness("tree_shared_point.json"), to="sideways")
