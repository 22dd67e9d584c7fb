import pytest
from hypothesis import given
from hypothesis import strategies as st

from constructive import nti_express
from dot_expr import (
    EMPTY,
    BaseCatalog,
    DUnion,
    Leaf,
    SComp,
    binarize,
    check_multiplicity_laws,
    dot_closure,
    evaluate,
    fold_sequence,
    is_left_linear,
    is_valid,
    leaf_indices,
    multiplicities,
    node_count,
    node_values,
    parse,
    relabel,
    serialize,
    splice,
    uses_empty_leaf,
)
from errors import CatalogError, ContextMismatchError, InvalidNodeError, NotSubsetError, OverlapError, ParseError
from intersection_lattice import IntersectionLattice, SetFamily, is_full, is_tight, is_trivial
from search import SearchOptions, check_nci, sperner_families
from subset_core import Config, Universe, principal_downset

U3 = Universe.letters(3)


def sets(universe, *labels):
    return BaseCatalog.of_sets(universe, [universe.mask_of(s) for s in labels])


# =============================================================================
# EVALUATION
# =============================================================================

def test_t0_and_its_non_left_linear_variant(load_witness):
    w = load_witness("tree_t0.sexp", "base_t0.json")
    assert w.evaluate() == 0b111
    assert is_left_linear(w.tree)

    spread = parse("(du (sc L0 L2) (sc L1 L2) L2)")
    assert evaluate(spread, w.base) == 0b111
    assert not is_left_linear(spread)


def test_overlap_at_root():
    with pytest.raises(InvalidNodeError) as info:
        evaluate(parse("(du L0 L1)"), sets(U3, "ab", "bc"))
    assert info.value.path == ()
    assert isinstance(info.value.cause, OverlapError)


def test_invalid_node_path():
    base = sets(U3, "a", "b", "c")
    t = parse("(du L0 (sc L1 L2))")
    with pytest.raises(InvalidNodeError) as info:
        evaluate(t, base)
    assert info.value.path == (1,)
    assert isinstance(info.value.cause, NotSubsetError)
    assert not is_valid(t, base)


def test_leaf_outside_catalog():
    with pytest.raises(InvalidNodeError) as info:
        evaluate(Leaf(5), sets(U3, "a"))
    assert isinstance(info.value.cause, CatalogError)


def test_empty_leaf():
    base = sets(U3, "a")
    assert evaluate(EMPTY, base) == 0
    assert evaluate(SComp(EMPTY, EMPTY), base) == 0
    downsets = BaseCatalog.of_downsets(U3, [0b001])
    assert evaluate(EMPTY, downsets) == Config.empty(U3)


def test_configuration_catalog():
    base = BaseCatalog.of_downsets(U3, [0b011, 0b001])
    value = evaluate(parse("(sc L0 L1)"), base)
    assert value.members() == [0b010, 0b011]
    assert base.name(0) == "I(ab)"


def test_node_values():
    base = sets(U3, "ac", "bc", "c")
    t = parse("(du (sc L0 L2) L1)")
    values = node_values(t, base)
    assert values[id(t)] == 0b111
    assert values[id(t.children[0])] == 0b001


def test_node_count():
    base = sets(U3, "ab", "b")
    shared = SComp(Leaf(0), Leaf(1))
    t = DUnion((shared, Leaf(1)))
    assert evaluate(t, base) == 0b011
    assert node_count(t) == 5


# =============================================================================
# CATALOGS
# =============================================================================

def test_catalog_rejects_duplicates_and_mixtures():
    with pytest.raises(CatalogError):
        BaseCatalog.of_sets(U3, [1, 1])
    with pytest.raises(CatalogError):
        BaseCatalog(U3, [1, principal_downset(U3, 1)])


# =============================================================================
# MULTIPLICITIES
# =============================================================================

def test_multiplicities_of_t1(load_family, load_witness):
    w = load_witness("tree_t1.json")
    assert w.evaluate() == 0xFF
    assert multiplicities(w.tree, w.base) == {0: 1, 1: -1, 2: 1, 3: -1, 4: 1, 5: -1, 6: 1}
    report = check_multiplicity_laws(w.tree, w.base, IntersectionLattice(load_family("tight_triangle")))
    assert report.ok
    assert report.checked == 8


def test_multiplicities_of_chain(load_family, load_witness):
    w = load_witness("tree_t1_chain.json")
    assert w.evaluate() == 0xFF
    assert is_left_linear(w.tree)
    names = w.base.render()
    signed = {names[i]: m for i, m in multiplicities(w.tree, w.base).items()}
    assert signed == {"acdg": 1, "ac": -1, "abce": 1, "ab": -1, "ah": 1, "ad": -1, "abdf": 1}
    assert check_multiplicity_laws(w.tree, w.base, IntersectionLattice(load_family("tight_triangle"))).ok


def test_seven_set_tree(load_family, load_witness):
    w = load_witness("tree_seven_sets.json")
    assert w.evaluate() == 4095
    assert is_left_linear(w.tree)
    assert check_multiplicity_laws(w.tree, w.base, IntersectionLattice(load_family("seven_sets"))).ok


def test_shared_point_tree(load_family, load_witness):
    w = load_witness("tree_shared_point.json")
    assert w.evaluate() == 0b1111
    assert multiplicities(w.tree, w.base)[0] == -2
    assert check_multiplicity_laws(w.tree, w.base, IntersectionLattice(load_family("shared_point"))).ok


def test_laws_need_the_top(load_family):
    l = IntersectionLattice(load_family("shared_point"))
    base = sets(l.universe, "ad", "bd", "cd", "d")
    with pytest.raises(ContextMismatchError):
        check_multiplicity_laws(parse("(du (sc L0 L3) L1)"), base, l)


def test_laws_need_a_full_lattice(load_family):
    l = IntersectionLattice(load_family("triangle_plus_point"))
    base = sets(l.universe, "a", "b", "c", "d")
    with pytest.raises(ContextMismatchError):
        check_multiplicity_laws(parse("(du L0 L1 L2 L3)"), base, l)


def test_downset_laws():
    i = principal_downset(U3, 0b011).union(principal_downset(U3, 0b100))
    base = BaseCatalog.of_downsets(U3, [0b011, 0b100, 0b000])
    t = parse("(du L0 (sc L1 L2))")
    assert evaluate(t, base) == i
    assert check_multiplicity_laws(t, base, i).ok


def test_downset_laws_flag_leaves_outside_the_context():
    i = principal_downset(U3, 0b001)
    base = BaseCatalog.of_downsets(U3, [0b001, 0b011])
    t = parse("(du (sc L1 L1) L0)")
    assert evaluate(t, base) == i
    report = check_multiplicity_laws(t, base, i)
    assert not report.ok
    assert report.violation == ("ab", 0, 0)


def _full_lattices(n):
    universe = Universe.letters(n)
    for masks in sperner_families(n):
        f = SetFamily(universe, masks)
        if len(masks) >= 2 and not is_trivial(f):
            l = IntersectionLattice(f)
            if is_full(l):
                yield f, l


def _assert_lattice_laws(n):
    checked = 0
    for f, l in _full_lattices(n):
        for polarity in (False, True):
            verdict = check_nci(f, SearchOptions(polarity_constrained=polarity))
            if verdict.is_witness:
                report = check_multiplicity_laws(verdict.witness.tree, verdict.witness.base, l)
                assert report.ok, (f, polarity, report.violation)
                checked += 1
        if is_tight(l):
            for left_linear in (False, True):
                w = nti_express(l, left_linear=left_linear)
                assert check_multiplicity_laws(w.tree, w.base, l).ok, (f, left_linear)
                checked += 1
    assert checked


def test_lattice_laws_on_every_full_family():
    _assert_lattice_laws(3)


@pytest.mark.slow
def test_lattice_laws_on_every_full_family_n4():
    _assert_lattice_laws(4)

# =============================================================================
# TREE HELPERS
# =============================================================================

def test_fold_sequence():
    t = fold_sequence([(1, Leaf(0)), (-1, Leaf(1)), (1, Leaf(2))])
    assert serialize(t) == "(du (sc L0 L1) L2)"
    assert serialize(fold_sequence([(-1, Leaf(0))])) == "(sc E L0)"
    assert fold_sequence([]) is EMPTY


def test_binarize_and_relabel():
    t = parse("(du L0 L1 L2)")
    assert serialize(binarize(t)) == "(du (du L0 L1) L2)"
    assert serialize(relabel(t, {0: 2, 1: None, 2: 0})) == "(du L2 E L0)"
    assert serialize(splice(t, {1: parse("(sc L3 L4)")})) == "(du L0 (sc L3 L4) L2)"


def test_leaf_audit():
    t = parse("(du (sc L3 L1) E L3)")
    assert leaf_indices(t) == [1, 3]
    assert uses_empty_leaf(t)
    assert not uses_empty_leaf(parse("(du L0 L1)"))


@pytest.mark.parametrize("text", ["", "(du L0)", "(xx L0 L1)", "(du L0 L1", "L0 L1", "Q", "(sc L0 L1 L2)", ")"])
def test_parse_errors(text):
    with pytest.raises(ParseError):
        parse(text)


def test_parse_ignores_whitespace():
    assert serialize(parse("  (du\n (sc L0   L12) E )")) == "(du (sc L0 L12) E)"


trees = st.recursive(
    st.one_of(st.just(EMPTY), st.integers(0, 9).map(Leaf)),
    lambda kids: st.one_of(
        st.lists(kids, min_size=2, max_size=3).map(lambda ks: DUnion(tuple(ks))),
        st.tuples(kids, kids).map(lambda lr: SComp(*lr)),
    ),
    max_leaves=12,
)


@given(trees)
def test_serialize_parse(t):
    assert serialize(parse(serialize(t))) == serialize(t)


# =============================================================================
# CLOSURE
# =============================================================================

def test_dot_closure():
    u5 = Universe.letters(5)
    assert dot_closure(sets(u5, "ad", "be", "abc")) == [0, 9, 18, 7, 27]
    assert sorted(dot_closure(sets(U3, "ac", "bc", "c"))) == list(range(8))


def test_dot_closure_of_configurations():
    base = BaseCatalog.of_downsets(U3, [0b001, 0b000])
    closure = dot_closure(base)
    assert Config.empty(U3) in closure
    assert Config.from_masks(U3, [1]) in closure
    assert all(isinstance(c, Config) for c in closure)
