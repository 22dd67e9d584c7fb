import os

import pytest

from dot_expr import BaseCatalog, check_multiplicity_laws, is_left_linear, multiplicities
from errors import NotADownsetError, SolverUnavailableError, TrivialFamilyError
from intersection_lattice import IntersectionLattice, SetFamily, UnionLattice, is_trivial
from search import (
    SearchOptions,
    antichains,
    canonical_form,
    check_nci,
    check_ncpd,
    check_ncu,
    enumerate_downsets,
    exhaustive_witness,
    find_witness,
    nci_instance,
    ncpd_instance,
    ncu_instance,
    random_family,
    sperner_families,
    union_instance,
)
from subset_core import Config, Universe, downset_closure, is_downset, principal_downset

U3 = Universe.letters(3)


def sets(universe, *labels):
    return BaseCatalog.of_sets(universe, [universe.mask_of(s) for s in labels])


# =============================================================================
# OPTIONS
# =============================================================================

def test_options_validation():
    with pytest.raises(ValueError):
        SearchOptions(engine="magic")
    with pytest.raises(ValueError):
        SearchOptions(max_steps=-1)
    with pytest.raises(ValueError):
        SearchOptions(max_steps=2).bound_for(1, 3)


def test_step_bound():
    assert SearchOptions(max_steps=3).bound_for(10, 3) == 3
    assert SearchOptions().bound_for(4, 3) == 8
    assert SearchOptions().bound_for(1, 6) == 6
    assert SearchOptions().bound_for(0, 0) == 4


# =============================================================================
# EXHAUSTIVE ENGINE
# =============================================================================

def test_finds_shortest_witness():
    base = sets(U3, "ac", "bc", "c")
    verdict = exhaustive_witness(base, 0b111)
    assert verdict.is_witness
    assert verdict.steps == 3
    assert verdict.witness.evaluate() == 0b111
    assert is_left_linear(verdict.witness.tree)


def test_single_entry_target():
    verdict = exhaustive_witness(sets(U3, "ab"), 0b011)
    assert verdict.steps == 1


def test_empty_target():
    verdict = exhaustive_witness(sets(U3, "a"), 0)
    assert verdict.is_witness and verdict.steps == 0


def test_unreachable_target_is_exhausted():
    verdict = exhaustive_witness(sets(U3, "ab"), 0b001)
    assert verdict.is_refuted
    assert verdict.exhausted


def test_step_bound_cuts_the_search():
    # ac = ab + bc - b - b, so four steps over a basis of three
    base = sets(U3, "ab", "bc", "b")
    verdict = exhaustive_witness(base, 0b101, SearchOptions(max_steps=3))
    assert verdict.is_refuted
    assert verdict.bound == 3
    assert not verdict.exhausted
    assert exhaustive_witness(base, 0b101, SearchOptions(max_steps=4)).steps == 4


def test_polarity_constraint(load_family):
    f = load_family("shared_point")
    base, target, required = nci_instance(f)
    strong = exhaustive_witness(base, target, SearchOptions(polarity_constrained=True), required)
    assert strong.is_witness
    assert multiplicities(strong.witness.tree, base) == required
    assert check_multiplicity_laws(strong.witness.tree, base, IntersectionLattice(f)).ok


def test_configuration_targets():
    i = principal_downset(U3, 0b011).union(principal_downset(U3, 0b100))
    verdict = check_ncpd(i)
    assert verdict.is_witness
    assert verdict.witness.evaluate() == i


def test_principal_downset_needs_one_step():
    verdict = check_ncpd(principal_downset(U3, 0b101))
    assert verdict.steps == 1


def test_ncpd_needs_a_downset():
    c = Config.from_masks(U3, [0b011])
    with pytest.raises(NotADownsetError):
        check_ncpd(c)
    assert check_ncpd(c, require_downset=False).is_witness


def test_time_budget_zero_times_out():
    f = random_family(4, (5, 6), 1)
    verdict = check_nci(f, SearchOptions(time_budget=0.0, check_interval=1))
    assert verdict.kind in ("timeout", "witness")


# =============================================================================
# SAT ENGINE
# =============================================================================

def test_cnf_emission(tmp_path):
    path = os.path.join(str(tmp_path), "step{k}.cnf")
    opts = SearchOptions(engine="sat", emit_cnf=path)
    try:
        find_witness(sets(U3, "ab"), 0b011, opts)
    except SolverUnavailableError:
        pass
    with open(path.format(k=1)) as fp:
        text = fp.read()
    assert text.startswith("p cnf ")
    assert all(line.endswith(" 0") for line in text.splitlines()[1:])


def test_sat_agrees_with_exhaustive():
    pytest.importorskip("z3")
    base = sets(U3, "ac", "bc", "c")
    sat = find_witness(base, 0b111, SearchOptions(engine="sat"))
    assert sat.is_witness and sat.steps == 3
    assert sat.witness.evaluate() == 0b111
    assert find_witness(sets(U3, "ab"), 0b001, SearchOptions(engine="sat")).is_refuted


def _assert_engines_agree(n, polarity):
    universe = Universe.letters(n)
    exhaustive = SearchOptions(polarity_constrained=polarity)
    sat = SearchOptions(polarity_constrained=polarity, engine="sat")
    for masks in sperner_families(n):
        downset = downset_closure(Config.from_masks(universe, masks))
        a, b = check_ncpd(downset, exhaustive), check_ncpd(downset, sat)
        assert (a.kind, a.steps) == (b.kind, b.steps), masks
    for f in _non_trivial(n):
        a, b = check_nci(f, exhaustive), check_nci(f, sat)
        assert (a.kind, a.steps) == (b.kind, b.steps), f
        if b.is_witness:
            assert b.witness.evaluate() == f.union_mask


@pytest.mark.parametrize("polarity", [False, True])
@pytest.mark.parametrize("n", [2, 3])
def test_engines_agree_on_sperner_families(n, polarity):
    pytest.importorskip("z3")
    _assert_engines_agree(n, polarity)


@pytest.mark.slow
@pytest.mark.parametrize("polarity", [False, True])
def test_engines_agree_on_sperner_families_n4(polarity):
    pytest.importorskip("z3")
    _assert_engines_agree(4, polarity)


# =============================================================================
# FORMULATIONS
# =============================================================================

def _non_trivial(n):
    universe = Universe.letters(n)
    for masks in sperner_families(n):
        f = SetFamily(universe, masks)
        if len(masks) >= 2 and not is_trivial(f):
            yield f


@pytest.mark.parametrize("n", [2, 3])
def test_three_formulations_agree(n):
    for f in _non_trivial(n):
        downset = downset_closure(Config.from_masks(f.universe, f.sets))
        assert check_nci(f).kind == check_ncpd(downset).kind == check_ncu(f).kind == "witness"


@pytest.mark.slow
def test_three_formulations_agree_n4():
    for f in _non_trivial(4):
        downset = downset_closure(Config.from_masks(f.universe, f.sets))
        assert check_nci(f).kind == check_ncpd(downset).kind == check_ncu(f).kind


def test_ncu_instance_is_the_dual_union_lattice(load_family):
    f = load_family("shared_point")
    base, target, required = ncu_instance(f)
    assert target == 0
    assert sorted(base.render()) == ["ab", "abc", "ac", "bc"]
    assert sorted(required.values()) == [-2, 1, 1, 1]
    verdict = check_ncu(f)
    assert verdict.is_witness and verdict.steps == 0


def test_ncu_polarity_on_the_dual_lattice_is_out_of_left_linear_reach(load_family):
    # every state graph edge is a bridge, so no closed walk has non-zero net counts
    f = load_family("shared_point")
    assert check_nci(f, SearchOptions(polarity_constrained=True)).is_witness
    assert check_ncu(f, SearchOptions(polarity_constrained=True)).is_refuted


def test_union_bottom_inside_every_set_is_out_of_left_linear_reach():
    g = SetFamily.from_labels(Universe.letters(4), ["abc", "abd", "acd"])
    base, target, _ = union_instance(UnionLattice(g))
    assert target == 0b0001
    verdict = find_witness(base, target)
    assert verdict.is_refuted
    assert verdict.exhausted


def test_ncpd_instance_multiplicities(load_config):
    base, target, required = ncpd_instance(load_config("sample_configuration"))
    assert base.generators == [0b1010, 0b1011, 0b1100, 0b1110]
    assert required == {0: -1, 1: 1, 2: -1, 3: 1}
    assert target == load_config("sample_configuration")


# =============================================================================
# ENUMERATION
# =============================================================================

@pytest.mark.parametrize("n,count", [(0, 2), (1, 3), (2, 5), (3, 10), (4, 30)])
def test_sperner_family_counts(n, count):
    assert len(list(sperner_families(n))) == count


@pytest.mark.slow
def test_sperner_family_count_n5():
    assert len(list(sperner_families(5))) == 210


def test_sperner_families_are_canonical_antichains():
    for masks in sperner_families(3):
        assert canonical_form(masks, 3) == masks
        assert all(a & ~b and b & ~a for a in masks for b in masks if a != b)


def test_canonical_form_is_relabelling_invariant():
    assert canonical_form((0b011, 0b100), 3) == canonical_form((0b110, 0b001), 3)
    assert canonical_form((), 3) == ()


def test_antichains_and_downsets():
    assert len(list(antichains(2))) == 6
    downsets = list(enumerate_downsets(2))
    assert len(downsets) == 6
    assert all(is_downset(d) for d in downsets)
    assert len({d.to_bits() for d in downsets}) == 6


def test_random_family_is_seeded_and_non_trivial():
    a = random_family(4, (2, 5), 42)
    b = random_family(4, (2, 5), 42)
    assert a == b
    assert not is_trivial(a)
    assert 2 <= len(a) <= 5


def test_random_family_impossible():
    with pytest.raises(TrivialFamilyError):
        random_family(0)
