import json
import os

import pytest

from dot_expr import BaseCatalog, Witness, parse
from errors import FormatError, SchemaVersionError, UniverseError
from formats import (
    catalog_from_doc,
    catalog_to_doc,
    check_version,
    config_from_doc,
    config_to_doc,
    family_from_doc,
    family_to_doc,
    hasse_dot,
    lattice_from_doc,
    lattice_to_doc,
    load_json,
    load_tree,
    parse_subset,
    render_value,
    tree_dot,
    witness_from_doc,
    witness_to_doc,
)
from intersection_lattice import AbstractLattice, IntersectionLattice, UnionLattice
from mobius import mobius_to_top, nci
from subset_core import Config, Universe

U3 = Universe.letters(3)


def write(tmp_path, name, text):
    path = os.path.join(str(tmp_path), name)
    with open(path, "w") as fp:
        fp.write(text)
    return path


# =============================================================================
# DOCUMENTS
# =============================================================================

def test_version_checks(tmp_path):
    with pytest.raises(SchemaVersionError):
        load_json(write(tmp_path, "v2.json", json.dumps({"version": 2, "universe": []})))
    with pytest.raises(SchemaVersionError):
        check_version({"universe": []})
    with pytest.raises(FormatError):
        check_version([1, 2])
    with pytest.raises(FormatError):
        load_json(write(tmp_path, "broken.json", "{not json"))


def test_missing_and_malformed_fields():
    with pytest.raises(FormatError):
        family_from_doc({"version": 1, "universe": ["a"]})
    with pytest.raises(FormatError):
        family_from_doc({"version": 1, "universe": "ab", "sets": []})
    with pytest.raises(FormatError):
        family_from_doc({"version": 1, "universe": ["a", "b"], "sets": ["ab"]})
    with pytest.raises(UniverseError):
        family_from_doc({"version": 1, "universe": ["a", "b"], "sets": [["z"]]})


def test_family_document(load_family):
    f = load_family("shared_point")
    doc = family_to_doc(f)
    assert doc == {"version": 1, "universe": ["a", "b", "c", "d"], "sets": [["a", "d"], ["b", "d"], ["c", "d"]]}


def test_config_document(load_config):
    c = load_config("sample_configuration")
    doc = config_to_doc(c)
    assert doc["members"][:3] == [["0"], ["1"], ["0", "1"]]
    assert config_from_doc(doc) == c


@pytest.mark.parametrize("text,mask", [("a,b", 0b011), ("ab", 0b011), ("{ac}", 0b101), ("∅", 0), ("", 0), (" c ", 0b100)])
def test_parse_subset(text, mask):
    assert parse_subset(U3, text) == mask


def test_parse_subset_multi_character_labels():
    u = Universe(("x1", "x2", "y"))
    assert parse_subset(u, "x1,y") == 0b101
    with pytest.raises(UniverseError):
        parse_subset(u, "x3")


# =============================================================================
# LATTICES
# =============================================================================

def test_lattice_documents(load_lattice):
    assert isinstance(load_lattice("divisibility"), AbstractLattice)
    assert isinstance(load_lattice("shared_point"), IntersectionLattice)
    union = lattice_from_doc({"version": 1, "universe": ["a", "b"], "sets": [["a"], ["b"]], "kind": "union"})
    assert isinstance(union, UnionLattice)
    with pytest.raises(FormatError):
        lattice_from_doc({"version": 1, "universe": ["a"], "sets": [["a"]], "kind": "sideways"})
    with pytest.raises(FormatError):
        lattice_from_doc({"version": 1, "nodes": 2, "covers": [[0, 1, 2]]})


def test_lattice_to_doc(load_family):
    l = IntersectionLattice(load_family("shared_point"))
    doc = lattice_to_doc(l)
    assert doc["labels"] == ["d", "ad", "bd", "cd", "abcd"]
    assert doc["kind"] == "intersection"
    again = lattice_from_doc(doc)
    assert isinstance(again, IntersectionLattice)
    assert again.size == l.size

    abstract = lattice_from_doc({k: v for k, v in doc.items() if k not in ("sets", "universe", "kind")})
    assert isinstance(abstract, AbstractLattice)
    assert sorted(abstract.covers) == sorted(l.covers)


# =============================================================================
# CATALOGS AND WITNESSES
# =============================================================================

def test_catalog_documents():
    base = BaseCatalog.of_downsets(U3, [0b011, 0b100])
    doc = catalog_to_doc(base)
    assert doc["kind"] == "downsets"
    assert doc["entries"] == [["a", "b"], ["c"]]
    assert catalog_from_doc(doc).generators == [0b011, 0b100]
    with pytest.raises(FormatError):
        catalog_from_doc({"universe": ["a"], "kind": "multisets", "entries": []})


def test_witness_documents(load_witness):
    w = load_witness("tree_shared_point.json")
    doc = witness_to_doc(w)
    assert doc["tree"] == "(du (sc L1 L0) (sc L2 L0) L3)"
    assert "version" not in doc["base"]
    assert witness_from_doc(doc).evaluate() == 0b1111
    with pytest.raises(FormatError):
        witness_from_doc({"tree": "(du L0", "base": doc["base"]})


def test_load_tree(tmp_path):
    from config import DATA_DIR

    assert load_tree(os.path.join(DATA_DIR, "tree_t0.sexp")).strip() == "(du (sc L0 L2) L1)"
    assert load_tree(os.path.join(DATA_DIR, "tree_t1_chain.json")).startswith("(")
    with pytest.raises(FormatError):
        load_tree(write(tmp_path, "bad.json", "[["))


def test_render_value():
    assert render_value(U3, 0b101) == ["a", "c"]
    assert render_value(U3, Config.from_masks(U3, [0, 0b010])) == [[], ["b"]]


# =============================================================================
# DOT
# =============================================================================

def test_hasse_dot(load_family):
    l = IntersectionLattice(load_family("shared_point"))
    mu = mobius_to_top(l)
    text = hasse_dot(l, mu, highlight=nci(l, mu))
    assert text.startswith("digraph hasse {")
    assert "rankdir=BT" in text
    assert text.count("->") == len(l.covers)
    assert text.count("fillcolor=orange") == 4
    assert "n0 [label=d " in text
    assert "xlabel=2" in text
    assert text.rstrip().endswith("}")


def test_hasse_dot_without_values(load_lattice):
    text = hasse_dot(load_lattice("divisibility"))
    assert "xlabel" not in text
    assert "fillcolor" not in text


def test_tree_dot(load_witness):
    text = tree_dot(load_witness("tree_t0.sexp", "base_t0.json"))
    assert text.startswith("digraph witness {")
    assert text.count("->") == 4
    assert text.count("⊔") == 1
    assert "fontcolor=darkorange" in text


def test_tree_dot_of_invalid_tree():
    base = BaseCatalog.of_sets(U3, [0b011, 0b110])
    text = tree_dot(Witness(parse("(du L0 L1)"), base))
    assert "xlabel" not in text
    assert text.count("->") == 2
