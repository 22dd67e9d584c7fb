"""
File formats: versioned JSON documents for families, configurations,
lattices, catalogs and witnesses; the s-expression tree text; DOT exports
of Hasse diagrams and witness trees.
"""

from __future__ import annotations

import json
import os
from typing import Dict, Iterable, List, Optional, Sequence, Union

from graphviz import Digraph

from config import OUTPUT_CONFIG
from dot_expr import BaseCatalog, DUnion, Leaf, Witness, node_values, parse, serialize
from errors import FormatError, NciError, ParseError, SchemaVersionError
from intersection_lattice import AbstractLattice, IntersectionLattice, LatticeBase, SetFamily, UnionLattice
from mobius import MobiusVec
from subset_core import Atoms, Config, Universe

Lattice = Union[IntersectionLattice, UnionLattice, AbstractLattice]


# =============================================================================
# DOCUMENTS
# =============================================================================

def versioned(body: Dict) -> Dict:
    return {'version': OUTPUT_CONFIG['schema_version'], **body}


def check_version(doc) -> Dict:
    if not isinstance(doc, dict):
        raise FormatError("document must be a JSON object")
    version = doc.get('version')
    if version != OUTPUT_CONFIG['schema_version']:
        raise SchemaVersionError(f"unsupported schema version {version!r}")
    return doc


def load_json(path: str) -> Dict:
    with open(path, 'r', encoding='utf-8') as f:
        try:
            doc = json.load(f)
        except json.JSONDecodeError as e:
            raise FormatError(f"{os.path.basename(path)}: {e}") from None
    return check_version(doc)


def dumps(doc) -> str:
    return json.dumps(doc, indent=OUTPUT_CONFIG['json_indent'], ensure_ascii=False, sort_keys=True)


def _field(doc: Dict, key: str):
    if key not in doc:
        raise FormatError(f"missing field {key!r}")
    return doc[key]


# =============================================================================
# SUBSETS
# =============================================================================

def universe_from_doc(doc: Dict) -> Universe:
    labels = _field(doc, 'universe')
    if not isinstance(labels, list) or not all(isinstance(x, str) for x in labels):
        raise FormatError("universe must be a list of labels")
    return Universe(tuple(labels))


def subset_from_labels(universe: Universe, labels: Iterable[str]) -> int:
    if isinstance(labels, str):
        raise FormatError(f"subset must be a list of labels, got {labels!r}")
    return universe.mask_of(labels)


def subset_to_labels(universe: Universe, mask: int) -> List[str]:
    return universe.labels_of(mask)


def parse_subset(universe: Universe, text: str) -> int:
    """'a,b', 'ab' (one-character labels) or '∅' / '' for the empty set."""
    text = text.strip().strip('{}')
    if text in ('', '∅'):
        return 0
    if ',' in text or not all(len(label) == 1 for label in universe.labels):
        labels = [part.strip() for part in text.split(',')]
    else:
        labels = list(text)
    return universe.mask_of(labels)


# =============================================================================
# FAMILIES AND CONFIGURATIONS
# =============================================================================

def family_from_doc(doc: Dict) -> SetFamily:
    universe = universe_from_doc(doc)
    return SetFamily(universe, tuple(subset_from_labels(universe, s) for s in _field(doc, 'sets')))


def family_to_doc(f: SetFamily) -> Dict:
    return versioned({
        'universe': list(f.universe.labels),
        'sets': [subset_to_labels(f.universe, s) for s in f.sets],
    })


def config_from_doc(doc: Dict) -> Config:
    universe = universe_from_doc(doc)
    return Config.from_masks(universe, [subset_from_labels(universe, m) for m in _field(doc, 'members')])


def config_to_doc(c: Config) -> Dict:
    return versioned({
        'universe': list(c.universe.labels),
        'members': [subset_to_labels(c.universe, m) for m in c.members()],
    })


# =============================================================================
# LATTICES
# =============================================================================

def lattice_from_doc(doc: Dict) -> Lattice:
    """A family document gives its intersection lattice ('kind': 'union' for the union lattice);
    a {'nodes', 'covers'} document gives an abstract lattice."""
    if 'sets' not in doc:
        covers = _field(doc, 'covers')
        if not all(isinstance(c, list) and len(c) == 2 for c in covers):
            raise FormatError("covers must be [child, parent] pairs")
        return AbstractLattice(int(_field(doc, 'nodes')), [tuple(c) for c in covers],
                               top=doc.get('top'), bottom=doc.get('bottom'), labels=doc.get('labels'))
    family = family_from_doc(doc)
    kind = doc.get('kind', 'intersection')
    if kind == 'union':
        return UnionLattice(family)
    if kind != 'intersection':
        raise FormatError(f"unknown lattice kind {kind!r}")
    return IntersectionLattice(family)


def lattice_to_doc(l: LatticeBase) -> Dict:
    body = {
        'nodes': l.size,
        'covers': [[lo, hi] for lo, hi in l.covers],
        'top': l.top,
        'bottom': l.bottom,
        'labels': [l.node_label(i) for i in range(l.size)],
    }
    if isinstance(l, (IntersectionLattice, UnionLattice)):
        body['universe'] = list(l.universe.labels)
        body['sets'] = [subset_to_labels(l.universe, s) for s in l.family.sets]
        body['kind'] = 'union' if isinstance(l, UnionLattice) else 'intersection'
    return versioned(body)


def mobius_to_doc(mu: MobiusVec, skip_zero: bool = False) -> Dict:
    """Möbius values keyed by label; the empty set is written '∅'."""
    return versioned({'mobius': {label or '∅': value for label, value in mu.as_dict(skip_zero=skip_zero).items()}})


# =============================================================================
# CATALOGS AND WITNESSES
# =============================================================================

def catalog_from_doc(doc: Dict, universe: Optional[Universe] = None) -> BaseCatalog:
    """{'universe', 'kind': 'sets' | 'downsets', 'entries': [[labels], ...]}."""
    universe = universe or universe_from_doc(doc)
    masks = [subset_from_labels(universe, e) for e in _field(doc, 'entries')]
    kind = doc.get('kind', 'sets')
    if kind == 'downsets':
        return BaseCatalog.of_downsets(universe, masks)
    if kind != 'sets':
        raise FormatError(f"unknown catalog kind {kind!r}")
    return BaseCatalog.of_sets(universe, masks, names=doc.get('names'))


def catalog_to_doc(base: BaseCatalog) -> Dict:
    if base.is_config:
        if base.generators is None:
            raise FormatError("only catalogs of principal downsets can be written")
        entries, kind = base.generators, 'downsets'
    else:
        entries, kind = base.entries, 'sets'
    body = {
        'universe': list(base.universe.labels),
        'kind': kind,
        'entries': [subset_to_labels(base.universe, e) for e in entries],
    }
    if kind == 'sets' and base.names is not None:
        body['names'] = list(base.names)
    return versioned(body)


def witness_from_doc(doc: Dict) -> Witness:
    try:
        tree = parse(_field(doc, 'tree'))
    except ParseError as e:
        raise FormatError(f"bad tree: {e}") from e
    return Witness(tree, catalog_from_doc(_field(doc, 'base')))


def witness_to_doc(witness: Witness) -> Dict:
    base_doc = catalog_to_doc(witness.base)
    base_doc.pop('version')
    return versioned({'tree': serialize(witness.tree), 'base': base_doc})


def load_tree(path: str) -> str:
    """Tree text from a .sexp file or the 'tree' field of a JSON witness."""
    with open(path, 'r', encoding='utf-8') as f:
        text = f.read()
    if path.endswith('.json'):
        try:
            return _field(check_version(json.loads(text)), 'tree')
        except json.JSONDecodeError as e:
            raise FormatError(f"{os.path.basename(path)}: {e}") from None
    return text


def load_any_witness(tree_path: str, base_path: Optional[str] = None) -> Witness:
    """A witness document, or a tree file plus a catalog document."""
    if base_path is None:
        return witness_from_doc(load_json(tree_path))
    return Witness(parse(load_tree(tree_path)), catalog_from_doc(load_json(base_path)))


# =============================================================================
# DOT
# =============================================================================

def hasse_dot(l: LatticeBase, mu: Optional[MobiusVec] = None, highlight: Sequence[int] = ()) -> str:
    """Hasse diagram bottom-up; highlighted nodes are filled, Möbius values sit beside the nodes."""
    marked = set(highlight)
    dot = Digraph('hasse', graph_attr={'rankdir': 'BT'}, node_attr={'shape': 'box', 'fontsize': '14'})
    for i in range(l.size):
        attrs = {}
        if mu is not None:
            attrs['xlabel'] = str(mu[i])
        if i in marked:
            attrs['style'] = 'filled'
            attrs['fillcolor'] = OUTPUT_CONFIG['nci_fill']
        dot.node(f"n{i}", l.node_label(i) or '∅', **attrs)
    for lo, hi in l.covers:
        dot.edge(f"n{lo}", f"n{hi}", arrowhead='none')
    return dot.source


def tree_dot(witness: Witness) -> str:
    """Operators on internal nodes, leaf names at the leaves, evaluated sets beside internal nodes."""
    try:
        values = node_values(witness.tree, witness.base)
    except NciError:
        values = {}
    dot = Digraph('witness', node_attr={'shape': 'plaintext', 'fontsize': '14'})
    ids: Dict[int, str] = {}
    stack = [witness.tree]
    while stack:
        node = stack.pop()
        if id(node) in ids:
            continue
        name = f"t{len(ids)}"
        ids[id(node)] = name
        if isinstance(node, Leaf):
            dot.node(name, witness.base.name(node.index))
            continue
        attrs = {}
        if id(node) in values:
            attrs['xlabel'] = witness.base.render_value(values[id(node)])
            attrs['fontcolor'] = OUTPUT_CONFIG['set_annotation']
        dot.node(name, "⊔" if isinstance(node, DUnion) else "∖̇", **attrs)
        stack.extend(reversed(node.children))

    seen = set()
    stack = [witness.tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Leaf) or id(node) in seen:
            continue
        seen.add(id(node))
        for kid in node.children:
            dot.edge(ids[id(node)], ids[id(kid)])
        stack.extend(reversed(node.children))
    return dot.source


def render_value(universe: Universe, value: Atoms) -> Union[List[str], List[List[str]]]:
    """JSON form of an evaluated set or configuration."""
    if isinstance(value, Config):
        return [subset_to_labels(universe, m) for m in value.members()]
    return subset_to_labels(universe, value)

