"""
Command line entry point.

    python cli.py lattice build -i data/shared_point.json --mobius
    python cli.py witness verify -i data/tree_t0.sexp -b data/base_t0.json
    python cli.py construct avoid-zero -i data/overlap_downset.json --zero a
    python cli.py scan -n 3

Every subcommand accepts --json. Exit codes: 0 ok, 2 counterexample
candidate, 64 usage or unreadable input, 65 domain error, 70 a scanned
instance crashed.
"""

from __future__ import annotations

import argparse
import sys
from typing import Dict, List, Optional

from bridge import dualize_witness, family_to_downset, ncpd_witness_to_nci
from config import EXIT_CODES, SCAN_CONFIG, SEARCH_CONFIG
from conjecture_scanner import ConjectureScanner, exit_code, export_csv, report_json, summary_line
from constructive import allreach, avoid_zero, nti_express
from dot_expr import (
    Witness,
    check_multiplicity_laws,
    evaluate,
    is_left_linear,
    leaf_indices,
    multiplicities,
    serialize,
)
from errors import NciError, NotADownsetError
from formats import (
    config_from_doc,
    config_to_doc,
    dumps,
    family_from_doc,
    hasse_dot,
    lattice_from_doc,
    lattice_to_doc,
    load_any_witness,
    load_json,
    mobius_to_doc,
    parse_subset,
    render_value,
    tree_dot,
    witness_to_doc,
)
from intersection_lattice import (
    IntersectionLattice,
    UnionLattice,
    dualize_family,
    is_full,
    is_tight,
    private_elements,
)
from mobius import generalized_mobius, mobius_to_top, nci, ncpd, ncu
from search import SearchOptions, find_witness, nci_instance, ncpd_instance, ncu_instance, union_instance
from subset_core import is_downset


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


# =============================================================================
# OUTPUT HELPERS
# =============================================================================

def _emit(args, doc: Dict, lines: List[str]):
    if args.json:
        print(dumps(doc))
    else:
        for line in lines:
            print(line)


def _write(path: str, text: str):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(text)


def _load_lattice(path: str):
    return lattice_from_doc(load_json(path))


def _search_options(args) -> SearchOptions:
    return SearchOptions(
        engine=args.engine,
        max_steps=args.max_steps,
        time_budget=args.time_budget,
        polarity_constrained=args.polarity,
        emit_cnf=getattr(args, 'emit_cnf', None),
    )


def _witness_audit(witness: Witness) -> Dict:
    value = evaluate(witness.tree, witness.base)
    used = leaf_indices(witness.tree)
    return {
        'tree': serialize(witness.tree),
        'leaves': [witness.base.name(i) for i in used],
        'value': render_value(witness.base.universe, value),
        'left_linear': is_left_linear(witness.tree),
        'base': witness.base.render(),
    }


def _print_witness(args, witness: Witness, title: str):
    audit = _witness_audit(witness)
    if getattr(args, 'output', None):
        _write(args.output, dumps(witness_to_doc(witness)) + "\n")
    if getattr(args, 'dot', None):
        _write(args.dot, tree_dot(witness))
    _emit(args, audit, [
        f"✓ {title}",
        f"   Tree: {audit['tree']}",
        f"   Leaves: {', '.join(audit['leaves']) or '(none)'}",
        f"   Value: {witness.base.render_value(evaluate(witness.tree, witness.base))}",
        f"   Left-linear: {audit['left_linear']}",
    ])


# =============================================================================
# LATTICE COMMANDS
# =============================================================================

def cmd_lattice_build(args) -> int:
    l = _load_lattice(args.input)
    mu = mobius_to_top(l) if args.mobius else None
    doc = lattice_to_doc(l)
    if mu is not None:
        doc['mobius'] = mu.as_dict()
    lines = [f"✓ Lattice with {l.size} nodes (top {l.node_label(l.top) or '∅'})"]
    for i in l.linear_extension:
        label = l.node_label(i) or '∅'
        lines.append(f"   {label:<12} rank {l.ranks[i]}" + (f"   μ = {mu[i]}" if mu is not None else ""))
    _emit(args, doc, lines)
    return EXIT_CODES['ok']


def cmd_lattice_info(args) -> int:
    l = _load_lattice(args.input)
    mu = mobius_to_top(l)
    labels = [l.node_label(i) or '∅' for i in range(l.size)]
    doc = {
        'nodes': l.size,
        'top': labels[l.top],
        'bottom': labels[l.bottom],
        'coatoms': [labels[i] for i in l.coatoms()],
    }
    if isinstance(l, UnionLattice):
        doc['ncu'] = [labels[i] for i in ncu(l, mu)]
    else:
        doc['nci'] = [labels[i] for i in nci(l, mu)]
    if isinstance(l, IntersectionLattice):
        private = private_elements(l)
        doc['full'] = is_full(l)
        doc['tight'] = is_tight(l)
        doc['private'] = {labels[i]: [l.universe.labels[x] for x in private[i]] for i in l.nti()}
    lines = [f"✓ {doc['nodes']} nodes, top {doc['top']}, bottom {doc['bottom']}",
             f"   Coatoms: {', '.join(doc['coatoms'])}"]
    key = 'ncu' if 'ncu' in doc else 'nci'
    lines.append(f"   {key}: {', '.join(doc[key]) or '(none)'}")
    if 'full' in doc:
        lines.append(f"   Full: {doc['full']}, Tight: {doc['tight']}")
        for label, xs in doc['private'].items():
            lines.append(f"   {label:<12} private: {''.join(xs) if xs else '-'}")
    _emit(args, doc, lines)
    return EXIT_CODES['ok']


def cmd_lattice_dot(args) -> int:
    l = _load_lattice(args.input)
    mu = mobius_to_top(l)
    marked = ncu(l, mu) if isinstance(l, UnionLattice) else nci(l, mu)
    text = hasse_dot(l, mu, highlight=marked)
    if args.output:
        _write(args.output, text)
        _emit(args, {'output': args.output}, [f"✓ Wrote {args.output}"])
    else:
        sys.stdout.write(text)
    return EXIT_CODES['ok']


def cmd_mobius(args) -> int:
    doc = load_json(args.input)
    if 'members' in doc:
        out = mobius_to_doc(generalized_mobius(config_from_doc(doc)), skip_zero=not args.all)
    else:
        out = mobius_to_doc(mobius_to_top(lattice_from_doc(doc)))
    _emit(args, out, [f"   {label:<12} {value:>4}" for label, value in out['mobius'].items()])
    return EXIT_CODES['ok']


def cmd_noncancelling(args) -> int:
    doc = load_json(args.input)
    if args.command == 'ncpd':
        c = config_from_doc(doc)
        names = [c.universe.render(x) for x in ncpd(c)]
    elif args.command == 'ncu':
        l = UnionLattice(family_from_doc(doc))
        names = [l.node_label(i) or '∅' for i in ncu(l)]
    else:
        l = lattice_from_doc(doc)
        names = [l.node_label(i) or '∅' for i in nci(l)]
    _emit(args, {args.command: names}, [f"✓ {args.command}: {', '.join(names) or '(none)'}"])
    return EXIT_CODES['ok']


# =============================================================================
# WITNESS COMMANDS
# =============================================================================

def cmd_witness_verify(args) -> int:
    witness = load_any_witness(args.input, args.base)
    audit = _witness_audit(witness)
    counts = multiplicities(witness.tree, witness.base)
    audit['multiplicities'] = {witness.base.name(i): m for i, m in sorted(counts.items())}
    lines = [
        f"✓ Valid witness for {witness.base.render_value(evaluate(witness.tree, witness.base))}",
        f"   Left-linear: {audit['left_linear']}",
    ]
    lines += [f"   mult {name:<12} {m:>3}" for name, m in audit['multiplicities'].items()]
    if args.context:
        cdoc = load_json(args.context)
        context = config_from_doc(cdoc) if 'members' in cdoc else lattice_from_doc(cdoc)
        report = check_multiplicity_laws(witness.tree, witness.base, context)
        audit['multiplicity_laws'] = {'checked': report.checked, 'violation': report.violation}
        if report.ok:
            lines.append(f"✓ Multiplicity laws hold on {report.checked} entries")
        else:
            entry, got, want = report.violation
            lines.append(f"✗ Multiplicity of {entry} is {got}, expected {want}")
    _emit(args, audit, lines)
    return EXIT_CODES['ok']


def cmd_witness_search(args) -> int:
    doc = load_json(args.input)
    formulation = args.formulation or ('ncpd' if 'members' in doc else 'nci')
    if formulation == 'ncpd':
        i = config_from_doc(doc)
        if not args.non_downset and not is_downset(i):
            raise NotADownsetError(f"{i!r} is not a downset (use --non-downset)")
        base, target, required = ncpd_instance(i)
    elif formulation == 'ncu' and doc.get('kind') == 'union':
        base, target, required = union_instance(UnionLattice(family_from_doc(doc)))
    elif formulation == 'ncu':
        base, target, required = ncu_instance(family_from_doc(doc))
    else:
        base, target, required = nci_instance(family_from_doc(doc))
    verdict = find_witness(base, target, _search_options(args), required)
    out = {
        'formulation': formulation,
        'verdict': verdict.kind,
        'steps': verdict.steps,
        'bound': verdict.bound,
        'millis': verdict.millis,
        'engine': verdict.engine,
        'base': base.render(),
    }
    if verdict.is_witness:
        out['tree'] = serialize(verdict.witness.tree)
        if args.output:
            _write(args.output, dumps(witness_to_doc(verdict.witness)) + "\n")
        lines = [f"✓ Witness in {verdict.steps} steps ({verdict.engine}, {verdict.millis} ms)",
                 f"   Tree: {out['tree']}"]
    elif verdict.is_refuted:
        lines = [f"✗ No witness within {verdict.bound} steps ({verdict.engine})"]
    else:
        lines = [f"⚠️ Timed out after {verdict.millis} ms"]
    _emit(args, out, lines)
    if verdict.is_refuted and not (formulation == 'ncpd' and args.non_downset):
        return EXIT_CODES['candidate']
    return EXIT_CODES['ok']


# =============================================================================
# CONSTRUCT COMMANDS
# =============================================================================

def cmd_construct(args) -> int:
    doc = load_json(args.input)
    if args.construction == 'allreach':
        witness = allreach(config_from_doc(doc))
        title = "allreach"
    elif args.construction == 'avoid-zero':
        i = config_from_doc(doc)
        z = parse_subset(i.universe, args.zero)
        witness = avoid_zero(i, z)
        title = f"Downset expressed without I({i.universe.render(z)})"
    else:
        l = IntersectionLattice(family_from_doc(doc))
        target = parse_subset(l.universe, args.target) if args.target is not None else None
        witness = nti_express(l, target, left_linear=args.left_linear)
        title = "Expressed over the non-top nodes"
    _print_witness(args, witness, title)
    return EXIT_CODES['ok']


# =============================================================================
# TRANSLATE COMMANDS
# =============================================================================

def cmd_translate(args) -> int:
    f = family_from_doc(load_json(args.input))
    if args.direction == 'nci-to-ncpd':
        emb = family_to_downset(f)
        nci_sets = sorted(emb.node_to_mask[n] for n in nci(emb.lattice))
        ncpd_sets = ncpd(emb.downset)
        doc = {
            'downset': config_to_doc(emb.downset),
            'nci': [f.universe.render(x) for x in nci_sets],
            'ncpd': [f.universe.render(x) for x in ncpd_sets],
            'agree': nci_sets == ncpd_sets,
        }
        marker = "✓" if doc['agree'] else "✗"
        _emit(args, doc, [f"{marker} ncpd of the generated downset: {', '.join(doc['ncpd'])}",
                          f"   nci of the powerset lattice: {', '.join(doc['nci'])}"])
        return EXIT_CODES['ok']

    if args.witness is None:
        raise UsageError(f"{args.direction} needs --witness")
    witness = load_any_witness(args.witness)
    if args.direction == 'ncpd-to-nci':
        out = ncpd_witness_to_nci(f, witness)
        title = "NCI witness for the top"
    elif args.direction == 'nci-to-ncu':
        out = dualize_witness(f, witness, to='ncu', opts=_search_options(args))
        title = f"NCU witness over the union lattice of {{{', '.join(dualize_family(f).render())}}}"
    else:
        out = dualize_witness(f, witness, to='nci', opts=_search_options(args))
        title = "NCI witness for the top"
    _print_witness(args, out, title)
    return EXIT_CODES['ok']


# =============================================================================
# SCAN
# =============================================================================

def cmd_scan(args) -> int:
    mode = 'random' if args.random else 'non-downset' if args.non_downset else 'sperner'
    scanner = ConjectureScanner(
        args.n,
        opts=_search_options(args),
        workers=args.workers,
        log_path=args.log or None,
        verbose=not args.json and not args.quiet,
        compare_modes=args.compare_modes,
        engine_agreement=args.engine_agreement,
    )
    report = scanner.run(mode=mode, random_count=args.random or 0, seed=args.seed)
    if args.csv:
        export_csv(report, args.csv)
    if args.json:
        print(dumps(report_json(report)))
    else:
        print(summary_line(report))
    return exit_code(report)


# =============================================================================
# PARSER
# =============================================================================

def _add_common(p):
    p.add_argument('--json', action='store_true', help='machine-readable output')


def _add_search(p):
    p.add_argument('--engine', choices=['exhaustive', 'sat'], default=SEARCH_CONFIG['engine'])
    p.add_argument('--max-steps', type=int, default=None)
    p.add_argument('--time-budget', type=float, default=SEARCH_CONFIG['time_budget'], help='seconds per search')
    p.add_argument('--polarity', action='store_true', default=SEARCH_CONFIG['polarity_constrained'],
                   help='require every leaf to be used with its Möbius multiplicity')
    p.add_argument('--emit-cnf', default=None, help='DIMACS path per step count, may contain {k}')


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog='cli.py', description='Non-cancelling intersections toolkit')
    sub = parser.add_subparsers(dest='command', required=True)

    lattice = sub.add_parser('lattice', help='build and inspect lattices')
    lsub = lattice.add_subparsers(dest='action', required=True)
    for action in ('build', 'info', 'dot'):
        p = lsub.add_parser(action)
        p.add_argument('-i', '--input', required=True)
        _add_common(p)
        if action == 'build':
            p.add_argument('--mobius', action='store_true')
        if action == 'dot':
            p.add_argument('-o', '--output')

    p = sub.add_parser('mobius', help='Möbius values of a lattice or configuration')
    p.add_argument('-i', '--input', required=True)
    p.add_argument('--all', action='store_true', help='include zero values of a configuration')
    _add_common(p)

    for name in ('nci', 'ncu', 'ncpd'):
        p = sub.add_parser(name, help=f'{name} base')
        p.add_argument('-i', '--input', required=True)
        _add_common(p)

    witness = sub.add_parser('witness', help='verify or search witnesses')
    wsub = witness.add_subparsers(dest='action', required=True)
    p = wsub.add_parser('verify')
    p.add_argument('-i', '--input', required=True, help='witness JSON or tree file')
    p.add_argument('-b', '--base', help='catalog JSON when the input is a bare tree')
    p.add_argument('--context', help='lattice or downset to check multiplicities against')
    _add_common(p)
    p = wsub.add_parser('search')
    p.add_argument('-i', '--input', required=True)
    p.add_argument('--formulation', choices=['nci', 'ncu', 'ncpd'])
    p.add_argument('--non-downset', action='store_true', help='allow a configuration that is not a downset')
    p.add_argument('-o', '--output')
    _add_search(p)
    _add_common(p)

    construct = sub.add_parser('construct', help='constructive witnesses')
    csub = construct.add_subparsers(dest='construction', required=True)
    for name in ('allreach', 'avoid-zero', 'nti-express'):
        p = csub.add_parser(name)
        p.add_argument('-i', '--input', required=True)
        p.add_argument('-o', '--output', help='write the witness document')
        p.add_argument('--dot', help='write the tree as DOT')
        _add_common(p)
        if name == 'avoid-zero':
            p.add_argument('--zero', required=True)
        if name == 'nti-express':
            p.add_argument('--target')
            p.add_argument('--left-linear', action='store_true')

    translate = sub.add_parser('translate', help='move between formulations')
    tsub = translate.add_subparsers(dest='direction', required=True)
    for name in ('nci-to-ncpd', 'ncpd-to-nci', 'nci-to-ncu', 'ncu-to-nci'):
        p = tsub.add_parser(name)
        p.add_argument('-i', '--input', required=True, help='family JSON')
        p.add_argument('-w', '--witness', help='witness JSON to translate')
        p.add_argument('-o', '--output')
        p.add_argument('--dot')
        if name in ('nci-to-ncu', 'ncu-to-nci'):
            _add_search(p)
        _add_common(p)

    p = sub.add_parser('scan', help='search every canonical instance over n elements')
    p.add_argument('-n', type=int, required=True)
    p.add_argument('--workers', type=int, default=SCAN_CONFIG['workers'])
    p.add_argument('--log', default=SCAN_CONFIG['log_path'], help='JSONL log path, empty to disable')
    p.add_argument('--csv', help='write the verdict table as CSV')
    p.add_argument('--compare-modes', action='store_true')
    p.add_argument('--engine-agreement', action='store_true', default=SCAN_CONFIG['engine_agreement'],
                   help='rerun every check on the other engine and record whether they agree')
    p.add_argument('--random', type=int, metavar='K', help='scan K seeded random families instead')
    p.add_argument('--seed', type=int, default=0)
    p.add_argument('--non-downset', action='store_true', help='diagnostic scan of non-downset configurations')
    p.add_argument('--quiet', action='store_true')
    _add_search(p)
    _add_common(p)
    return parser


def _dispatch(args) -> int:
    if args.command == 'lattice':
        if args.action == 'build':
            return cmd_lattice_build(args)
        return cmd_lattice_info(args) if args.action == 'info' else cmd_lattice_dot(args)
    if args.command == 'mobius':
        return cmd_mobius(args)
    if args.command in ('nci', 'ncu', 'ncpd'):
        return cmd_noncancelling(args)
    if args.command == 'witness':
        return cmd_witness_verify(args) if args.action == 'verify' else cmd_witness_search(args)
    if args.command == 'construct':
        return cmd_construct(args)
    if args.command == 'translate':
        return cmd_translate(args)
    return cmd_scan(args)


def cmd_error(e: Exception) -> int:
    if isinstance(e, NciError):
        print(f"error: {e.name}: {e}", file=sys.stderr)
        return EXIT_CODES['domain']
    print(f"error: {e}", file=sys.stderr)
    return EXIT_CODES['usage']


def run(argv: Optional[List[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return _dispatch(args)
    except (UsageError, ValueError, OSError, NciError) as e:
        return cmd_error(e)


if __name__ == '__main__':
    sys.exit(run())
