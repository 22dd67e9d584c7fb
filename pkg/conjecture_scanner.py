"""
Conjecture scan harness.

Walks the canonical Sperner families of B_n (or seeded random families, or
non-downset configurations as a diagnostic), searches each instance for a
witness, appends one JSONL row per check and prints a summary. Refuted
verdicts in the conjecture modes are counterexample candidates.
"""

from __future__ import annotations

import json
import time
from dataclasses import replace
from multiprocessing import Pool
from typing import Dict, Iterator, List, Optional, Tuple

import pandas as pd

from config import EXIT_CODES, RANDOM_CONFIG, SCAN_CONFIG
from intersection_lattice import SetFamily, is_trivial
from search import (
    SearchOptions,
    canonical_form,
    find_witness,
    nci_instance,
    ncpd_instance,
    ncu_instance,
    random_family,
    sperner_families,
)
from subset_core import Config, Universe, bits_of, downset_closure, is_downset

MODES = ('sperner', 'random', 'non-downset')


# =============================================================================
# INSTANCE SOURCES
# =============================================================================

def non_downset_configurations(n: int) -> Iterator[Tuple[int, ...]]:
    """Canonical member lists of every configuration of B_n that is not a downset."""
    universe = Universe.letters(n)
    for code in range(1 << universe.size):
        members = tuple(bits_of(code))
        if is_downset(Config.from_masks(universe, members)):
            continue
        if canonical_form(members, n) == members:
            yield members


def _render_family(universe: Universe, masks) -> str:
    return "{" + ",".join(universe.render(m) for m in masks) + "}"


# =============================================================================
# WORKER
# =============================================================================

def _run_check(formulation: str, base, target, required, opts: SearchOptions, compare_modes: bool,
               engine_agreement: bool = False) -> Dict:
    verdict = find_witness(base, target, opts, required)
    row = {
        'formulation': formulation,
        'base_size': len(base),
        'verdict': verdict.kind,
        'steps': verdict.steps,
        'bound': verdict.bound,
        'millis': verdict.millis,
        'engine': verdict.engine,
        'exhausted': verdict.exhausted,
    }
    if compare_modes:
        other = find_witness(base, target, replace(opts, polarity_constrained=not opts.polarity_constrained), required)
        strong, weak = (other, verdict) if not opts.polarity_constrained else (verdict, other)
        row['strong_verdict'] = strong.kind
        row['strong_steps'] = strong.steps
        row['weak_verdict'] = weak.kind
        row['weak_steps'] = weak.steps
        row['modes_differ'] = strong.kind != weak.kind
        row['millis'] += other.millis
    if engine_agreement:
        engine = 'sat' if opts.engine == 'exhaustive' else 'exhaustive'
        other = find_witness(base, target, replace(opts, engine=engine), required)
        row['other_engine_verdict'] = other.kind
        row['other_engine_steps'] = other.steps
        # timeouts say nothing about the other engine
        row['engines_agree'] = ('timeout' in (verdict.kind, other.kind)
                                or (verdict.kind, verdict.steps) == (other.kind, other.steps))
        row['millis'] += other.millis
    return row


def check_instance(task: Tuple[str, int, Tuple[int, ...], SearchOptions, bool, bool]) -> Dict:
    """Runs every applicable check on one instance; never raises."""
    mode, n, masks, opts, compare_modes, engine_agreement = task
    universe = Universe.letters(n)
    result = {
        'instance': str(list(masks)),
        'canonical_form': list(masks),
        'rows': [],
        'error': None,
    }

    def run(formulation, instance):
        base, target, required = instance
        result['rows'].append(_run_check(formulation, base, target, required, opts, compare_modes, engine_agreement))

    try:
        result['instance'] = _render_family(universe, masks)
        if mode == 'non-downset':
            run('ncpd', ncpd_instance(Config.from_masks(universe, masks)))
            return result

        run('ncpd', ncpd_instance(downset_closure(Config.from_masks(universe, masks))))
        family = SetFamily(universe, tuple(masks))
        if len(masks) >= 2 and not is_trivial(family):
            run('nci', nci_instance(family))
            run('ncu', ncu_instance(family))
    except Exception as e:
        result['error'] = f"{result['instance']}: {type(e).__name__}: {e}"
    return result


# =============================================================================
# SCANNER
# =============================================================================

class ConjectureScanner:
    def __init__(self, n: int, opts: Optional[SearchOptions] = None, workers: Optional[int] = None,
                 log_path: Optional[str] = SCAN_CONFIG['log_path'], verbose: bool = True,
                 compare_modes: bool = False, engine_agreement: bool = SCAN_CONFIG['engine_agreement']):
        if not 0 <= n <= SCAN_CONFIG['max_sperner_n']:
            raise ValueError(f"n must be between 0 and {SCAN_CONFIG['max_sperner_n']}")
        self.n = n
        self.universe = Universe.letters(n)
        self.opts = opts or SearchOptions()
        self.workers = workers if workers is not None else SCAN_CONFIG['workers']
        self.log_path = log_path
        self.verbose = verbose
        self.compare_modes = compare_modes
        self.engine_agreement = engine_agreement
        self.results: List[Dict] = []

    def _say(self, text: str = ""):
        if self.verbose:
            print(text)

    # -------------------------------------------------------------------------
    # instance lists
    # -------------------------------------------------------------------------

    def sperner_instances(self) -> List[Tuple[int, ...]]:
        return list(sperner_families(self.n))

    def random_instances(self, count: int, seed: int = 0,
                         count_range: Tuple[int, int] = RANDOM_CONFIG['count_range']) -> List[Tuple[int, ...]]:
        """`count` seeded families; family k is drawn with seed + k."""
        return [random_family(self.n, count_range, seed + k).sets for k in range(count)]

    def non_downset_instances(self) -> List[Tuple[int, ...]]:
        return list(non_downset_configurations(self.n))

    # -------------------------------------------------------------------------
    # scanning
    # -------------------------------------------------------------------------

    def _checked(self, tasks):
        if self.workers > 1 and len(tasks) > 1:
            with Pool(self.workers) as pool:
                yield from pool.imap(check_instance, tasks)
        else:
            for task in tasks:
                yield check_instance(task)

    def scan(self, instances: List[Tuple[int, ...]], mode: str = 'sperner') -> Dict:
        if mode not in MODES:
            raise ValueError(f"unknown scan mode {mode!r}")
        tasks = [(mode, self.n, tuple(masks), self.opts, self.compare_modes, self.engine_agreement)
                 for masks in instances]
        total = len(tasks)
        self._say(f"Scanning {total} instances over n={self.n} ({mode}, engine={self.opts.engine})...\n")

        witnesses = 0
        candidates = 0
        timeouts = 0
        error_count = 0
        mode_differences = 0
        engine_disagreements = 0
        first_error = None
        progress_count = 0
        rows = []
        started = time.monotonic()

        log = open(self.log_path, 'a', encoding='utf-8') if self.log_path else None
        try:
            for result in self._checked(tasks):
                progress_count += 1
                records = list(result['rows'])
                if result['error'] is not None:
                    error_count += 1
                    if first_error is None:
                        first_error = result['error']
                    self._say(f"  ✗ {result['error']}")
                    records.append({'formulation': None, 'verdict': 'error', 'error': result['error']})
                else:
                    kinds = [row['verdict'] for row in result['rows']]
                    if all(k == 'witness' for k in kinds):
                        witnesses += 1
                    elif 'refuted' in kinds:
                        candidates += 1
                        self._say(f"  ⚠️ {result['instance']}: no witness within bound")
                    else:
                        timeouts += 1
                    if any(row.get('modes_differ') for row in result['rows']):
                        mode_differences += 1
                    if any(row.get('engines_agree') is False for row in result['rows']):
                        engine_disagreements += 1
                        self._say(f"  ✗ {result['instance']}: engines disagree")
                for row in records:
                    record = {'instance': result['instance'], 'canonical_form': result['canonical_form'],
                              'n': self.n, 'mode': mode, **row}
                    rows.append(record)
                    if log is not None:
                        log.write(json.dumps(record, sort_keys=True) + "\n")

                if progress_count % SCAN_CONFIG['progress_every'] == 0:
                    pct = progress_count / total * 100
                    self._say(f"Progress: {progress_count}/{total} ({pct:.1f}%) - Witnesses: {witnesses}, "
                              f"Candidates: {candidates}, Errors: {error_count}")
        finally:
            if log is not None:
                log.close()

        report = {
            'n': self.n,
            'mode': mode,
            'instances': total,
            'witnesses': witnesses,
            'candidates': candidates,
            'timeouts': timeouts,
            'errors': error_count,
            'mode_differences': mode_differences,
            'engine_disagreements': engine_disagreements,
            'first_error': first_error,
            'seconds': round(time.monotonic() - started, 3),
            'table': pd.DataFrame(rows),
        }
        self.results.append(report)

        self._say(f"\n✓ Scan complete: {summary_line(report)}")
        self._say(f"   Timeouts: {timeouts}, Errors: {error_count}")
        if self.compare_modes:
            self._say(f"   Strong/weak mode differences: {mode_differences}")
        if self.engine_agreement:
            self._say(f"   Engine disagreements: {engine_disagreements}")
        if first_error:
            self._say(f"   First error was: {first_error}")
        return report

    def run(self, mode: str = 'sperner', random_count: int = 0, seed: int = 0) -> Dict:
        self._say("=" * 60)
        self._say(f"CONJECTURE SCAN: n={self.n}")
        self._say("=" * 60)
        if mode == 'random':
            instances = self.random_instances(random_count, seed)
        elif mode == 'non-downset':
            instances = self.non_downset_instances()
        else:
            instances = self.sperner_instances()
        report = self.scan(instances, mode)

        if self.verbose and not report['table'].empty:
            self._say("\n" + "=" * 60)
            self._say("SUMMARY")
            self._say("=" * 60)
            self._say(verdict_table(report['table']).to_string())
        self._say("\n" + "=" * 60)
        self._say("✓ SCAN COMPLETE!")
        self._say("=" * 60)
        return report


# =============================================================================
# REPORTING
# =============================================================================

def summary_line(report: Dict) -> str:
    return f"{report['instances']} instances, {report['witnesses']} witnesses, {report['candidates']} candidates"


def verdict_table(table: pd.DataFrame) -> pd.DataFrame:
    """Verdict counts per formulation, with mean and max search time; error rows are left out."""
    if table.empty or 'millis' not in table.columns:
        return pd.DataFrame()
    table = table[table['formulation'].notna()]
    if table.empty:
        return pd.DataFrame()
    counts = table.pivot_table(index='formulation', columns='verdict', values='instance',
                               aggfunc='count', fill_value=0)
    timing = table.groupby('formulation')['millis'].agg(['mean', 'max']).rename(
        columns={'mean': 'mean_ms', 'max': 'max_ms'})
    return counts.join(timing).round(1)


def export_csv(report: Dict, path: str) -> str:
    report['table'].to_csv(path, index=False)
    return path


def report_json(report: Dict) -> Dict:
    """The report without its table, for --json output."""
    out = {k: v for k, v in report.items() if k != 'table'}
    table = report['table']
    out['verdicts'] = {} if table.empty else {
        formulation: {verdict: int(count) for verdict, count in group['verdict'].value_counts().items()}
        for formulation, group in table.groupby('formulation')
    }
    return out


def exit_code(report: Dict) -> int:
    """Crashed checks first, then candidates, which only count outside the non-downset diagnostic."""
    if report.get('errors'):
        return EXIT_CODES['error']
    if report['mode'] != 'non-downset' and report['candidates']:
        return EXIT_CODES['candidate']
    return EXIT_CODES['ok']
