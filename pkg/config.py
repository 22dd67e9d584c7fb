# config.py
import os
import json
import glob

# =============================================================================
# UNIVERSE LIMITS
# =============================================================================

UNIVERSE_CONFIG = {
    'max_elements': 24,        # Config is a dense 2^n bitvector
    'value_bits': 32,          # IntFunc storage width
    'naive_mobius_max': 10,    # Largest n for the O(4^n) oracle
    'default_labels': 'abcdefghijklmnopqrstuvwx',
}

# =============================================================================
# WITNESS SEARCH
# =============================================================================

SEARCH_CONFIG = {
    'engine': os.environ.get('NCI_ENGINE', 'exhaustive'),   # exhaustive | sat
    'max_steps_factor': 2,     # default bound = factor * size of the target
    'min_max_steps': 4,
    'time_budget': float(os.environ['NCI_TIME_BUDGET']) if os.environ.get('NCI_TIME_BUDGET') else None,
    'polarity_constrained': False,
    'check_interval': 2048,    # expansions between clock checks
}

SAT_CONFIG = {
    'emit_cnf': None,          # path (may contain {k}) for DIMACS dumps
    'solver_timeout_ms': None,
}

# =============================================================================
# SCAN HARNESS
# =============================================================================

SCAN_CONFIG = {
    'workers': int(os.environ.get('NCI_SCAN_WORKERS', '1')),
    'log_path': os.environ.get('NCI_SCAN_LOG', 'scan_log.jsonl'),
    'progress_every': 50,
    'max_sperner_n': 6,
    'engine_agreement': os.environ.get('NCI_SCAN_AGREEMENT', '') == '1',   # rerun every check on the other engine
}

RANDOM_CONFIG = {
    'count_range': (2, 6),     # sets per random family, inclusive
    'max_attempts': 1000,      # redraws before giving up on a non-trivial family
}

# =============================================================================
# OUTPUT
# =============================================================================

OUTPUT_CONFIG = {
    'schema_version': 1,
    'nci_fill': 'orange',
    'set_annotation': 'darkorange',
    'json_indent': 2,
}

EXIT_CODES = {
    'ok': 0,
    'candidate': 2,            # scan found a counterexample candidate
    'usage': 64,
    'domain': 65,
    'error': 70,               # a scanned instance crashed
}

# =============================================================================
# FIXTURES
# =============================================================================

DATA_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data')


def load_fixtures(names=None, verbose=False):
    """Reads the JSON fixtures shipped in data/ into a name -> document dict."""
    fixtures = {}
    if verbose:
        print("Loading fixtures...")
    for path in sorted(glob.glob(os.path.join(DATA_DIR, '*.json'))):
        name = os.path.splitext(os.path.basename(path))[0]
        if names is not None and name not in names:
            continue
        try:
            with open(path, 'r', encoding='utf-8') as f:
                fixtures[name] = json.load(f)
            if verbose:
                print(f"  [OK] Loaded {name}")
        except Exception as e:
            if verbose:
                print(f"  [FAIL] Failed to read {os.path.basename(path)}: {e}")
    return fixtures
