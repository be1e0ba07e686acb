import json
import logging
from pathlib import Path

from django.conf import settings

logger = logging.getLogger(__name__)

GOLDEN_FILE = 'fitted_scales.json'


def golden_path(directory=None) -> Path:
    return Path(directory or settings.DUALITYKIT_GOLDEN_DIR) / GOLDEN_FILE


def load_golden(directory=None) -> dict:
    path = golden_path(directory)
    if not path.exists():
        return {}
    with open(path) as fh:
        return json.load(fh)


def _as_complex(value):
    if isinstance(value, list):
        return complex(value[0], value[1])
    return complex(value)


def compare_golden(reports, directory=None, tol=None):
    """Fail any report whose fitted scale drifted from its locked value; reports without a locked value pass through."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    golden = load_golden(directory)
    for report in reports:
        locked = golden.get(report['group'], {}).get(f'L{report["L"]}', {}).get(report['identity'])
        if locked is None or report['fitted_scale'] is None:
            continue
        drift = abs(_as_complex(report['fitted_scale']) - _as_complex(locked))
        report['detail']['golden_scale'] = locked
        if drift > tol:
            logger.warning('%s at %s L=%s: fitted scale %s drifted from golden %s',
                           report['identity'], report['group'], report['L'], report['fitted_scale'], locked)
            report['pass'] = False
    return reports


def record_golden(reports, directory=None) -> Path:
    """Lock the fitted scales of passing reports, merging into the existing file."""
    path = golden_path(directory)
    golden = load_golden(directory)
    for report in reports:
        if not report['pass'] or report['fitted_scale'] is None:
            continue
        golden.setdefault(report['group'], {}).setdefault(f'L{report["L"]}', {})[report['identity']] = report['fitted_scale']
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w') as fh:
        json.dump(golden, fh, indent=2, sort_keys=True)
        fh.write('\n')
    logger.info('recorded %d fitted scales in %s', len(reports), path)
    return path
