import csv
import functools
import io
import itertools
import json
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from dualities.exceptions import FusionRingError
from dualities.services.abelian_group import Bicharacter, FiniteAbelianGroup, require_nondegenerate
from dualities.services.center_channels import compose_channels, extreme_channels

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GradedLabel:
    grade: int
    name: str

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class OutOfWindow:
    """Product whose grade lies outside the truncation window."""
    grade: int
    window: int

    def __str__(self):
        return f'<out of window: grade {self.grade} beyond ±{self.window}>'


class FusionRing:
    """Based ring with N[X][Y][Z] = N^Z_{XY}; graded rings carry a grade per label and a truncation window."""

    def __init__(self, name, labels, unit, dual, N, grades=None, window=None):
        self.name = name
        self.labels = list(labels)
        self.unit = unit
        self.dual = list(dual)
        self.N = np.asarray(N, dtype=np.int64)
        self.grades = None if grades is None else list(grades)
        self.window = window
        size = len(self.labels)
        if self.N.shape != (size, size, size):
            raise FusionRingError(f'{name}: fusion tensor has shape {self.N.shape}, expected {(size,) * 3}')
        if (self.N < 0).any():
            raise FusionRingError(f'{name}: fusion coefficients must be nonnegative')

    @property
    def rank(self):
        return len(self.labels)

    @property
    def is_graded(self):
        return self.grades is not None

    def index(self, label):
        for i, x in enumerate(self.labels):
            if x == label or str(x) == str(label):
                return i
        raise FusionRingError(f'{label!r} is not a simple object of {self.name}')

    def in_window(self, x, y):
        if not self.is_graded:
            return True
        return abs(self.grades[x] + self.grades[y]) <= self.window

    def fuse(self, x, y):
        """X⊗Y as {label: multiplicity}, or OutOfWindow when the product grade is truncated."""
        i, j = self.index(x), self.index(y)
        if not self.in_window(i, j):
            return OutOfWindow(self.grades[i] + self.grades[j], self.window)
        return {str(self.labels[k]): int(n) for k, n in enumerate(self.N[i, j]) if n}

    @functools.cached_property
    def dims(self):
        return fp_dimensions(self)

    def to_dict(self):
        data = {
            'name': self.name,
            'labels': [str(x) for x in self.labels],
            'unit': self.unit,
            'dual': self.dual,
            'N': [[int(x), int(y), int(z), int(self.N[x, y, z])] for x, y, z in zip(*np.nonzero(self.N))],
            'dims': [float(d) for d in self.dims],
        }
        if self.is_graded:
            data['grades'] = self.grades
            data['window'] = self.window
            data['out_of_window'] = [
                [x, y] for x, y in itertools.product(range(self.rank), repeat=2) if not self.in_window(x, y)
            ]
        return data

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator='\n')
        writer.writerow(['x', 'y', 'product'])
        for x, y in itertools.product(self.labels, repeat=2):
            writer.writerow([str(x), str(y), _format_product(self.fuse(x, y))])
        return buf.getvalue()

    def to_text(self):
        lines = [f'{self.name}: {self.rank} simples']
        for x, d in zip(self.labels, self.dims):
            grade = f' grade {x.grade}' if isinstance(x, GradedLabel) else ''
            lines.append(f'  {x}{grade}  d = {d:.12g}')
        for x, y in itertools.product(self.labels, repeat=2):
            product = self.fuse(x, y)
            if not isinstance(product, OutOfWindow):
                lines.append(f'  {x} x {y} = {_format_product(product)}')
        return '\n'.join(lines) + '\n'

    def __repr__(self):
        return f'<FusionRing {self.name} rank={self.rank}>'


def _format_product(product):
    if isinstance(product, OutOfWindow):
        return str(product)
    return ' + '.join(name if n == 1 else f'{n}*{name}' for name, n in product.items())


def group_ring(group: FiniteAbelianGroup) -> FusionRing:
    elements = group.elements
    size = len(elements)
    N = np.zeros((size, size, size), dtype=np.int64)
    for (i, a), (j, b) in itertools.product(enumerate(elements), repeat=2):
        N[i, j, group.index(a + b)] = 1
    dual = [group.index(-a) for a in elements]
    return FusionRing(f'Vec_{group}', [str(a) for a in elements], 0, dual, N)


def tambara_yamagami(group: FiniteAbelianGroup) -> FusionRing:
    elements = group.elements
    size = len(elements)
    m = size
    N = np.zeros((size + 1, size + 1, size + 1), dtype=np.int64)
    for (i, a), (j, b) in itertools.product(enumerate(elements), repeat=2):
        N[i, j, group.index(a + b)] = 1
    N[:size, m, m] = 1
    N[m, :size, m] = 1
    N[m, m, :size] = 1
    dual = [group.index(-a) for a in elements] + [m]
    return FusionRing(f'TY_{group}', [str(a) for a in elements] + ['m'], 0, dual, N)


def fibonacci_ring() -> FusionRing:
    N = np.zeros((2, 2, 2), dtype=np.int64)
    N[0, 0, 0] = N[0, 1, 1] = N[1, 0, 1] = 1
    N[1, 1, 0] = N[1, 1, 1] = 1
    return FusionRing('Fibonacci', ['1', 'tau'], 0, [0, 1], N)


def z_graded_extension(chi: Bicharacter, window: int, seed=None) -> FusionRing:
    """Fusion rules of the Z-graded extension of Vec_A, read off from compositions of extreme channels."""
    if window < 0:
        raise FusionRingError(f'Window must be nonnegative, got {window}')
    require_nondegenerate(chi)
    channels = []
    for g in range(-window, window + 1):
        channels.extend(extreme_channels(chi, g, seed=seed))
    labels = [GradedLabel(c.grade, c.name) for c in channels]
    position = {label: i for i, label in enumerate(labels)}
    size = len(labels)
    N = np.zeros((size, size, size), dtype=np.int64)

    for (i, x), (j, y) in itertools.product(enumerate(channels), repeat=2):
        if abs(x.grade + y.grade) > window:
            continue
        mixture = compose_channels(chi, x, y, seed=seed)
        for coef, z in mixture.terms:
            value = coef * x.qdim * y.qdim / z.qdim
            count = round(value)
            if abs(value - count) > 1e-6:
                raise FusionRingError(f'{x.name} x {y.name} has non-integral multiplicity {value:.9g} on {z.name}')
            N[i, j, position[GradedLabel(z.grade, z.name)]] = count

    unit = position[GradedLabel(0, '1')]
    dual = []
    for i in range(size):
        partners = [j for j in range(size) if N[i, j, unit]]
        if len(partners) != 1:
            raise FusionRingError(f'{labels[i]} has {len(partners)} duals inside the window')
        dual.append(partners[0])
    logger.info('Z-graded extension of %s, window %d: %d simples', chi.group, window, size)
    return FusionRing(f'Z-graded({chi.group})', labels, unit, dual, N, [c.grade for c in channels], window)


def _perron_vector(N, unit, name):
    total = N.sum(axis=0).astype(float)
    values, vectors = np.linalg.eig(total)
    k = int(np.argmax(values.real))
    d = vectors[:, k].real
    if d[unit] < 0:
        d = -d
    if (d <= 0).any():
        raise FusionRingError(f'{name}: Perron eigenvector is not strictly positive; ring is not connected')
    return d / d[unit]


def fp_dimensions(ring: FusionRing) -> np.ndarray:
    """Positive solution of d_X d_Y = Σ_Z N^Z_{XY} d_Z with d_unit = 1."""
    failure = _associativity_failure(ring)
    if failure is not None:
        raise FusionRingError(f'{ring.name} is not associative at {failure}; FP dimensions are undefined')
    if not ring.is_graded:
        d = _perron_vector(ring.N, ring.unit, ring.name)
    else:
        # Perron on the grade-0 subring, then d_X² = dim(X ⊗ X̄)
        zero = [i for i, g in enumerate(ring.grades) if g == 0]
        sub = ring.N[np.ix_(zero, zero, zero)]
        d0 = _perron_vector(sub, zero.index(ring.unit), ring.name)
        d = np.zeros(ring.rank)
        d[zero] = d0
        for x in range(ring.rank):
            if ring.grades[x] != 0:
                d[x] = math.sqrt(float(ring.N[x, ring.dual[x]][zero] @ d0))

    residual = 0.0
    for x, y in itertools.product(range(ring.rank), repeat=2):
        if ring.in_window(x, y):
            residual = max(residual, abs(d[x] * d[y] - ring.N[x, y] @ d))
    if residual > 1e-10 * max(1.0, float(d.max()) ** 2):
        raise FusionRingError(f'{ring.name}: FP dimensions leave residual {residual:.3g}')
    return d


def is_weakly_integral(ring: FusionRing, tol=None) -> bool:
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    return all(abs(d * d - round(d * d)) <= tol and round(d * d) >= 1 for d in ring.dims)


def weak_integral_report(ring: FusionRing, tol=None):
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    simples = []
    for label, d in zip(ring.labels, ring.dims):
        square = float(d * d)
        simples.append({
            'label': str(label),
            'dim': float(d),
            'dim_squared': square,
            'distance': abs(square - round(square)),
        })
    return {'ring': ring.name, 'tol': tol, 'simples': simples, 'weakly_integral': is_weakly_integral(ring, tol)}


def _window_mask(ring):
    size = ring.rank
    if not ring.is_graded:
        return np.ones((size, size, size), dtype=bool)
    g = np.array(ring.grades)
    w = ring.window
    xy = np.abs(g[:, None, None] + g[None, :, None]) <= w
    yz = np.abs(g[None, :, None] + g[None, None, :]) <= w
    xyz = np.abs(g[:, None, None] + g[None, :, None] + g[None, None, :]) <= w
    return xy & yz & xyz


def _associativity_failure(ring):
    N = ring.N
    lhs = np.einsum('xye,ezw->xyzw', N, N)
    rhs = np.einsum('yzf,xfw->xyzw', N, N)
    bad = (lhs != rhs) & _window_mask(ring)[..., None]
    if bad.any():
        x, y, z, w = (int(i) for i in np.argwhere(bad)[0])
        return {'x': str(ring.labels[x]), 'y': str(ring.labels[y]), 'z': str(ring.labels[z]),
                'w': str(ring.labels[w]), 'lhs': int(lhs[x, y, z, w]), 'rhs': int(rhs[x, y, z, w])}
    return None


def verify_ring_axioms(ring: FusionRing):
    """Unit, associativity, Frobenius reciprocity, dual involution and grading, each with its first counterexample."""
    N = ring.N
    size = ring.rank
    u = ring.unit
    names = [str(x) for x in ring.labels]
    checks = {}

    eye = np.eye(size, dtype=np.int64)
    bad = np.argwhere((N[u] != eye) | (N[:, u] != eye))
    checks['unit'] = None if not len(bad) else {'y': names[bad[0][0]], 'z': names[bad[0][1]]}

    checks['associativity'] = _associativity_failure(ring)

    checks['dual'] = None
    for x in range(size):
        if ring.dual[ring.dual[x]] != x or (ring.in_window(x, ring.dual[x]) and N[x, ring.dual[x], u] != 1):
            checks['dual'] = {'x': names[x], 'dual': names[ring.dual[x]]}
            break

    # N^Z_{XY} = N^Y_{X̄Z}
    checks['frobenius'] = None
    for x, y, z in itertools.product(range(size), repeat=3):
        xd = ring.dual[x]
        if not (ring.in_window(x, y) and ring.in_window(xd, z)):
            continue
        if N[x, y, z] != N[xd, z, y]:
            checks['frobenius'] = {'x': names[x], 'y': names[y], 'z': names[z],
                                   'lhs': int(N[x, y, z]), 'rhs': int(N[xd, z, y])}
            break

    checks['grading'] = None
    if ring.is_graded:
        for x, y, z in zip(*np.nonzero(N)):
            if ring.grades[z] != ring.grades[x] + ring.grades[y]:
                checks['grading'] = {'x': names[x], 'y': names[y], 'z': names[z]}
                break

    passed = all(v is None for v in checks.values())
    if not passed:
        logger.info('%s fails ring axioms: %s', ring.name, {k: v for k, v in checks.items() if v})
    return {
        'ring': ring.name,
        'pass': passed,
        'checks': {k: {'pass': v is None, 'counterexample': v} for k, v in checks.items()},
    }


def unitality_residual(ring: FusionRing) -> float:
    """max |Σ_Z d_Z/(d_X d_Y) N^Z_{XY} - 1| over in-window pairs."""
    d = ring.dims
    worst = 0.0
    for x, y in itertools.product(range(ring.rank), repeat=2):
        if ring.in_window(x, y):
            worst = max(worst, abs(float(ring.N[x, y] @ d) / (d[x] * d[y]) - 1.0))
    return worst


def build_ring(variant: str, group: FiniteAbelianGroup = None, chi: Bicharacter = None, window: int = 1, seed=None):
    if variant == 'group':
        return group_ring(group)
    if variant == 'ty':
        return tambara_yamagami(group)
    if variant == 'fibonacci':
        return fibonacci_ring()
    if variant == 'graded':
        return z_graded_extension(chi, window, seed=seed)
    raise FusionRingError(f'Unknown ring variant {variant!r}')
