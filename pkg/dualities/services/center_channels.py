import functools
import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from django.conf import settings

from dualities.exceptions import ChannelError
from dualities.services.abelian_group import Bicharacter, Character, GroupElement, require_nondegenerate

logger = logging.getLogger(__name__)

# Every simple of Z(Hilb_A) has dimension 1, so the 1/sqrt(d_X) factor of each
# summand in the Q-system structure maps is 1. Kept as a named factor.
SIMPLE_DIMENSION_FACTOR = 1.0


@dataclass(frozen=True)
class CenterLabel:
    """Simple object (a, φ) of Z(Hilb_A) ≅ Hilb_{A×Â}; half-braiding σ_x = φ(x)·id."""
    a: GroupElement
    phi: Character

    def __add__(self, other):
        return CenterLabel(self.a + other.a, self.phi * other.phi)

    def __neg__(self):
        return CenterLabel(-self.a, self.phi.conjugate())

    @property
    def is_unit(self):
        return self.a.is_identity and self.phi.is_trivial

    def __str__(self):
        return f'({self.a},{self.phi})'


def braiding_phase(x: CenterLabel, y: CenterLabel) -> complex:
    """c_{x,y} = ψ(a) for x = (a, φ), y = (b, ψ)."""
    return y.phi.value(x.a)


@dataclass(frozen=True)
class CenterObject:
    summands: tuple

    @property
    def qdim(self):
        return len(self.summands) * SIMPLE_DIMENSION_FACTOR

    def __str__(self):
        return ' + '.join(str(s) for s in self.summands)


@dataclass(frozen=True, eq=False)
class LagrangianAlgebra:
    name: str
    chi: Bicharacter
    labels: tuple
    mult: np.ndarray
    unit: np.ndarray

    @property
    def object(self):
        return CenterObject(self.labels)

    @property
    def dim(self):
        return len(self.labels)

    @functools.cached_property
    def unit_index(self):
        return next(i for i, s in enumerate(self.labels) if s.is_unit)

    @functools.cached_property
    def index(self):
        return {s: i for i, s in enumerate(self.labels)}

    def __str__(self):
        return self.name


def _subgroup_algebra(name, chi, labels):
    """Q-system of the commutative algebra ⊕_{s∈S} s for a subgroup S of A×Â."""
    n = len(labels)
    index = {s: i for i, s in enumerate(labels)}
    mult = np.zeros((n, n, n), dtype=complex)
    for (i, x), (j, y) in itertools.product(enumerate(labels), repeat=2):
        mult[index[x + y], i, j] = SIMPLE_DIMENSION_FACTOR / math.sqrt(n)
    unit = np.zeros(n, dtype=complex)
    unit[index[next(s for s in labels if s.is_unit)]] = math.sqrt(n)
    return LagrangianAlgebra(name, chi, tuple(labels), mult, unit)


def alpha_label(chi: Bicharacter, label: CenterLabel, power: int = 1) -> CenterLabel:
    """α̃^power(a, φ), with α̃(a, φ) = (χ̃⁻¹(φ), χ̃(a))."""
    tilde = require_nondegenerate(chi)
    # for symmetric χ the swap is an involution, α̃⁻¹ = α̃
    for _ in range(abs(power) % 2):
        label = CenterLabel(tilde.inverse(label.phi), tilde(label.a))
    return label


def canonical_lagrangians(chi: Bicharacter):
    """L₁ = ℂ[A] × 1 and L₂ = 1 × ℂ[Â]."""
    tilde = require_nondegenerate(chi)
    group = chi.group
    triv = group.characters[0]
    l1 = _subgroup_algebra('L1', chi, [CenterLabel(a, triv) for a in group.elements])
    l2 = _subgroup_algebra('L2', chi, [CenterLabel(group.identity, tilde(a)) for a in group.elements])
    return l1, l2


def alpha_twist(chi: Bicharacter, algebra: LagrangianAlgebra, power: int) -> LagrangianAlgebra:
    if power == 0:
        return algebra
    labels = tuple(alpha_label(chi, s, power) for s in algebra.labels)
    # multiplication is transported summand by summand, so the arrays are unchanged
    return LagrangianAlgebra(f'alpha^{power}({algebra.name})', chi, labels, algebra.mult, algebra.unit)


def verify_q_system(algebra: LagrangianAlgebra, tol=None):
    tol = settings.DUALITYKIT_TOL_EXACT if tol is None else tol
    m, u = algebra.mult, algebra.unit
    n = algebra.dim
    eye = np.eye(n)
    braid = np.array([[braiding_phase(x, y) for y in algebra.labels] for x in algebra.labels])
    m_dag = m.conj()
    checks = {
        'associativity': np.einsum('kel,eij->kijl', m, m) - np.einsum('kie,ejl->kijl', m, m),
        'left_unit': np.einsum('kij,i->kj', m, u) - eye,
        'right_unit': np.einsum('kij,j->ki', m, u) - eye,
        'braided_commutativity': braid[None, :, :] * m.transpose(0, 2, 1) - m,
        'frobenius': np.einsum('ipq,lqj->plij', m_dag, m) - np.einsum('epl,eij->plij', m_dag, m),
        'special': np.einsum('kij,lij->kl', m, m_dag) - eye,
        'counit_norm': np.array([np.vdot(u, u) - n]),
    }
    report = {name: float(np.max(np.abs(residual))) for name, residual in checks.items()}
    report['lagrangian'] = 0.0 if n == algebra.chi.group.order else float(abs(n - algebra.chi.group.order))
    passed = all(v <= tol for v in report.values())
    logger.debug('Q-system %s: %s', algebra.name, report)
    return {'algebra': algebra.name, 'residuals': report, 'pass': passed}


class ConvolutionAlgebra:
    """H(L, L′) with f*g = m′∘(f⊗g)∘m†; elements are arrays F[k′, k] over target×source summands."""

    def __init__(self, source: LagrangianAlgebra, target: LagrangianAlgebra):
        if source.chi != target.chi:
            raise ChannelError(f'{source} and {target} live over different centers')
        self.source = source
        self.target = target
        self.basis = [
            (target.index[s], i) for i, s in enumerate(source.labels) if s in target.index
        ]
        self.shape = (target.dim, source.dim)

    @property
    def dim(self):
        return len(self.basis)

    def basis_element(self, i):
        f = np.zeros(self.shape, dtype=complex)
        f[self.basis[i]] = 1.0
        return f

    def coords(self, f):
        return np.array([f[pair] for pair in self.basis])

    def from_coords(self, coords):
        f = np.zeros(self.shape, dtype=complex)
        for c, pair in zip(coords, self.basis):
            f[pair] = c
        return f

    @functools.cached_property
    def unit(self):
        """ι′∘ι†."""
        return np.outer(self.target.unit, self.source.unit.conj())

    @functools.cached_property
    def _dual_perm(self):
        src = [self.source.index[-s] for s in self.source.labels]
        tgt = [self.target.index[-s] for s in self.target.labels]
        return tgt, src

    def involution(self, f):
        tgt, src = self._dual_perm
        return f[np.ix_(tgt, src)].conj()

    def convolve(self, f, g):
        return np.einsum('apq,pi,qj,bij->ab', self.target.mult, f, g, self.source.mult.conj(), optimize=True)

    @functools.cached_property
    def product_table(self):
        """T[i, j] = coords(e_i * e_j)."""
        r = self.dim
        table = np.zeros((r, r, r), dtype=complex)
        for i, j in itertools.product(range(r), repeat=2):
            table[i, j] = self.coords(self.convolve(self.basis_element(i), self.basis_element(j)))
        return table

    def is_commutative(self, tol=None):
        tol = settings.DUALITYKIT_TOL_EXACT if tol is None else tol
        return bool(np.max(np.abs(self.product_table - self.product_table.transpose(1, 0, 2)), initial=0.0) <= tol)

    def __repr__(self):
        return f'H({self.source}, {self.target}) dim={self.dim}'


def hom_space(source: LagrangianAlgebra, target: LagrangianAlgebra) -> ConvolutionAlgebra:
    return ConvolutionAlgebra(source, target)


def hom_dimension_by_solve(source: LagrangianAlgebra, target: LagrangianAlgebra, tol=None) -> int:
    """dim Hom_Z(L, L′) from the grading and half-braiding constraints on an arbitrary summand map."""
    tol = settings.DUALITYKIT_TOL_EXACT if tol is None else tol
    group = source.chi.group
    pairs = list(itertools.product(range(target.dim), range(source.dim)))
    rows = []
    for p, (kt, ks) in enumerate(pairs):
        t, s = target.labels[kt], source.labels[ks]
        if t.a != s.a:
            row = np.zeros(len(pairs), dtype=complex)
            row[p] = 1.0
            rows.append(row)
        for x in group.elements:
            row = np.zeros(len(pairs), dtype=complex)
            row[p] = t.phi.value(x) - s.phi.value(x)
            rows.append(row)
    constraints = np.array(rows)
    return scipy.linalg.null_space(constraints, rcond=tol).shape[1]


def convolve(algebra: ConvolutionAlgebra, f, g):
    return algebra.convolve(f, g)


@dataclass(eq=False)
class DualityChannel:
    """Extreme unital channel Φ = p/λ over the QCA word α^grade."""
    grade: int
    name: str
    charge: GroupElement
    idempotent: np.ndarray
    lam: float
    qdim: float
    convolution_coefficient: float
    source: tuple
    target: tuple

    @property
    def matrix(self):
        return self.idempotent / self.lam

    def __repr__(self):
        return f'<DualityChannel {self.name} grade={self.grade} d={self.qdim:.6g}>'


@dataclass
class ChannelMixture:
    grade: int
    terms: list = field(default_factory=list)

    @property
    def coefficients(self):
        return {channel.name: coef for coef, channel in self.terms}

    def __repr__(self):
        return ' + '.join(f'{coef:.6g}*{channel.name}' for coef, channel in self.terms)


def _generic_element(algebra, seed):
    rng = np.random.default_rng(seed)
    z = rng.standard_normal(algebra.dim) + 1j * rng.standard_normal(algebra.dim)
    x = algebra.from_coords(z)
    return x + algebra.involution(x)


def _group_eigenvalues(values, tol):
    order = sorted(range(len(values)), key=lambda i: (round(values[i].real, 8), round(values[i].imag, 8)))
    groups = []
    for i in order:
        if groups and abs(values[i] - values[groups[-1][0]]) <= tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def minimal_idempotents(algebra: ConvolutionAlgebra, seed=None, tol=None):
    """Complete orthogonal family of minimal projections of a commutative H, as (p, λ) pairs."""
    seed = settings.DUALITYKIT_SEED if seed is None else seed
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    if not algebra.is_commutative():
        raise ChannelError(f'{algebra!r} is not commutative')

    x = algebra.coords(_generic_element(algebra, seed))
    left_mult = np.einsum('i,ijk->kj', x, algebra.product_table)
    values, vl, vr = scipy.linalg.eig(left_mult, left=True, right=True)
    unit = algebra.coords(algebra.unit)

    projections = []
    for cluster in _group_eigenvalues(values, 1e-9):
        v, w = vr[:, cluster], vl[:, cluster]
        spectral = v @ np.linalg.solve(w.conj().T @ v, w.conj().T)
        projections.append(algebra.from_coords(spectral @ unit))

    total = sum(projections, np.zeros(algebra.shape, dtype=complex))
    problems = []
    if np.max(np.abs(total - algebra.unit), initial=0.0) > tol:
        problems.append('completeness')
    for i, p in enumerate(projections):
        if np.max(np.abs(algebra.convolve(p, p) - p)) > tol:
            problems.append(f'idempotency of p{i}')
        if np.max(np.abs(algebra.involution(p) - p)) > tol:
            problems.append(f'self-adjointness of p{i}')
        for j in range(i):
            if np.max(np.abs(algebra.convolve(p, projections[j]))) > tol:
                problems.append(f'orthogonality of p{i}, p{j}')
    if problems:
        raise ChannelError(f'Idempotent search in {algebra!r} failed: {", ".join(problems)}')

    result = []
    t0 = algebra.target.unit_index
    for p in projections:
        lam = (p @ algebra.source.unit)[t0] / algebra.target.unit[t0]
        if abs(lam) < 1e-12:
            raise ChannelError(f'{algebra!r} produced a zero channel (lambda = {lam:.3g})')
        if abs(lam.imag) > tol or lam.real <= 0:
            raise ChannelError(f'{algebra!r} produced a non-positive normalization lambda = {lam}')
        result.append((p, float(lam.real)))
    logger.debug('%r: %d minimal idempotents', algebra, len(result))
    return result


def _channel_name(grade, charge):
    if grade % 2:
        k = (grade - 1) // 2
        return 'D+' + 'T+' * k if grade > 0 else 'D-' + 'T-' * (-k - 1)
    word = 'T+' * (grade // 2) if grade > 0 else 'T-' * (-grade // 2)
    if charge.is_identity:
        return word or '1'
    return str(charge) + word


def _channel_charge(chi, algebra, phi_matrix, tol):
    """a with Φ[s]/Φ[0] = conj χ(a, b + χ̃⁻¹(φ)) on each shared summand s = (b, φ)."""
    tilde = require_nondegenerate(chi)
    ratios = {}
    e0 = next(i for i, (kt, ks) in enumerate(algebra.basis) if algebra.source.labels[ks].is_unit)
    coords = algebra.coords(phi_matrix)
    for (kt, ks), c in zip(algebra.basis, coords):
        s = algebra.source.labels[ks]
        ratios[s.a + tilde.inverse(s.phi)] = np.conj(c / coords[e0])
    for a in chi.group.elements:
        if all(abs(tilde(a).value(b) - value) <= tol for b, value in ratios.items()):
            return a
    raise ChannelError(f'Channel over {algebra!r} carries no group charge')


@functools.lru_cache(maxsize=256)
def _extreme_channels(chi, grade, seed, tol):
    l1, _ = canonical_lagrangians(chi)
    target = alpha_twist(chi, l1, grade)
    algebra = hom_space(l1, target)
    channels = []
    for p, lam in minimal_idempotents(algebra, seed=seed, tol=tol):
        phi = p / lam
        square = algebra.convolve(phi, phi)
        coefficient = float((np.vdot(phi, square) / np.vdot(phi, phi)).real)
        charge = _channel_charge(chi, algebra, phi, tol)
        channels.append(DualityChannel(
            grade=grade,
            name=_channel_name(grade, charge),
            charge=charge,
            idempotent=p,
            lam=lam,
            qdim=1 / math.sqrt(coefficient),
            convolution_coefficient=coefficient,
            source=l1.labels,
            target=target.labels,
        ))
    channels.sort(key=lambda c: chi.group.index(c.charge))
    logger.info('grade %d over %s: %d extreme channels, qdims %s', grade, chi.group, len(channels),
                [round(c.qdim, 12) for c in channels])
    return tuple(channels)


def extreme_channels(chi: Bicharacter, grade: int, seed=None, tol=None):
    seed = settings.DUALITYKIT_SEED if seed is None else seed
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    return list(_extreme_channels(chi, grade, seed, tol))


def twist_channel(chi: Bicharacter, channel: DualityChannel, power: int) -> DualityChannel:
    if power == 0:
        return channel
    return DualityChannel(
        grade=channel.grade,
        name=channel.name,
        charge=channel.charge,
        idempotent=channel.idempotent,
        lam=channel.lam,
        qdim=channel.qdim,
        convolution_coefficient=channel.convolution_coefficient,
        source=tuple(alpha_label(chi, s, power) for s in channel.source),
        target=tuple(alpha_label(chi, s, power) for s in channel.target),
    )


def compose_channels(chi: Bicharacter, outer: DualityChannel, inner: DualityChannel, seed=None, tol=None):
    """outer ∘ inner, decomposed over the extreme channels of grade outer.grade + inner.grade."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    moved = twist_channel(chi, outer, inner.grade)
    if set(moved.source) != set(inner.target):
        raise ChannelError(
            f'Cannot compose {outer.name} after {inner.name}: boundary algebras '
            f'{[str(s) for s in inner.target]} and {[str(s) for s in moved.source]} differ'
        )
    position = {s: i for i, s in enumerate(moved.source)}
    perm = [position[s] for s in inner.target]
    composite = moved.matrix[:, perm] @ inner.matrix

    grade = outer.grade + inner.grade
    candidates = extreme_channels(chi, grade, seed=seed, tol=tol)
    if candidates[0].target != moved.target:
        tpos = {s: i for i, s in enumerate(moved.target)}
        composite = composite[[tpos[s] for s in candidates[0].target], :]
    basis = np.stack([c.matrix.ravel() for c in candidates], axis=1)
    coefs, *_ = np.linalg.lstsq(basis, composite.ravel(), rcond=None)
    residual = float(np.max(np.abs(basis @ coefs - composite.ravel())))
    if residual > tol or np.max(np.abs(coefs.imag)) > tol:
        raise ChannelError(f'{outer.name} o {inner.name} is not a combination of grade {grade} channels '
                           f'(residual {residual:.3g})')
    mixture = ChannelMixture(grade)
    for coef, channel in zip(coefs.real, candidates):
        if abs(coef) > tol:
            if coef < 0:
                raise ChannelError(f'{outer.name} o {inner.name} has negative weight {coef:.3g} on {channel.name}')
            mixture.terms.append((float(coef), channel))
    return mixture


def channel_report(chi: Bicharacter, window: int, seed=None, tol=None):
    """Per-grade extreme channels for |g| <= window plus compositions that stay inside the window."""
    grades = {g: extreme_channels(chi, g, seed=seed, tol=tol) for g in range(-window, window + 1)}
    composition = []
    for gx, gy in itertools.product(grades, repeat=2):
        if abs(gx + gy) > window:
            continue
        for x, y in itertools.product(grades[gx], grades[gy]):
            mixture = compose_channels(chi, x, y, seed=seed, tol=tol)
            composition.append({
                'left': x.name,
                'right': y.name,
                'grade': mixture.grade,
                'terms': {name: round(coef, 12) for name, coef in mixture.coefficients.items()},
            })
    return {
        'group': str(chi.group),
        'chi': [list(row) for row in chi.matrix],
        'window': window,
        'grades': [
            {
                'grade': g,
                'count': len(channels),
                'names': [c.name for c in channels],
                'qdims': [round(c.qdim, 12) for c in channels],
                'convolution_coefficients': [round(c.convolution_coefficient, 12) for c in channels],
            }
            for g, channels in grades.items()
        ],
        'composition_table': composition,
    }
