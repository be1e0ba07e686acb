"""Periodic qudit chains with one ℂ[A] site per cell.

Site tensors are indexed (left, right, in, out). Dense operators are numpy
arrays indexed [out, in] over the lexicographic product basis, site 0 most
significant. See docs/mpo_conventions.md for a worked Z2 tensor.
"""
import functools
import itertools
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.linalg
from django.conf import settings

from dualities.exceptions import (
    CapExceededError,
    DegenerateBicharacterError,
    DimensionMismatchError,
    UnsupportedChainError,
)
from dualities.services.abelian_group import (
    Bicharacter,
    Character,
    FiniteAbelianGroup,
    chi_eval,
    default_bicharacter,
    require_nondegenerate,
)

logger = logging.getLogger(__name__)

DenseOperator = np.ndarray


@dataclass(frozen=True)
class ChainConfig:
    group: FiniteAbelianGroup
    chi: Bicharacter
    length: int
    cap: int = None

    def __post_init__(self):
        if self.cap is None:
            object.__setattr__(self, 'cap', settings.DUALITYKIT_CAP)
        if self.length < 2:
            raise UnsupportedChainError(f'Chain length must be at least 2, got {self.length}')
        if self.chi.group != self.group:
            raise UnsupportedChainError(f'{self.chi} does not live on {self.group}')
        if self.dimension > self.cap:
            raise CapExceededError(self.dimension, self.cap)

    @property
    def site_dim(self):
        return self.group.order

    @property
    def dimension(self):
        return self.site_dim ** self.length

    def __str__(self):
        return f'{self.group} L={self.length}'


@dataclass
class MPO:
    """Periodic train of (left, right, in, out) tensors times a scalar prefactor."""
    tensors: list
    prefactor: complex = 1.0
    name: str = ''

    def __post_init__(self):
        self.tensors = [np.asarray(w, dtype=complex) for w in self.tensors]
        for j, w in enumerate(self.tensors):
            nxt = self.tensors[(j + 1) % len(self.tensors)]
            if w.ndim != 4 or w.shape[1] != nxt.shape[0] or w.shape[2:] != nxt.shape[2:]:
                raise DimensionMismatchError(
                    f'MPO {self.name}: site {j} tensor {w.shape} does not close against site '
                    f'{(j + 1) % len(self.tensors)} tensor {nxt.shape}'
                )

    @property
    def length(self):
        return len(self.tensors)

    @property
    def phys_dim(self):
        return self.tensors[0].shape[2]

    @property
    def bond_dims(self):
        return [w.shape[0] for w in self.tensors]

    def __repr__(self):
        return f'<MPO {self.name} L={self.length} bonds={self.bond_dims}>'


@dataclass
class HamiltonianSpec:
    model: str = 'clock'
    couplings: dict = field(default_factory=lambda: {'J': 1.0, 'h': 1.0})
    # custom model: [{'coupling': c, 'ops': {offset: site matrix}}], translated over every site
    terms: list = field(default_factory=list)


@functools.lru_cache(maxsize=32)
def _chi_table(chi: Bicharacter):
    elements = chi.group.elements
    return np.array([[chi_eval(chi, a, b) for b in elements] for a in elements], dtype=complex)


@functools.lru_cache(maxsize=32)
def _tables(group: FiniteAbelianGroup):
    add = np.array(group.addition_table, dtype=np.int64)
    neg = np.array([group.index(-a) for a in group.elements], dtype=np.int64)
    return add, neg


def hadamard_tensor(chi: Bicharacter) -> np.ndarray:
    """H[a, b] = χ(a, b)/√|A|."""
    try:
        require_nondegenerate(chi)
    except DegenerateBicharacterError as e:
        raise DegenerateBicharacterError(f'Hadamard box is not unitary: {e}') from e
    return _chi_table(chi) / math.sqrt(chi.group.order)


def spider_tensors(group: FiniteAbelianGroup):
    """(black, white): black[x, y, z] = δ(z = x+y) merges, white[z, x, y] is its dagger."""
    n = group.order
    add, _ = _tables(group)
    black = np.zeros((n, n, n))
    for x, y in itertools.product(range(n), repeat=2):
        black[x, y, add[x, y]] = 1.0
    return black, black.transpose(2, 0, 1).copy()


def copy_tensor(group: FiniteAbelianGroup) -> np.ndarray:
    n = group.order
    copy = np.zeros((n, n, n))
    for x in range(n):
        copy[x, x, x] = 1.0
    return copy


def verify_spiders(chi: Bicharacter):
    """Residuals of the group-algebra spider identities and of the Hadamard colour change."""
    n = chi.group.order
    black, white = spider_tensors(chi.group)
    hd = hadamard_tensor(chi)
    copy = copy_tensor(chi.group)
    colour = np.einsum('ip,jq,pqr,kr->ijk', hd, hd, black, hd.conj(), optimize=True) / math.sqrt(n)
    residuals = {
        'associativity': np.einsum('xye,ezw->xyzw', black, black) - np.einsum('yze,xew->xyzw', black, black),
        'coassociativity': np.einsum('exy,wez->wxyz', white, white) - np.einsum('eyz,wxe->wxyz', white, white),
        'frobenius': np.einsum('pqi,qjl->plij', black, black) - np.einsum('ple,ije->plij', black, black),
        'special': np.einsum('xyz,wxy->zw', black, white) - n * np.eye(n),
        'hadamard_unitarity': hd @ hd.conj().T - np.eye(n),
        'colour_change': colour - copy,
    }
    return {name: float(np.max(np.abs(r))) for name, r in residuals.items()}


def _require_even(cfg):
    if cfg.length % 2:
        raise UnsupportedChainError(f'Duality MPOs tile in two-site cells; L = {cfg.length} is odd')


def build_duality_mpo(cfg: ChainConfig, direction: str = '+') -> MPO:
    """⟨b|D₊|a⟩ = |A|^(-L/2) Π_i χ(b_i, a_{i+1} − a_i); D₋ = D₊†."""
    _require_even(cfg)
    black, _ = spider_tensors(cfg.group)
    copy = copy_tensor(cfg.group)
    hd = hadamard_tensor(cfg.chi)
    # copy spider on the input leg, merge with the right bond, Hadamard box onto the output
    w = np.einsum('alp,bz,zpr->lrab', copy, hd, black)
    mpo = MPO([w] * cfg.length, 1.0, 'D+')
    if direction == '+':
        return mpo
    if direction == '-':
        return dagger(mpo, 'D-')
    raise UnsupportedChainError(f'Unknown duality direction {direction!r}')


def _flat(digits, n):
    index = 0
    for x in digits:
        index = index * n + x
    return index


def build_translation_mpo(cfg: ChainConfig, direction: str = '+', dressed_by=None, step: int = 1) -> MPO:
    """T± with (T⁺a)_i = a_{i+step}; `dressed_by` multiplies the output leg by the shift X_g."""
    if direction not in ('+', '-'):
        raise UnsupportedChainError(f'Unknown translation direction {direction!r}')
    if step < 1:
        raise UnsupportedChainError(f'Translation step must be positive, got {step}')
    n = cfg.site_dim
    w = _translation_tensor(n, step, direction == '+')
    name = f'T{direction}' if step == 1 else f'T{direction}^{step}'
    if dressed_by is not None:
        w = _dress_output(cfg.group, w, dressed_by)
        name = f'{dressed_by}{name}'
    return MPO([w] * cfg.length, 1.0, name)


def _translation_tensor(n, step, forward):
    dim = n ** step
    w = np.zeros((dim, dim, n, n))
    for window in itertools.product(range(n), repeat=step + 1):
        if forward:
            # l = (a_i, .., a_{i+step-1}), r = (a_{i+1}, .., a_{i+step}), out = a_{i+step}
            w[_flat(window[:-1], n), _flat(window[1:], n), window[0], window[-1]] = 1.0
        else:
            # r = (a_i, .., a_{i-step+1}), l = (a_{i-1}, .., a_{i-step}), out = a_{i-step}
            w[_flat(window[1:], n), _flat(window[:-1], n), window[0], window[-1]] = 1.0
    return w


def _dress_output(group, w, g):
    add, _ = _tables(group)
    shift = group.index(g)
    return w[..., np.argsort(add[:, shift])]


def build_symmetry_mpo(cfg: ChainConfig, g) -> MPO:
    """Bond-one MPO of the global shift η_g = ⊗_i X_g."""
    return MPO([shift_matrix(cfg.group, g).T[None, None]] * cfg.length, 1.0, str(g))


def build_symmetry_operator(cfg: ChainConfig, phi: Character) -> DenseOperator:
    """⊗_i X_{χ̃⁻¹(φ)}: the symmetry labelled by φ through the bicharacter."""
    g = require_nondegenerate(cfg.chi).inverse(phi)
    return contract(build_symmetry_mpo(cfg, g), cfg.cap)


def build_word_mpo(cfg: ChainConfig, g, k: int) -> MPO:
    """Canonical single-layer MPO of η_g·(T⁺)^k."""
    if k == 0:
        return build_symmetry_mpo(cfg, g)
    direction = '+' if k > 0 else '-'
    dressing = None if g.is_identity else g
    return build_translation_mpo(cfg, direction, dressed_by=dressing, step=abs(k))


def identity_mpo(cfg: ChainConfig) -> MPO:
    return build_symmetry_mpo(cfg, cfg.group.identity)


def mpo_product(outer: MPO, inner: MPO, name=None) -> MPO:
    """outer∘inner (inner acts first); bond index = outer_bond * inner_dim + inner_bond."""
    if outer.length != inner.length or outer.phys_dim != inner.phys_dim:
        raise DimensionMismatchError(f'Cannot compose {outer!r} with {inner!r}')
    tensors = []
    for wb, wc in zip(outer.tensors, inner.tensors):
        w = np.einsum('xyim,uvmo->uxvyio', wc, wb)
        tensors.append(w.reshape(wb.shape[0] * wc.shape[0], wb.shape[1] * wc.shape[1], *w.shape[4:]))
    return MPO(tensors, outer.prefactor * inner.prefactor, name or f'{outer.name}.{inner.name}')


def dagger(mpo: MPO, name=None) -> MPO:
    return MPO([w.conj().transpose(0, 1, 3, 2) for w in mpo.tensors], np.conj(mpo.prefactor), name or f'{mpo.name}^+')


def contraction_cost(mpo: MPO):
    d, length = mpo.phys_dim, mpo.length
    bonds = mpo.bond_dims
    peak = max(bonds[j + 1] * d ** (2 * (j + 1)) for j in range(length - 1))
    flops = sum(
        bonds[0] * bonds[j] * bonds[(j + 1) % length] * d ** (2 * (j + 1))
        for j in range(1, length)
    )
    return {'dimension': d ** length, 'peak_elements': peak, 'flops': flops}


def contract(mpo: MPO, cap=None) -> DenseOperator:
    """Exact dense matrix [out, in] of a periodic MPO."""
    cap = settings.DUALITYKIT_CAP if cap is None else cap
    d, length = mpo.phys_dim, mpo.length
    dim = d ** length
    if dim > cap:
        raise CapExceededError(dim, cap)
    cost = contraction_cost(mpo)
    logger.debug('contracting %r: %s', mpo, cost)

    dense = np.zeros((dim, dim), dtype=complex)
    first, last = mpo.tensors[0], mpo.tensors[-1]
    for l0 in range(first.shape[0]):
        acc = first[l0]
        for w in mpo.tensors[1:-1]:
            acc = np.einsum('mio,mrjp->rijop', acc, w)
            acc = acc.reshape(acc.shape[0], acc.shape[1] * acc.shape[2], acc.shape[3] * acc.shape[4])
        block = np.einsum('mio,mjp->opij', acc, last[:, l0])
        dense += block.reshape(dim, dim)
    return mpo.prefactor * dense


def to_dense(op, cap=None) -> DenseOperator:
    return contract(op, cap) if isinstance(op, MPO) else np.asarray(op, dtype=complex)


def shift_matrix(group: FiniteAbelianGroup, g) -> np.ndarray:
    """X_g|a⟩ = |a+g⟩."""
    add, _ = _tables(group)
    n = group.order
    x = np.zeros((n, n))
    x[add[:, group.index(g)], np.arange(n)] = 1.0
    return x


def clock_matrix(group: FiniteAbelianGroup, phi: Character) -> np.ndarray:
    """Z_φ = diag φ(a)."""
    return np.diag([phi.value(a) for a in group.elements]).astype(complex)


def embed(cfg: ChainConfig, ops: dict) -> DenseOperator:
    """⊗ over sites with ops[j] at site j mod L and identity elsewhere."""
    n = cfg.site_dim
    factors = [np.eye(n, dtype=complex) for _ in range(cfg.length)]
    for j, m in ops.items():
        factors[j % cfg.length] = factors[j % cfg.length] @ m
    return functools.reduce(np.kron, factors)


def symmetric_projector(cfg: ChainConfig) -> DenseOperator:
    """P_sym = |A|⁻¹ Σ_g η_g."""
    total = sum(contract(build_symmetry_mpo(cfg, g), cfg.cap) for g in cfg.group.elements)
    return total / cfg.group.order


def translation_operator(cfg: ChainConfig, step: int = 1) -> DenseOperator:
    """Permutation with (T a)_i = a_{(i+step) mod L}, built directly on basis states."""
    n, length = cfg.site_dim, cfg.length
    perm = np.zeros((cfg.dimension, cfg.dimension))
    for state in itertools.product(range(n), repeat=length):
        shifted = tuple(state[(i + step) % length] for i in range(length))
        perm[_flat(shifted, n), _flat(state, n)] = 1.0
    return perm


def site_projectors(cfg: ChainConfig):
    """P^X_j = |A|⁻¹ Σ_g X_g and P^ZZ_{j,j+1} = |A|⁻¹ Σ_φ Z_φ ⊗ Z_φ† as dense operators, per site j."""
    group, n = cfg.group, cfg.site_dim
    px = sum(shift_matrix(group, g) for g in group.elements) / n
    pzz = {}
    px_ops = {}
    for j in range(cfg.length):
        px_ops[j] = embed(cfg, {j: px})
        pzz[j] = sum(
            embed(cfg, {j: clock_matrix(group, phi), j + 1: clock_matrix(group, phi).conj().T})
            for phi in group.characters
        ) / n
    return px_ops, pzz


def build_hamiltonian(cfg: ChainConfig, spec: HamiltonianSpec) -> DenseOperator:
    if spec.model == 'clock':
        J = spec.couplings.get('J', 1.0)
        h = spec.couplings.get('h', 1.0)
        px, pzz = site_projectors(cfg)
        H = -J * sum(pzz.values()) - h * sum(px.values())
    elif spec.model == 'cluster':
        H = _cluster_hamiltonian(cfg, spec.couplings.get('J', 1.0))
    elif spec.model == 'custom':
        if not spec.terms:
            raise UnsupportedChainError('Custom Hamiltonian needs at least one term')
        H = np.zeros((cfg.dimension, cfg.dimension), dtype=complex)
        for term in spec.terms:
            ops = {int(k): np.asarray(v, dtype=complex) for k, v in term['ops'].items()}
            for j in range(cfg.length):
                H += term.get('coupling', 1.0) * embed(cfg, {j + k: m for k, m in ops.items()})
    else:
        raise UnsupportedChainError(f'Unknown Hamiltonian model {spec.model!r}')
    error = float(np.max(np.abs(H - H.conj().T)))
    if error > settings.DUALITYKIT_TOL_EXACT:
        raise UnsupportedChainError(f'{spec.model} Hamiltonian is not Hermitian (error {error:.3g})')
    return H


_PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
_PAULI_Z = np.diag([1.0, -1.0]).astype(complex)
_QUBIT_I = np.eye(2, dtype=complex)


def _cluster_hamiltonian(cfg, J):
    """Cells are qubit pairs (x_j, y_j): −Σ_j (Z^y_{j−1} X^x_j Z^y_j + Z^x_j X^y_j Z^x_{j+1})."""
    if cfg.group.factors != (2, 2):
        raise UnsupportedChainError(f'The cluster model needs Z2xZ2 cells, got {cfg.group}')
    if cfg.chi != default_bicharacter(cfg.group):
        # the qubit pair (x, y) is paired with itself, x with x and y with y
        raise UnsupportedChainError(f'The cluster model needs the diagonal pairing, got {cfg.chi}')
    zx, xx = np.kron(_PAULI_Z, _QUBIT_I), np.kron(_PAULI_X, _QUBIT_I)
    zy, xy = np.kron(_QUBIT_I, _PAULI_Z), np.kron(_QUBIT_I, _PAULI_X)
    H = np.zeros((cfg.dimension, cfg.dimension), dtype=complex)
    for j in range(cfg.length):
        H -= J * embed(cfg, {j - 1: zy, j: xx @ zy})
        H -= J * embed(cfg, {j: zx @ xy, j + 1: zx})
    return H


@dataclass
class IdentityReport:
    identity: str
    length: int
    group: str
    max_error: float
    fitted_scale: complex
    passed: bool
    detail: dict = field(default_factory=dict)

    def as_dict(self):
        return {
            'identity': self.identity,
            'L': self.length,
            'group': self.group,
            'max_error': float(self.max_error),
            'fitted_scale': json_scalar(self.fitted_scale),
            'pass': bool(self.passed),
            'detail': self.detail,
        }


def json_scalar(value, digits=12):
    """Real when the imaginary part vanishes, else [re, im]; None passes through."""
    if value is None:
        return None
    value = complex(value)
    if abs(value.imag) <= 10.0 ** -digits:
        return round(value.real, digits)
    return [round(value.real, digits), round(value.imag, digits)]


def dense_product(factors, cap):
    if isinstance(factors, (MPO, np.ndarray)):
        factors = [factors]
    dense = [to_dense(f, cap) for f in factors]
    shape = dense[0].shape
    for m in dense[1:]:
        if m.shape != shape:
            raise DimensionMismatchError(f'Operator shapes {shape} and {m.shape} differ')
    return functools.reduce(np.matmul, dense)


def verify_identity(cfg: ChainConfig, name: str, lhs, rhs, tol=None) -> IdentityReport:
    """‖LHS − c·RHS‖_max for the least-squares scale c; factor lists multiply left to right."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    left, right = dense_product(lhs, cfg.cap), dense_product(rhs, cfg.cap)
    if left.shape != right.shape:
        raise DimensionMismatchError(f'{name}: shapes {left.shape} and {right.shape} differ')
    norm = np.vdot(right, right)
    scale = np.vdot(right, left) / norm if abs(norm) > 0 else 1.0
    error = float(np.max(np.abs(left - scale * right), initial=0.0))
    report = IdentityReport(name, cfg.length, str(cfg.group), error, complex(scale), error <= tol)
    logger.debug('%s at %s: error %.3g, scale %s', name, cfg, error, scale)
    return report


def fit_decomposition(op, basis, tol=None, convex=True):
    """Least-squares coefficients of op over dense basis operators, rescaled to sum 1 when convex."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    target = to_dense(op).ravel()
    columns = np.stack([to_dense(b).ravel() for b in basis], axis=1)
    coefs, *_ = np.linalg.lstsq(columns, target, rcond=None)
    residual = float(np.max(np.abs(columns @ coefs - target), initial=0.0))
    if convex and abs(coefs.sum()) > tol:
        coefs = coefs / coefs.sum()
    return coefs, residual


def word_candidates(cfg: ChainConfig):
    """(name, dense) for η_g T^k and (Σ_g η_g) T^k, k = 0..L-1."""
    group = cfg.group
    sym = {str(g): contract(build_symmetry_mpo(cfg, g), cfg.cap) for g in group.elements}
    total = sum(sym.values())
    for k in range(cfg.length):
        shift = translation_operator(cfg, k)
        word = f'T+^{k}' if k else ''
        for g in group.elements:
            yield (f'{g}{word}' if not g.is_identity or not word else word), sym[str(g)] @ shift
        yield f'(sum_g eta_g){word}', total @ shift


def discover_word(cfg: ChainConfig, op, tol=None):
    """First candidate word W with op ∝ W, as (name, scale) or None."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    dense = to_dense(op, cfg.cap)
    for name, candidate in word_candidates(cfg):
        report = verify_identity(cfg, name, dense, candidate, tol)
        if report.passed and abs(report.fitted_scale) > tol:
            return name, report.fitted_scale
    return None


def check_self_duality(cfg: ChainConfig, duality, hamiltonian, tol=None):
    """[D, H] exactly and up to translation D H = (T^s H T^-s) D; records the passing variant."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    D = to_dense(duality, cfg.cap)
    H = hamiltonian
    exact = float(np.max(np.abs(D @ H - H @ D)))
    translated = []
    for s in range(1, cfg.length):
        T = translation_operator(cfg, s)
        moved = T @ H @ T.conj().T
        translated.append({'shift': s, 'error': float(np.max(np.abs(D @ H - moved @ D)))})
    best = min(translated, key=lambda t: t['error']) if translated else {'shift': 0, 'error': exact}
    if exact <= tol:
        variant = 'exact'
    elif best['error'] <= tol:
        variant = f'translation by {best["shift"]}'
    else:
        variant = None
    logger.info('self-duality at %s: exact %.3g, best translated %.3g (shift %d)', cfg, exact, best['error'],
                best['shift'])
    return {'exact_error': exact, 'translated': best, 'variant': variant, 'pass': variant is not None}


@dataclass
class Intertwiner:
    """ι : bond(a) → bond(b)⊗bond(c) with ι·W_a = W_{b∘c}·ι on every site."""
    tensor: np.ndarray
    nullity: int

    @property
    def unique(self):
        return self.nullity == 1

    @property
    def matrix(self):
        db, dc, da = self.tensor.shape
        return self.tensor.reshape(db * dc, da)


def find_intertwiner(a: MPO, b: MPO, c: MPO, tol=None):
    tol = settings.DUALITYKIT_TOL_EXACT if tol is None else tol
    bc = mpo_product(b, c)
    blocks = []
    seen = set()
    for wa, wbc in zip(a.tensors, bc.tensors):
        key = (wa.tobytes(), wbc.tobytes())
        if key in seen:
            continue
        seen.add(key)
        dbc, da = wbc.shape[0], wa.shape[0]
        m1 = np.einsum('lp,qrio->lriopq', np.eye(dbc), wa)
        m2 = np.einsum('lpio,rq->lriopq', wbc, np.eye(da))
        blocks.append((m1 - m2).reshape(-1, dbc * da))
    kernel = scipy.linalg.null_space(np.vstack(blocks), rcond=tol)
    nullity = kernel.shape[1]
    if nullity == 0:
        logger.info('no intertwiner %s -> %s.%s', a.name, b.name, c.name)
        return None
    vec = kernel[:, 0]
    da = a.bond_dims[0]
    vec = vec * math.sqrt(da) / np.linalg.norm(vec)
    pivot = vec[np.argmax(np.abs(vec))]
    vec = vec * (abs(pivot) / pivot)
    vec[np.abs(vec) < tol] = 0.0
    tensor = vec.reshape(b.bond_dims[0], c.bond_dims[0], da)
    return Intertwiner(tensor, nullity)


def word_name(group, g, k):
    base = '' if g.is_identity else str(g)
    if k == 0:
        return base or '1'
    return base + ('T+' * k if k > 0 else 'T-' * -k)


def f_symbol_scalar(cfg: ChainConfig, x, y, z, tol=None):
    """Compare the two bracketings ρ_xyz → ρ_x∘ρ_y∘ρ_z for words (g, k) = η_g T^k; 1 when the F-symbol is trivial."""
    tol = settings.DUALITYKIT_TOL_EXACT if tol is None else tol

    def word(*parts):
        g = cfg.group.identity
        for h, _ in parts:
            g = g + h
        return build_word_mpo(cfg, g, sum(k for _, k in parts))

    rx, ry, rz = word(x), word(y), word(z)
    pieces = {
        'xy': find_intertwiner(word(x, y), rx, ry, tol),
        'xy,z': find_intertwiner(word(x, y, z), word(x, y), rz, tol),
        'yz': find_intertwiner(word(y, z), ry, rz, tol),
        'x,yz': find_intertwiner(word(x, y, z), rx, word(y, z), tol),
    }
    names = [word_name(cfg.group, *w) for w in (x, y, z)]
    missing = [k for k, v in pieces.items() if v is None]
    if missing:
        return {'words': names, 'scalar': None, 'residual': None, 'unique': False, 'missing': missing}

    dz, dx = rz.bond_dims[0], rx.bond_dims[0]
    path1 = np.kron(pieces['xy'].matrix, np.eye(dz)) @ pieces['xy,z'].matrix
    path2 = np.kron(np.eye(dx), pieces['yz'].matrix) @ pieces['x,yz'].matrix
    scalar = np.vdot(path2, path1) / np.vdot(path2, path2)
    residual = float(np.max(np.abs(path1 - scalar * path2)))
    return {
        'words': names,
        'scalar': complex(scalar),
        'residual': residual,
        'unique': all(p.unique for p in pieces.values()),
        'missing': [],
    }


def channel_action(op_map, operator) -> DenseOperator:
    """Φ(O) = W O W† / ‖W‖₂²."""
    W = to_dense(op_map)
    norm = np.linalg.norm(W, 2)
    return W @ operator @ W.conj().T / norm ** 2


def _signed_offset(k, j, length):
    offset = (k - j) % length
    return offset - length if offset > length // 2 else offset


def qca_generator_map(cfg: ChainConfig, tol=None):
    """Image of each symmetric generator P^X_j, P^ZZ_{j,j+1} under the duality, matched against the generator set."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    D = contract(build_duality_mpo(cfg, '+'), cfg.cap)
    psym = symmetric_projector(cfg)
    px, pzz = site_projectors(cfg)
    generators = [('X', j, m) for j, m in px.items()] + [('ZZ', j, m) for j, m in pzz.items()]
    images = {(kind, j): channel_action(D, m) for kind, j, m in generators}

    entries = []
    for kind, j, m in generators:
        image = images[(kind, j)]
        match = None
        for other_kind, k, g in generators:
            if np.max(np.abs(image - g @ psym)) <= tol:
                match = (other_kind, k)
                break
        isometric = abs(np.linalg.norm(image) - np.linalg.norm(m @ psym)) <= tol
        entries.append({
            'generator': f'P{kind}_{j}',
            'image': f'P{match[0]}_{match[1]}' if match else None,
            'offset': _signed_offset(match[1], j, cfg.length) if match else None,
            'isometric': bool(isometric),
        })

    multiplicative = 0.0
    for (ka, ja, a), (kb, jb, b) in itertools.product(generators, repeat=2):
        lhs = channel_action(D, a @ b)
        rhs = images[(ka, ja)] @ images[(kb, jb)]
        multiplicative = max(multiplicative, float(np.max(np.abs(lhs - rhs))))

    bijective = len({e['image'] for e in entries if e['image']}) == len(entries)
    spread = max((abs(e['offset']) for e in entries if e['offset'] is not None), default=None)
    passed = (
        all(e['image'] for e in entries) and bijective and spread is not None and spread <= 1
        and multiplicative <= tol and all(e['isometric'] for e in entries)
    )
    return {
        'generators': entries,
        'bijective': bijective,
        'spread': spread,
        'multiplicative_error': multiplicative,
        'pass': passed,
    }


def double_duality_shift(cfg: ChainConfig, g, site: int = 0, tol=None):
    """α²(X_g at site) compared with X_g at every site times P_sym; returns the offset that matches."""
    tol = settings.DUALITYKIT_TOL_EIGEN if tol is None else tol
    D = contract(build_duality_mpo(cfg, '+'), cfg.cap)
    psym = symmetric_projector(cfg)
    x = shift_matrix(cfg.group, g)
    image = channel_action(D, channel_action(D, embed(cfg, {site: x})))
    errors = {k: float(np.max(np.abs(image - embed(cfg, {k: x}) @ psym))) for k in range(cfg.length)}
    k = min(errors, key=errors.get)
    return {
        'offset': _signed_offset(k, site, cfg.length) if errors[k] <= tol else None,
        'error': errors[k],
        'pass': errors[k] <= tol,
    }


def dump_dense(op, path) -> Path:
    """Row-major little-endian complex128."""
    path = Path(path)
    np.ascontiguousarray(to_dense(op), dtype='<c16').tofile(path)
    return path
