import cmath
import functools
import itertools
import logging
import math
import re
from dataclasses import dataclass
from fractions import Fraction

from dualities.exceptions import BicharacterError, DegenerateBicharacterError, DomainError

logger = logging.getLogger(__name__)

GROUP_SPEC_RE = re.compile(r'^Z(\d+)(xZ(\d+))*$')


def root_of_unity(turn: Fraction) -> complex:
    """exp(2πi·turn), exact at quarter turns so ±1 and ±i carry no rounding."""
    turn = turn % 1
    if (4 * turn).denominator == 1:
        return (1, 1j, -1, -1j)[int(4 * turn)]
    return cmath.exp(2j * math.pi * turn.numerator / turn.denominator)


@dataclass(frozen=True)
class GroupElement:
    factors: tuple
    coords: tuple

    def __add__(self, other):
        return GroupElement(self.factors, tuple((x + y) % n for x, y, n in zip(self.coords, other.coords, self.factors)))

    def __neg__(self):
        return GroupElement(self.factors, tuple((-x) % n for x, n in zip(self.coords, self.factors)))

    def __sub__(self, other):
        return self + (-other)

    @property
    def is_identity(self):
        return not any(self.coords)

    def __str__(self):
        if self.is_identity:
            return '1'
        if self.factors == (2,):
            return 'eta'
        if len(self.factors) == 1:
            return f'eta{self.coords[0]}'
        return 'eta(' + ','.join(str(c) for c in self.coords) + ')'


@dataclass(frozen=True)
class Character:
    """φ(a) = exp(2πi Σ yᵢaᵢ/nᵢ) for coordinate vector y."""
    factors: tuple
    coords: tuple

    def angle(self, a: GroupElement) -> Fraction:
        return sum((Fraction(y * x, n) for y, x, n in zip(self.coords, a.coords, self.factors)), Fraction(0)) % 1

    def value(self, a: GroupElement) -> complex:
        return root_of_unity(self.angle(a))

    def __mul__(self, other):
        return Character(self.factors, tuple((x + y) % n for x, y, n in zip(self.coords, other.coords, self.factors)))

    def conjugate(self):
        return Character(self.factors, tuple((-x) % n for x, n in zip(self.coords, self.factors)))

    @property
    def is_trivial(self):
        return not any(self.coords)

    def __str__(self):
        if self.is_trivial:
            return 'triv'
        if self.factors == (2,):
            return 'sign'
        return 'chi(' + ','.join(str(c) for c in self.coords) + ')'


@dataclass(frozen=True)
class FiniteAbelianGroup:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, 'factors', tuple(int(n) for n in self.factors))
        for n in self.factors:
            if n < 2:
                raise DomainError(f'Cyclic factor {n} must be at least 2')

    @classmethod
    def parse(cls, spec: str):
        """Parse `Z<n>(xZ<m>)*`; trivial factors `Z1` are dropped."""
        spec = (spec or '').strip()
        if not GROUP_SPEC_RE.match(spec):
            raise DomainError(f'Invalid group spec {spec!r}; expected Z<n>(xZ<m>)*, e.g. Z2 or Z2xZ2')
        orders = [int(part[1:]) for part in spec.split('x')]
        if any(n < 1 for n in orders):
            raise DomainError(f'Invalid group spec {spec!r}; cyclic orders must be positive')
        return cls(tuple(n for n in orders if n > 1))

    @property
    def order(self):
        return math.prod(self.factors)

    @property
    def exponent(self):
        return math.lcm(*self.factors) if self.factors else 1

    @property
    def identity(self):
        return GroupElement(self.factors, (0,) * len(self.factors))

    @functools.cached_property
    def elements(self):
        return [GroupElement(self.factors, coords) for coords in itertools.product(*(range(n) for n in self.factors))]

    @functools.cached_property
    def _index(self):
        return {e: i for i, e in enumerate(self.elements)}

    def index(self, a: GroupElement) -> int:
        self.validate(a)
        return self._index[a]

    def element(self, *coords):
        a = GroupElement(self.factors, tuple(coords))
        self.validate(a)
        return a

    def contains(self, a) -> bool:
        return (
            isinstance(a, GroupElement)
            and a.factors == self.factors
            and all(0 <= x < n for x, n in zip(a.coords, self.factors))
        )

    def validate(self, a):
        if not self.contains(a):
            raise DomainError(f'{a!r} is not an element of {self}')

    @functools.cached_property
    def addition_table(self):
        return [[self._index[a + b] for b in self.elements] for a in self.elements]

    @functools.cached_property
    def characters(self):
        return [Character(self.factors, e.coords) for e in self.elements]

    def character_index(self, phi: Character) -> int:
        return self._index[GroupElement(self.factors, phi.coords)]

    def __str__(self):
        return 'x'.join(f'Z{n}' for n in self.factors) or 'Z1'


@dataclass(frozen=True)
class Bicharacter:
    """χ(a,b) = exp(2πi Σ M[i][j] aᵢ bⱼ / exponent(A)), stored as the integer matrix M."""
    group: FiniteAbelianGroup
    matrix: tuple

    def __post_init__(self):
        k = len(self.group.factors)
        matrix = tuple(tuple(int(x) for x in row) for row in self.matrix)
        if len(matrix) != k or any(len(row) != k for row in matrix):
            raise BicharacterError(f'Bicharacter matrix must be {k}x{k} for {self.group}')
        object.__setattr__(self, 'matrix', matrix)
        m = self.group.exponent
        for i, j in itertools.product(range(k), repeat=2):
            if (matrix[i][j] * self.group.factors[i]) % m or (matrix[i][j] * self.group.factors[j]) % m:
                raise BicharacterError(
                    f'M[{i}][{j}] = {matrix[i][j]} is not well defined on {self.group}; '
                    f'each entry times the orders of its row and column factor must vanish mod {m}'
                )
        if not self.is_symmetric():
            raise BicharacterError(f'Bicharacter matrix {matrix} is not symmetric on {self.group}')

    def is_symmetric(self):
        # symmetric on all pairs iff symmetric on pairs of generators
        k = len(self.group.factors)
        m = self.group.exponent
        return all((self.matrix[i][j] - self.matrix[j][i]) % m == 0 for i, j in itertools.product(range(k), repeat=2))

    def angle(self, a, b) -> Fraction:
        return _angle(self.matrix, a.coords, b.coords, self.group.exponent)

    def __str__(self):
        return f'chi{list(list(row) for row in self.matrix)} on {self.group}'


def _angle(matrix, a, b, m) -> Fraction:
    total = sum(matrix[i][j] * a[i] * b[j] for i in range(len(a)) for j in range(len(b)))
    return Fraction(total % m, m)


@dataclass(frozen=True)
class ChiTilde:
    """a ↦ χ(a, ·) : A → Â."""
    bicharacter: Bicharacter
    mapping: dict
    is_isomorphism: bool

    def __call__(self, a: GroupElement) -> Character:
        self.bicharacter.group.validate(a)
        return self.mapping[a]

    @functools.cached_property
    def _inverse(self):
        return {phi: a for a, phi in self.mapping.items()}

    def inverse(self, phi: Character) -> GroupElement:
        if not self.is_isomorphism:
            raise DegenerateBicharacterError(f'{self.bicharacter} is degenerate; chi_tilde has no inverse')
        return self._inverse[phi]


def parse_group(spec: str) -> FiniteAbelianGroup:
    return FiniteAbelianGroup.parse(spec)


def elements(g: FiniteAbelianGroup):
    return list(g.elements)


def characters(g: FiniteAbelianGroup):
    return list(g.characters)


def default_bicharacter(g: FiniteAbelianGroup) -> Bicharacter:
    """The diagonal pairing exp(2πi Σ aᵢbᵢ/nᵢ), non-degenerate for every A."""
    m = g.exponent
    k = len(g.factors)
    return Bicharacter(g, tuple(tuple(m // g.factors[i] if i == j else 0 for j in range(k)) for i in range(k)))


def chi_angle(chi: Bicharacter, a: GroupElement, b: GroupElement) -> Fraction:
    chi.group.validate(a)
    chi.group.validate(b)
    return chi.angle(a, b)


def chi_eval(chi: Bicharacter, a: GroupElement, b: GroupElement) -> complex:
    return root_of_unity(chi_angle(chi, a, b))


@functools.lru_cache(maxsize=64)
def chi_tilde(chi: Bicharacter) -> ChiTilde:
    g = chi.group
    m = g.exponent
    mapping = {}
    for a in g.elements:
        # y_j = Σ_i M[i][j] a_i · n_j / m, integral because M is well defined
        coords = tuple(
            (sum(chi.matrix[i][j] * a.coords[i] for i in range(len(g.factors))) * n_j // m) % n_j
            for j, n_j in enumerate(g.factors)
        )
        mapping[a] = Character(g.factors, coords)
    bijective = len(set(mapping.values())) == g.order
    return ChiTilde(chi, mapping, bijective)


def is_nondegenerate(chi: Bicharacter) -> bool:
    return chi_tilde(chi).is_isomorphism


def require_nondegenerate(chi: Bicharacter) -> ChiTilde:
    tilde = chi_tilde(chi)
    if not tilde.is_isomorphism:
        kernel = [str(a) for a, phi in tilde.mapping.items() if phi.is_trivial]
        raise DegenerateBicharacterError(f'{chi} is degenerate; kernel of chi_tilde is {kernel}')
    return tilde
