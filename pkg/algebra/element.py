"""
Grassmann elements
Multivectors over a generator table with complex coefficients and the graded product
"""

import logging
from types import MappingProxyType
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from algebra.generators import GeneratorTable, TableMismatchError

logger = logging.getLogger(__name__)

Scalar = Union[int, float, complex]
_SCALAR_TYPES = (int, float, complex)


def popcount(mask: int) -> int:
    return bin(mask).count('1')


def reorder_sign(left: int, right: int) -> int:
    """
    Sign picked up when the ascending monomial `left` times the ascending
    monomial `right` is brought into ascending order.

    Returns 0 when the monomials share a generator.
    """
    if left & right:
        return 0
    swaps = 0
    remaining = right
    while remaining:
        low = remaining & -remaining
        bit = low.bit_length() - 1
        swaps += popcount(left >> (bit + 1))
        remaining ^= low
    return -1 if swaps & 1 else 1


def sequence_sign(positions: Sequence[int]) -> Tuple[int, int]:
    """Mask and permutation sign of an ordered product of distinct generators"""
    if len(set(positions)) != len(positions):
        return 0, 0
    inversions = sum(1 for i in range(len(positions)) for j in range(i + 1, len(positions))
                     if positions[i] > positions[j])
    mask = 0
    for pos in positions:
        mask |= 1 << pos
    return mask, (-1 if inversions & 1 else 1)


class GrassmannElement:
    """
    Immutable element of the Grassmann algebra over a GeneratorTable.

    Terms map a bitmask (generators in ascending table order) to a nonzero
    complex coefficient.
    """

    __slots__ = ('table', '_terms')
    __array_ufunc__ = None

    def __init__(self, table: GeneratorTable, terms: Optional[Dict[int, Scalar]] = None):
        cleaned = {}
        for mask, coefficient in (terms or {}).items():
            coefficient = complex(coefficient)
            if coefficient != 0:
                cleaned[int(mask)] = coefficient
        self.table = table
        self._terms = cleaned

    # construction

    @classmethod
    def zero(cls, table: GeneratorTable) -> 'GrassmannElement':
        return cls(table)

    @classmethod
    def scalar(cls, table: GeneratorTable, value: Scalar) -> 'GrassmannElement':
        return cls(table, {0: value})

    @classmethod
    def generator(cls, table: GeneratorTable, name: str) -> 'GrassmannElement':
        return cls(table, {1 << table.position(name): 1})

    @classmethod
    def monomial(cls, table: GeneratorTable, names: Iterable[str], coefficient: Scalar = 1) -> 'GrassmannElement':
        """Product of the named generators in the order given"""
        mask, sign = sequence_sign([table.position(name) for name in names])
        if sign == 0:
            return cls(table)
        return cls(table, {mask: sign * coefficient})

    @classmethod
    def generators(cls, table: GeneratorTable, names: Iterable[str]) -> List['GrassmannElement']:
        return [cls.generator(table, name) for name in names]

    # inspection

    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def items(self) -> List[Tuple[int, complex]]:
        """Terms in stable order: by grade, then by mask"""
        return sorted(self._terms.items(), key=lambda item: (popcount(item[0]), item[0]))

    @property
    def body(self) -> complex:
        return self._terms.get(0, 0j)

    @property
    def soul(self) -> 'GrassmannElement':
        return GrassmannElement(self.table, {m: c for m, c in self._terms.items() if m})

    def grades(self) -> List[int]:
        return sorted({popcount(mask) for mask in self._terms})

    def grade_part(self, grade: int) -> 'GrassmannElement':
        return GrassmannElement(self.table, {m: c for m, c in self._terms.items() if popcount(m) == grade})

    def parity(self) -> int:
        """Grassmann parity (0 even, 1 odd); zero counts as even"""
        parities = {popcount(mask) & 1 for mask in self._terms}
        if len(parities) > 1:
            raise ValueError("Element is not homogeneous in Grassmann parity")
        return parities.pop() if parities else 0

    def is_homogeneous(self) -> bool:
        return len({popcount(mask) & 1 for mask in self._terms}) <= 1

    def is_even(self) -> bool:
        return all(popcount(mask) % 2 == 0 for mask in self._terms)

    def coefficient(self, names: Iterable[str]) -> complex:
        """Coefficient of the monomial written in the given generator order"""
        mask, sign = sequence_sign([self.table.position(name) for name in names])
        if sign == 0:
            return 0j
        return sign * self._terms.get(mask, 0j)

    def max_abs(self) -> float:
        return max((abs(c) for c in self._terms.values()), default=0.0)

    def is_zero(self, tol: float = 0.0) -> bool:
        return self.max_abs() <= tol

    def is_close(self, other: 'GrassmannElement', tol: float = 1e-14) -> bool:
        return (self - other).is_zero(tol)

    def chop(self, tol: float = 1e-15) -> 'GrassmannElement':
        """Drop coefficient parts below tol"""
        chopped = {}
        for mask, c in self._terms.items():
            real = c.real if abs(c.real) > tol else 0.0
            imag = c.imag if abs(c.imag) > tol else 0.0
            chopped[mask] = complex(real, imag)
        return GrassmannElement(self.table, chopped)

    # arithmetic

    def _check_table(self, other: 'GrassmannElement'):
        if other.table is not self.table and other.table != self.table:
            raise TableMismatchError("Grassmann elements belong to different generator tables")

    def _coerce(self, other) -> Optional['GrassmannElement']:
        if isinstance(other, GrassmannElement):
            self._check_table(other)
            return other
        if isinstance(other, _SCALAR_TYPES) or hasattr(other, '__complex__'):
            return GrassmannElement.scalar(self.table, complex(other))
        return None

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        terms = dict(self._terms)
        for mask, c in other._terms.items():
            terms[mask] = terms.get(mask, 0j) + c
        return GrassmannElement(self.table, terms)

    __radd__ = __add__

    def __neg__(self):
        return GrassmannElement(self.table, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return other - self

    def scale(self, factor: Scalar) -> 'GrassmannElement':
        factor = complex(factor)
        return GrassmannElement(self.table, {m: factor * c for m, c in self._terms.items()})

    def product(self, other: 'GrassmannElement') -> 'GrassmannElement':
        """Graded product; the result is canonically ordered"""
        self._check_table(other)
        terms: Dict[int, complex] = {}
        for left, a in self._terms.items():
            for right, b in other._terms.items():
                sign = reorder_sign(left, right)
                if sign:
                    mask = left | right
                    terms[mask] = terms.get(mask, 0j) + sign * a * b
        return GrassmannElement(self.table, terms)

    def __mul__(self, other):
        if isinstance(other, GrassmannElement):
            return self.product(other)
        if isinstance(other, _SCALAR_TYPES) or hasattr(other, '__complex__'):
            return self.scale(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, _SCALAR_TYPES) or hasattr(other, '__complex__'):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, _SCALAR_TYPES):
            return self.scale(1.0 / other)
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, GrassmannElement):
            return NotImplemented
        return self.table == other.table and self._terms == other._terms

    __hash__ = None

    # conjugation and calculus

    def conjugate(self) -> 'GrassmannElement':
        """
        Complex/Grassmann conjugation: coefficients conjugated, generators
        mapped to their conjugates and the order of every product reversed.
        """
        terms: Dict[int, complex] = {}
        for mask, c in self._terms.items():
            positions = [pos for pos in range(len(self.table)) if mask >> pos & 1]
            images = [self.table.conjugate_position(pos) for pos in reversed(positions)]
            if any(image < 0 for image in images):
                raise ValueError("Conjugation is undefined for a generator without a partner")
            new_mask, sign = sequence_sign(images)
            terms[new_mask] = terms.get(new_mask, 0j) + sign * c.conjugate()
        return GrassmannElement(self.table, terms)

    def left_derivative(self, name: str) -> 'GrassmannElement':
        """Derivative acting from the left"""
        pos = self.table.position(name)
        bit = 1 << pos
        terms = {}
        for mask, c in self._terms.items():
            if mask & bit:
                sign = -1 if popcount(mask & (bit - 1)) & 1 else 1
                terms[mask ^ bit] = sign * c
        return GrassmannElement(self.table, terms)

    def right_derivative(self, name: str) -> 'GrassmannElement':
        """Derivative acting from the right"""
        pos = self.table.position(name)
        bit = 1 << pos
        terms = {}
        for mask, c in self._terms.items():
            if mask & bit:
                sign = -1 if popcount(mask >> (pos + 1)) & 1 else 1
                terms[mask ^ bit] = sign * c
        return GrassmannElement(self.table, terms)

    def power(self, exponent: float) -> 'GrassmannElement':
        """
        Real power of an even element through the binomial series in its soul.

        The series terminates because the soul is nilpotent, so the result is exact.
        """
        if not self.is_even():
            raise ValueError("Only even elements can be raised to a power")
        body = self.body
        if body == 0:
            if float(exponent).is_integer() and exponent >= 0:
                result = GrassmannElement.scalar(self.table, 1)
                for _ in range(int(exponent)):
                    result = result * self
                return result
            raise ValueError("Non-integer power of an element with zero body")

        soul = self.soul
        result = GrassmannElement.scalar(self.table, body ** exponent)
        coefficient = 1.0
        soul_power = GrassmannElement.scalar(self.table, 1)
        k = 0
        while True:
            k += 1
            soul_power = soul_power * soul
            if soul_power.is_zero():
                break
            coefficient *= (exponent - k + 1) / k
            result = result + soul_power.scale(coefficient * body ** (exponent - k))
        return result

    def sqrt(self) -> 'GrassmannElement':
        return self.power(0.5)

    # text form

    def dump(self, precision: int = 15) -> str:
        """Human-readable form with stable term ordering, one term per line"""
        if not self._terms:
            return '0'
        lines = []
        for mask, c in self.items():
            names = [self.table.name(pos) for pos in range(len(self.table)) if mask >> pos & 1]
            lines.append(f"({c.real:+.{precision}g}{c.imag:+.{precision}g}j) {' '.join(names) or '1'}".rstrip())
        return '\n'.join(lines)

    def __repr__(self):
        return f"GrassmannElement({self.dump(6).replace(chr(10), ' + ')})"
