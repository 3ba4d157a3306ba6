"""
Forward-mode automatic differentiation
Dual numbers carrying a gradient vector over several input directions
"""

from typing import Sequence, Union

import numpy as np

Number = Union[int, float]


class Dual:
    """Value plus gradient with respect to `size` independent inputs"""

    __slots__ = ('value', 'grad')
    # numpy scalars defer to the reflected operators below
    __array_ufunc__ = None

    def __init__(self, value: float, grad: np.ndarray):
        self.value = float(value)
        self.grad = np.asarray(grad, dtype=float)

    @classmethod
    def variable(cls, value: float, index: int, size: int) -> 'Dual':
        grad = np.zeros(size)
        grad[index] = 1.0
        return cls(value, grad)

    @classmethod
    def constant(cls, value: float, size: int) -> 'Dual':
        return cls(value, np.zeros(size))

    def __repr__(self):
        return f"Dual({self.value!r}, {self.grad!r})"

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value + other.value, self.grad + other.grad)
        return Dual(self.value + other, self.grad)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.value, -self.grad)

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value - other.value, self.grad - other.grad)
        return Dual(self.value - other, self.grad)

    def __rsub__(self, other):
        return Dual(other - self.value, -self.grad)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value * other.value, self.value * other.grad + self.grad * other.value)
        return Dual(self.value * other, self.grad * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            return Dual(self.value / other.value,
                        (self.grad * other.value - self.value * other.grad) / other.value ** 2)
        return Dual(self.value / other, self.grad / other)

    def __rtruediv__(self, other):
        return Dual(other / self.value, -other * self.grad / self.value ** 2)

    def __pow__(self, power: Number):
        return Dual(self.value ** power, power * self.value ** (power - 1) * self.grad)

    def sqrt(self) -> 'Dual':
        root = np.sqrt(self.value)
        return Dual(root, self.grad / (2.0 * root))


def sqrt(x):
    """Square root for floats and duals"""
    if isinstance(x, Dual):
        return x.sqrt()
    return np.sqrt(x)


def value_of(x) -> float:
    return x.value if isinstance(x, Dual) else float(x)


def grad_of(x, size: int) -> np.ndarray:
    return x.grad if isinstance(x, Dual) else np.zeros(size)


def seed(values: Sequence[float]):
    """One dual variable per input value"""
    size = len(values)
    return [Dual.variable(v, i, size) for i, v in enumerate(values)]
