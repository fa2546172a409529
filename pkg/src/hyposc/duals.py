"""First-order dual numbers for forward-mode differentiation.

A ``Dual(re, im)`` carries a value and one directional derivative through
arithmetic and the handful of transcendental functions the observables need.
Components may themselves be ``Dual`` (nesting gives exact second
derivatives, which the Jacobi-identity checks use).

The module-level functions (``sinh``, ``cos``, ...) dispatch on type so the
same evaluator code runs on plain floats and on duals.
"""

import math
from dataclasses import dataclass

_TWO_PI = 2.0 * math.pi


def _real(x):
    """Descend to the underlying float of a (possibly nested) dual."""
    while isinstance(x, Dual):
        x = x.re
    return x


@dataclass(slots=True, eq=False)
class Dual:
    re: float
    im: float = 0.0

    # ---- arithmetic -------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re + other.re, self.im + other.im)
        return Dual(self.re + other, self.im)

    __radd__ = __add__

    def __sub__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re - other.re, self.im - other.im)
        return Dual(self.re - other, self.im)

    def __rsub__(self, other):
        return Dual(other - self.re, -self.im)

    def __mul__(self, other):
        if isinstance(other, Dual):
            return Dual(self.re * other.re, self.re * other.im + self.im * other.re)
        return Dual(self.re * other, self.im * other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Dual):
            inv = 1.0 / other.re
            return Dual(self.re * inv, (self.im - self.re * inv * other.im) * inv)
        return Dual(self.re / other, self.im / other)

    def __rtruediv__(self, other):
        inv = 1.0 / self.re
        return Dual(other * inv, -other * inv * inv * self.im)

    def __neg__(self):
        return Dual(-self.re, -self.im)

    def __pow__(self, n):
        if not isinstance(n, int):
            raise TypeError("dual powers are integer-only; use sqrt() for roots")
        if n == 0:
            return Dual(1.0, 0.0 * self.im)
        if n < 0:
            return 1.0 / self.__pow__(-n)
        out = self
        for _ in range(n - 1):
            out = out * self
        return out

    def __mod__(self, m):
        # shift by a multiple of the (constant) modulus: derivative unchanged
        return Dual(self.re % m, self.im)

    def __abs__(self):
        return self if _real(self.re) >= 0 else -self

    # ---- ordering on the real part ----------------------------------------

    def __lt__(self, other):
        return _real(self) < _real(other)

    def __le__(self, other):
        return _real(self) <= _real(other)

    def __gt__(self, other):
        return _real(self) > _real(other)

    def __ge__(self, other):
        return _real(self) >= _real(other)

    def __repr__(self):
        return f"Dual({self.re!r}, {self.im!r})"


# ---- generic math ---------------------------------------------------------


def sinh(x):
    if isinstance(x, Dual):
        return Dual(sinh(x.re), cosh(x.re) * x.im)
    return math.sinh(x)


def cosh(x):
    if isinstance(x, Dual):
        return Dual(cosh(x.re), sinh(x.re) * x.im)
    return math.cosh(x)


def tanh(x):
    if isinstance(x, Dual):
        c = cosh(x.re)
        return Dual(tanh(x.re), x.im / (c * c))
    return math.tanh(x)


def sin(x):
    if isinstance(x, Dual):
        return Dual(sin(x.re), cos(x.re) * x.im)
    return math.sin(x)


def cos(x):
    if isinstance(x, Dual):
        return Dual(cos(x.re), -sin(x.re) * x.im)
    return math.cos(x)


def tan(x):
    if isinstance(x, Dual):
        c = cos(x.re)
        return Dual(tan(x.re), x.im / (c * c))
    return math.tan(x)


def sqrt(x):
    if isinstance(x, Dual):
        s = sqrt(x.re)
        return Dual(s, x.im / (2.0 * s))
    return math.sqrt(x)


def nonzeroish(x) -> bool:
    """True unless x is an exactly-zero plain number.

    Duals count as nonzero even at value 0 so that seeded directions are
    differentiated through (a branch guarded by this predicate must stay on
    the generic path for the derivative to exist).
    """
    return isinstance(x, Dual) or x != 0.0


def derivative(f, x0: float) -> float:
    """d f / d x at ``x0`` for a scalar function built on the generic math."""
    return f(Dual(x0, 1.0)).im
