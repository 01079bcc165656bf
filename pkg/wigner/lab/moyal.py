"""
Moyal star product, Moyal bracket and Poisson bracket.

With the bidifferential operator L = (<-d_q)(->d_p) - (<-d_p)(->d_q),

    A * B    = sum_n (i hbar / 2)^n / n!  A L^n B
    {{A, B}} = (1 / i hbar)(A * B - B * A)
             = sum_l (-1)^l (hbar / 2)^(2l) / (2l + 1)!  A L^(2l+1) B

so the l = 0 term is the Poisson bracket and, for polynomials, the series stops
once 2l + 1 exceeds the smaller degree. The sign convention is the one for which
(1/i hbar)(q * p - p * q) = 1.

Polynomials are handled exactly with sympy; grid fields use spectral
derivatives and therefore have to decay at the grid boundary.
"""
from dataclasses import dataclass
from functools import cached_property
from math import comb, factorial
import logging

import numpy as np
import pandas as pd
import sympy

from . import spectral
from .conf import get_tolerances
from .exceptions import BoundaryDecayError, GridMismatchError, SymbolError
from .phase_grid import check_boundary_decay

logger = logging.getLogger(__name__)

Q, P = sympy.symbols("q p", real=True)


def exact(value):
    """Exact rational for a float or numeric string (0.05 -> 1/20)."""
    if isinstance(value, sympy.Basic):
        return value
    if isinstance(value, str):
        return sympy.Rational(value.strip())
    return sympy.nsimplify(value, rational=True)


@dataclass(frozen=True, eq=False)
class PolynomialSymbol:
    """Polynomial in q and p; coefficients are real for observables."""

    expr: sympy.Expr

    def __post_init__(self):
        expr = sympy.expand(sympy.sympify(self.expr))
        object.__setattr__(self, "expr", expr)
        if self.degree > get_tolerances().MAX_POLY_DEGREE:
            raise SymbolError(f"degree {self.degree} exceeds the maximum {get_tolerances().MAX_POLY_DEGREE}")

    @classmethod
    def from_coefficients(cls, coefficients):
        """Build from {(j, k): c_jk} for monomials q^j p^k; coefficients must be real."""
        expr = sympy.Integer(0)
        for (j, k), c in coefficients.items():
            c = exact(c)
            if not c.is_real:
                raise SymbolError(f"coefficient of q^{j} p^{k} is not real: {c}")
            expr += c * Q ** int(j) * P ** int(k)
        return cls(expr)

    @classmethod
    def from_csv(cls, path):
        """Read lines "j,k,coefficient"; a header row is optional."""
        frame = pd.read_csv(path, header=None, names=["j", "k", "coefficient"], comment="#", dtype=str)
        frame = frame[frame["j"].str.strip() != "j"]
        return cls.from_coefficients(
            {(int(r.j), int(r.k)): r.coefficient for r in frame.itertuples(index=False)}
        )

    @classmethod
    def potential(cls, coefficients):
        """V(q) = sum_k c_k q^k from the list [c_0, c_1, ...]."""
        return cls.from_coefficients({(k, 0): c for k, c in enumerate(coefficients)})

    @cached_property
    def _poly(self):
        return sympy.Poly(self.expr, Q, P)

    @property
    def degree(self):
        if self.expr.is_zero:
            return 0
        return sympy.Poly(self.expr, Q, P).total_degree()

    def coefficients(self):
        return {monom: coeff for monom, coeff in self._poly.terms() if coeff != 0}

    @property
    def is_real(self):
        return all(sympy.im(c) == 0 for c in self.coefficients().values())

    @property
    def depends_on_p(self):
        return self.expr.has(P)

    def diff(self, order_q=0, order_p=0):
        expr = self.expr
        if order_q:
            expr = sympy.diff(expr, Q, order_q)
        if order_p:
            expr = sympy.diff(expr, P, order_p)
        return PolynomialSymbol(expr)

    def __call__(self, q, p=0.0):
        return self._numeric(q, p)

    @cached_property
    def _numeric(self):
        return sympy.lambdify((Q, P), self.expr, modules="numpy")

    def evaluate(self, grid):
        q, p = grid.mesh()
        values = np.broadcast_to(self._numeric(q, p), grid.shape)
        return np.array(values, dtype=complex if not self.is_real else float)

    def __add__(self, other):
        return PolynomialSymbol(self.expr + _expr(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PolynomialSymbol(self.expr - _expr(other))

    def __mul__(self, other):
        return PolynomialSymbol(self.expr * _expr(other))

    __rmul__ = __mul__

    def __neg__(self):
        return PolynomialSymbol(-self.expr)

    def __eq__(self, other):
        return isinstance(other, PolynomialSymbol) and sympy.expand(self.expr - other.expr) == 0

    __hash__ = None

    def __repr__(self):
        return f"PolynomialSymbol({self.expr})"


def _expr(value):
    return value.expr if isinstance(value, PolynomialSymbol) else exact(value)


Q_SYMBOL = PolynomialSymbol(Q)
P_SYMBOL = PolynomialSymbol(P)


class _FieldOperand:
    """Derivative provider for a grid function: spectral, with boundary-decay check."""

    def __init__(self, values, grid):
        self.values = np.asarray(values)
        self.grid = grid
        self._cache = {}

    def derivative(self, order_q, order_p):
        key = (order_q, order_p)
        if key not in self._cache:
            self._cache[key] = spectral.derivative(self.values, self.grid, order_q, order_p)
        return self._cache[key]


class _PolynomialOperand:
    """Exact derivatives of a polynomial, sampled on a grid."""

    def __init__(self, symbol, grid):
        self.symbol = symbol
        self.grid = grid

    def derivative(self, order_q, order_p):
        return self.symbol.diff(order_q, order_p).evaluate(self.grid)


def _operand(value, grid):
    if isinstance(value, PolynomialSymbol):
        return _PolynomialOperand(value, grid)
    values = getattr(value, "values", value)
    field_grid = getattr(value, "grid", None)
    if field_grid is not None and grid is not None:
        field_grid.require_same(grid)
    grid = field_grid or grid
    if grid is None:
        raise GridMismatchError("a grid is required to differentiate a field")
    if not check_boundary_decay(values, get_tolerances().BOUNDARY_DECAY):
        raise BoundaryDecayError("spectral Moyal terms need fields that decay at the grid boundary")
    return _FieldOperand(values, grid)


def _grid_of(*values):
    for value in values:
        grid = getattr(value, "grid", None)
        if grid is not None:
            return grid
    return None


def _bidifferential(a, b, n):
    """A L^n B as a grid field."""
    total = 0.0
    for k in range(n + 1):
        sign = -1.0 if k % 2 else 1.0
        total = total + sign * comb(n, k) * a.derivative(n - k, k) * b.derivative(k, n - k)
    return total


def _bidifferential_symbolic(a, b, n):
    total = sympy.Integer(0)
    for k in range(n + 1):
        total += (-1) ** k * comb(n, k) * a.diff(n - k, k).expr * b.diff(k, n - k).expr
    return PolynomialSymbol(total)


def _both_polynomial(a, b):
    return isinstance(a, PolynomialSymbol) and isinstance(b, PolynomialSymbol)


def poisson_bracket(a, b, grid=None):
    """{A, B} = dA/dq dB/dp - dA/dp dB/dq."""
    if _both_polynomial(a, b):
        return _bidifferential_symbolic(a, b, 1)
    grid = grid or _grid_of(a, b)
    return _bidifferential(_operand(a, grid), _operand(b, grid), 1)


@dataclass(frozen=True)
class BracketExpansion:
    """Terms of the Moyal bracket by powers of hbar; terms[0] is the Poisson bracket."""

    terms: tuple
    hbar: float

    @property
    def total(self):
        result = self.terms[0]
        for term in self.terms[1:]:
            result = result + term
        return result

    @property
    def correction(self):
        """Everything beyond the Poisson term."""
        if len(self.terms) == 1:
            return self.terms[0] * 0
        result = self.terms[1]
        for term in self.terms[2:]:
            result = result + term
        return result


def _bracket_coefficient(level, hbar):
    return (-1) ** level * (hbar / 2) ** (2 * level) / factorial(2 * level + 1)


def moyal_bracket(a, b, hbar=None, grid=None, max_level=None):
    """
    Moyal bracket {{A, B}} as an hbar expansion.

    For two polynomials the expansion is exact and stops where the derivatives
    vanish. For fields the series is truncated at max_level (default: as many
    odd orders as the configured maximum star order allows).
    """
    grid = grid or _grid_of(a, b)
    if hbar is None:
        if grid is None:
            raise SymbolError("hbar is required for a bracket of two polynomials without a grid")
        hbar = grid.hbar
    if _both_polynomial(a, b):
        h = exact(hbar)
        levels = max(0, (min(a.degree, b.degree) - 1) // 2)
        terms = tuple(
            _bidifferential_symbolic(a, b, 2 * level + 1) * _bracket_coefficient(level, h)
            for level in range(levels + 1)
        )
        return BracketExpansion(terms, float(h))

    if max_level is None:
        max_level = (get_tolerances().MAX_STAR_ORDER - 1) // 2
    degrees = [x.degree for x in (a, b) if isinstance(x, PolynomialSymbol)]
    if degrees:
        max_level = min(max_level, max(0, (min(degrees) - 1) // 2))
    left, right = _operand(a, grid), _operand(b, grid)
    terms = tuple(
        _bracket_coefficient(level, hbar) * _bidifferential(left, right, 2 * level + 1)
        for level in range(max_level + 1)
    )
    return BracketExpansion(terms, float(hbar))


def star_product(a, b, order=None, grid=None, hbar=None):
    """Groenewold series of A * B truncated after the hbar^order term."""
    tol = get_tolerances()
    order = tol.MAX_STAR_ORDER if order is None else int(order)
    if order < 0 or order > tol.MAX_STAR_ORDER:
        raise SymbolError(f"star-product order {order} outside 0..{tol.MAX_STAR_ORDER}")
    grid = grid or _grid_of(a, b)
    if hbar is None:
        if grid is None:
            raise SymbolError("hbar is required for a star product of two polynomials without a grid")
        hbar = grid.hbar

    if _both_polynomial(a, b):
        h = exact(hbar)
        total = sympy.Integer(0)
        for n in range(min(order, a.degree, b.degree) + 1):
            total += (sympy.I * h / 2) ** n / factorial(n) * _bidifferential_symbolic(a, b, n).expr
        return PolynomialSymbol(total)

    left, right = _operand(a, grid), _operand(b, grid)
    total = left.derivative(0, 0) * right.derivative(0, 0) + 0j
    for n in range(1, order + 1):
        total = total + (1j * hbar / 2) ** n / factorial(n) * _bidifferential(left, right, n)
    return total


def star_commutator(a, b, hbar):
    """(1 / i hbar)(A * B - B * A) for polynomials, straight from the star product."""
    difference = star_product(a, b, hbar=hbar) - star_product(b, a, hbar=hbar)
    return PolynomialSymbol(sympy.expand(difference.expr / (sympy.I * exact(hbar))))
