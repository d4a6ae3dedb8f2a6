"""Univariate polynomial arithmetic, polynomial matrices and determinants.

Polynomials are stored as dense coefficient arrays in ascending degree
(coeffs[k] multiplies x**k).  The zero polynomial is the empty coefficient
array and reports degree -1.  Everything here is immutable and pure, so
values can be shared freely between threads.
"""

from __future__ import annotations

import numbers

import numpy as np

__all__ = [
    "RealPoly",
    "ComplexPoly",
    "PolyMatrix",
    "BivariatePoly",
    "NonSquareError",
    "ImaginaryResidueError",
]

# Relative threshold used when chopping numerical noise out of determinant
# expansions.  Coefficients below EPS_COEF * max|c| are dropped.
EPS_COEF = 1e-12


class NonSquareError(ValueError):
    """Determinant requested for a non-square polynomial matrix."""


class ImaginaryResidueError(ValueError):
    """A polynomial expected to be real has a large imaginary part."""


def _trim(c):
    """Strip trailing (leading-degree) zero coefficients."""
    n = len(c)
    while n > 0 and c[n - 1] == 0:
        n -= 1
    return c[:n]


def _polymul(a, b):
    if len(a) == 0 or len(b) == 0:
        return a[:0]
    return np.convolve(a, b)


def _polyadd(a, b):
    if len(a) < len(b):
        a, b = b, a
    out = a.copy()
    out[: len(b)] += b
    return _trim(out)


def _polyval(c, x):
    """Horner evaluation; supports scalar or array x."""
    x = np.asarray(x)
    acc = np.zeros(x.shape, dtype=np.result_type(c.dtype if len(c) else float, x.dtype))
    for ck in c[::-1]:
        acc = acc * x + ck
    return acc[()] if acc.ndim == 0 else acc


def _polydivmod(a, b):
    """Long division a = q*b + r with deg(r) < deg(b)."""
    if len(b) == 0:
        raise ZeroDivisionError("polynomial division by zero")
    if len(a) < len(b):
        return a[:0], a
    q = np.zeros(len(a) - len(b) + 1, dtype=np.result_type(a.dtype, b.dtype))
    r = a.astype(q.dtype).copy()
    lead = b[-1]
    for k in range(len(q) - 1, -1, -1):
        q[k] = r[k + len(b) - 1] / lead
        if q[k] != 0:
            r[k : k + len(b)] -= q[k] * b
    r[len(b) - 1 :] = 0
    return _trim(q), _trim(r)


class _BasePoly:
    """Shared arithmetic for RealPoly / ComplexPoly over a numpy dtype."""

    __slots__ = ("coeffs",)
    _dtype = None

    def __init__(self, coeffs=()):
        c = np.atleast_1d(np.asarray(coeffs, dtype=self._dtype))
        if not np.all(np.isfinite(c.view(float) if c.dtype == complex else c)):
            raise ValueError("non-finite polynomial coefficient")
        self.coeffs = _trim(c)
        self.coeffs.setflags(write=False)

    @property
    def degree(self):
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self):
        return len(self.coeffs) == 0

    def __call__(self, x):
        return _polyval(self.coeffs, x)

    def coeff(self, k):
        """Coefficient of x**k (0 beyond the stored degree)."""
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return self._dtype(0)

    def _wrap(self, coeffs):
        out = object.__new__(type(self))
        c = np.asarray(coeffs, dtype=self._dtype)
        out.coeffs = _trim(c)
        out.coeffs.setflags(write=False)
        return out

    def _coerce(self, other):
        if isinstance(other, _BasePoly):
            return other
        if isinstance(other, numbers.Number):
            return type(self)([other]) if not (
                isinstance(other, complex) and self._dtype is np.float64
            ) else ComplexPoly([other])
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = _promote(self, other)
        return a._wrap(_polyadd(a.coeffs, b.coeffs))

    __radd__ = __add__

    def __neg__(self):
        return self._wrap(-self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, numbers.Number):
            if isinstance(other, complex) and not isinstance(self, ComplexPoly):
                return ComplexPoly(self.coeffs.astype(complex) * other)
            return self._wrap(self.coeffs * other)
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        a, b = _promote(self, other)
        return a._wrap(_polymul(a.coeffs, b.coeffs))

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._coerce(other)
        a, b = _promote(self, other)
        q, r = _polydivmod(a.coeffs, b.coeffs)
        return a._wrap(q), a._wrap(r)

    def exact_div(self, other, rtol=1e-7):
        """Division known (up to roundoff) to be remainder-free.

        Used by the fraction-free determinant; a large remainder means the
        elimination lost exactness and is reported loudly.
        """
        q, r = divmod(self, other)
        scale = max(_abs_max(self.coeffs), 1e-300)
        if _abs_max(r.coeffs) > rtol * scale:
            raise ArithmeticError(
                "non-exact polynomial division (relative remainder %.3e)"
                % (_abs_max(r.coeffs) / scale)
            )
        return q

    def chop(self, rel_eps=EPS_COEF):
        """Drop coefficients below rel_eps * max|c| (noise after expansion)."""
        if len(self.coeffs) == 0:
            return self
        m = _abs_max(self.coeffs)
        c = self.coeffs.copy()
        c[np.abs(c) < rel_eps * m] = 0
        return self._wrap(c)

    def compose_affine(self, scale, shift):
        """Return p(scale*x + shift)."""
        aff = np.array([shift, scale], dtype=self._dtype)
        acc = np.zeros(1, dtype=self._dtype)
        power = np.ones(1, dtype=self._dtype)
        for ck in self.coeffs:
            acc = _polyadd(acc, ck * power)
            power = _polymul(power, aff)
        return self._wrap(acc)

    def deriv(self):
        if len(self.coeffs) <= 1:
            return self._wrap(np.zeros(0, dtype=self._dtype))
        return self._wrap(self.coeffs[1:] * np.arange(1, len(self.coeffs)))

    def __eq__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return NotImplemented
        return (
            len(self.coeffs) == len(other.coeffs)
            and np.array_equal(self.coeffs, other.coeffs)
        )

    def __hash__(self):
        return hash((type(self).__name__, self.coeffs.tobytes()))

    def allclose(self, other, rtol=1e-9, atol=0.0):
        other = self._coerce(other)
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, complex)
        b = np.zeros(n, complex)
        a[: len(self.coeffs)] = self.coeffs
        b[: len(other.coeffs)] = other.coeffs
        scale = max(_abs_max(a), _abs_max(b), 1.0 if atol == 0 else 0.0)
        return bool(np.all(np.abs(a - b) <= atol + rtol * scale))

    def __repr__(self):
        return "%s(%s)" % (type(self).__name__, list(self.coeffs))


def _abs_max(c):
    return float(np.max(np.abs(c))) if len(c) else 0.0


class RealPoly(_BasePoly):
    """Polynomial with real coefficients, ascending degree."""

    __slots__ = ()
    _dtype = np.float64

    def cauchy_root_bound(self):
        """1 + max|c_i|/|c_lead|: all real roots lie inside [-B, B]."""
        if self.degree < 1:
            return 1.0
        return 1.0 + float(np.max(np.abs(self.coeffs[:-1]))) / abs(self.coeffs[-1])


class ComplexPoly(_BasePoly):
    """Polynomial with complex coefficients re(x) + j*im(x)."""

    __slots__ = ()
    _dtype = np.complex128

    @classmethod
    def from_parts(cls, re, im):
        re = np.asarray(getattr(re, "coeffs", re), float)
        im = np.asarray(getattr(im, "coeffs", im), float)
        n = max(len(re), len(im))
        c = np.zeros(n, complex)
        c[: len(re)] += re
        c[: len(im)] += 1j * im
        return cls(c)

    @property
    def re(self):
        return RealPoly(self.coeffs.real)

    @property
    def im(self):
        return RealPoly(self.coeffs.imag)

    def to_real(self, rtol=1e-9):
        """Cast to RealPoly, rejecting a significant imaginary residue."""
        scale = max(_abs_max(self.coeffs), 1e-300)
        resid = _abs_max(self.coeffs.imag)
        if resid > rtol * scale:
            raise ImaginaryResidueError(
                "imaginary residue %.3e exceeds %.1e relative" % (resid / scale, rtol)
            )
        return RealPoly(self.coeffs.real)


def _promote(a, b):
    if isinstance(a, ComplexPoly) and not isinstance(b, ComplexPoly):
        return a, ComplexPoly(b.coeffs.astype(complex))
    if isinstance(b, ComplexPoly) and not isinstance(a, ComplexPoly):
        return ComplexPoly(a.coeffs.astype(complex)), b
    return a, b


class PolyMatrix:
    """Dense matrix of polynomials (RealPoly or ComplexPoly entries)."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, entries):
        rows = list(entries)
        if not rows:
            raise ValueError("empty matrix")
        ncols = len(rows[0])
        flat = []
        for r in rows:
            if len(r) != ncols:
                raise ValueError("ragged rows")
            for e in r:
                if isinstance(e, numbers.Number):
                    e = ComplexPoly([e]) if isinstance(e, complex) else RealPoly([e])
                flat.append(e)
        self.rows = len(rows)
        self.cols = ncols
        self.entries = tuple(flat)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i * self.cols + j]

    def submatrix(self, k):
        """Leading principal k x k submatrix."""
        return PolyMatrix(
            [[self[i, j] for j in range(k)] for i in range(k)]
        )

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            row = []
            for j in range(other.cols):
                acc = self[i, 0] * other[0, j]
                for k in range(1, self.cols):
                    acc = acc + self[i, k] * other[k, j]
                row.append(acc)
            out.append(row)
        return PolyMatrix(out)

    def eval(self, x):
        """Numeric matrix with every entry evaluated at x."""
        return np.array(
            [[complex(self[i, j](x)) for j in range(self.cols)] for i in range(self.rows)]
        )

    def det(self, method="auto", chop=EPS_COEF):
        """Exact determinant over the polynomial ring.

        Fraction-free Bareiss elimination by default; plain cofactor
        expansion for small matrices.  Both paths agree coefficient-wise.
        """
        if self.rows != self.cols:
            raise NonSquareError("determinant of %dx%d matrix" % (self.rows, self.cols))
        if method == "auto":
            method = "cofactor" if self.rows <= 3 else "bareiss"
        if method == "cofactor":
            d = _det_cofactor(self, self.rows)
        elif method == "bareiss":
            d = _det_bareiss(self)
        else:
            raise ValueError("unknown method %r" % method)
        return d.chop(chop) if chop else d


def _det_cofactor(m, n, rows=None, cols=None):
    rows = list(range(n)) if rows is None else rows
    cols = list(range(n)) if cols is None else cols
    if len(rows) == 1:
        return m[rows[0], cols[0]]
    acc = None
    for idx, j in enumerate(cols):
        minor = _det_cofactor(m, n, rows[1:], cols[:idx] + cols[idx + 1 :])
        term = m[rows[0], j] * minor
        if idx % 2:
            term = -term
        acc = term if acc is None else acc + term
    return acc


def _det_bareiss(m):
    n = m.rows
    a = [[m[i, j] for j in range(n)] for i in range(n)]
    sign = 1
    prev = None
    for k in range(n - 1):
        if a[k][k].is_zero():
            for i in range(k + 1, n):
                if not a[i][k].is_zero():
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return type(a[0][0])(())  # zero column -> zero determinant
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                num = a[k][k] * a[i][j] - a[i][k] * a[k][j]
                a[i][j] = num if prev is None else num.exact_div(prev)
        prev = a[k][k]
    d = a[n - 1][n - 1]
    return -d if sign < 0 else d


class BivariatePoly:
    """Polynomial in s whose coefficients are ComplexPoly in zeta.

    s_coeffs is ascending in s; for an n-species characteristic polynomial
    the s**n coefficient is the constant 1 (monic).
    """

    __slots__ = ("s_coeffs",)

    def __init__(self, s_coeffs):
        cs = []
        for c in s_coeffs:
            if not isinstance(c, ComplexPoly):
                c = ComplexPoly(np.atleast_1d(np.asarray(c, complex)))
            cs.append(c)
        while len(cs) > 1 and cs[-1].is_zero():
            cs.pop()
        self.s_coeffs = tuple(cs)

    @property
    def degree_s(self):
        return len(self.s_coeffs) - 1

    def eval(self, zeta, s):
        acc = 0j
        for c in self.s_coeffs[::-1]:
            acc = acc * s + complex(c(zeta))
        return acc

    def scale(self, u):
        """Multiply the whole polynomial by a complex scalar."""
        return BivariatePoly([c * u for c in self.s_coeffs])

    def __repr__(self):
        return "BivariatePoly(%r)" % (list(self.s_coeffs),)
