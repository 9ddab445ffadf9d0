"""Exact rational arithmetic: Gaussian rationals, polynomials, determinants.

All structural quantities (pencil coefficients, special values, mass
tables, resultants, interpolated determinant polynomials) are carried as
exact Gaussian rationals so that identities that hold exactly in theory
also hold exactly in the implementation.  Floating point enters only
through root finding and quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, float):
        return Fraction(x)  # exact binary expansion of the given float
    raise TypeError(f"cannot build an exact rational from {type(x)!r}")


@dataclass(frozen=True)
class QComplex:
    """Complex number with exact rational real and imaginary parts."""

    re: Fraction
    im: Fraction

    @staticmethod
    def make(x) -> "QComplex":
        if isinstance(x, QComplex):
            return x
        if isinstance(x, complex):
            return QComplex(_frac(x.real), _frac(x.imag))
        if isinstance(x, (list, tuple)):
            re, im = x
            return QComplex(_frac(re), _frac(im))
        return QComplex(_frac(x), Fraction(0))

    def __add__(self, other):
        o = QComplex.make(other)
        return QComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = QComplex.make(other)
        return QComplex(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return QComplex.make(other) - self

    def __neg__(self):
        return QComplex(-self.re, -self.im)

    def __mul__(self, other):
        o = QComplex.make(other)
        return QComplex(self.re * o.re - self.im * o.im,
                        self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = QComplex.make(other)
        d = o.re * o.re + o.im * o.im
        if d == 0:
            raise ZeroDivisionError("division by exact zero")
        return QComplex((self.re * o.re + self.im * o.im) / d,
                        (self.im * o.re - self.re * o.im) / d)

    def __rtruediv__(self, other):
        return QComplex.make(other) / self

    def conj(self):
        return QComplex(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def is_real(self) -> bool:
        return self.im == 0

    def abs2(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def to_complex(self) -> complex:
        return complex(self.re, self.im)

    def __bool__(self):
        return not self.is_zero()

    def __repr__(self):
        if self.im == 0:
            return f"{self.re}"
        return f"({self.re}{'+' if self.im >= 0 else ''}{self.im}i)"


QZERO = QComplex(Fraction(0), Fraction(0))
QONE = QComplex(Fraction(1), Fraction(0))


# ---------------------------------------------------------------------------
# Polynomials as lists of QComplex, ascending degree.
# ---------------------------------------------------------------------------

def qpoly(coeffs) -> list[QComplex]:
    return [QComplex.make(c) for c in coeffs]


def qp_trim(p):
    p = list(p)
    while p and p[-1].is_zero():
        p.pop()
    return p


def qp_add(a, b):
    n = max(len(a), len(b))
    out = []
    for i in range(n):
        x = a[i] if i < len(a) else QZERO
        y = b[i] if i < len(b) else QZERO
        out.append(x + y)
    return qp_trim(out)


def qp_neg(a):
    return [-x for x in a]


def qp_mul(a, b):
    if not a or not b:
        return []
    out = [QZERO] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x.is_zero():
            continue
        for j, y in enumerate(b):
            out[i + j] = out[i + j] + x * y
    return qp_trim(out)


def qp_divmod(a, b):
    b = qp_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(a)
    db, lead = len(b) - 1, b[-1]
    q = [QZERO] * max(len(a) - db, 0)
    for i in range(len(r) - 1 - db, -1, -1):
        if len(r) < db + i + 1 or r[db + i].is_zero():
            continue
        c = r[db + i] / lead
        q[i] = c
        for j in range(db + 1):
            r[i + j] = r[i + j] - c * b[j]
    return qp_trim(q), qp_trim(r)


def qp_gcd_ext(a, b):
    """Extended Euclid: returns (g, x, y) with a*x + b*y = g."""
    r0, r1 = qp_trim(a), qp_trim(b)
    s0, s1 = [QONE], []
    t0, t1 = [], [QONE]
    while r1:
        q, r = qp_divmod(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, qp_add(s0, qp_neg(qp_mul(q, s1)))
        t0, t1 = t1, qp_add(t0, qp_neg(qp_mul(q, t1)))
    return r0, s0, t0


def qp_eval(p, x: QComplex) -> QComplex:
    acc = QZERO
    for c in reversed(p):
        acc = acc * x + c
    return acc


def qp_deriv(p):
    return [p[i] * Fraction(i) for i in range(1, len(p))]


def qp_to_complex(p) -> list[complex]:
    return [c.to_complex() for c in p]


# ---------------------------------------------------------------------------
# Exact determinants (fraction-free Bareiss).
# ---------------------------------------------------------------------------

def _bareiss_int(m: list[list[int]]) -> int:
    n = len(m)
    if n == 0:
        return 1
    m = [row[:] for row in m]
    sign = 1
    prev = 1
    for j in range(n - 1):
        if m[j][j] == 0:
            for i in range(j + 1, n):
                if m[i][j] != 0:
                    m[i], m[j] = m[j], m[i]
                    sign = -sign
                    break
            else:
                return 0
        pivot = m[j][j]
        for i in range(j + 1, n):
            mi, mj = m[i], m[j]
            mij = mi[j]
            for k in range(j + 1, n):
                mi[k] = (mi[k] * pivot - mij * mj[k]) // prev
            mi[j] = 0
        prev = pivot
    return sign * m[n - 1][n - 1]


def _det_real_rational(m: list[list[Fraction]]) -> Fraction:
    # clear denominators row by row, then integer Bareiss
    n = len(m)
    scale = Fraction(1)
    mi: list[list[int]] = []
    for row in m:
        l = 1
        for x in row:
            l = l * x.denominator // math.gcd(l, x.denominator)
        scale *= l
        mi.append([int(x * l) for x in row])
    return Fraction(_bareiss_int(mi), 1) / scale


def exact_det(m: list[list[QComplex]]) -> QComplex:
    """Determinant of a matrix of Gaussian rationals, exactly."""
    n = len(m)
    if n == 0:
        return QONE
    if all(x.is_real() for row in m for x in row):
        d = _det_real_rational([[x.re for x in row] for row in m])
        return QComplex(d, Fraction(0))
    # complex case: fraction-free over Gaussian integers after clearing
    # denominators (Bareiss divisions stay exact in Z[i])
    scale = Fraction(1)
    rows = []
    for row in m:
        l = 1
        for x in row:
            l = l * x.re.denominator // math.gcd(l, x.re.denominator)
            l = l * x.im.denominator // math.gcd(l, x.im.denominator)
        scale *= l
        rows.append([(int(x.re * l), int(x.im * l)) for x in row])
    sign = 1
    prev = (1, 0)

    def gmul(a, b):
        return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])

    def gdiv(a, b):  # exact division in Z[i]
        d = b[0] * b[0] + b[1] * b[1]
        re = a[0] * b[0] + a[1] * b[1]
        im = a[1] * b[0] - a[0] * b[1]
        return (re // d, im // d)

    for j in range(n - 1):
        if rows[j][j] == (0, 0):
            for i in range(j + 1, n):
                if rows[i][j] != (0, 0):
                    rows[i], rows[j] = rows[j], rows[i]
                    sign = -sign
                    break
            else:
                return QZERO
        pivot = rows[j][j]
        for i in range(j + 1, n):
            rij = rows[i][j]
            for k in range(j + 1, n):
                a = gmul(rows[i][k], pivot)
                b = gmul(rij, rows[j][k])
                rows[i][k] = gdiv((a[0] - b[0], a[1] - b[1]), prev)
            rows[i][j] = (0, 0)
        prev = pivot
    d = rows[n - 1][n - 1]
    return QComplex(Fraction(sign * d[0]), Fraction(sign * d[1])) / scale


# ---------------------------------------------------------------------------
# Exact Newton interpolation.
# ---------------------------------------------------------------------------

def newton_interp(nodes: list[QComplex], values: list[QComplex]) -> list[QComplex]:
    """Coefficients (ascending) of the polynomial through (nodes, values)."""
    n = len(nodes)
    assert len(values) == n
    coef = list(values)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - j])
    # expand Newton form to monomials
    poly = [coef[-1]]
    for i in range(n - 2, -1, -1):
        poly = qp_add(qp_mul(poly, [-nodes[i], QONE]), [coef[i]])
    return poly if poly else [QZERO]
