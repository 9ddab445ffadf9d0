"""Rational symbols f = A / (B1 B2) and their structural data.

The symbol is validated at construction (root locations, common roots,
degree bookkeeping, gcd condition on the Fourier support).  Fourier
coefficients, the pencil coefficients a_k, b_k of A(z) - lambda B1(z)B2(z),
the special values (lambda1, lambda2, k1, k2) and the point-mass table are
all computed in exact rational arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import (CommonRootError, DegenerateError, GcdError,
                     InternalInconsistency, RootLocationError)
from .exact import (QComplex, QZERO, qp_add, qp_divmod, qp_eval, qp_gcd_ext,
                    qp_mul, qp_to_complex, qp_trim, qpoly)


class Infinity:
    """Tagged point at infinity for the extended special values."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "infinity"


INFINITY = Infinity()


def is_infinite(x) -> bool:
    return isinstance(x, Infinity)


UNIT_CIRCLE_MARGIN = 1e-9
GCD_WINDOW_PAD = 8


@dataclass(frozen=True)
class RationalSymbol:
    """Validated rational symbol with exact coefficient mirrors.

    ``a_coeffs``/``b1_coeffs``/``b2_coeffs`` are the float views (ascending
    degree); the ``exact_*`` tuples carry the same numbers as Gaussian
    rationals and drive every structural computation.
    """

    a_coeffs: tuple[complex, ...]
    b1_coeffs: tuple[complex, ...]
    b2_coeffs: tuple[complex, ...]
    p: int
    q: int
    exact_a: tuple[QComplex, ...]
    exact_b1: tuple[QComplex, ...]
    exact_b2: tuple[QComplex, ...]

    @property
    def degree(self) -> int:
        """Degree p + q of the pencil polynomial."""
        return self.p + self.q

    def b_product(self) -> tuple[QComplex, ...]:
        return tuple(qp_mul(list(self.exact_b1), list(self.exact_b2)))

    def __repr__(self):
        return (f"RationalSymbol(p={self.p}, q={self.q}, "
                f"degA={len(self.a_coeffs)-1}, degB1={len(self.b1_coeffs)-1}, "
                f"degB2={len(self.b2_coeffs)-1})")


def _coerce(coeffs) -> tuple[QComplex, ...]:
    if coeffs is None or len(coeffs) == 0:
        raise DegenerateError("coefficient list must be nonempty")
    return tuple(QComplex.make(c) for c in coeffs)


def parse_symbol(a_coeffs, b1_coeffs, b2_coeffs) -> RationalSymbol:
    """Validate and build a rational symbol f = A/(B1 B2).

    Raises
    ------
    RootLocationError
        if a root of B1 is not strictly inside, or of B2 not strictly
        outside, the unit circle (within the modulus margin 1e-9).
    CommonRootError
        if A shares a root with B1*B2.
    DegenerateError
        if the derived band parameters give p < 1 or q < 1.
    GcdError
        if gcd{ k : f_k != 0 } > 1 on the checked index window.
    """
    ea, eb1, eb2 = _coerce(a_coeffs), _coerce(b1_coeffs), _coerce(b2_coeffs)
    for name, p in (("A", ea), ("B1", eb1), ("B2", eb2)):
        if p[-1].is_zero():
            raise DegenerateError(f"leading coefficient of {name} is zero")
    q = len(eb1) - 1
    p = max(len(ea) - 1, len(eb1) - 1 + len(eb2) - 1) - q
    if q < 1 or p < 1:
        raise DegenerateError(f"require p >= 1 and q >= 1, got p={p}, q={q}")

    # root locations
    for r in np.roots(qp_to_complex(list(reversed(eb1)))):
        if abs(abs(r) - 1.0) <= UNIT_CIRCLE_MARGIN:
            raise RootLocationError(f"B1 root {r} is on the unit circle")
        if abs(r) > 1.0:
            raise RootLocationError(f"B1 root {r} lies outside the unit circle")
    for r in np.roots(qp_to_complex(list(reversed(eb2)))):
        if abs(abs(r) - 1.0) <= UNIT_CIRCLE_MARGIN:
            raise RootLocationError(f"B2 root {r} is on the unit circle")
        if abs(r) < 1.0:
            raise RootLocationError(f"B2 root {r} lies inside the unit circle")

    # common roots of A with B1*B2: exact gcd plus a numerical proximity net
    bb = qp_mul(list(eb1), list(eb2))
    g, _, _ = qp_gcd_ext(list(ea), bb)
    if len(g) > 1:
        raise CommonRootError("A and B1*B2 have a common polynomial factor")
    afl = qp_to_complex(list(ea))
    scale_a = sum(abs(c) for c in afl)
    for r in np.roots(qp_to_complex(list(reversed(bb)))):
        mag = sum(abs(c) * max(1.0, abs(r)) ** i for i, c in enumerate(afl))
        if abs(np.polyval(list(reversed(afl)), r)) <= 1e-12 * max(mag, scale_a):
            raise CommonRootError(f"A nearly vanishes at the pole {r}")

    sym = RationalSymbol(
        a_coeffs=tuple(qp_to_complex(list(ea))),
        b1_coeffs=tuple(qp_to_complex(list(eb1))),
        b2_coeffs=tuple(qp_to_complex(list(eb2))),
        p=p, q=q, exact_a=ea, exact_b1=eb1, exact_b2=eb2)

    window = p + q + (len(eb2) - 1) + GCD_WINDOW_PAD
    fk = fourier_exact(sym, -window, window)
    support = [abs(k) for k, v in zip(range(-window, window + 1), fk)
               if not v.is_zero()]
    if not support:
        raise DegenerateError("symbol has no nonzero Fourier coefficients")
    g = 0
    for k in support:
        g = math.gcd(g, k)
    if g > 1:
        raise GcdError(f"nonzero Fourier indices share the factor {g}")
    return sym


def symbol_from_dict(data: dict) -> RationalSymbol:
    """Build a symbol from the JSON input format {"A": [...], "B1": ..., "B2": ...}."""
    def grab(key):
        if key not in data:
            raise DegenerateError(f"symbol file is missing {key!r}")
        return data[key]
    return parse_symbol(grab("A"), grab("B1"), grab("B2"))


# ---------------------------------------------------------------------------
# Fourier coefficients.
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _fourier_parts(sym: RationalSymbol):
    """Partial-fraction split f = W + U/B1 + V/B2 with deg U < deg B1,
    deg V < deg B2 (exact)."""
    b1, b2 = list(sym.exact_b1), list(sym.exact_b2)
    a = list(sym.exact_a)
    g, x, y = qp_gcd_ext(b1, b2)
    assert len(g) == 1, "B1 and B2 have disjoint root sets by validation"
    c = g[0]
    x = [xi / c for xi in x]
    y = [yi / c for yi in y]
    q1, u = qp_divmod(qp_mul(a, y), b1)
    q2, v = qp_divmod(qp_mul(a, x), b2)
    w = qp_add(q1, q2)
    return tuple(w), tuple(u), tuple(v)


@lru_cache(maxsize=None)
def fourier_exact(sym: RationalSymbol, k_min: int, k_max: int) -> tuple[QComplex, ...]:
    """Exact Fourier coefficients f_k, k in [k_min, k_max].

    The strictly proper parts expand by stable linear recurrences: V/B2 in
    nonnegative powers of z (its expansion converges outside no pole), and
    U/B1 in negative powers.  Both recurrences have all characteristic
    roots strictly inside the unit disc.
    """
    w, u, v = _fourier_parts(sym)
    q = sym.q
    b2 = list(sym.exact_b2)
    # nonnegative indices: W + power series of V/B2
    nmax = max(k_max, 0)
    t = []
    for m in range(nmax + 1):
        s = v[m] if m < len(v) else QZERO
        for i in range(1, min(m, len(b2) - 1) + 1):
            s = s - b2[i] * t[m - i]
        t.append(s / b2[0])
    # negative indices: U/B1 = w * Urev(w)/B1rev(w) with w = 1/z
    mmax = max(-k_min, 0)
    urev = [u[q - 1 - i] if q - 1 - i < len(u) else QZERO for i in range(q)]
    b1rev = list(reversed(list(sym.exact_b1)))
    s_ser = []
    for m in range(mmax + 1):
        s = urev[m] if m < len(urev) else QZERO
        for i in range(1, min(m, q) + 1):
            s = s - b1rev[i] * s_ser[m - i]
        s_ser.append(s / b1rev[0])
    out = []
    for k in range(k_min, k_max + 1):
        if k >= 0:
            val = t[k]
            if k < len(w):
                val = val + w[k]
        else:
            val = s_ser[-k - 1]
        out.append(val)
    return tuple(out)


def fourier_coefficients(sym: RationalSymbol, k_min: int, k_max: int) -> list[complex]:
    """Fourier coefficients f_k of the symbol for k in [k_min, k_max]."""
    return [c.to_complex() for c in fourier_exact(sym, k_min, k_max)]


def fourier_quadrature(sym: RationalSymbol, k_min: int, k_max: int,
                       n_nodes: int = 256) -> list[complex]:
    """Trapezoidal contour-integral cross-check of the Fourier coefficients."""
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    z = np.exp(1j * theta)
    a = np.polyval(list(reversed(sym.a_coeffs)), z)
    b1 = np.polyval(list(reversed(sym.b1_coeffs)), z)
    b2 = np.polyval(list(reversed(sym.b2_coeffs)), z)
    fz = a / (b1 * b2)
    return [complex(np.mean(fz * np.exp(-1j * k * theta)))
            for k in range(k_min, k_max + 1)]


# ---------------------------------------------------------------------------
# Pencil coefficients and special values.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PencilCoefficients:
    """Coefficients a_k, b_k of A(z) - lambda B1(z)B2(z) = sum (a_k - lambda b_k) z^{q+k},
    indexed k = -q..p."""

    q: int
    p: int
    a: tuple[complex, ...]
    b: tuple[complex, ...]
    exact_a: tuple[QComplex, ...]
    exact_b: tuple[QComplex, ...]

    def index(self, k: int) -> int:
        if not (-self.q <= k <= self.p):
            raise IndexError(f"pencil index {k} outside [{-self.q}, {self.p}]")
        return k + self.q

    def a_at(self, k: int) -> complex:
        return self.a[self.index(k)]

    def b_at(self, k: int) -> complex:
        return self.b[self.index(k)]


@lru_cache(maxsize=None)
def pencil_coefficients(sym: RationalSymbol) -> PencilCoefficients:
    """Zero-padded coefficient arrays of A and B1*B2 aligned to k = -q..p."""
    n = sym.p + sym.q + 1
    ea = list(sym.exact_a) + [QZERO] * n
    bb = list(sym.b_product()) + [QZERO] * n
    exact_a = tuple(ea[i] for i in range(n))
    exact_b = tuple(bb[i] for i in range(n))
    return PencilCoefficients(
        q=sym.q, p=sym.p,
        a=tuple(c.to_complex() for c in exact_a),
        b=tuple(c.to_complex() for c in exact_b),
        exact_a=exact_a, exact_b=exact_b)


@dataclass(frozen=True)
class SpecialValues:
    """lambda1, lambda2 and the vanishing-run lengths k1, k2.

    lambda1 is the unique extended value with roots of the pencil at 0,
    lambda2 the one with roots at infinity; k1/k2 count them.
    """

    lambda1: object   # QComplex or INFINITY
    lambda2: object
    k1: int
    k2: int
    toleranced: bool  # True when a vanishing test needed a numerical tolerance

    @property
    def lambda1_complex(self):
        return None if is_infinite(self.lambda1) else self.lambda1.to_complex()

    @property
    def lambda2_complex(self):
        return None if is_infinite(self.lambda2) else self.lambda2.to_complex()


_ZERO_RUN_RTOL = 1e-9


def _pencil_value_is_zero(a: QComplex, b: QComplex, lam) -> tuple[bool, bool]:
    """Is a - b*lam == 0 (with the convention that it is zero iff b == 0
    when lam is infinite)?  Returns (is_zero, needed_tolerance)."""
    if is_infinite(lam):
        if b.is_zero():
            return True, False
        scale = max(abs(b.to_complex()), 1.0)
        return abs(b.to_complex()) <= _ZERO_RUN_RTOL * scale, True
    val = a - b * lam
    if val.is_zero():
        return True, False
    scale = max(abs(a.to_complex()), abs((b * lam).to_complex()), 1.0)
    if abs(val.to_complex()) <= _ZERO_RUN_RTOL * scale:
        return True, True
    return False, False


@lru_cache(maxsize=None)
def special_values(sym: RationalSymbol) -> SpecialValues:
    """Compute lambda1, lambda2, k1, k2 from the pencil coefficients.

    Vanishing is tested exactly first; a relative tolerance of 1e-9 is the
    fallback for symbols built from floating-point coefficients (for
    example a numerically factored denominator).
    """
    pc = pencil_coefficients(sym)
    n = sym.p + sym.q + 1
    toler = False

    def special(a: QComplex, b: QComplex):
        if b.is_zero():
            return INFINITY
        if abs(b.to_complex()) <= 1e-12 * max(abs(a.to_complex()), 1.0):
            return INFINITY
        return a / b

    lam1 = special(pc.exact_a[0], pc.exact_b[0])
    lam2 = special(pc.exact_a[n - 1], pc.exact_b[n - 1])

    k1 = 0
    for i in range(n):
        z, t = _pencil_value_is_zero(pc.exact_a[i], pc.exact_b[i], lam1)
        if not z:
            break
        toler = toler or t
        k1 += 1
    k2 = 0
    for i in range(n - 1, -1, -1):
        z, t = _pencil_value_is_zero(pc.exact_a[i], pc.exact_b[i], lam2)
        if not z:
            break
        toler = toler or t
        k2 += 1
    k1 = min(k1, sym.p + sym.q)
    k2 = min(k2, sym.p + sym.q)
    if k1 == sym.p + sym.q and k2 == sym.p + sym.q:
        raise InternalInconsistency(
            "both vanishing runs reach p+q; the symbol would be degenerate")
    return SpecialValues(lambda1=lam1, lambda2=lam2, k1=k1, k2=k2,
                         toleranced=toler)


# ---------------------------------------------------------------------------
# Mass table.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MassTable:
    """Point-mass weights m_{1,k}, m_{2,k} and masses m_k for k = -q..p,
    as exact rationals."""

    q: int
    p: int
    k1: int
    k2: int
    m1: tuple[Fraction, ...]
    m2: tuple[Fraction, ...]
    m: tuple[Fraction, ...]

    def index(self, k: int) -> int:
        if not (-self.q <= k <= self.p):
            raise IndexError(f"mass index {k} outside [{-self.q}, {self.p}]")
        return k + self.q

    def m1_at(self, k: int) -> Fraction:
        return self.m1[self.index(k)]

    def m2_at(self, k: int) -> Fraction:
        return self.m2[self.index(k)]

    def m_at(self, k: int) -> Fraction:
        return self.m[self.index(k)]

    def second_difference_m1(self, k: int) -> Fraction:
        return -self.m1_at(k + 1) + 2 * self.m1_at(k) - self.m1_at(k - 1)

    def second_difference_m2(self, k: int) -> Fraction:
        return -self.m2_at(k + 1) + 2 * self.m2_at(k) - self.m2_at(k - 1)

    def second_difference_m(self, k: int) -> Fraction:
        return -self.m_at(k + 1) + 2 * self.m_at(k) - self.m_at(k - 1)


@lru_cache(maxsize=None)
def mass_table(sym: RationalSymbol) -> MassTable:
    """Exact table of m_{1,k} = max(1-(q+k)/k1, 0), m_{2,k} = max(1-(p-k)/k2, 0)
    and m_k = 1 - m_{1,k} - m_{2,k} for k = -q..p."""
    sv = special_values(sym)
    q, p = sym.q, sym.p
    m1, m2, m = [], [], []
    for k in range(-q, p + 1):
        v1 = max(Fraction(1) - Fraction(q + k, sv.k1), Fraction(0))
        v2 = max(Fraction(1) - Fraction(p - k, sv.k2), Fraction(0))
        m1.append(v1)
        m2.append(v2)
        m.append(Fraction(1) - v1 - v2)
    return MassTable(q=q, p=p, k1=sv.k1, k2=sv.k2,
                     m1=tuple(m1), m2=tuple(m2), m=tuple(m))


def symbol_info_dict(sym: RationalSymbol) -> dict:
    """JSON-ready structural summary used by the CLI."""
    sv = special_values(sym)
    mt = mass_table(sym)

    def enc(lam):
        if is_infinite(lam):
            return "infinity"
        z = lam.to_complex()
        return [z.real, z.imag]

    return {
        "p": sym.p,
        "q": sym.q,
        "lambda1": enc(sv.lambda1),
        "lambda2": enc(sv.lambda2),
        "k1": sv.k1,
        "k2": sv.k2,
        "mass_table": [
            {"k": k,
             "m1": [mt.m1_at(k).numerator, mt.m1_at(k).denominator],
             "m2": [mt.m2_at(k).numerator, mt.m2_at(k).denominator],
             "m": [mt.m_at(k).numerator, mt.m_at(k).denominator]}
            for k in range(-sym.q, sym.p + 1)
        ],
    }
