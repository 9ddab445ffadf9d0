"""Root systems of the pencil A_lambda(z) = A(z) - lambda B1(z)B2(z).

Roots are ordered by modulus with infinity padding at lambda2, exactly as
the modulus-ordering convention requires.  The primary root finder is an
Aberth-Ehrlich simultaneous iteration with companion-matrix eigenvalues as
fallback initialization and a backward-error acceptance test.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import (ConditioningWarning, DegenerateResultant,
                     SingularDerivative, SpecialLambdaError)
from .exact import (QComplex, QZERO, QONE, exact_det, newton_interp,
                    qp_to_complex, qp_trim)
from .symbol import (RationalSymbol, is_infinite, pencil_coefficients,
                     special_values)

TIE_RTOL = 1e-9            # two moduli within this are a tie (on some Gamma_k)
CLUSTER_RTOL = 1e-6        # coalescence radius for multiple-root detection
_AT_LAMBDA2_RTOL = 1e-13   # leading-coefficient cancellation threshold


def a_lambda(sym: RationalSymbol, lam: complex) -> np.ndarray:
    """Ascending coefficients of A(z) - lambda B1(z)B2(z), length p+q+1."""
    pc = pencil_coefficients(sym)
    return np.asarray(pc.a, dtype=complex) - lam * np.asarray(pc.b, dtype=complex)


def a_lambda_exact(sym: RationalSymbol, lam: QComplex) -> list[QComplex]:
    pc = pencil_coefficients(sym)
    return [pc.exact_a[i] - lam * pc.exact_b[i] for i in range(sym.degree + 1)]


# ---------------------------------------------------------------------------
# Polynomial root finding.
# ---------------------------------------------------------------------------

def _horner_both(c: np.ndarray, z: np.ndarray):
    """Evaluate p and p' at the points z (c ascending)."""
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    for coef in c[::-1]:
        dp = dp * z + p
        p = p * z + coef
    return p, dp


def _residual_scale(c: np.ndarray, z: np.ndarray) -> np.ndarray:
    s = np.zeros(z.shape, dtype=float)
    az = np.abs(z)
    for coef in np.abs(c[::-1]):
        s = s * az + coef
    return s


def _aberth(c: np.ndarray, z0: np.ndarray, iters: int) -> np.ndarray:
    z = z0.copy()
    n = len(z)
    for _ in range(iters):
        p, dp = _horner_both(c, z)
        dp = np.where(dp == 0, 1e-300, dp)
        newton = p / dp
        diff = z[:, None] - z[None, :]
        np.fill_diagonal(diff, 1.0)
        s = (1.0 / diff).sum(axis=1) - 1.0 / np.diagonal(diff)
        denom = 1.0 - newton * s
        denom = np.where(np.abs(denom) < 1e-300, 1e-300, denom)
        step = newton / denom
        z = z - step
        if np.max(np.abs(step) / (1.0 + np.abs(z))) < 1e-15:
            break
    return z


def poly_roots(coeffs) -> np.ndarray:
    """All finite roots of the polynomial (ascending coefficients).

    Exactly-zero leading coefficients are the caller's business; here they
    are stripped, so the result has len(trimmed)-1 entries.
    """
    c = np.asarray(coeffs, dtype=complex)
    while len(c) > 1 and c[-1] == 0:
        c = c[:-1]
    zeros_at_origin = 0
    while len(c) > 1 and c[0] == 0:
        c = c[1:]
        zeros_at_origin += 1
    d = len(c) - 1
    if d <= 0:
        roots = np.empty(0, dtype=complex)
    elif d == 1:
        roots = np.array([-c[0] / c[1]])
    elif d == 2:
        # numerically stable quadratic formula
        a2, a1, a0 = c[2], c[1], c[0]
        disc = np.sqrt(a1 * a1 - 4.0 * a2 * a0 + 0j)
        if abs(a1 + disc) < abs(a1 - disc):
            disc = -disc
        r1 = (-a1 - disc) / (2.0 * a2)
        r2 = a0 / (a2 * r1) if r1 != 0 else -a1 / a2
        roots = np.array([r1, r2])
    else:
        cn = c / c[-1]
        if cn[0] != 0:
            radius = abs(cn[0]) ** (1.0 / d)
        else:
            radius = 0.5 * (1.0 + np.max(np.abs(cn[:-1])))
        angles = 2.0 * np.pi * (np.arange(d) + 0.375) / d
        z0 = radius * np.exp(1j * angles)
        roots = _aberth(cn, z0, 80)
        p = np.abs(_horner_both(cn, roots)[0])
        ok = p <= 1e-10 * np.maximum(_residual_scale(cn, roots), 1e-300)
        if not ok.all():
            z0 = np.roots(cn[::-1])
            roots = _aberth(cn, z0, 40)
            p = np.abs(_horner_both(cn, roots)[0])
            ok = p <= 1e-10 * np.maximum(_residual_scale(cn, roots), 1e-300)
            if not ok.all():
                roots = np.roots(cn[::-1])
    if zeros_at_origin:
        roots = np.concatenate([np.zeros(zeros_at_origin, complex), roots])
    return roots


# ---------------------------------------------------------------------------
# Ordered root systems.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RootSystem:
    """The p+q modulus-ordered roots of A_lambda at one lambda.

    Infinite roots (exactly k2 of them at lambda = lambda2) are represented
    by ``inf`` entries at the end. ``derivs[j]`` is dz_j/dlambda where the
    root is simple and finite, else None.  ``ties`` lists the indices j with
    |z_j| ~ |z_{j+1}| (0-based), i.e. the evidence that lambda lies on some
    Gamma_k.
    """

    lam: complex
    roots: tuple[complex, ...]
    derivs: tuple
    n_infinite: int
    ties: tuple[int, ...]

    @property
    def moduli(self) -> np.ndarray:
        return np.array([abs(z) for z in self.roots])


def _bb_eval(sym: RationalSymbol, z: complex) -> complex:
    b1 = np.polyval(list(reversed(sym.b1_coeffs)), z)
    b2 = np.polyval(list(reversed(sym.b2_coeffs)), z)
    return b1 * b2


def _root_data(sym: RationalSymbol, lam: complex):
    """(sorted roots incl. inf padding, n_infinite). No tie warnings."""
    c = a_lambda(sym, lam)
    scale = np.max(np.abs(c))
    if scale == 0:
        raise SpecialLambdaError("pencil polynomial vanished identically")
    # exactly k2 infinite roots at lambda = lambda2 (and only there)
    n_inf = 0
    sv = special_values(sym)
    lam2 = sv.lambda2_complex
    if lam2 is not None and abs(lam - lam2) <= _AT_LAMBDA2_RTOL * (1.0 + abs(lam2)):
        n_inf = sv.k2
        c = c[:len(c) - n_inf]
    finite = poly_roots(c)
    finite = sorted(finite, key=abs)
    roots = list(finite) + [complex(np.inf, 0.0)] * n_inf
    return roots, n_inf


def ordered_roots(sym: RationalSymbol, lam: complex, *, warn_ties: bool = True) -> RootSystem:
    """All p+q roots of A_lambda, modulus-sorted, with implicit-function
    derivatives attached at simple finite roots."""
    roots, n_inf = _root_data(sym, lam)
    coeffs = a_lambda(sym, lam)
    dcoeffs = np.arange(1, len(coeffs)) * coeffs[1:]
    ties = []
    for j in range(len(roots) - 1):
        za, zb = roots[j], roots[j + 1]
        if np.isinf(abs(za)) and np.isinf(abs(zb)):
            ties.append(j)
            continue
        if np.isinf(abs(zb)) or np.isinf(abs(za)):
            continue
        if abs(abs(za) - abs(zb)) < TIE_RTOL * (1.0 + abs(zb)):
            ties.append(j)
    if ties and warn_ties:
        warnings.warn(
            f"root moduli tied at positions {ties} for lambda={lam}; "
            "ordering between tied entries is arbitrary", ConditioningWarning,
            stacklevel=2)
    derivs = []
    scale = np.max(np.abs(coeffs))
    for z in roots:
        if np.isinf(abs(z)):
            derivs.append(None)
            continue
        ap = np.polyval(dcoeffs[::-1], z)
        if abs(ap) <= 1e-12 * max(scale, _residual_scale(dcoeffs, np.array([z]))[0]):
            derivs.append(None)   # multiple root
            continue
        derivs.append(_bb_eval(sym, z) / ap)
    return RootSystem(lam=lam, roots=tuple(roots), derivs=tuple(derivs),
                      n_infinite=n_inf, ties=tuple(ties))


def roots_only(sym: RationalSymbol, lam: complex) -> list[complex]:
    """Sorted roots without derivative or warning overhead (hot path)."""
    return _root_data(sym, lam)[0]


def batch_moduli(sym: RationalSymbol, lams: np.ndarray) -> np.ndarray:
    """Sorted root moduli for many lambda at once via stacked companion
    eigenvalues (grid prescan; no polishing)."""
    pc = pencil_coefficients(sym)
    a = np.asarray(pc.a, complex)
    b = np.asarray(pc.b, complex)
    lams = np.asarray(lams, complex).ravel()
    coeffs = a[None, :] - lams[:, None] * b[None, :]   # (N, d+1)
    d = sym.degree
    lead = coeffs[:, -1]
    tiny = np.abs(lead) <= 1e-300
    lead = np.where(tiny, 1e-300, lead)
    comp = np.zeros((len(lams), d, d), dtype=complex)
    comp[:, 1:, :-1] = np.eye(d - 1)
    comp[:, :, -1] = -coeffs[:, :-1] / lead[:, None]
    ev = np.linalg.eigvals(comp)
    mods = np.sort(np.abs(ev), axis=1)
    return mods


# ---------------------------------------------------------------------------
# Branch points.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BranchPointSet:
    """Finite lambda where A_lambda has a multiple root (a collision at
    infinity at lambda2 with k2 >= 2 counts)."""

    points: tuple[complex, ...]
    resultant: tuple[QComplex, ...]   # exact coefficients in lambda

    def closest(self, lam: complex) -> float:
        if not self.points:
            return np.inf
        return min(abs(lam - b) for b in self.points)


def _sylvester(p: list, q: list):
    """Sylvester matrix rows (descending layout) of polys given ascending."""
    dp, dq = len(p) - 1, len(q) - 1
    n = dp + dq
    rows = []
    pd = list(reversed(p))
    qd = list(reversed(q))
    for i in range(dq):
        rows.append([QZERO] * i + pd + [QZERO] * (n - dp - 1 - i))
    for i in range(dp):
        rows.append([QZERO] * i + qd + [QZERO] * (n - dq - 1 - i))
    return rows


@lru_cache(maxsize=None)
def _resultant_in_lambda(sym: RationalSymbol) -> tuple[QComplex, ...]:
    """Exact coefficients of Res_z(A_lambda, dA_lambda/dz) as a polynomial
    in lambda, computed by determinant interpolation at integer nodes."""
    d = sym.degree
    deg_bound = 2 * d - 1
    nodes = [QComplex(Fraction(t), Fraction(0)) for t in range(deg_bound + 1)]
    values = []
    for lam in nodes:
        al = a_lambda_exact(sym, lam)
        dal = [al[i] * Fraction(i) for i in range(1, len(al))]
        values.append(exact_det(_sylvester(al, dal)))
    return tuple(newton_interp(nodes, values))


def branch_points(sym: RationalSymbol) -> BranchPointSet:
    """All finite branch points, from the exact rational resultant.

    Candidate roots of the resultant are verified: a candidate counts only
    if A_lambda genuinely has a coalescing pair of finite roots there, or
    it equals lambda2 with k2 >= 2 (collision at infinity).  This discards
    the spurious resultant factor at lambda2 when k2 = 1, where only the
    formal leading coefficient vanishes.
    """
    res = qp_trim(list(_resultant_in_lambda(sym)))
    if not res:
        raise DegenerateResultant("discriminant vanishes identically in lambda")
    # exact zero roots first
    mult0 = 0
    while res and res[0].is_zero():
        res = res[1:]
        mult0 += 1
    candidates = []
    if mult0:
        candidates.append(0.0 + 0.0j)
    if len(res) > 1:
        # normalize exactly before the float conversion; resultant
        # coefficients can be astronomically large integers
        big = max(res, key=lambda c: c.abs2())
        scaled = [c / big for c in res]
        candidates.extend(poly_roots(qp_to_complex(scaled)))
    sv = special_values(sym)
    accepted = []
    for lam in candidates:
        if any(abs(lam - a) <= CLUSTER_RTOL * (1.0 + abs(a)) for a in accepted):
            continue
        if _is_branch_point(sym, lam, sv):
            accepted.append(complex(lam))
    accepted.sort(key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    return BranchPointSet(points=tuple(accepted),
                          resultant=tuple(_resultant_in_lambda(sym)))


def _is_branch_point(sym: RationalSymbol, lam: complex, sv) -> bool:
    lam2 = sv.lambda2_complex
    if lam2 is not None and abs(lam - lam2) <= CLUSTER_RTOL * (1.0 + abs(lam2)):
        if sv.k2 >= 2:
            return True
    roots = [z for z in roots_only(sym, lam) if not np.isinf(abs(z))]
    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < CLUSTER_RTOL * (1.0 + abs(roots[j])):
                return True
    return False


# ---------------------------------------------------------------------------
# w_k and its logarithmic derivative.
# ---------------------------------------------------------------------------

def w_k_value(sym: RationalSymbol, lam: complex, k: int) -> complex:
    """Product of the q+k smallest-modulus roots (empty product = 1)."""
    _check_k_extended(sym, k)
    m = sym.q + k
    if m == 0:
        return 1.0 + 0.0j
    roots = roots_only(sym, lam)
    chosen = roots[:m]
    if any(np.isinf(abs(z)) for z in chosen):
        raise SpecialLambdaError(
            f"w_{k} undefined at lambda={lam}: infinite root among the "
            f"{m} smallest")
    out = 1.0 + 0.0j
    for z in chosen:
        out *= z
    return out


def w_k_log_derivative(sym: RationalSymbol, lam: complex, k: int) -> complex:
    """d/dlambda log w_k = sum over the q+k smallest roots of z'_j/z_j."""
    _check_k_extended(sym, k)
    m = sym.q + k
    if m == 0:
        return 0.0 + 0.0j
    rs = ordered_roots(sym, lam, warn_ties=False)
    total = 0.0 + 0.0j
    for j in range(m):
        z = rs.roots[j]
        if np.isinf(abs(z)) or z == 0:
            raise SpecialLambdaError(
                f"log-derivative undefined at lambda={lam} (zero or infinite root)")
        if rs.derivs[j] is None:
            raise SingularDerivative(
                f"multiple root at lambda={lam}; branch point")
        total += rs.derivs[j] / z
    return total


def _check_k_extended(sym: RationalSymbol, k: int):
    if not (-sym.q <= k <= sym.p):
        raise IndexError(f"k={k} outside [{-sym.q}, {sym.p}]")
