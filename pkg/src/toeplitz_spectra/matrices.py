"""Finite sections: determinant polynomials P_{k,n}, generalized spectra,
divisibility structure, the banded-reduction factorization and the subset
determinant expansion.

P_{k,n}(lambda) = det T_n(z^{-k}(f - lambda)) is recovered by evaluating
determinants at n+1 interpolation nodes and solving the interpolation
problem in Newton form.  Two backends: double precision (LU determinants,
circle nodes in Leja order) and exact rational arithmetic (fraction-free
determinants at rational nodes), which doubles as the extended-precision
mode and makes multiplicity counts at lambda1/lambda2 exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

import numpy as np
import scipy.linalg

from .errors import (IllConditionedInterpolation, MultipleRootError,
                     NonTriangularFactor, SpecialLambdaError)
from .exact import QComplex, exact_det, newton_interp
from .algebraic import CLUSTER_RTOL, poly_roots, roots_only
from .curves import curve_scale, membership_gap
from .symbol import (RationalSymbol, fourier_coefficients, fourier_exact,
                     mass_table, special_values)


# ---------------------------------------------------------------------------
# Toeplitz sections.
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ToeplitzMatrix:
    """Finite section of T(z^{-k}(f - lambda)); lambda=None leaves the
    symbol unshifted by lambda."""

    n: int
    shift_k: int
    lam: complex | None
    entries: np.ndarray

    def __post_init__(self):
        assert self.entries.shape == (self.n, self.n)


def build(sym: RationalSymbol, n: int, k: int = 0,
          lam: complex | None = None) -> ToeplitzMatrix:
    """Dense n x n section with entries f_{i-j+k} - lambda [i-j+k == 0]."""
    if n < 1:
        raise ValueError("n must be >= 1")
    lo, hi = k - (n - 1), k + (n - 1)
    fk = fourier_coefficients(sym, lo, hi)
    idx = np.arange(n)
    offsets = idx[:, None] - idx[None, :] + k
    entries = np.asarray(fk, complex)[offsets - lo]
    if lam is not None:
        entries = entries - lam * (offsets == 0)
    return ToeplitzMatrix(n=n, shift_k=k, lam=lam, entries=entries)


def _exact_entries(sym: RationalSymbol, n: int, k: int,
                   lam: QComplex | None) -> list[list[QComplex]]:
    lo, hi = k - (n - 1), k + (n - 1)
    fk = fourier_exact(sym, lo, hi)
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            v = fk[i - j + k - lo]
            if lam is not None and i - j + k == 0:
                v = v - lam
            row.append(v)
        rows.append(row)
    return rows


def det_lu(matrix: np.ndarray) -> complex:
    """LU determinant with partial pivoting (complex)."""
    sign, logabs = np.linalg.slogdet(matrix)
    if sign == 0:
        return 0.0 + 0.0j
    return sign * np.exp(logabs)


def charpoly_direct(sym: RationalSymbol, k: int, n: int, lam: complex) -> complex:
    """P_{k,n}(lambda) by a direct LU determinant (oracle path)."""
    return det_lu(build(sym, n, k, lam).entries)


# ---------------------------------------------------------------------------
# Determinant polynomial interpolation.
# ---------------------------------------------------------------------------

@dataclass
class DeterminantPolynomial:
    """P_{k,n} as a coefficient vector with its root structure.

    ``coeffs`` are ascending in lambda, scaled by exp(-log_scale): the true
    polynomial is exp(log_scale) * sum coeffs[j] lambda^j.  ``exact_coeffs``
    is set on the exact backend.
    """

    k: int
    n: int
    coeffs: np.ndarray
    log_scale: float
    precision: str
    exact_coeffs: tuple | None
    degree: int
    mult_lambda1: int
    mult_lambda2: int
    quotient_degree: int
    roots: np.ndarray            # all finite roots with multiplicity
    quotient_roots: np.ndarray   # roots away from lambda1/lambda2 clusters

    def evaluate_scaled(self, lam: complex) -> complex:
        """P(lambda) / exp(log_scale)."""
        return complex(np.polyval(self.coeffs[::-1], lam))

    def evaluate(self, lam: complex) -> complex:
        return self.evaluate_scaled(lam) * math.exp(self.log_scale)

    def log_derivative(self, lam: complex) -> complex:
        dp = np.polyval((self.coeffs[1:] * np.arange(1, len(self.coeffs)))[::-1], lam)
        p = np.polyval(self.coeffs[::-1], lam)
        return dp / p


def _leja_order(nodes: np.ndarray) -> np.ndarray:
    order = [int(np.argmax(np.abs(nodes)))]
    rest = set(range(len(nodes))) - set(order)
    while rest:
        best, best_val = None, -1.0
        for j in rest:
            v = np.min(np.abs(nodes[j] - nodes[order]))
            if v > best_val:
                best, best_val = j, v
        order.append(best)
        rest.remove(best)
    return nodes[order]


def _newton_coeffs_float(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Divided differences, then Newton-to-monomial expansion (ascending)."""
    n = len(nodes)
    coef = values.astype(complex).copy()
    for j in range(1, n):
        coef[j:] = (coef[j:] - coef[j - 1:-1]) / (nodes[j:] - nodes[:n - j])
    out = np.zeros(n, complex)
    out[0] = coef[n - 1]
    deg = 0
    for i in range(n - 2, -1, -1):
        shifted = np.zeros(n, complex)
        shifted[1:deg + 2] = out[:deg + 1]
        shifted[:deg + 1] += -nodes[i] * out[:deg + 1]
        shifted[0] += coef[i]
        out = shifted
        deg += 1
    return out


def _interp_nodes_double(sym, k, n):
    from .algebraic import branch_points
    bps = branch_points(sym).points
    center = sum(bps) / len(bps) if bps else 0.0 + 0.0j
    radius = 1.5 * curve_scale(sym)
    angles = 2.0 * np.pi * (np.arange(n + 1) + 0.35) / (n + 1)
    nodes = center + radius * np.exp(1j * angles)
    for i, nd in enumerate(nodes):
        if membership_gap(sym, complex(nd), k) < 1e-9:
            nodes[i] = center + radius * np.exp(1j * (angles[i] + 0.5 * np.pi / (n + 1)))
    return nodes


def _synthetic_divisions(coeffs: np.ndarray, lam0: complex, rtol: float):
    """Count multiplicity of lam0 by repeated synthetic division while the
    remainder sits at the coefficient noise floor (relative to the largest
    coefficient, the scale interpolation noise is proportional to)."""
    c = coeffs.astype(complex).copy()
    mult = 0
    floor = rtol * (float(np.max(np.abs(c))) or 1.0) \
        * max(1.0, abs(lam0)) ** (len(c) - 1)
    while len(c) > 1:
        q = np.empty(len(c) - 1, complex)
        q[-1] = c[-1]
        for i in range(len(c) - 2, 0, -1):
            q[i - 1] = c[i] + lam0 * q[i]
        r = c[0] + lam0 * q[0]
        if abs(r) > floor:
            break
        c = q
        mult += 1
    return mult, c


def _exact_divisions(coeffs: list[QComplex], lam0: QComplex, rtol: float):
    """Exact synthetic division; a remainder counts as zero when exactly
    zero, or negligible against the largest coefficient (symbols built from
    floating-point factorizations are exact mirrors of noisy numbers)."""
    c = list(coeffs)
    mult = 0
    cmax = max(c, key=lambda x: x.abs2())
    lam0f = abs(lam0.to_complex())
    while len(c) > 1:
        q: list[QComplex] = [None] * (len(c) - 1)
        q[-1] = c[-1]
        for i in range(len(c) - 2, 0, -1):
            q[i - 1] = c[i] + lam0 * q[i]
        r = c[0] + lam0 * q[0]
        if not r.is_zero():
            if cmax.is_zero():
                break
            rel = abs((r / cmax).to_complex())
            if not rel <= rtol * max(1.0, lam0f) ** (len(c) - 1):
                break
        c = q
        mult += 1
    return mult, c


MULT_RTOL = 1e-9            # exact backend (noise from float-built symbols)
MULT_RTOL_DOUBLE = 1e-10    # double backend (interpolation noise floor)


def char_poly(sym: RationalSymbol, k: int, n: int,
              precision: str = "double") -> DeterminantPolynomial:
    """Interpolate P_{k,n} and analyze its root structure.

    precision="double" uses LU determinants on circle nodes;
    precision="exact" evaluates fraction-free rational determinants at
    rational nodes (serves as the extended-precision backend).
    """
    if precision == "exact":
        return _char_poly_exact(sym, k, n)
    nodes = _interp_nodes_double(sym, k, n)
    nodes = _leja_order(nodes)
    coeffs, log_scale = _interp_attempt(sym, k, n, nodes)
    ok, err = _validate_interp(sym, k, n, coeffs, log_scale)
    if not ok:
        nodes2 = _leja_order(1.25 * (nodes - np.mean(nodes)) + np.mean(nodes))
        coeffs2, log_scale2 = _interp_attempt(sym, k, n, nodes2)
        ok2, err2 = _validate_interp(sym, k, n, coeffs2, log_scale2)
        if not ok2:
            raise IllConditionedInterpolation(
                f"interpolation residual {min(err, err2):.2e} after node rescale")
        coeffs, log_scale = coeffs2, log_scale2
    return _analyze(sym, k, n, coeffs, log_scale, None, "double")


def _interp_attempt(sym, k, n, nodes):
    logs = []
    dets = []
    for nd in nodes:
        sign, logabs = np.linalg.slogdet(build(sym, n, k, complex(nd)).entries)
        logs.append(logabs if sign != 0 else -np.inf)
        dets.append(sign)
    finite = [l for l in logs if np.isfinite(l)]
    log_scale = float(np.mean(finite)) if finite else 0.0
    values = np.array([s * np.exp(l - log_scale) if np.isfinite(l) else 0.0
                       for s, l in zip(dets, logs)], complex)
    coeffs = _newton_coeffs_float(np.asarray(nodes, complex), values)
    return coeffs, log_scale


def _validate_interp(sym, k, n, coeffs, log_scale, n_fresh: int = 3):
    from .algebraic import branch_points
    bps = branch_points(sym).points
    center = sum(bps) / len(bps) if bps else 0.0 + 0.0j
    radius = 1.23 * 1.5 * curve_scale(sym)
    worst = 0.0
    for t in range(n_fresh):
        lam = center + radius * np.exp(2j * np.pi * (t + 0.21) / n_fresh)
        direct = charpoly_direct(sym, k, n, complex(lam))
        interp = complex(np.polyval(coeffs[::-1], lam)) * math.exp(log_scale)
        denom = max(abs(direct), abs(interp), 1e-300)
        worst = max(worst, abs(direct - interp) / denom)
    return worst < 1e-6, worst


def _char_poly_exact(sym, k, n):
    scale = curve_scale(sym)
    denom = max(1, math.ceil(n / (3.0 * scale)))
    nodes = [QComplex(Fraction(t - n // 2, denom), Fraction(0))
             for t in range(n + 1)]
    values = [exact_det(_exact_entries(sym, n, k, nd)) for nd in nodes]
    exact_coeffs = newton_interp(nodes, values)
    exact_coeffs = exact_coeffs + [QComplex(Fraction(0), Fraction(0))] * (
        n + 1 - len(exact_coeffs))
    coeffs, log_scale = _exact_to_float(exact_coeffs)
    return _analyze(sym, k, n, coeffs, log_scale, tuple(exact_coeffs), "exact")


def _exact_to_float(exact_coeffs):
    def log2_mag(c: QComplex) -> float:
        best = -1e18
        for part in (c.re, c.im):
            if part != 0:
                best = max(best, part.numerator.bit_length()
                           - part.denominator.bit_length())
        return best

    mags = [log2_mag(c) for c in exact_coeffs]
    peak = max(mags)
    if peak <= -1e17:
        return np.zeros(len(exact_coeffs), complex), 0.0
    shift = int(peak)
    scale = Fraction(1, 2) ** shift if shift >= 0 else Fraction(2) ** (-shift)
    out = np.array([complex(float(c.re * scale), float(c.im * scale))
                    for c in exact_coeffs])
    return out, float(shift) * math.log(2.0)


def _analyze(sym, k, n, coeffs, log_scale, exact_coeffs, precision):
    sv = special_values(sym)
    scale = float(np.max(np.abs(coeffs))) or 1.0
    trimmed = coeffs.copy()
    ncoef = len(trimmed)
    while ncoef > 1 and abs(trimmed[ncoef - 1]) <= 1e-9 * scale:
        ncoef -= 1
    degree = ncoef - 1
    work = trimmed[:ncoef]
    mult1 = mult2 = 0
    if exact_coeffs is not None:
        exwork = list(exact_coeffs[:ncoef])
        if sv.lambda1_complex is not None:
            mult1, exwork = _exact_divisions(exwork, QComplex.make(sv.lambda1), MULT_RTOL)
        if sv.lambda2_complex is not None:
            mult2, exwork = _exact_divisions(exwork, QComplex.make(sv.lambda2), MULT_RTOL)
        quotient, _ = _exact_to_float(exwork)
    else:
        work = work.copy()
        if sv.lambda1_complex is not None:
            mult1, work = _synthetic_divisions(work, sv.lambda1_complex, MULT_RTOL_DOUBLE)
        if sv.lambda2_complex is not None:
            mult2, work = _synthetic_divisions(work, sv.lambda2_complex, MULT_RTOL_DOUBLE)
        quotient = work
    qroots = _quotient_roots(quotient, precision)
    allroots = []
    if sv.lambda1_complex is not None:
        allroots.extend([sv.lambda1_complex] * mult1)
    if sv.lambda2_complex is not None:
        allroots.extend([sv.lambda2_complex] * mult2)
    allroots.extend(qroots)
    return DeterminantPolynomial(
        k=k, n=n, coeffs=coeffs, log_scale=log_scale, precision=precision,
        exact_coeffs=exact_coeffs, degree=degree,
        mult_lambda1=mult1, mult_lambda2=mult2,
        quotient_degree=len(quotient) - 1,
        roots=np.asarray(allroots), quotient_roots=np.asarray(qroots))


def _quotient_roots(quotient: np.ndarray, precision: str) -> np.ndarray:
    q = np.asarray(quotient, complex)
    scale = float(np.max(np.abs(q))) if len(q) else 0.0
    if scale == 0.0 or len(q) <= 1:
        return np.empty(0, complex)
    nz = len(q)
    while nz > 1 and abs(q[nz - 1]) <= 1e-12 * scale:
        nz -= 1
    q = q[:nz]
    if len(q) <= 1:
        return np.empty(0, complex)
    if precision == "exact" and len(q) > 25:
        import mpmath
        with mpmath.workdps(40):
            rts = mpmath.polyroots([mpmath.mpc(c) for c in q[::-1]],
                                   maxsteps=200, extraprec=80)
        return np.array([complex(r) for r in rts])
    return poly_roots(q)


# ---------------------------------------------------------------------------
# Divisibility / degree-bound reports.
# ---------------------------------------------------------------------------

@dataclass
class DivisibilityReport:
    k: int
    n: int
    degree: int
    mult_lambda1: int
    mult_lambda2: int
    quotient_degree: int
    slack_lambda1: Fraction
    slack_lambda2: Fraction
    slack_quotient: Fraction

    def required_c(self) -> Fraction:
        return max(self.slack_lambda1, self.slack_lambda2,
                   self.slack_quotient, Fraction(0))


def divisibility_report(sym: RationalSymbol, k: int, n: int,
                        precision: str = "exact",
                        dp: DeterminantPolynomial | None = None) -> DivisibilityReport:
    """Slacks of the structural multiplicity/degree inequalities at one n.

    slack_* is the smallest constant c making the corresponding inequality
    hold; a single bounded c across an n-sweep is the structural claim.
    """
    if dp is None:
        dp = char_poly(sym, k, n, precision=precision)
    sv = special_values(sym)
    mt = mass_table(sym)
    m1, m2, m = mt.m1_at(k), mt.m2_at(k), mt.m_at(k)
    if sv.lambda1_complex is not None:
        slack1 = m1 * n - dp.mult_lambda1
    else:
        slack1 = Fraction(dp.degree) - (1 - m1) * n
    if sv.lambda2_complex is not None:
        slack2 = m2 * n - dp.mult_lambda2
    else:
        slack2 = Fraction(dp.degree) - (1 - m2) * n
    slack_q = Fraction(dp.quotient_degree - m * n, 2)
    return DivisibilityReport(
        k=k, n=n, degree=dp.degree,
        mult_lambda1=dp.mult_lambda1, mult_lambda2=dp.mult_lambda2,
        quotient_degree=dp.quotient_degree,
        slack_lambda1=slack1, slack_lambda2=slack2, slack_quotient=slack_q)


def divisibility_sweep(sym: RationalSymbol, k: int, ns,
                       precision: str = "exact"):
    """Reports over an n-sweep plus the single constant c covering them."""
    reports = [divisibility_report(sym, k, n, precision=precision) for n in ns]
    c = max((r.required_c() for r in reports), default=Fraction(0))
    return reports, c


# ---------------------------------------------------------------------------
# Banded reduction.
# ---------------------------------------------------------------------------

@dataclass
class BandedReductionReport:
    n: int
    k: int
    lam: complex
    corner_size: int
    max_outside_corner: float
    kappa: complex
    det_product: complex
    det_scaled_charpoly: complex
    rel_err: float


def _toeplitz_from_indexed(coeffs: dict[int, complex], n: int) -> np.ndarray:
    m = np.zeros((n, n), complex)
    idx = np.arange(n)
    offsets = idx[:, None] - idx[None, :]
    for d, v in coeffs.items():
        if -n < d < n:
            m += v * (offsets == d)
    return m


def banded_reduction_residual(sym: RationalSymbol, k: int, n: int,
                              lam: complex, tol: float = 1e-9) -> BandedReductionReport:
    """Reduce T_n(z^{-k}(f-lambda)) to the banded pencil section by the
    triangular factorization and measure the finite corner correction.

    Returns the smallest c with all entries outside the top-left c x c
    corner below tol, plus the determinant relation with kappa equal to the
    product of the two triangular factors' diagonals.
    """
    q, p = sym.q, sym.p
    L = _toeplitz_from_indexed(
        {i: c for i, c in enumerate(sym.b2_coeffs)}, n)
    R = _toeplitz_from_indexed(
        {i - q: c for i, c in enumerate(sym.b1_coeffs)}, n)
    if abs(sym.b2_coeffs[0]) == 0 or abs(sym.b1_coeffs[-1]) == 0:
        raise NonTriangularFactor("triangular factor has zero diagonal")
    T = build(sym, n, k, lam).entries
    from .symbol import pencil_coefficients
    pc = pencil_coefficients(sym)
    banded = _toeplitz_from_indexed(
        {i - k: pc.a[i + q] - lam * pc.b[i + q] for i in range(-q, p + 1)}, n)
    E = np.abs(L @ T @ R - banded)
    row_max = E.max(axis=1)
    col_max = E.max(axis=0)
    suffix_row = np.maximum.accumulate(row_max[::-1])[::-1]
    suffix_col = np.maximum.accumulate(col_max[::-1])[::-1]
    corner = n
    for c in range(n + 1):
        outside = 0.0
        if c < n:
            outside = max(suffix_row[c], suffix_col[c])
        if outside < tol:
            corner = c
            break
    outside_val = 0.0 if corner >= n else float(
        max(suffix_row[corner], suffix_col[corner]))
    kappa = (sym.b2_coeffs[0] ** n) * (sym.b1_coeffs[-1] ** n)
    det_lhs = det_lu(L @ T @ R)
    det_rhs = kappa * det_lu(T)
    rel = abs(det_lhs - det_rhs) / max(abs(det_lhs), abs(det_rhs), 1e-300)
    return BandedReductionReport(
        n=n, k=k, lam=lam, corner_size=corner,
        max_outside_corner=outside_val, kappa=kappa,
        det_product=det_lhs, det_scaled_charpoly=det_rhs, rel_err=rel)


# ---------------------------------------------------------------------------
# Subset determinant expansion (finite-n identity).
# ---------------------------------------------------------------------------

def day_sum(sym: RationalSymbol, k: int, n: int, lam: complex) -> complex:
    """Evaluate det T_n(z^{-k}(f-lambda)) as the subset sum
    sum_S C_S(lambda) w_S(lambda)^n over the (q+k)-subsets of root indices.

    The subset weights are normalized as if B1 were monic and B2 had unit
    constant term (the sum is invariant under that rescaling of A, B1, B2,
    and only then does it reproduce the determinant).
    """
    sv = special_values(sym)
    for special, name in ((sv.lambda1_complex, "lambda1"),
                          (sv.lambda2_complex, "lambda2")):
        if special is not None and abs(lam - special) <= 1e-9 * (1.0 + abs(special)):
            raise SpecialLambdaError(f"subset expansion undefined at {name}")
    roots = roots_only(sym, lam)
    if any(np.isinf(abs(z)) for z in roots):
        raise SpecialLambdaError("infinite root; lambda too close to lambda2")
    d = sym.degree
    for i in range(d):
        for j in range(i + 1, d):
            if abs(roots[i] - roots[j]) < CLUSTER_RTOL * (1.0 + abs(roots[j])):
                raise MultipleRootError(
                    f"roots {roots[i]} and {roots[j]} coalesce at lambda={lam}")
    beta = np.roots(list(reversed(sym.b1_coeffs)))
    gamma = np.roots(list(reversed(sym.b2_coeffs)))
    from .symbol import pencil_coefficients
    pc = pencil_coefficients(sym)
    a_mq, b_mq = pc.a[0], pc.b[0]
    norm = sym.b1_coeffs[-1] * sym.b2_coeffs[0]
    w_pref = (-1) ** (sym.q + k) * (a_mq - b_mq * lam) / norm
    m = sym.q + k
    total = 0.0 + 0.0j
    for S in combinations(range(d), m):
        in_S = np.zeros(d, bool)
        in_S[list(S)] = True
        zS = [roots[i] for i in S]
        zbar = [roots[j] for j in range(d) if not in_S[j]]
        wS = w_pref
        for z in zS:
            wS /= z
        cS = 1.0 + 0.0j
        for z in zbar:
            cS *= z ** k
        for z in zbar:
            for b in beta:
                cS *= (z - b)
        for z in zS:
            for g in gamma:
                cS *= (g - z)
        for zi in zS:
            for zj in zbar:
                cS /= (zj - zi)
        for b in beta:
            for g in gamma:
                cS /= (g - b)
        total += cS * wS ** n
    return total


def w_subset_two_forms(sym: RationalSymbol, k: int, lam: complex,
                       subset: tuple[int, ...]) -> tuple[complex, complex]:
    """The two equivalent expressions for the subset weight w_S (constant-
    coefficient form and leading-coefficient form), both normalized."""
    roots = roots_only(sym, lam)
    from .symbol import pencil_coefficients
    pc = pencil_coefficients(sym)
    norm = sym.b1_coeffs[-1] * sym.b2_coeffs[0]
    d = sym.degree
    w1 = (-1) ** (sym.q + k) * (pc.a[0] - pc.b[0] * lam) / norm
    for i in subset:
        w1 /= roots[i]
    w2 = (-1) ** (sym.p - k) * (pc.a[-1] - pc.b[-1] * lam) / norm
    for j in range(d):
        if j not in subset:
            w2 *= roots[j]
    return w1, w2


# ---------------------------------------------------------------------------
# Empirical Cauchy transforms of generalized spectra.
# ---------------------------------------------------------------------------

def empirical_cauchy(dp: DeterminantPolynomial, lam: complex) -> complex:
    """(1/n) P'_{k,n}(lambda) / P_{k,n}(lambda) from the coefficient vector."""
    return dp.log_derivative(lam) / dp.n


def empirical_cauchy_resolvent(sym: RationalSymbol, k: int, n: int,
                               lam: complex) -> complex:
    """(1/n) P'_{k,n}/P_{k,n} evaluated stably as a resolvent trace:
    d/dlambda log det T = tr(T^{-1} dT/dlambda), and dT/dlambda is minus
    the indicator of the shifted diagonal."""
    T = build(sym, n, k, lam).entries
    Tinv = np.linalg.inv(T)
    j = np.arange(n)
    valid = (j + k >= 0) & (j + k < n)
    trace = Tinv[j[valid] + k, j[valid]].sum()
    return -trace / n


def limit_cauchy(sym: RationalSymbol, k: int, lam: complex) -> complex:
    """Limit of the empirical transform: the measure's Cauchy transform
    plus the point-mass terms at finite lambda1/lambda2."""
    from .measure import cauchy_transform
    mt = mass_table(sym)
    sv = special_values(sym)
    out = cauchy_transform(sym, k, lam)
    if sv.lambda1_complex is not None:
        out += float(mt.m1_at(k)) / (lam - sv.lambda1_complex)
    if sv.lambda2_complex is not None:
        out += float(mt.m2_at(k)) / (lam - sv.lambda2_complex)
    return out


def generalized_spectrum_pencil(sym: RationalSymbol, k: int, n: int) -> np.ndarray:
    """Finite generalized eigenvalues of the linear pencil
    (T_n(z^{-k} f), T_n(z^{-k})) via QZ (independent cross-check path)."""
    A = build(sym, n, k).entries
    lo, hi = k - (n - 1), k + (n - 1)
    shift = np.zeros(2 * n - 1, complex)
    if lo <= -k <= hi:
        shift[-k - lo] = 1.0
    idx = np.arange(n)
    B = shift[idx[:, None] - idx[None, :] - lo]
    ab = scipy.linalg.eig(A, B, right=False, homogeneous_eigvals=True)
    alpha, beta_ = ab[0], ab[1]
    finite = np.abs(beta_) > 1e-10 * np.abs(alpha)
    return (alpha[finite] / beta_[finite]).ravel()
