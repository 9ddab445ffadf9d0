"""The limiting measures mu_k: density, discretization, Cauchy transform,
logarithmic potential.

On an interior curve point the two tied root branches z_a, z_b are swapped
between the two sides of the arc, so the one-sided boundary values of the
log-derivative jump reduce exactly to z_a'/z_a - z_b'/z_b.  The density is
evaluated that way (no offsets, machine accuracy up to root finding); a
normal-offset Richardson variant is kept as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import (CalibrationError, CurveProximity, ExceptionalProximity,
                     NonPositiveDensity, SampleOnSingularity)
from .algebraic import roots_only, w_k_log_derivative
from .curves import CurveFamily, curve_scale, membership_gap, snap_to_curve, trace_curves
from .symbol import (RationalSymbol, mass_table, pencil_coefficients,
                     special_values)

ON_CURVE_GAP = 1e-6          # a density point must verify the tie this well
DENSITY_FLOOR = -1e-8        # positivity tolerance


@dataclass(frozen=True)
class DensitySample:
    """Density of mu_k per unit arclength at one curve point."""

    lam: complex
    density: float
    tangent: complex
    imag_residual: float


def _zlog_derivative(sym: RationalSymbol, z: complex, lam: complex) -> complex:
    """z'/z at a root z of A_lambda, via the implicit-function formula."""
    b1 = np.polyval(list(reversed(sym.b1_coeffs)), z)
    b2 = np.polyval(list(reversed(sym.b2_coeffs)), z)
    pc = pencil_coefficients(sym)
    coeffs = np.asarray(pc.a, complex) - lam * np.asarray(pc.b, complex)
    dcoeffs = np.arange(1, len(coeffs)) * coeffs[1:]
    ap = np.polyval(dcoeffs[::-1], z)
    return (b1 * b2) / (ap * z)


def density_at(sym: RationalSymbol, k: int, lam: complex, tangent: complex, *,
               family: CurveFamily | None = None,
               exceptional_margin: float = 1e-3,
               probe_guard=None,
               method: str = "boundary") -> DensitySample:
    """Density of mu_k at a point of Gamma_k with the given unit tangent.

    ``method="boundary"`` uses the exact tied-pair boundary values;
    ``method="offset"`` reproduces them by normal offsets with Richardson
    extrapolation (slower and less accurate; used for cross-checks).
    ``probe_guard`` is an optional list of exceptional points used only to
    shrink the side-probe offset (quadrature evaluates arbitrarily close to
    them; the margin check applies only when a family is passed).
    """
    tangent = tangent / abs(tangent)
    dist_exc = math.inf
    if family is not None:
        dist_exc = family.nearest_exceptional_distance(lam)
        total_len = sum(a.length for a in family.arcs)
        if dist_exc < exceptional_margin * total_len:
            raise ExceptionalProximity(
                f"lambda={lam} is within {exceptional_margin} arc lengths of an "
                "exceptional point")
    if probe_guard:
        dist_exc = min(dist_exc,
                       min(abs(lam - e) for e in probe_guard))
    if method == "offset":
        return _density_offset(sym, k, lam, tangent, dist_exc)

    m = sym.q + k
    roots = roots_only(sym, lam)
    za, zb = roots[m - 1], roots[m]
    gap = abs(math.log(abs(zb)) - math.log(abs(za))) if abs(za) > 0 else math.inf
    if not gap < ON_CURVE_GAP:
        raise ValueError(
            f"lambda={lam} is not on Gamma_{k} (modulus gap {gap:.2e})")
    # decide which tied branch the +side keeps among the q+k smallest
    swap = _plus_side_swaps(sym, lam, tangent, za, zb, m, dist_exc)
    if swap:
        za, zb = zb, za
    jump = (_zlog_derivative(sym, za, lam) - _zlog_derivative(sym, zb, lam))
    val = jump * tangent / (2j * np.pi)
    density, resid = float(val.real), float(abs(val.imag))
    if density < DENSITY_FLOOR:
        # positivity of the measure selects the branch when the side probe
        # is inconclusive (root-finder noise near coalescing roots); a value
        # that is not cleanly real-negative signals a genuine problem
        if resid <= 0.01 * abs(density):
            density = -density
        else:
            raise NonPositiveDensity(
                f"density {density:.3e} at lambda={lam}; mislabeled roots "
                "or off-curve point")
    return DensitySample(lam=lam, density=density, tangent=tangent,
                         imag_residual=resid)


def _plus_side_swaps(sym, lam, tangent, za, zb, m, dist_exc) -> bool:
    delta = 1e-6 * (1.0 + abs(lam))
    if math.isfinite(dist_exc):
        delta = min(delta, 0.25 * dist_exc)
    probe = lam + 1j * tangent * delta
    rp = roots_only(sym, probe)
    ia = int(np.argmin([abs(r - za) for r in rp]))
    ib = int(np.argmin([abs(r - zb) for r in rp]))
    if ia < m <= ib:
        return False
    if ib < m <= ia:
        return True
    return False  # degenerate probe; positivity fallback decides


def _density_offset(sym, k, lam, tangent, dist_exc):
    scale = 1.0 + abs(lam)
    d0 = 1e-4 * scale
    if math.isfinite(dist_exc):
        d0 = min(d0, dist_exc / 8.0)
    vals = []
    for d in (d0, d0 / 2.0, d0 / 4.0):
        fp = w_k_log_derivative(sym, lam + 1j * tangent * d, k)
        fm = w_k_log_derivative(sym, lam - 1j * tangent * d, k)
        vals.append((fp - fm) * tangent / (2j * np.pi))
    t1 = 2.0 * vals[1] - vals[0]
    t2 = 2.0 * vals[2] - vals[1]
    val = (4.0 * t2 - t1) / 3.0
    density, resid = float(val.real), float(abs(val.imag))
    if density < DENSITY_FLOOR:
        raise NonPositiveDensity(f"offset density {density:.3e} at lambda={lam}")
    return DensitySample(lam=lam, density=density, tangent=tangent,
                         imag_residual=resid)


# ---------------------------------------------------------------------------
# Discretization.
# ---------------------------------------------------------------------------

@dataclass
class DiscretizedMeasure:
    """Weighted point cloud approximating mu_k on the traced curve."""

    curve_k: int
    points: np.ndarray
    weights: np.ndarray
    total: float
    densities: np.ndarray
    arclengths: np.ndarray
    tangents: np.ndarray
    arc_ids: np.ndarray
    mass_target: float

    def __len__(self):
        return len(self.points)


def _gauss(a: float, b: float, n: int):
    x, w = np.polynomial.legendre.leggauss(max(n, 1))
    return 0.5 * (b - a) * x + 0.5 * (a + b), 0.5 * (b - a) * w


_U_FLOOR = 3e-5   # keep sqrt-substituted nodes s > (u_floor)^2 * L off the
                  # singular endpoint; the truncated mass is O(u_floor)


def _segment_quadrature(s0: float, s1: float, start_exc: bool, end_exc: bool,
                        n_pts: int):
    """Nodes/weights on [s0, s1] with sqrt substitution toward exceptional
    ends (inverse-square-root densities integrate cleanly)."""
    L = s1 - s0
    pieces = []
    if start_exc and end_exc:
        m = max(n_pts // 2, 4)
        u, wu = _gauss(_U_FLOOR * math.sqrt(L), math.sqrt(L / 2.0), m)
        pieces.append((s0 + u * u, 2.0 * u * wu))
        u, wu = _gauss(_U_FLOOR * math.sqrt(L), math.sqrt(L / 2.0),
                       max(n_pts - m, 4))
        pieces.append((s1 - u * u, 2.0 * u * wu))
    elif start_exc:
        u, wu = _gauss(_U_FLOOR * math.sqrt(L), math.sqrt(L), n_pts)
        pieces.append((s0 + u * u, 2.0 * u * wu))
    elif end_exc:
        u, wu = _gauss(_U_FLOOR * math.sqrt(L), math.sqrt(L), n_pts)
        pieces.append((s1 - u * u, 2.0 * u * wu))
    else:
        s, ws = _gauss(s0, s1, n_pts)
        pieces.append((s, ws))
    s_all = np.concatenate([p[0] for p in pieces])
    w_all = np.concatenate([p[1] for p in pieces])
    return s_all, w_all


def _arc_segments(family: CurveFamily, arc) -> list[tuple[float, float, bool, bool]]:
    """Split an arc at interior exceptional points (junction crossings) so
    each quadrature segment has singular behaviour only at its ends.
    Returns (s_start, s_end, start_exceptional, end_exceptional)."""
    res = family.resolution
    exc = family.exceptional
    cum = arc.arclength
    L = arc.length

    def near_exc(z):
        return any(abs(z - e) <= 3.0 * res for e in exc)

    cuts = [0.0, L]
    for e in exc:
        d = np.abs(arc.points - e)
        i = int(np.argmin(d))
        if d[i] <= 3.0 * res and res < cum[i] < L - res:
            cuts.append(float(cum[i]))
    cuts = sorted(set(cuts))
    segments = []
    for s0, s1 in zip(cuts[:-1], cuts[1:]):
        if s1 - s0 <= 2.0 * res:
            continue
        start_exc = (s0 > 0.0) or ((not arc.closed) and near_exc(complex(arc.points[0])))
        end_exc = (s1 < L) or ((not arc.closed) and near_exc(complex(arc.points[-1])))
        segments.append((s0, s1, start_exc, end_exc))
    return segments or [(0.0, L, False, False)]


def _descend_gap(sym, k, x: complex, tangent: complex, delta: float):
    """Golden-section minimization of the membership gap along a few
    directions through x; returns the best point found."""
    phi = 0.5 * (math.sqrt(5.0) - 1.0)
    best_x, best_g = x, _safe_gap(sym, x, k)
    for rot in (1.0, np.exp(0.5j), np.exp(-0.5j)):
        direction = 1j * tangent * rot
        a, b = x - delta * direction, x + delta * direction
        ga, gb = _safe_gap(sym, a, k), _safe_gap(sym, b, k)
        c = b - phi * (b - a)
        d = a + phi * (b - a)
        gc, gd = _safe_gap(sym, c, k), _safe_gap(sym, d, k)
        for _ in range(48):
            if gc < gd:
                b, d, gd = d, c, gc
                c = b - phi * (b - a)
                gc = _safe_gap(sym, c, k)
            else:
                a, c, gc = c, d, gd
                d = a + phi * (b - a)
                gd = _safe_gap(sym, d, k)
            if abs(b - a) < 1e-14 * (1.0 + abs(x)):
                break
        for z, g in ((c, gc), (d, gd)):
            if g < best_g:
                best_x, best_g = z, g
        if best_g < 0.25 * ON_CURVE_GAP:
            break
    return best_x, best_g


def _safe_gap(sym, z, k) -> float:
    g = membership_gap(sym, z, k)
    return g if math.isfinite(g) else 1e30


def _interp_on_arc(arc, s):
    """Positions and unit tangents at arclengths s along the polyline."""
    cum = arc.arclength
    pts = arc.points
    re = np.interp(s, cum, pts.real)
    im = np.interp(s, cum, pts.imag)
    pos = re + 1j * im
    seg_idx = np.clip(np.searchsorted(cum, s, side="right") - 1, 0, len(pts) - 2)
    seg = pts[seg_idx + 1] - pts[seg_idx]
    seg = np.where(np.abs(seg) == 0.0, 1.0, seg)
    return pos, seg / np.abs(seg)


def discretize(sym: RationalSymbol, k: int, family: CurveFamily,
               n_points: int) -> DiscretizedMeasure:
    """Composite Gauss-Legendre discretization of mu_k over the traced arcs.

    Arcs are split at interior exceptional points, and each segment gets a
    square-root substitution toward its exceptional ends.  Nodes are snapped
    back onto the curve (polyline interpolation drifts on curved arcs).
    Total weight converges to the exact mass m_k as n_points grows.
    """
    mt = mass_table(sym)
    arcs = [a for a in family.arcs if a.length > 0]
    segments = []
    for arc_id, arc in enumerate(arcs):
        for seg in _arc_segments(family, arc):
            segments.append((arc_id, arc) + seg)
    seg_len = np.array([s[3] - s[2] for s in segments])
    alloc = np.maximum((n_points * seg_len / seg_len.sum()).astype(int), 8)
    pts, wts, dens, slens, tans, ids = [], [], [], [], [], []
    for (arc_id, arc, s0, s1, exc0, exc1), n_seg in zip(segments, alloc):
        s, ws = _segment_quadrature(s0, s1, exc0, exc1, int(n_seg))
        pos, tan = _interp_on_arc(arc, s)
        for x, t, si, wi in zip(pos, tan, s, ws):
            x = complex(x)
            if _safe_gap(sym, x, k) > 0.25 * ON_CURVE_GAP:
                x, gap = _descend_gap(sym, k, x, complex(t), 2.0 * family.resolution)
            sample = density_at(sym, k, x, complex(t),
                                probe_guard=family.exceptional)
            pts.append(x)
            wts.append(wi * sample.density)
            dens.append(sample.density)
            slens.append(si)
            tans.append(complex(t))
            ids.append(arc_id)
    weights = np.asarray(wts)
    return DiscretizedMeasure(
        curve_k=k, points=np.asarray(pts), weights=weights,
        total=float(weights.sum()), densities=np.asarray(dens),
        arclengths=np.asarray(slens), tangents=np.asarray(tans),
        arc_ids=np.asarray(ids), mass_target=float(mt.m_at(k)))


# ---------------------------------------------------------------------------
# Cauchy transform and logarithmic potential.
# ---------------------------------------------------------------------------

def _point_mass_terms(sym: RationalSymbol, k: int):
    sv = special_values(sym)
    mt = mass_table(sym)
    lam1, lam2 = sv.lambda1_complex, sv.lambda2_complex
    return lam1, lam2, float(mt.m1_at(k)), float(mt.m2_at(k))


def cauchy_transform(sym: RationalSymbol, k: int, lam: complex) -> complex:
    """Closed-form Cauchy transform of mu_k off the curve:
    -w_k'/w_k + (1-m_{1,k})/(lam-lam1) - m_{2,k}/(lam-lam2), with each
    point term present only when the special value is finite.  The
    singularities at lam1/lam2 are removable and handled by a small
    circular average.
    """
    gap = membership_gap(sym, lam, k)
    if gap < 1e-8:
        raise CurveProximity(f"lambda={lam} lies on Gamma_{k} (gap {gap:.1e})")
    lam1, lam2, m1, m2 = _point_mass_terms(sym, k)
    for special in (lam1, lam2):
        if special is not None and abs(lam - special) < 1e-6 * (1.0 + abs(special)):
            r = 1e-4 * (1.0 + abs(lam))
            vals = [_cauchy_raw(sym, k, lam + r * w, lam1, lam2, m1, m2)
                    for w in (1, 1j, -1, -1j)]
            return sum(vals) / 4.0
    return _cauchy_raw(sym, k, lam, lam1, lam2, m1, m2)


def _cauchy_raw(sym, k, lam, lam1, lam2, m1, m2):
    out = -w_k_log_derivative(sym, lam, k)
    if lam1 is not None:
        out += (1.0 - m1) / (lam - lam1)
    if lam2 is not None:
        out += -m2 / (lam - lam2)
    return out


def _abs_w_k(sym: RationalSymbol, lam: complex, k: int) -> float:
    """|w_k| as a product of the q+k smallest root moduli (well defined on
    the curve too, where only the ordering of the tied pair is ambiguous)."""
    m = sym.q + k
    if m == 0:
        return 1.0
    roots = roots_only(sym, lam)
    out = 1.0
    for z in roots[:m]:
        out *= abs(z)
    return out


@lru_cache(maxsize=None)
def _calibration(sym: RationalSymbol, k: int) -> tuple:
    """(alpha_k, reference DiscretizedMeasure) for the potential's additive
    constant; calibrated once at a far reference point."""
    family = trace_curves(sym, k, resolution=5e-3)
    meas = discretize(sym, k, family, 800)
    scale = curve_scale(sym)
    bps = family.branch_points_on_curve or [0.0 + 0.0j]
    center = sum(bps) / len(bps)
    lam_ref = center + 10.0 * scale * (1.0 + 0.37j) / abs(1.0 + 0.37j)
    quad = float((meas.weights * np.log(np.abs(lam_ref - meas.points))).sum())
    lam1, lam2, m1, m2 = _point_mass_terms(sym, k)
    closed = -math.log(_abs_w_k(sym, lam_ref, k))
    if lam1 is not None:
        closed += (1.0 - m1) * math.log(abs(lam_ref - lam1))
    if lam2 is not None:
        closed += -m2 * math.log(abs(lam_ref - lam2))
    return quad - closed, meas


@dataclass(frozen=True)
class PotentialValue:
    value: float
    quadrature: float
    drift: float


def log_potential(sym: RationalSymbol, k: int, lam: complex, *,
                  check: bool = True) -> PotentialValue:
    """integral of log|lam - x| d mu_k(x), closed form with calibrated
    additive constant, cross-checked against quadrature away from the curve."""
    lam1, lam2, m1, m2 = _point_mass_terms(sym, k)
    for special, name in ((lam1, "lambda1"), (lam2, "lambda2")):
        if special is not None and abs(lam - special) < 1e-12 * (1.0 + abs(special)):
            if membership_gap(sym, special, k) < ON_CURVE_GAP:
                raise SampleOnSingularity(
                    f"potential undefined at {name} on the curve")
    alpha, meas = _calibration(sym, k)
    closed = -math.log(_abs_w_k(sym, lam, k)) + alpha
    if lam1 is not None:
        closed += (1.0 - m1) * math.log(abs(lam - lam1))
    if lam2 is not None:
        closed += -m2 * math.log(abs(lam - lam2))
    dists = np.abs(lam - meas.points)
    quad = float((meas.weights * np.log(np.maximum(dists, 1e-300))).sum())
    drift = abs(closed - quad)
    if check and float(np.min(dists)) > 0.05 * curve_scale(sym):
        if drift > 1e-4 * (1.0 + abs(closed)):
            raise CalibrationError(
                f"closed-form and quadrature potentials drift {drift:.2e} "
                f"at lambda={lam}")
    return PotentialValue(value=closed, quadrature=quad, drift=drift)
