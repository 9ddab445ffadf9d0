"""Vector equilibrium energy: the functional, its alternative quadratic
representation, Euler-Lagrange residuals and the random-probe bound.

Discrete logarithmic energies exclude the diagonal; the identity between
the two energy representations is pure algebra in the point-mass weights
plus the exact second-difference structure of the mass table, so it holds
to rounding for any discrete vector, admissible or not.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import AdmissibilityError, SampleOnSingularity
from .curves import CurveFamily, trace_curves
from .measure import DiscretizedMeasure, discretize
from .symbol import RationalSymbol, mass_table, special_values

DEFAULT_MASS_TOL = 5e-3


@dataclass
class MeasureVector:
    """Vector of discretized measures indexed k = -q+1..p-1."""

    sym: RationalSymbol
    components: dict[int, DiscretizedMeasure]

    def component(self, k: int) -> DiscretizedMeasure | None:
        return self.components.get(k)

    def k_range(self):
        return range(-self.sym.q + 1, self.sym.p)

    def validate(self, mass_tol: float = DEFAULT_MASS_TOL):
        mt = mass_table(self.sym)
        for k in self.k_range():
            comp = self.components.get(k)
            if comp is None:
                raise AdmissibilityError(f"missing component k={k}")
            target = float(mt.m_at(k))
            if abs(comp.total - target) > mass_tol:
                raise AdmissibilityError(
                    f"component k={k} has mass {comp.total:.6f}, "
                    f"needs {target:.6f} within {mass_tol}")
            if np.any(comp.weights < -1e-12):
                raise AdmissibilityError(f"component k={k} has negative weights")

    def with_weights(self, new_weights: dict[int, np.ndarray]) -> "MeasureVector":
        comps = {}
        for k, comp in self.components.items():
            w = np.asarray(new_weights.get(k, comp.weights), float)
            comps[k] = DiscretizedMeasure(
                curve_k=comp.curve_k, points=comp.points, weights=w,
                total=float(w.sum()), densities=comp.densities,
                arclengths=comp.arclengths, tangents=comp.tangents,
                arc_ids=comp.arc_ids, mass_target=comp.mass_target)
        return MeasureVector(sym=self.sym, components=comps)


def measure_vector(sym: RationalSymbol, n_points: int = 400,
                   resolution: float = 5e-3,
                   families: dict[int, CurveFamily] | None = None) -> MeasureVector:
    """Discretize the limiting measures on every curve of the family."""
    comps = {}
    for k in range(-sym.q + 1, sym.p):
        fam = families[k] if families else trace_curves(sym, k, resolution=resolution)
        comps[k] = discretize(sym, k, fam, n_points)
    return MeasureVector(sym=sym, components=comps)


# ---------------------------------------------------------------------------
# Discrete energies.
# ---------------------------------------------------------------------------

def self_energy(points: np.ndarray, weights: np.ndarray) -> float:
    """I(nu) = sum_{i != j} w_i w_j log 1/|x_i - x_j| (diagonal excluded)."""
    d = np.abs(points[:, None] - points[None, :])
    np.fill_diagonal(d, 1.0)
    return float(-(weights[:, None] * weights[None, :] * np.log(d)).sum())


def mutual_energy(pa, wa, pb, wb) -> float:
    """I(nu, mu) = double integral of log 1/|x-y|."""
    d = np.abs(pa[:, None] - pb[None, :])
    return float(-(wa[:, None] * wb[None, :] * np.log(np.maximum(d, 1e-300))).sum())


def _sink_terms(sym: RationalSymbol):
    """Active sinks as (component index, location, strength 1/k_j)."""
    sv = special_values(sym)
    out = []
    if sv.lambda1_complex is not None and sv.k1 < sym.p + sym.q:
        out.append((-sym.q + sv.k1, sv.lambda1_complex, 1.0 / sv.k1))
    if sv.lambda2_complex is not None and sv.k2 < sym.p + sym.q:
        out.append((sym.p - sv.k2, sv.lambda2_complex, 1.0 / sv.k2))
    return out


def _sink_energy(sym: RationalSymbol, mv: MeasureVector) -> float:
    total = 0.0
    for k_comp, loc, strength in _sink_terms(sym):
        comp = mv.component(k_comp)
        if comp is None or len(comp) == 0:
            continue
        total -= strength * float(
            -(comp.weights * np.log(np.abs(comp.points - loc))).sum())
    return total


def energy(sym: RationalSymbol, mv: MeasureVector,
           mass_tol: float = DEFAULT_MASS_TOL, validate: bool = True) -> float:
    """J = sum I(nu_k) - sum I(nu_k, nu_{k+1}) - sink attractions."""
    if validate:
        mv.validate(mass_tol)
    ks = list(mv.k_range())
    total = 0.0
    for k in ks:
        c = mv.component(k)
        total += self_energy(c.points, c.weights)
    for k in ks[:-1]:
        a, b = mv.component(k), mv.component(k + 1)
        total -= mutual_energy(a.points, a.weights, b.points, b.weights)
    return total + _sink_energy(sym, mv)


def energy_alternative(sym: RationalSymbol, mv: MeasureVector,
                       mass_tol: float = DEFAULT_MASS_TOL,
                       validate: bool = True) -> float:
    """Quadratic rearrangement: nearest-neighbour difference terms
    (m_k m_{k+1}/2) I(nu_k/m_k - nu_{k+1}/m_{k+1}) plus the boundary
    self-energies weighted by 1/(2 k_j m) and the same sinks."""
    if validate:
        mv.validate(mass_tol)
    mt = mass_table(sym)
    sv = special_values(sym)
    ks = list(mv.k_range())
    total = 0.0
    for k in ks[:-1]:
        a, b = mv.component(k), mv.component(k + 1)
        ma, mb = float(mt.m_at(k)), float(mt.m_at(k + 1))
        pts = np.concatenate([a.points, b.points])
        wts = np.concatenate([a.weights / ma, -b.weights / mb])
        total += 0.5 * ma * mb * self_energy(pts, wts)
    if sv.k1 < sym.p + sym.q:
        kc = -sym.q + sv.k1
        comp = mv.component(kc)
        total += self_energy(comp.points, comp.weights) / (
            2.0 * sv.k1 * float(mt.m_at(kc)))
    if sv.k2 < sym.p + sym.q:
        kc = sym.p - sv.k2
        comp = mv.component(kc)
        total += self_energy(comp.points, comp.weights) / (
            2.0 * sv.k2 * float(mt.m_at(kc)))
    return total + _sink_energy(sym, mv)


# ---------------------------------------------------------------------------
# Euler-Lagrange residuals.
# ---------------------------------------------------------------------------

def _potential(comp: DiscretizedMeasure | None, lam: complex) -> float:
    """U(lam) = integral of log 1/|lam - x| against the component (zero
    measure for out-of-range components)."""
    if comp is None or len(comp) == 0:
        return 0.0
    d = np.abs(lam - comp.points)
    if np.min(d) < 1e-13:
        raise SampleOnSingularity(f"sample {lam} hits a quadrature node")
    return float(-(comp.weights * np.log(d)).sum())


def el_samples(mv: MeasureVector, k: int, n_samples: int,
               margin: float = 0.02) -> list[complex]:
    """Sample points on Gamma_k at midpoints between adjacent quadrature
    nodes (maximal distance from the log singularities), keeping a margin
    of the arc length away from exceptional points; sinks are never on the
    contours they act on, so no further exclusion is needed."""
    comp = mv.component(k)
    order = np.lexsort((comp.arclengths, comp.arc_ids))
    pts, sl, ids = comp.points[order], comp.arclengths[order], comp.arc_ids[order]
    total_len = sl.max() - sl.min() if len(sl) else 0.0
    out = []
    same_arc = ids[1:] == ids[:-1]
    mids = 0.5 * (pts[1:] + pts[:-1])
    s_lo, s_hi = np.quantile(sl, margin), np.quantile(sl, 1.0 - margin)
    s_mid = 0.5 * (sl[1:] + sl[:-1])
    good = same_arc & (s_mid > s_lo) & (s_mid < s_hi)
    cand = mids[good]
    if len(cand) <= n_samples:
        return [complex(z) for z in cand]
    idx = np.linspace(0, len(cand) - 1, n_samples).astype(int)
    return [complex(z) for z in cand[idx]]


def el_residual(sym: RationalSymbol, mv: MeasureVector, k: int,
                sample_points) -> tuple[float, float, np.ndarray]:
    """Evaluate 2 U_k - U_{k+1} - U_{k-1} - sink log terms on the samples.

    Returns (mean, max |deviation from mean|, values); the combination is
    constant on Gamma_k for the equilibrium vector.
    """
    sv = special_values(sym)
    sinks = {kc: (loc, strength) for kc, loc, strength in _sink_terms(sym)}
    vals = []
    for lam in sample_points:
        v = 2.0 * _potential(mv.component(k), lam)
        v -= _potential(mv.component(k + 1), lam)
        v -= _potential(mv.component(k - 1), lam)
        if k in sinks:
            loc, strength = sinks[k]
            if abs(lam - loc) < 1e-13:
                raise SampleOnSingularity(f"sample {lam} coincides with a sink")
            v -= strength * (-math.log(abs(lam - loc)))
        vals.append(v)
    vals = np.asarray(vals)
    mean = float(vals.mean())
    maxdev = float(np.abs(vals - mean).max()) if len(vals) else 0.0
    return mean, maxdev, vals


def el_report(sym: RationalSymbol, mv: MeasureVector, n_samples: int = 50):
    """(k, mean l_k, max deviation) for every component."""
    out = []
    for k in mv.k_range():
        samples = el_samples(mv, k, n_samples)
        mean, maxdev, _ = el_residual(sym, mv, k, samples)
        out.append((k, mean, maxdev))
    return out


# ---------------------------------------------------------------------------
# Random admissible vectors and the boundedness probe.
# ---------------------------------------------------------------------------

def random_admissible(mv: MeasureVector, rng: np.random.Generator,
                      concentration: float = 1.0) -> MeasureVector:
    """Dirichlet-reweighted copy of the vector's point clouds, renormalized
    to the exact component masses."""
    mt = mass_table(mv.sym)
    new = {}
    for k, comp in mv.components.items():
        w = rng.dirichlet(np.full(len(comp), concentration))
        new[k] = w * float(mt.m_at(k))
    return mv.with_weights(new)


@dataclass
class ProbeReport:
    j_equilibrium: float
    j_min_random: float
    trials: int
    all_above: bool


def boundedness_probe(sym: RationalSymbol, mv: MeasureVector, trials: int,
                      seed: int = 0, slack: float = 1e-6) -> ProbeReport:
    """Minimum of J over random admissible vectors, compared with J(mu).

    A sanity probe of boundedness below and of the dominance of the
    computed equilibrium vector; never a certificate.
    """
    rng = np.random.default_rng(seed)
    j_mu = energy(sym, mv)
    j_min = math.inf
    for _ in range(trials):
        jr = energy(sym, random_admissible(mv, rng), validate=False)
        j_min = min(j_min, jr)
    return ProbeReport(j_equilibrium=j_mu, j_min_random=j_min, trials=trials,
                       all_above=j_min >= j_mu - slack)
