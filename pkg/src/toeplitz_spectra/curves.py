"""Tracing the level sets Gamma_k = { lambda : |z_{q+k}| = |z_{q+k+1}| }.

The tracer exploits that crossing Gamma_k swaps which root branches make
up the q+k smallest moduli.  Matching root sets between nearby lambda by
nearest-neighbour continuation therefore gives a signed crossing detector
(a "partition flip"), which bisection drives to the curve; arcs are then
grown by predictor-corrector continuation with step equal to the requested
resolution.  Seeds come from branch points on the curve and from a coarse
grid scan.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ResolutionError
from .algebraic import branch_points, roots_only
from .symbol import RationalSymbol

GAP_REFINE_TARGET = 1e-10    # bisection aims below this
VERTEX_GAP_TOL = 1e-8        # interior vertices must verify below this
ENDPOINT_GAP_TOL = 1e-6      # branch-point endpoints: double roots are noisy
_INF = float("inf")


def membership_gap(sym: RationalSymbol, lam: complex, k: int) -> float:
    """log|z_{q+k+1}| - log|z_{q+k}| >= 0; zero exactly on Gamma_k."""
    if not (-sym.q + 1 <= k <= sym.p - 1):
        raise IndexError(f"k={k} outside [{-sym.q + 1}, {sym.p - 1}]")
    roots = roots_only(sym, lam)
    lo = abs(roots[sym.q + k - 1])
    hi = abs(roots[sym.q + k])
    if math.isinf(hi) and math.isinf(lo):
        return 0.0
    if math.isinf(hi):
        return _INF
    if lo == 0.0:
        return _INF if hi > 0.0 else 0.0
    return max(math.log(hi) - math.log(lo), 0.0)


# ---------------------------------------------------------------------------
# Partition-flip crossing detector.
# ---------------------------------------------------------------------------

def _match(rootsA, rootsB) -> list[int]:
    """Greedy nearest-neighbour assignment A->B (indices into rootsB)."""
    d = len(rootsA)
    cost = np.empty((d, d))
    for i, a in enumerate(rootsA):
        for j, b in enumerate(rootsB):
            ia, ib = math.isinf(abs(a)), math.isinf(abs(b))
            if ia and ib:
                cost[i, j] = 0.0
            elif ia or ib:
                cost[i, j] = 1e300
            else:
                cost[i, j] = abs(a - b)
    out = [-1] * d
    used_r = np.zeros(d, bool)
    used_c = np.zeros(d, bool)
    for _ in range(d):
        masked = np.where(used_r[:, None] | used_c[None, :], np.inf, cost)
        i, j = np.unravel_index(np.argmin(masked), masked.shape)
        out[i] = j
        used_r[i] = True
        used_c[j] = True
    return out


def _flips(sym: RationalSymbol, k: int, rootsA, rootsB) -> bool:
    """Does the bottom-(q+k) root subset change between the two points?"""
    m = sym.q + k
    perm = _match(rootsA, rootsB)
    return sorted(perm[:m]) != list(range(m))


def _bisect_segment(sym: RationalSymbol, k: int, lam_a: complex, lam_b: complex):
    """Locate the crossing on [lam_a, lam_b] (which must contain a flip).
    Returns the refined on-curve point, or None if the flip evaporates."""
    roots_a = roots_only(sym, lam_a)
    roots_b = roots_only(sym, lam_b)
    if not _flips(sym, k, roots_a, roots_b):
        return None
    best = None
    best_gap = _INF
    for _ in range(60):
        mid = 0.5 * (lam_a + lam_b)
        roots_m = roots_only(sym, mid)
        g = _gap_from_roots(roots_m, sym.q + k)
        if g < best_gap:
            best, best_gap = mid, g
        if g < GAP_REFINE_TARGET or abs(lam_b - lam_a) < 1e-15 * (1.0 + abs(mid)):
            break
        if _flips(sym, k, roots_a, roots_m):
            lam_b, roots_b = mid, roots_m
        else:
            lam_a, roots_a = mid, roots_m
    return best


def _gap_from_roots(roots, m: int) -> float:
    lo, hi = abs(roots[m - 1]), abs(roots[m])
    if math.isinf(hi) and math.isinf(lo):
        return 0.0
    if math.isinf(hi) or lo == 0.0:
        return _INF
    return max(math.log(hi) - math.log(lo), 0.0)


def snap_to_curve(sym: RationalSymbol, k: int, lam: complex, normal: complex,
                  delta: float):
    """Refine lam onto Gamma_k by bisection along +-delta*normal."""
    return _bisect_segment(sym, k, lam - delta * normal, lam + delta * normal)


# ---------------------------------------------------------------------------
# Curve family containers.
# ---------------------------------------------------------------------------

@dataclass
class Arc:
    """One oriented polyline arc of Gamma_k."""

    points: np.ndarray                 # complex vertices, orientation = index order
    closed: bool = False
    start_kind: str = "open"           # 'branch' | 'box' | 'junction' | 'open'
    end_kind: str = "open"

    @property
    def arclength(self) -> np.ndarray:
        seg = np.abs(np.diff(self.points))
        return np.concatenate([[0.0], np.cumsum(seg)])

    @property
    def length(self) -> float:
        return float(np.abs(np.diff(self.points)).sum())

    def tangents(self) -> np.ndarray:
        """Unit tangent per vertex (central differences inside)."""
        p = self.points
        t = np.empty_like(p)
        t[1:-1] = p[2:] - p[:-2]
        t[0] = p[1] - p[0] if len(p) > 1 else 1.0
        t[-1] = p[-1] - p[-2] if len(p) > 1 else 1.0
        return t / np.abs(t)


@dataclass
class Box:
    re_min: float
    re_max: float
    im_min: float
    im_max: float

    def contains(self, z: complex) -> bool:
        return (self.re_min <= z.real <= self.re_max
                and self.im_min <= z.imag <= self.im_max)

    def on_boundary(self, z: complex, tol: float) -> bool:
        return (abs(z.real - self.re_min) < tol or abs(z.real - self.re_max) < tol
                or abs(z.imag - self.im_min) < tol or abs(z.imag - self.im_max) < tol)

    def expand(self, factor: float) -> "Box":
        cr = 0.5 * (self.re_min + self.re_max)
        ci = 0.5 * (self.im_min + self.im_max)
        hr = 0.5 * (self.re_max - self.re_min) * factor
        hi = 0.5 * (self.im_max - self.im_min) * factor
        return Box(cr - hr, cr + hr, ci - hi, ci + hi)

    @property
    def diameter(self) -> float:
        return math.hypot(self.re_max - self.re_min, self.im_max - self.im_min)


@dataclass
class CurveFamily:
    """Gamma_k as oriented polyline arcs plus exceptional points."""

    k: int
    arcs: list[Arc]
    exceptional: list[complex]
    box: Box
    resolution: float
    branch_points_on_curve: list[complex] = field(default_factory=list)
    unbounded: bool = False

    def total_points(self) -> int:
        return sum(len(a.points) for a in self.arcs)

    def all_points(self) -> np.ndarray:
        if not self.arcs:
            return np.empty(0, complex)
        return np.concatenate([a.points for a in self.arcs])

    def distance_to(self, lam: complex) -> float:
        pts = self.all_points()
        if len(pts) == 0:
            return _INF
        return float(np.min(np.abs(pts - lam)))

    def nearest_exceptional_distance(self, lam: complex) -> float:
        if not self.exceptional:
            return _INF
        return min(abs(lam - e) for e in self.exceptional)


def default_box(sym: RationalSymbol, min_halfwidth: float = 2.0) -> Box:
    """Centered at the branch-point centroid, half-width 2.5x their spread."""
    bps = branch_points(sym).points
    if bps:
        cr = float(np.mean([b.real for b in bps]))
        ci = float(np.mean([b.imag for b in bps]))
        spread = max((abs(b - complex(cr, ci)) for b in bps), default=0.0)
    else:
        cr = ci = 0.0
        spread = 0.0
    half = max(2.5 * spread, min_halfwidth)
    return Box(cr - half, cr + half, ci - half, ci + half)


def curve_scale(sym: RationalSymbol) -> float:
    bps = branch_points(sym).points
    if len(bps) >= 2:
        c = sum(bps) / len(bps)
        return max(max(abs(b - c) for b in bps), 1.0)
    return 1.0


# ---------------------------------------------------------------------------
# The tracer.
# ---------------------------------------------------------------------------

class _Tracer:
    def __init__(self, sym, k, box, resolution, max_points=200_000):
        self.sym = sym
        self.k = k
        self.box = box
        self.h = resolution
        self.max_points = max_points
        self.cells: dict[tuple[int, int], list] = {}
        self.arcs: list[Arc] = []
        self.junctions: list[complex] = []
        self.n_points = 0

    def _cell(self, z: complex) -> tuple[int, int]:
        return (int(math.floor(z.real / self.h)), int(math.floor(z.imag / self.h)))

    def _claim(self, z: complex, arc_id: int):
        self.cells.setdefault(self._cell(z), []).append((arc_id, z))

    def _occupied_by_other(self, z: complex, arc_id: int):
        c = self._cell(z)
        for dx in (-1, 0, 1):
            for dy in (-1, 0, 1):
                for owner, pt in self.cells.get((c[0] + dx, c[1] + dy), ()):
                    if owner != arc_id and abs(pt - z) < 0.7 * self.h:
                        return owner
        return None

    def _near_own_tail(self, pts: list[complex], z: complex) -> bool:
        # ignore the most recent vertices; loop closure needs an older hit
        for p in pts[:-6]:
            if abs(p - z) < 0.7 * self.h:
                return True
        return False

    # -- marching ----------------------------------------------------------

    def _correct(self, pred: complex, tangent: complex):
        normal = 1j * tangent
        for delta in (0.75 * self.h, 1.5 * self.h):
            pt = snap_to_curve(self.sym, self.k, pred, normal, delta)
            if pt is not None:
                g = membership_gap(self.sym, pt, self.k)
                if g > 1e-5:
                    raise ResolutionError(
                        f"ambiguous crossing near {pred} (gap {g:.2e}); "
                        "refine the resolution")
                return pt
        return None

    def _march(self, seed: complex, direction: complex, arc_id: int,
               bps_on_curve) -> tuple[list[complex], str, bool]:
        pts = [seed]
        tangent = direction / abs(direction)
        kind = "open"
        closed = False
        while len(pts) < self.max_points and self.n_points < self.max_points:
            cur = pts[-1]
            bp_near = next((b for b in bps_on_curve
                            if abs(cur + self.h * tangent - b) < self.h
                            and abs(cur - b) > 0.25 * self.h), None)
            if bp_near is not None:
                pts.append(bp_near)
                kind = "branch"
                break
            pred = cur + self.h * tangent
            if not self.box.contains(pred):
                kind = "box"
                pts.append(self._clip_to_box(cur, pred))
                break
            nxt = None
            h_try = self.h
            for _ in range(4):
                nxt = self._correct(cur + h_try * tangent, tangent)
                if nxt is not None:
                    break
                h_try *= 0.5
            if nxt is None:
                kind = "open"
                break
            if len(pts) > 6 and abs(nxt - pts[0]) < 0.7 * self.h:
                closed = True
                break
            if self._near_own_tail(pts, nxt):
                closed = True
                break
            owner = self._occupied_by_other(nxt, arc_id)
            if owner is not None:
                pts.append(nxt)
                kind = "junction"
                self.junctions.append(nxt)
                break
            step = nxt - cur
            if abs(step) > 0:
                tangent = step / abs(step)
            pts.append(nxt)
            self._claim(nxt, arc_id)
            self.n_points += 1
        return pts, kind, closed

    def _clip_to_box(self, inside: complex, outside: complex) -> complex:
        lo, hi = 0.0, 1.0
        for _ in range(50):
            mid = 0.5 * (lo + hi)
            z = inside + mid * (outside - inside)
            if self.box.contains(z):
                lo = mid
            else:
                hi = mid
        return inside + lo * (outside - inside)

    def trace_from(self, seed: complex, direction: complex, bps_on_curve):
        arc_id = len(self.arcs)
        if self._occupied_by_other(seed, arc_id) is not None:
            return
        self._claim(seed, arc_id)
        fwd, kind_f, closed_f = self._march(seed, direction, arc_id, bps_on_curve)
        if closed_f:
            arc = Arc(points=np.array(fwd), closed=True,
                      start_kind="loop", end_kind="loop")
            self.arcs.append(arc)
            return
        bwd, kind_b, closed_b = self._march(seed, -direction, arc_id, bps_on_curve)
        pts = list(reversed(bwd[1:])) + fwd
        if closed_b and len(bwd) > 1:
            arc = Arc(points=np.array(pts), closed=True,
                      start_kind="loop", end_kind="loop")
        else:
            arc = Arc(points=np.array(pts), closed=False,
                      start_kind=kind_b, end_kind=kind_f)
        if len(arc.points) >= 2:
            self.arcs.append(arc)


def _branch_seeds(sym, k, bps_on_curve, h):
    """On-curve seed points on a small circle around each on-curve branch
    point, with outward directions."""
    seeds = []
    for bp in bps_on_curve:
        r = 2.0 * h
        n_ang = 48
        angles = 2.0 * np.pi * np.arange(n_ang) / n_ang
        ring = bp + r * np.exp(1j * angles)
        rootsets = [roots_only(sym, z) for z in ring]
        for i in range(n_ang):
            j = (i + 1) % n_ang
            if _flips(sym, k, rootsets[i], rootsets[j]):
                pt = _bisect_segment(sym, k, ring[i], ring[j])
                if pt is not None:
                    seeds.append((pt, (pt - bp) / abs(pt - bp)))
    return seeds


def _grid_seeds(sym, k, box, grid_n):
    """Coarse-grid partition-flip scan; returns on-curve seed points with
    transverse directions."""
    xs = np.linspace(box.re_min, box.re_max, grid_n)
    ys = np.linspace(box.im_min, box.im_max, grid_n)
    rootsets = {}

    def rs(i, j):
        if (i, j) not in rootsets:
            rootsets[(i, j)] = roots_only(sym, complex(xs[i], ys[j]))
        return rootsets[(i, j)]

    seeds = []
    for j in range(grid_n):
        for i in range(grid_n - 1):
            if _flips(sym, k, rs(i, j), rs(i + 1, j)):
                pt = _bisect_segment(sym, k, complex(xs[i], ys[j]),
                                     complex(xs[i + 1], ys[j]))
                if pt is not None:
                    seeds.append((pt, 1j))
    for i in range(grid_n):
        for j in range(grid_n - 1):
            if _flips(sym, k, rs(i, j), rs(i, j + 1)):
                pt = _bisect_segment(sym, k, complex(xs[i], ys[j]),
                                     complex(xs[i], ys[j + 1]))
                if pt is not None:
                    seeds.append((pt, 1.0 + 0j))
    return seeds


def trace_curves(sym: RationalSymbol, k: int, box: Box | None = None,
                 resolution: float = 1e-2, grid_n: int = 48,
                 max_expansions: int = 3) -> CurveFamily:
    """Trace Gamma_k inside the box (auto-expanded while arcs exit it).

    Every returned vertex satisfies the membership gap below the refinement
    tolerance; adjacent vertices are within ``resolution`` of each other.
    Orientation of each arc is its index order.
    """
    if not (-sym.q + 1 <= k <= sym.p - 1):
        raise IndexError(f"k={k} outside [{-sym.q + 1}, {sym.p - 1}]")
    bset = branch_points(sym)
    if box is None:
        box = default_box(sym)
    unbounded = False
    for expansion in range(max_expansions + 1):
        bps_on_curve = [b for b in bset.points
                        if box.contains(b)
                        and membership_gap(sym, b, k) < ENDPOINT_GAP_TOL]
        tracer = _Tracer(sym, k, box, resolution)
        for seed, direction in _branch_seeds(sym, k, bps_on_curve, resolution):
            tracer.trace_from(seed, direction, bps_on_curve)
        for seed, direction in _grid_seeds(sym, k, box, grid_n):
            tracer.trace_from(seed, direction, bps_on_curve)
        _merge_and_snap(tracer.arcs, bset.points, resolution)
        touches_box = any(a.start_kind == "box" or a.end_kind == "box"
                          for a in tracer.arcs)
        if not touches_box or expansion == max_expansions:
            unbounded = touches_box
            break
        box = box.expand(2.0)
    family = CurveFamily(k=k, arcs=tracer.arcs, exceptional=[], box=box,
                         resolution=resolution,
                         branch_points_on_curve=bps_on_curve,
                         unbounded=unbounded)
    family.exceptional = exceptional_points(sym, k, family)
    return family


def _merge_and_snap(arcs: list[Arc], bps, h: float):
    """Post-process junction-truncated arcs: traces of one arc that met
    head-to-head are merged, and remaining junction ends are closed up by
    snapping to a nearby branch point (junctions here are generically
    branch points) or to the arc they ran into."""
    def ends(arc):
        return ((complex(arc.points[0]), arc.start_kind, "start"),
                (complex(arc.points[-1]), arc.end_kind, "end"))

    merged = True
    while merged:
        merged = False
        for i in range(len(arcs)):
            for j in range(len(arcs)):
                if i == j or merged:
                    continue
                a, b = arcs[i], arcs[j]
                if a.closed or b.closed:
                    continue
                for za, ka, side_a in ends(a):
                    for zb, kb, side_b in ends(b):
                        if ka != "junction" or kb != "junction":
                            continue
                        if abs(za - zb) > 1.6 * h:
                            continue
                        pa = a.points if side_a == "end" else a.points[::-1]
                        pb = b.points if side_b == "start" else b.points[::-1]
                        new_start = a.start_kind if side_a == "end" else a.end_kind
                        new_end = b.end_kind if side_b == "start" else b.start_kind
                        arcs[i] = Arc(points=np.concatenate([pa, pb]),
                                      closed=False, start_kind=new_start,
                                      end_kind=new_end)
                        del arcs[j]
                        merged = True
                        break
                    if merged:
                        break
    for idx, arc in enumerate(arcs):
        if arc.closed:
            continue
        pts = arc.points
        changed = False
        for side in ("start", "end"):
            kind = arc.start_kind if side == "start" else arc.end_kind
            if kind != "junction":
                continue
            z = complex(pts[0] if side == "start" else pts[-1])
            target = None
            near_bp = min(bps, key=lambda b: abs(b - z), default=None)
            if near_bp is not None and abs(near_bp - z) <= 2.5 * h:
                target = near_bp
            else:
                best = None
                for other in arcs:
                    if other is arc or len(other.points) == 0:
                        continue
                    d = np.abs(other.points - z)
                    m = int(np.argmin(d))
                    if best is None or d[m] < abs(best - z):
                        best = complex(other.points[m])
                if best is not None and abs(best - z) <= 2.0 * h:
                    target = best
            if target is not None and abs(target - z) > 1e-12:
                pts = (np.concatenate([[target], pts]) if side == "start"
                       else np.concatenate([pts, [target]]))
                changed = True
        if changed:
            arcs[idx] = Arc(points=pts, closed=False,
                            start_kind=arc.start_kind, end_kind=arc.end_kind)


def exceptional_points(sym: RationalSymbol, k: int,
                       family: CurveFamily) -> list[complex]:
    """Branch points on Gamma_k plus polyline vertices of degree != 2 that
    are not on the bounding box (candidates at the trace resolution)."""
    out: list[complex] = list(family.branch_points_on_curve)

    def push(z):
        for e in out:
            if abs(z - e) < 2.0 * family.resolution:
                return
        out.append(z)

    tol = 2.0 * family.resolution
    for arc in family.arcs:
        if arc.closed or len(arc.points) == 0:
            continue
        for z, kind in ((arc.points[0], arc.start_kind),
                        (arc.points[-1], arc.end_kind)):
            if kind == "box" or family.box.on_boundary(z, tol):
                continue
            push(complex(z))
    return out


def hausdorff_distance(points_a: np.ndarray, points_b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two point clouds."""
    a = np.asarray(points_a, complex).ravel()
    b = np.asarray(points_b, complex).ravel()
    d_ab = np.max([np.min(np.abs(b - x)) for x in a])
    d_ba = np.max([np.min(np.abs(a - y)) for y in b])
    return float(max(d_ab, d_ba))
