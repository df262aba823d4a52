"""Isospectral invariants: circle averages of K/sin(theta).

The central quantity is sum_j int_{Lambda_j} (K o pi_Gamma)/sin(theta) dmu_j
over invariant circles with their unique invariant probability measures.
On Liouville tables the same integrals have a closed form against the
Leray form dx/sqrt(f(x)-h); both normalizations are exposed, with
leray_mass as the conversion factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .billiard import PhasePoint, billiard_map
from .errors import (CirclesNotExchanged, GlancingCircle, HOutOfRange,
                     QuadratureNonConvergence)
from .geometry import BoundaryCurve, LiouvilleTable

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# boundary functions and symmetries
# ---------------------------------------------------------------------------

@dataclass
class BoundaryFunction:
    """Function on the boundary, callable in arclength; optionally also
    evaluable in the Liouville x-coordinate."""

    s_func: Callable
    x_func: Callable | None = None
    smoothness: str | None = None

    def __call__(self, s):
        return self.s_func(s)

    def in_x(self, x):
        if self.x_func is None:
            raise ValueError("no x-coordinate evaluator attached")
        return self.x_func(x)

    @classmethod
    def constant(cls, value: float) -> "BoundaryFunction":
        return cls(s_func=lambda s: np.full_like(np.asarray(s, dtype=float), value),
                   x_func=lambda x: np.full_like(np.asarray(x, dtype=float), value))

    @classmethod
    def from_x(cls, x_func: Callable, curve: BoundaryCurve) -> "BoundaryFunction":
        """Lift an x-coordinate function to arclength through the curve's
        angle parameter (the boundary elliptic coordinate)."""
        def s_func(s):
            t = curve.param_of_arclength(np.asarray(s) % curve.total_length)
            return x_func(t)
        return cls(s_func=s_func, x_func=x_func)

    @classmethod
    def trig(cls, curve: BoundaryCurve, cos_coeffs: Sequence[float] = (),
             sin_coeffs: Sequence[float] = (), constant: float = 0.0) -> "BoundaryFunction":
        """Trig polynomial in 2*pi*s/L: constant + sum a_m cos + b_m sin."""
        L = curve.total_length
        a = np.asarray(cos_coeffs, dtype=float)
        b = np.asarray(sin_coeffs, dtype=float)

        def s_func(s):
            w = TWO_PI * np.asarray(s, dtype=float) / L
            out = np.full_like(np.asarray(w, dtype=float), constant)
            for m, am in enumerate(a, start=1):
                out = out + am * np.cos(m * w)
            for m, bm in enumerate(b, start=1):
                out = out + bm * np.sin(m * w)
            return out
        return cls(s_func=s_func)


@dataclass
class SymmetryGroup:
    """The Z2 x Z2 boundary symmetry group of a two-axis table.

    Elements act on the stated coordinate (arclength s with period L, or
    the Liouville coordinate x with period 2*pi): identity, the two
    reflections u -> -u and u -> half - u, and their composition, the
    half-period rotation.
    """

    period: float
    coordinate: str = "arclength"

    def element_names(self) -> list[str]:
        return ["id", "reflect0", "reflect_half", "rotate_half"]

    def maps(self) -> list[Callable]:
        L = self.period
        return [lambda u: np.asarray(u) % L,
                lambda u: (-np.asarray(u)) % L,
                lambda u: (0.5 * L - np.asarray(u)) % L,
                lambda u: (np.asarray(u) + 0.5 * L) % L]

    def phase_maps(self) -> list[Callable]:
        """Lifts to (u, xi); reflections reverse the tangential momentum."""
        L = self.period
        return [lambda u, xi: ((np.asarray(u)) % L, np.asarray(xi)),
                lambda u, xi: ((-np.asarray(u)) % L, -np.asarray(xi)),
                lambda u, xi: ((0.5 * L - np.asarray(u)) % L, -np.asarray(xi)),
                lambda u, xi: ((np.asarray(u) + 0.5 * L) % L, np.asarray(xi))]

    @classmethod
    def for_curve(cls, curve: BoundaryCurve) -> "SymmetryGroup":
        return cls(period=curve.total_length, coordinate="arclength")

    @classmethod
    def liouville_x(cls) -> "SymmetryGroup":
        return cls(period=TWO_PI, coordinate="liouville-x")


def symmetry_average(K: BoundaryFunction, G: SymmetryGroup) -> BoundaryFunction:
    """Pointwise group average; a projection onto symmetric functions."""
    maps = G.maps()

    if G.coordinate == "arclength":
        def s_func(s):
            return sum(K(g(s)) for g in maps) / 4.0
        return BoundaryFunction(s_func=s_func, smoothness=K.smoothness)

    def x_func(x):
        return sum(K.in_x(g(x)) for g in maps) / 4.0
    return BoundaryFunction(s_func=None, x_func=x_func, smoothness=K.smoothness)


# ---------------------------------------------------------------------------
# circle averages (probability measure)
# ---------------------------------------------------------------------------

def _measure_nodes(circle, n: int):
    """(s, xi, weights) for the circle's invariant probability measure."""
    if hasattr(circle, "measure_nodes"):
        return circle.measure_nodes(n)
    s, xi = circle.phase_nodes(n)
    return s, xi, np.full(len(s), 1.0 / len(s))


def torus_invariant(curve: BoundaryCurve, circles, K: BoundaryFunction,
                    n_nodes: int = 2048, tol: float = 1e-9,
                    n_cap: int = 2 ** 17, eps_glance: float = 1e-6,
                    full_output: bool = False):
    """sum_j int K(s)/sin(theta) dmu_j, by node-doubling quadrature.

    With full_output=True returns (value, nodes_used, est_error)."""
    if not isinstance(circles, (list, tuple)):
        circles = [circles]

    def evaluate(n):
        total = 0.0
        for circ in circles:
            s, xi, w = _measure_nodes(circ, n)
            sin_theta = np.sqrt(1.0 - np.asarray(xi) ** 2)
            if np.min(sin_theta) < eps_glance:
                raise GlancingCircle(
                    f"sin(theta) reaches {np.min(sin_theta):.2e} on a circle")
            total += float(np.dot(w, np.asarray(K(s), dtype=float) / sin_theta))
        return total

    prev = evaluate(n_nodes)
    n = n_nodes
    while n < n_cap:
        n *= 2
        cur = evaluate(n)
        if abs(cur - prev) < tol * max(1.0, abs(cur)):
            return (cur, n, abs(cur - prev)) if full_output else cur
        prev = cur
    raise QuadratureNonConvergence(f"circle average did not settle at {n} nodes")


# ---------------------------------------------------------------------------
# Liouville level circles and Leray quadrature
# ---------------------------------------------------------------------------

def _f_grid(table: LiouvilleTable, x: np.ndarray) -> np.ndarray:
    return np.array([table.f(float(v), 0) for v in x])


def _librational_interval(table: LiouvilleTable, h: float) -> tuple[float, float]:
    """The component of {f > h} inside (0, pi): (x_h, pi - x_h)."""
    from scipy.optimize import brentq
    if not 0.0 < h < table.f_max:
        raise HOutOfRange(f"h={h} outside the librational range (0, {table.f_max})")
    x_h = brentq(lambda x: table.f(x, 0) - h, 1e-14, 0.5 * math.pi, xtol=1e-15)
    return x_h, math.pi - x_h


class LerayCircle:
    """Invariant circle of a Liouville table as a Leray-weighted node set.

    kind 'rotational' (h < 0): the circle winds around the boundary with a
    fixed momentum sign; nodes are uniform in x.  kind 'librational'
    (h > 0): the circle sits over one component of {f > h} with both
    momentum branches; nodes are Gauss-Chebyshev in x, which absorbs the
    inverse-square-root turning-point singularity of dx/sqrt(f - h).
    """

    def __init__(self, table: LiouvilleTable, h: float, kind: str,
                 sign: int = +1, x_shift: float = 0.0,
                 curve: BoundaryCurve | None = None):
        self.table = table
        self.h = h
        self.kind = kind
        self.sign = sign
        self.x_shift = x_shift
        self.curve = curve if curve is not None else table.boundary_curve()

    def _xi_arc(self, x: np.ndarray) -> np.ndarray:
        f = _f_grid(self.table, x)
        return np.sqrt((f - self.h) / (f - self.table.q_N))

    def x_nodes(self, n: int):
        """(x, leray_weights) with sum w_i * g(x_i) ~ closed-loop integral
        of g against |lambda_h| (momentum branches already summed)."""
        if self.kind == "rotational":
            x = self.x_shift + TWO_PI * np.arange(n) / n
            f = _f_grid(self.table, x)
            w = (TWO_PI / n) / np.sqrt(f - self.h)
            return x, w
        x1, x2 = _librational_interval(self.table, self.h)
        mid, rad = 0.5 * (x1 + x2), 0.5 * (x2 - x1)
        u = (2.0 * np.arange(1, n + 1) - 1.0) * math.pi / (2.0 * n)
        x = mid + rad * np.cos(u)
        f = _f_grid(self.table, x)
        smooth = np.sqrt((x - x1) * (x2 - x) / (f - self.h))
        w = 2.0 * (math.pi / n) * smooth
        return x + self.x_shift, w

    def mass(self, n: int = 2048) -> float:
        _, w = self.x_nodes(n)
        return float(w.sum())

    def measure_nodes(self, n: int = 2048):
        """(s, xi, probability weights) in billiard phase space."""
        if self.kind == "rotational":
            x, w = self.x_nodes(n)
            xi = self.sign * self._xi_arc(x)
            s = self.curve.arclength_of_param(x % TWO_PI)
            return s % self.curve.total_length, xi, w / w.sum()
        x, w = self.x_nodes(max(8, n // 2))
        xi = self._xi_arc(x - self.x_shift)
        s = self.curve.arclength_of_param(x % TWO_PI)
        s = np.concatenate([s, s]) % self.curve.total_length
        xi = np.concatenate([xi, -xi])
        w = np.concatenate([w, w]) / 2.0
        return s, xi, w / w.sum()


def rotational_circle(table: LiouvilleTable, h: float, sign: int = +1,
                      curve: BoundaryCurve | None = None) -> LerayCircle:
    if not table.q_N < h < 0.0:
        raise HOutOfRange(f"h={h} outside the rotational range ({table.q_N}, 0)")
    return LerayCircle(table, h, "rotational", sign=sign, curve=curve)


def librational_circles(table: LiouvilleTable, h: float,
                        curve: BoundaryCurve | None = None) -> tuple[LerayCircle, LerayCircle]:
    """The two components of {f - xi_x^2 = h}, exchanged by the boundary
    reflection and by one application of the billiard map."""
    if not 0.0 < h < table.f_max:
        raise HOutOfRange(f"h={h} outside the librational range (0, {table.f_max})")
    lam1 = LerayCircle(table, h, "librational", x_shift=0.0, curve=curve)
    lam2 = LerayCircle(table, h, "librational", x_shift=math.pi, curve=lam1.curve)
    return lam1, lam2


@dataclass
class RadonPair:
    plus: float
    minus: float
    n_nodes: int
    est_error: float

    def __iter__(self):
        return iter((self.plus, self.minus))


def _doubling(evaluate, n0: int, tol: float, n_cap: int, what: str):
    prev = evaluate(n0)
    n = n0
    while n < n_cap:
        n *= 2
        cur = evaluate(n)
        if abs(cur - prev) < tol * max(1.0, abs(cur)):
            return cur, n, abs(cur - prev)
        prev = cur
    raise QuadratureNonConvergence(f"{what} did not settle at {n} nodes")


def liouville_radon(table: LiouvilleTable, K: BoundaryFunction, h: float,
                    n_nodes: int = 2048, tol: float = 1e-9,
                    n_cap: int = 2 ** 17) -> RadonPair:
    """Closed-form Radon transform of K over the level circles at h.

    Rotational branch (q(N) < h < 0): the pair is (R, -R) for the two
    momentum signs, R = (h-q(N))^(-1/2) * int_0^{2pi} K(x)
    sqrt((f-q(N))/(f-h)) dx.  Librational branch (0 < h < f(pi/2)): the
    pair collects the two exchanged components, each integrated over its
    {f > h} interval with the turning-point substitution.
    """
    if h <= table.q_N or h >= table.f_max or h == 0.0:
        raise HOutOfRange(
            f"h={h} is not a regular value in ({table.q_N}, 0) u (0, {table.f_max})")

    if h < 0.0:
        circ = LerayCircle(table, h, "rotational")

        def evaluate(n):
            x, w = circ.x_nodes(n)
            # 1/sin(theta) = sqrt((f - q_N)/(h - q_N))
            f = _f_grid(table, x)
            kern = np.asarray(K.in_x(x), dtype=float) * np.sqrt((f - table.q_N) / (h - table.q_N))
            return float(np.dot(w, kern))

        val, n, err = _doubling(evaluate, n_nodes, tol, n_cap, "rotational Radon")
        return RadonPair(plus=val, minus=-val, n_nodes=n, est_error=err)

    lam1, lam2 = librational_circles(table, h)

    def make_eval(circ):
        def evaluate(n):
            x, w = circ.x_nodes(n)
            xb = x - circ.x_shift
            f = _f_grid(table, xb)
            kern = np.asarray(K.in_x(x), dtype=float) * np.sqrt((f - table.q_N) / (h - table.q_N))
            return float(np.dot(w, kern))
        return evaluate

    v1, n1, e1 = _doubling(make_eval(lam1), max(64, n_nodes // 16), tol, n_cap, "librational Radon")
    v2, n2, e2 = _doubling(make_eval(lam2), max(64, n_nodes // 16), tol, n_cap, "librational Radon")
    return RadonPair(plus=v1, minus=v2, n_nodes=max(n1, n2), est_error=max(e1, e2))


def leray_mass(table: LiouvilleTable, h: float, n_nodes: int = 2048,
               tol: float = 1e-9, n_cap: int = 2 ** 17) -> float:
    """Total Leray measure of one invariant circle at level h."""
    if table.q_N < h < 0.0:
        circ = LerayCircle(table, h, "rotational")
    elif 0.0 < h < table.f_max:
        circ = librational_circles(table, h)[0]
    else:
        raise HOutOfRange(f"h={h} is not a regular value")
    val, _, _ = _doubling(lambda n: circ.mass(n), max(64, n_nodes // 16), tol, n_cap, "Leray mass")
    return val


# ---------------------------------------------------------------------------
# bouncing-ball symmetry identity
# ---------------------------------------------------------------------------

def _hausdorff(curve: BoundaryCurve, set1, set2) -> float:
    s1, x1 = set1
    s2, x2 = set2
    L = curve.total_length
    d12 = np.empty(len(s1))
    for i in range(len(s1)):
        ds = np.abs(((s1[i] - s2 + 0.5 * L) % L) - 0.5 * L)
        d12[i] = np.min(np.hypot(ds, x1[i] - x2))
    d21 = np.empty(len(s2))
    for i in range(len(s2)):
        ds = np.abs(((s2[i] - s1 + 0.5 * L) % L) - 0.5 * L)
        d21[i] = np.min(np.hypot(ds, x2[i] - x1))
    return float(max(d12.max(), d21.max()))


def bouncing_ball_identity_check(curve: BoundaryCurve, lam1, lam2,
                                 K: BoundaryFunction, G: SymmetryGroup,
                                 n_nodes: int = 2048, exchange_tol: float = 1e-6) -> float:
    """Residual of int_{L1} K#/sin dmu1 = (int_{L1} + int_{L2}) K/sin dmu /2.

    The circles must be the two components of one level set, each invariant
    under one reflection and exchanged by the other; this is verified by
    Hausdorff distance of the reflected node clouds before integrating.
    """
    n_check = 256
    s1, x1, _ = _measure_nodes(lam1, n_check)
    s2, x2, _ = _measure_nodes(lam2, n_check)
    fixed = False
    swapped = False
    for name, gmap in zip(G.element_names()[1:], G.phase_maps()[1:]):
        gs, gx = gmap(s1, x1)
        if name.startswith("reflect"):
            if _hausdorff(curve, (gs, gx), (s1, x1)) < exchange_tol:
                fixed = True
            if _hausdorff(curve, (gs, gx), (s2, x2)) < exchange_tol:
                swapped = True
    if not (fixed and swapped):
        raise CirclesNotExchanged(
            "level-set components are not fixed/exchanged by the reflections")

    K_sym = symmetry_average(K, G)

    def average(circ, fun, n):
        s, xi, w = _measure_nodes(circ, n)
        return float(np.dot(w, np.asarray(fun(s), dtype=float) / np.sqrt(1.0 - xi**2)))

    # deliberately different node counts: keeps the two sides independent
    # quadratures instead of a termwise-cancelling node permutation
    lhs = average(lam1, K_sym, n_nodes)
    rhs = 0.5 * (average(lam1, K, 3 * n_nodes // 2 + 1) + average(lam2, K, 3 * n_nodes // 2 + 1))
    return abs(lhs - rhs)
