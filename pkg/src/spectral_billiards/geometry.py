"""Billiard-table boundaries and two-dimensional Liouville tables.

Curves are parametrized twice: by a 2*pi-periodic construction parameter t
(polar/ellipse angle) and by arclength s in [0, total_length).  The bridge
between the two is a Fourier integral of the speed |r'(t)|, which is
spectrally accurate for smooth curves, inverted by Newton iteration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import ConfigError, ValidationError

_ARCLENGTH_SAMPLES = 4096


class BoundaryCurve:
    """Closed convex planar curve with arclength parametrization.

    Subclasses supply the t-parametrization (``position_t`` and its two
    derivatives); this base class builds total_length, s <-> t conversion
    and the s-parametrized geometry accessors on top of it.
    """

    kind = "generic"

    def __init__(self):
        self._build_arclength()

    # t-parametrization, to be provided by subclasses (vectorized in t)
    def position_t(self, t):
        raise NotImplementedError

    def velocity_t(self, t):
        raise NotImplementedError

    def acceleration_t(self, t):
        raise NotImplementedError

    def speed_t(self, t):
        vx, vy = self.velocity_t(t)
        return np.hypot(vx, vy)

    def _build_arclength(self):
        m = _ARCLENGTH_SAMPLES
        t = 2.0 * np.pi * np.arange(m) / m
        speed = self.speed_t(t)
        coeffs = np.fft.rfft(speed) / m
        self._mean_speed = coeffs[0].real
        k = np.arange(1, len(coeffs))
        keep = np.abs(coeffs[1:]) > 1e-16 * self._mean_speed
        self._arc_coeffs = coeffs[1:][keep]
        self._arc_k = k[keep]
        self.total_length = 2.0 * np.pi * self._mean_speed

    def arclength_of_param(self, t):
        """Cumulative arclength s(t) from t=0, exact for the Fourier model."""
        scalar = np.ndim(t) == 0
        t = np.atleast_1d(np.asarray(t, dtype=float))
        ph = np.exp(1j * np.outer(t, self._arc_k))
        # integral of sum 2*Re(c_k e^{ikt}) is 2*[Im(c_k e^{ikt}) - Im(c_k)]/k
        osc = 2.0 * np.imag(ph * (self._arc_coeffs / self._arc_k)[None, :]).sum(axis=1)
        osc0 = -2.0 * np.imag(self._arc_coeffs / self._arc_k).sum()
        s = self._mean_speed * t + osc + osc0
        return float(s[0]) if scalar else s

    def param_of_arclength(self, s):
        scalar = np.ndim(s) == 0
        s = np.atleast_1d(np.asarray(s, dtype=float))
        t = s / self._mean_speed
        tol = 1e-14 * max(1.0, self.total_length)
        for _ in range(60):
            f = self.arclength_of_param(t) - s
            t = t - f / self.speed_t(t)
            if np.max(np.abs(f)) < tol:
                break
        return float(t[0]) if scalar else t

    # s-parametrized accessors ------------------------------------------------
    def position(self, s):
        return self.position_t(self.param_of_arclength(s))

    def tangent(self, s):
        t = self.param_of_arclength(s)
        vx, vy = self.velocity_t(t)
        sp = np.hypot(vx, vy)
        return vx / sp, vy / sp

    def inward_normal(self, s):
        tx, ty = self.tangent(s)
        # counterclockwise parametrization: interior on the left
        return -ty, tx

    def curvature(self, s):
        t = self.param_of_arclength(s)
        return self.curvature_t(t)

    def curvature_t(self, t):
        vx, vy = self.velocity_t(t)
        ax, ay = self.acceleration_t(t)
        sp = np.hypot(vx, vy)
        return (vx * ay - vy * ax) / sp**3

    def is_convex(self, samples: int = 4096) -> bool:
        t = 2.0 * np.pi * np.arange(samples) / samples
        return bool(np.all(self.curvature_t(t) > 0.0))


class CircleCurve(BoundaryCurve):
    """Circle of radius r; closed forms throughout, s = r*t."""

    kind = "circle"

    def __init__(self, r: float = 1.0):
        if r <= 0.0:
            raise ValidationError("circle radius must be positive")
        self.r = float(r)
        self.total_length = 2.0 * math.pi * self.r
        self._mean_speed = self.r

    def position_t(self, t):
        t = np.asarray(t, dtype=float)
        return self.r * np.cos(t), self.r * np.sin(t)

    def velocity_t(self, t):
        t = np.asarray(t, dtype=float)
        return -self.r * np.sin(t), self.r * np.cos(t)

    def acceleration_t(self, t):
        t = np.asarray(t, dtype=float)
        return -self.r * np.cos(t), -self.r * np.sin(t)

    def arclength_of_param(self, t):
        return self.r * np.asarray(t, dtype=float) if np.ndim(t) else self.r * float(t)

    def param_of_arclength(self, s):
        return np.asarray(s, dtype=float) / self.r if np.ndim(s) else float(s) / self.r

    def position(self, s):
        t = np.asarray(s, dtype=float) / self.r
        return self.r * np.cos(t), self.r * np.sin(t)

    def curvature(self, s):
        if np.ndim(s):
            return np.full(np.shape(s), 1.0 / self.r)
        return 1.0 / self.r

    def curvature_t(self, t):
        if np.ndim(t):
            return np.full(np.shape(t), 1.0 / self.r)
        return 1.0 / self.r


class EllipseCurve(BoundaryCurve):
    """Ellipse x^2/a^2 + y^2/b^2 = 1, arclength origin at (a, 0), CCW."""

    kind = "ellipse"

    def __init__(self, a: float, b: float):
        if not (a >= b > 0.0):
            raise ValidationError("ellipse axes must satisfy a >= b > 0")
        self.a = float(a)
        self.b = float(b)
        super().__init__()

    def position_t(self, t):
        t = np.asarray(t, dtype=float)
        return self.a * np.cos(t), self.b * np.sin(t)

    def velocity_t(self, t):
        t = np.asarray(t, dtype=float)
        return -self.a * np.sin(t), self.b * np.cos(t)

    def acceleration_t(self, t):
        t = np.asarray(t, dtype=float)
        return -self.a * np.cos(t), -self.b * np.sin(t)


class FourierCurve(BoundaryCurve):
    """Star-shaped curve from a truncated Fourier series of the radius.

    coeffs = [rho0, a1, b1, a2, b2, ...] encodes
    rho(t) = rho0 + sum_k (a_k cos(k t) + b_k sin(k t)).
    """

    kind = "fourier"

    def __init__(self, coeffs: Sequence[float]):
        coeffs = [float(c) for c in coeffs]
        if not coeffs or coeffs[0] <= 0.0:
            raise ValidationError("fourier curve needs a positive mean radius")
        self.coeffs = coeffs
        self._rho0 = coeffs[0]
        pairs = coeffs[1:]
        if len(pairs) % 2:
            pairs = pairs + [0.0]
        self._ak = np.array(pairs[0::2])
        self._bk = np.array(pairs[1::2])
        self._k = np.arange(1, len(self._ak) + 1)
        if np.any(self.radius(2.0 * np.pi * np.arange(4096) / 4096) <= 0.0):
            raise ValidationError("fourier radius must stay positive")
        super().__init__()
        if not self.is_convex():
            raise ValidationError("fourier curve is not convex; non-convex chambers are unsupported")

    def radius(self, t, order: int = 0):
        t = np.asarray(t, dtype=float)
        arg = np.outer(np.atleast_1d(t), self._k)
        if order == 0:
            val = self._rho0 + (np.cos(arg) * self._ak + np.sin(arg) * self._bk).sum(axis=-1)
        elif order == 1:
            val = (-np.sin(arg) * self._k * self._ak + np.cos(arg) * self._k * self._bk).sum(axis=-1)
        elif order == 2:
            val = (-np.cos(arg) * self._k**2 * self._ak - np.sin(arg) * self._k**2 * self._bk).sum(axis=-1)
        else:
            raise ValueError("order must be 0, 1 or 2")
        return val.reshape(np.shape(t)) if np.ndim(t) else float(val[0])

    def position_t(self, t):
        t = np.asarray(t, dtype=float)
        rho = self.radius(t)
        return rho * np.cos(t), rho * np.sin(t)

    def velocity_t(self, t):
        t = np.asarray(t, dtype=float)
        rho, drho = self.radius(t), self.radius(t, 1)
        return drho * np.cos(t) - rho * np.sin(t), drho * np.sin(t) + rho * np.cos(t)

    def acceleration_t(self, t):
        t = np.asarray(t, dtype=float)
        rho, d1, d2 = self.radius(t), self.radius(t, 1), self.radius(t, 2)
        ax = (d2 - rho) * np.cos(t) - 2.0 * d1 * np.sin(t)
        ay = (d2 - rho) * np.sin(t) + 2.0 * d1 * np.cos(t)
        return ax, ay


def make_circle(r: float = 1.0) -> CircleCurve:
    return CircleCurve(r)


def make_ellipse(a: float, b: float) -> EllipseCurve:
    """Arclength-parametrized ellipse; a = b falls back to the exact circle."""
    if a == b:
        return CircleCurve(a)
    return EllipseCurve(a, b)


def make_fourier(coeffs: Sequence[float]) -> FourierCurve:
    return FourierCurve(coeffs)


# ---------------------------------------------------------------------------
# Liouville billiard tables
# ---------------------------------------------------------------------------

@dataclass
class LiouvilleTable:
    """Planar Liouville table data on the cylinder: metric (f(x)-q(y))(dx^2+dy^2).

    f and q are derivative evaluators: f(x, m) is the m-th derivative at x.
    The quotient by the (x,y) -> (-x,-y) involution is not modelled; all
    computations live in the cylinder coordinates.
    """

    f: Callable[[float, int], float]
    q: Callable[[float, int], float]
    N: float
    family: str = "generic"
    c: float | None = None

    def __post_init__(self):
        if self.N <= 0.0:
            raise ValidationError("N must be positive")
        self.q_N = self.q(self.N, 0)
        self.f_max = self.f(math.pi / 2.0, 0)

    def metric_factor(self, x, y):
        return self.f(x, 0) - self.q(y, 0)

    def boundary_curve(self) -> BoundaryCurve:
        """Euclidean realization of the table; only the confocal-ellipse
        family embeds in the plane (string property)."""
        if self.family != "ellipse" or self.c is None:
            raise ValidationError("only elliptic-coordinate tables have a planar realization")
        a = self.c * math.cosh(self.N)
        b = self.c * math.sinh(self.N)
        return make_ellipse(a, b)


def _sin2_deriv(c2: float):
    # c2 * sin(x)^2 = c2*(1 - cos 2x)/2 and its derivatives
    def f(x: float, m: int = 0) -> float:
        if m == 0:
            return c2 * math.sin(x) ** 2
        return -0.5 * c2 * (2.0 ** m) * math.cos(2.0 * x + 0.5 * math.pi * m)
    return f


def _neg_sinh2_deriv(c2: float):
    # -c2 * sinh(y)^2 = -c2*(cosh 2y - 1)/2 and its derivatives
    def q(y: float, m: int = 0) -> float:
        if m == 0:
            return -c2 * math.sinh(y) ** 2
        if m % 2 == 0:
            return -0.5 * c2 * (2.0 ** m) * math.cosh(2.0 * y)
        return -0.5 * c2 * (2.0 ** m) * math.sinh(2.0 * y)
    return q


def elliptic_table(c: float = 1.0, N: float = 1.0) -> LiouvilleTable:
    """Elliptic-coordinate table f = c^2 sin^2 x, q = -c^2 sinh^2 y.

    Its planar realization is the ellipse with semi-axes
    (c cosh N, c sinh N); every planar table of classical type is of this
    form up to isometry.
    """
    if c <= 0.0:
        raise ValidationError("focal parameter c must be positive")
    c2 = c * c
    return LiouvilleTable(f=_sin2_deriv(c2), q=_neg_sinh2_deriv(c2), N=N, family="ellipse", c=c)


def elliptic_table_for_ellipse(a: float, b: float) -> LiouvilleTable:
    """Liouville data of the Euclidean ellipse with semi-axes a > b."""
    if not (a > b > 0.0):
        raise ValidationError("need a > b > 0 for confocal coordinates")
    c = math.sqrt(a * a - b * b)
    N = math.atanh(b / a)
    return elliptic_table(c, N)


@dataclass
class ConditionReport:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class LiouvilleReport:
    conditions: list[ConditionReport] = field(default_factory=list)
    k_check: int = 4

    @property
    def classical_type(self) -> bool:
        return all(c.passed for c in self.conditions)

    def first_failure(self) -> ConditionReport | None:
        for c in self.conditions:
            if not c.passed:
                return c
        return None

    def as_dict(self) -> dict:
        return {
            "classical_type": self.classical_type,
            "k_check": self.k_check,
            "conditions": [
                {"name": c.name, "passed": c.passed, "detail": c.detail}
                for c in self.conditions
            ],
        }


def liouville_validate(table: LiouvilleTable, k_check: int = 4, grid: int = 512,
                       tol: float = 1e-9) -> LiouvilleReport:
    """Check the classical-type conditions up to derivative order 2*k_check.

    Report-style: nothing raises; each condition is listed with pass/fail
    and, for the parity compatibility, the first violated order.
    """
    f, q, N = table.f, table.q, table.N
    rep = LiouvilleReport(k_check=k_check)
    add = rep.conditions.append

    xs = np.linspace(0.0, 2.0 * math.pi, grid, endpoint=False)
    fx = np.array([f(float(x), 0) for x in xs])
    interior = np.array([min(abs(x % math.pi), abs(math.pi - (x % math.pi))) > 1e-2 for x in xs])

    ok = abs(f(0.0, 0)) <= tol and abs(f(math.pi, 0)) <= tol
    add(ConditionReport("i: f(0)=f(pi)=0", ok, f"f(0)={f(0.0, 0):.3e}, f(pi)={f(math.pi, 0):.3e}"))
    ok = f(0.0, 2) > 0.0
    add(ConditionReport("i: f''(0)>0", ok, f"f''(0)={f(0.0, 2):.6g}"))
    ok = bool(np.all(fx[interior] > 0.0))
    add(ConditionReport("i: f>0 off pi*Z", ok))
    per = max(abs(f(float(x), 0) - f(float(x) + 2.0 * math.pi, 0)) for x in xs[::16])
    add(ConditionReport("i: f 2pi-periodic", per <= 1e-8, f"max defect {per:.3e}"))
    ev = max(abs(f(float(x), 0) - f(-float(x), 0)) for x in xs[::16])
    add(ConditionReport("i: f even", ev <= 1e-8, f"max defect {ev:.3e}"))

    ys = np.linspace(0.0, N, grid // 4 + 2)[1:]
    qy = np.array([q(float(y), 0) for y in ys])
    add(ConditionReport("ii: q(0)=0", abs(q(0.0, 0)) <= tol, f"q(0)={q(0.0, 0):.3e}"))
    add(ConditionReport("ii: q''(0)<0", q(0.0, 2) < 0.0, f"q''(0)={q(0.0, 2):.6g}"))
    add(ConditionReport("ii: q<0 off 0", bool(np.all(qy < 0.0))))
    evq = max(abs(q(float(y), 0) - q(-float(y), 0)) for y in ys[::8])
    add(ConditionReport("ii: q even", evq <= 1e-8, f"max defect {evq:.3e}"))

    # compatibility f^(2k)(pi*l) = (-1)^k q^(2k)(0) at l = 0, 1
    first_bad = None
    for k in range(1, k_check + 1):
        want = (-1.0) ** k * q(0.0, 2 * k)
        for x0 in (0.0, math.pi):
            got = f(x0, 2 * k)
            scale = max(1.0, abs(want), abs(got))
            if abs(got - want) > 1e-7 * scale:
                first_bad = (k, x0, got, want)
                break
        if first_bad:
            break
    if first_bad:
        k, x0, got, want = first_bad
        add(ConditionReport("iii: parity compatibility", False,
                            f"fails at k={k}, x={x0:.4f}: f^(2k)={got:.6g} vs (-1)^k q^(2k)(0)={want:.6g}"))
    else:
        add(ConditionReport("iii: parity compatibility", True, f"holds through k={k_check}"))

    add(ConditionReport("iv: q'(N)<0 (geodesic convexity)", q(N, 1) < 0.0, f"q'(N)={q(N, 1):.6g}"))

    half = np.linspace(0.0, math.pi / 2.0, grid // 4)
    fh = np.array([f(float(x), 0) for x in half])
    sym = max(abs(f(float(x), 0) - f(math.pi - float(x), 0)) for x in half[::4])
    add(ConditionReport("v: f(x)=f(pi-x)", sym <= 1e-8, f"max defect {sym:.3e}"))
    add(ConditionReport("v: f increasing on [0,pi/2]", bool(np.all(np.diff(fh) > 0.0))))

    pos = True
    for x in xs[::32]:
        for y in ys[::8]:
            if table.metric_factor(float(x), float(y)) <= 0.0 and min(abs(x), abs(x - math.pi), abs(x - 2 * math.pi)) > 1e-6:
                pos = False
    add(ConditionReport("metric factor positive", pos))
    return rep


# ---------------------------------------------------------------------------
# Domain-spec files
# ---------------------------------------------------------------------------

def curve_from_spec(spec: dict) -> BoundaryCurve:
    """Build a curve from the JSON-compatible domain-spec mapping."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError("domain spec must be a mapping with a 'type' key")
    kind = spec["type"]
    known = {
        "ellipse": {"type", "a", "b"},
        "circle": {"type", "r"},
        "fourier": {"type", "coeffs"},
        "liouville": {"type", "family", "c", "N"},
    }
    if kind not in known:
        raise ConfigError(f"unknown domain type {kind!r}")
    extra = set(spec) - known[kind]
    if extra:
        raise ConfigError(f"unknown keys in domain spec: {sorted(extra)}")
    if kind == "ellipse":
        return make_ellipse(float(spec["a"]), float(spec["b"]))
    if kind == "circle":
        return make_circle(float(spec["r"]))
    if kind == "fourier":
        return make_fourier(spec["coeffs"])
    return table_from_spec(spec).boundary_curve()


def table_from_spec(spec: dict) -> LiouvilleTable:
    if spec.get("type") != "liouville":
        raise ConfigError("table spec must have type 'liouville'")
    if spec.get("family", "ellipse") != "ellipse":
        raise ConfigError("only the 'ellipse' liouville family is built in")
    extra = set(spec) - {"type", "family", "c", "N"}
    if extra:
        raise ConfigError(f"unknown keys in domain spec: {sorted(extra)}")
    return elliptic_table(float(spec.get("c", 1.0)), float(spec.get("N", 1.0)))
