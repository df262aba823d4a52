"""Kronecker invariant circles of the billiard map.

Rotation numbers come from weighted Birkhoff averages (super-polynomial
convergence on Diophantine circles), conjugacies to rigid rotation from a
weighted Fourier projection of one long orbit, actions and normal-form
data from loop integrals along the fitted circle.

Sign convention: the orbit advances the angle by +2*pi*omega_orbit per
bounce; the stored normal-form rotation datum is omega = -omega_orbit
(un-reduced, negative for counterclockwise circles), which makes the
conjugacy relation B(F(phi)) = F(phi - 2*pi*omega) and the identity
L(I0) - 2*pi*I0*omega = mean chord action hold without mod-1 fixups.
Diophantine tests reduce omega mod 1, where the sign is immaterial.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .billiard import Orbit, PhasePoint, billiard_map, map_jacobian, orbit
from .errors import (FitDiverged, HyperbolicPoint, NonCircleOrbit,
                     NonPeriodicOrbit, OrbitTooShort, ResonantRotation)
from .geometry import BoundaryCurve, CircleCurve, EllipseCurve

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# weighted Birkhoff averaging
# ---------------------------------------------------------------------------

def birkhoff_weights(n: int) -> np.ndarray:
    """Bump-function weights w(j/(n+1)), w(t) = exp(-1/(t(1-t)))."""
    t = np.arange(1, n + 1) / (n + 1.0)
    w = np.exp(-1.0 / (t * (1.0 - t)))
    return w / w.sum()


def weighted_birkhoff_average(values: np.ndarray) -> float:
    values = np.asarray(values, dtype=float)
    return float(np.dot(birkhoff_weights(len(values)), values))


def _weighted_fourier_mode(values: np.ndarray, phases: np.ndarray, k: int,
                           weights: np.ndarray) -> complex:
    return complex(np.dot(weights, values * np.exp(-1j * k * phases)))


@dataclass(frozen=True)
class RotationData:
    omega: float
    error_estimate: float
    method: str

    def reduced(self) -> float:
        return self.omega % 1.0


@dataclass(frozen=True)
class DiophantineWitness:
    kappa_hat: float
    tau: float
    k_max: int
    argmin_k: tuple[int, ...]
    k_n: int

    @property
    def resonant(self) -> bool:
        return self.kappa_hat == 0.0


def liouville_integral(curve: BoundaryCurve, s, xi):
    """First integral of the ellipse map, f(t) - xi_x^2 in confocal
    coordinates; reduces to -xi^2 r^2 on the circle."""
    if isinstance(curve, CircleCurve):
        return -np.asarray(xi) ** 2 * curve.r**2
    if not isinstance(curve, EllipseCurve):
        raise TypeError("conserved quantity is only available for circles and ellipses")
    a, b = curve.a, curve.b
    t = curve.param_of_arclength(np.asarray(s) % curve.total_length)
    sin2 = np.sin(t) ** 2
    speed2 = a * a * sin2 + b * b * (1.0 - sin2)
    return (a * a - b * b) * sin2 - np.asarray(xi) ** 2 * speed2


def _lift_increments(points, total_length: float) -> np.ndarray:
    # forward lift, matching the (0, L) branch of the generating function
    s = np.array([p.s for p in points])
    return np.diff(s) % total_length


def rotation_number(orb, total_length: float | None = None,
                    invariant=None, tol_invariant: float = 1e-8) -> RotationData:
    """Rotation number of an orbit confined to one invariant circle.

    Weighted Birkhoff average of the lifted arclength increments; the
    error estimate comes from two half-sample estimates, and the method
    falls back to the order-based estimator if they disagree by > 1e-6.
    """
    if isinstance(orb, Orbit):
        total_length = orb.curve.total_length
        increments = np.diff(orb.s_lifted)
        s0, xi0 = orb.s_mod, orb.xi
    else:
        if total_length is None:
            raise ValueError("total_length is required for a raw point sequence")
        increments = _lift_increments(orb, total_length)
        s0 = np.array([p.s for p in orb])
        xi0 = np.array([p.xi for p in orb])
    n = len(increments)
    if n < 1000:
        raise OrbitTooShort(f"need >= 1000 bounces, got {n}")
    if invariant is not None:
        vals = np.asarray(invariant(s0, xi0), dtype=float)
        drift = np.max(np.abs(vals - vals[0]))
        scale = max(1.0, abs(float(vals[0])))
        if drift > tol_invariant * scale:
            raise NonCircleOrbit(f"conserved quantity drifts by {drift:.3e}")

    full = weighted_birkhoff_average(increments) / total_length
    half1 = weighted_birkhoff_average(increments[: n // 2]) / total_length
    half2 = weighted_birkhoff_average(increments[n // 2:]) / total_length
    err = max(abs(full - half1), abs(full - half2))
    if err > 1e-6:
        fallback = _order_based(np.concatenate([[0.0], np.cumsum(increments)]), total_length)
        return RotationData(fallback.omega, fallback.error_estimate, "order-based")
    return RotationData(full, err, "weighted-average")


def _order_based(s_lifted: np.ndarray, total_length: float) -> RotationData:
    s_rel = s_lifted - s_lifted[0]
    frac = (s_rel % total_length) / total_length
    dist = np.minimum(frac, 1.0 - frac)[1:]
    n_best = int(np.argmin(dist)) + 1
    p_best = round(s_rel[n_best] / total_length)
    err = dist[n_best - 1] / n_best
    return RotationData(p_best / n_best, err, "order-based")


def rotation_number_order_based(orb, total_length: float | None = None) -> RotationData:
    """Best-return rational estimate p/q; the independent oracle for the
    weighted average (error ~ 1/q^2 along continued-fraction denominators)."""
    if isinstance(orb, Orbit):
        return _order_based(orb.s_lifted, orb.curve.total_length)
    if total_length is None:
        raise ValueError("total_length is required for a raw point sequence")
    increments = _lift_increments(orb, total_length)
    lifted = np.concatenate([[orb[0].s], orb[0].s + np.cumsum(increments)])
    return _order_based(lifted, total_length)


def diophantine_kappa(omega, tau: float, k_max: int) -> DiophantineWitness:
    """Best constant kappa_hat = min |<omega,k>+k_n| * (sum|k_j|)^tau over
    the truncated lattice 0 < sum|k_j| <= k_max.  Exhaustive scan;
    kappa_hat = 0 flags an exact resonance in range."""
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    omega_vec = np.atleast_1d(np.asarray(omega, dtype=float))
    dim = len(omega_vec)
    best = math.inf
    best_k: tuple[int, ...] = (0,) * dim
    best_kn = 0
    if dim == 1:
        w = float(omega_vec[0])
        for k in range(1, k_max + 1):
            x = k * w
            kn = -round(x)
            val = abs(x + kn) * k**tau
            if val < best:
                best, best_k, best_kn = val, (k,), kn
    else:
        for k in itertools.product(range(-k_max, k_max + 1), repeat=dim):
            norm1 = sum(abs(c) for c in k)
            if norm1 == 0 or norm1 > k_max:
                continue
            x = float(np.dot(omega_vec, k))
            kn = -round(x)
            val = abs(x + kn) * norm1**tau
            if val < best:
                best, best_k, best_kn = val, tuple(k), kn
    return DiophantineWitness(kappa_hat=best, tau=tau, k_max=k_max,
                              argmin_k=best_k, k_n=best_kn)


# ---------------------------------------------------------------------------
# invariant circles
# ---------------------------------------------------------------------------

def _eval_series(coeffs: np.ndarray, phi: np.ndarray) -> np.ndarray:
    kk = np.arange(-(len(coeffs) // 2), len(coeffs) // 2 + 1)
    return np.real(np.exp(1j * np.outer(phi, kk)) @ coeffs)


@dataclass
class InvariantCircle:
    """Kronecker circle: Fourier conjugacy F(phi) = (s(phi), xi(phi)) with
    B(F(phi)) = F(phi - 2*pi*omega), omega the normal-form rotation datum.

    s(phi) = (L/2pi)*phi + periodic part; dmu is the pushforward of
    dphi/2pi, realized as uniform phi-grids.
    """
    omega: RotationData
    total_length: float
    s_coeffs: np.ndarray       # periodic part of s(phi), k = -K..K
    xi_coeffs: np.ndarray
    residual: float
    seed: PhasePoint
    n_modes: int

    @property
    def omega_orbit(self) -> float:
        return -self.omega.omega

    def s_of_phi(self, phi):
        phi = np.asarray(phi, dtype=float)
        return (self.total_length / TWO_PI) * phi + _eval_series(self.s_coeffs, np.atleast_1d(phi)).reshape(phi.shape)

    def xi_of_phi(self, phi):
        phi = np.asarray(phi, dtype=float)
        return _eval_series(self.xi_coeffs, np.atleast_1d(phi)).reshape(phi.shape)

    def sprime_of_phi(self, phi):
        phi = np.asarray(phi, dtype=float)
        kk = np.arange(-(len(self.s_coeffs) // 2), len(self.s_coeffs) // 2 + 1)
        dcoef = 1j * kk * self.s_coeffs
        return (self.total_length / TWO_PI) + _eval_series(dcoef, np.atleast_1d(phi)).reshape(phi.shape)

    def phase_nodes(self, n: int = 1024):
        """Equal-weight nodes of the invariant probability measure."""
        phi = TWO_PI * np.arange(n) / n
        return self.s_of_phi(phi) % self.total_length, self.xi_of_phi(phi)

    def grid(self, n: int = 1024):
        phi = TWO_PI * np.arange(n) / n
        return phi, self.s_of_phi(phi) % self.total_length, self.xi_of_phi(phi)

    def point(self, phi: float) -> PhasePoint:
        return PhasePoint(float(self.s_of_phi(phi)) % self.total_length,
                          float(self.xi_of_phi(phi)))


def _fit_coeffs(values: np.ndarray, phases: np.ndarray, n_modes: int,
                grid: int = 16384) -> np.ndarray:
    """Fourier coefficients of a periodic function sampled along an orbit.

    Sorts the samples by phase mod 2*pi, interpolates the closure with a
    periodic cubic spline onto a uniform grid and reads the coefficients
    off an FFT.  Interpolation is local, so near-resonant rotation numbers
    do not amplify any mode (unlike a direct weighted projection).
    """
    from scipy.interpolate import CubicSpline

    ph = np.asarray(phases, dtype=float) % TWO_PI
    order = np.argsort(ph)
    ph, vals = ph[order], np.asarray(values, dtype=float)[order]
    keep = np.concatenate([[True], np.diff(ph) > 1e-12])
    ph, vals = ph[keep], vals[keep]
    x = np.concatenate([ph, [ph[0] + TWO_PI]])
    y = np.concatenate([vals, [vals[0]]])
    spline = CubicSpline(x, y, bc_type="periodic")
    uniform = ph[0] + TWO_PI * np.arange(grid) / grid
    c = np.fft.rfft(spline(uniform)) / grid
    # undo the grid offset: samples start at ph[0], not 0
    c = c * np.exp(-1j * np.arange(len(c)) * ph[0])
    coeffs = np.zeros(2 * n_modes + 1, dtype=complex)
    top = min(n_modes, len(c) - 1)
    coeffs[n_modes] = c[0].real
    coeffs[n_modes + 1: n_modes + 1 + top] = c[1: top + 1]
    coeffs[n_modes - top: n_modes] = np.conj(c[1: top + 1][::-1])
    return coeffs


def _conjugacy_residual(curve: BoundaryCurve, circ: InvariantCircle, n_check: int = 512) -> float:
    phi = TWO_PI * np.arange(n_check) / n_check
    s = circ.s_of_phi(phi) % curve.total_length
    xi = circ.xi_of_phi(phi)
    s_img = np.empty(n_check)
    xi_img = np.empty(n_check)
    for i in range(n_check):
        q, _ = billiard_map(curve, PhasePoint(float(s[i]), float(xi[i])))
        s_img[i], xi_img[i] = q.s, q.xi
    s_tgt = circ.s_of_phi(phi + TWO_PI * circ.omega_orbit) % curve.total_length
    xi_tgt = circ.xi_of_phi(phi + TWO_PI * circ.omega_orbit)
    L = curve.total_length
    ds = np.abs(((s_img - s_tgt + 0.5 * L) % L) - 0.5 * L)
    return float(np.max(np.hypot(ds, xi_img - xi_tgt)))


def circle_conjugacy(curve: BoundaryCurve, seed: PhasePoint, n_modes: int = 64,
                     n_fit: int = 8192, tol_conj: float = 1e-8,
                     tau: float = 1.0, k_max: int = 50,
                     max_refine: int = 4) -> InvariantCircle:
    """Fit the Fourier conjugacy of the invariant circle through seed.

    One orbit supplies everything: the rotation number by weighted
    Birkhoff averaging, the conjugacy coefficients by a weighted Fourier
    projection at the equidistributed phases 2*pi*n*omega, and an
    omega-polish loop driven by the mean conjugacy defect.
    """
    orb = orbit(curve, seed, n_fit)
    rot = rotation_number(orb)
    witness = diophantine_kappa(rot.omega % 1.0, tau, k_max)
    if witness.kappa_hat < 1e-8:
        raise ResonantRotation(
            f"rotation number {rot.omega % 1.0:.12f} is resonant: "
            f"kappa_hat={witness.kappa_hat:.3e} at k={witness.argmin_k}")

    L = curve.total_length
    n_idx = np.arange(n_fit + 1)
    omega_orbit = rot.omega
    best = None
    for _ in range(max_refine):
        phases = TWO_PI * omega_orbit * n_idx
        g = orb.s_lifted - L * omega_orbit * n_idx
        s_coeffs = _fit_coeffs(g, phases, n_modes)
        xi_coeffs = _fit_coeffs(orb.xi, phases, n_modes)
        circ = InvariantCircle(
            omega=RotationData(-omega_orbit, rot.error_estimate, rot.method),
            total_length=L, s_coeffs=s_coeffs, xi_coeffs=xi_coeffs,
            residual=math.nan, seed=seed, n_modes=n_modes)
        circ.residual = _conjugacy_residual(curve, circ)
        if best is None or circ.residual < best.residual:
            best = circ
        if circ.residual < tol_conj:
            return circ
        # the mean s-defect is linear in the omega error; polish and refit
        phi = TWO_PI * np.arange(256) / 256
        s = circ.s_of_phi(phi) % L
        xi = circ.xi_of_phi(phi)
        defect = 0.0
        for i in range(len(phi)):
            q, _ = billiard_map(curve, PhasePoint(float(s[i]), float(xi[i])))
            tgt = float(circ.s_of_phi(phi[i] + TWO_PI * omega_orbit)) % L
            defect += (((q.s - tgt + 0.5 * L) % L) - 0.5 * L)
        defect /= len(phi)
        omega_orbit += defect / L
    if best.residual < 10.0 * tol_conj:
        return best
    raise FitDiverged(
        f"conjugacy residual {best.residual:.3e} above tolerance {tol_conj:.1e} "
        f"with n_modes={n_modes}, n_fit={n_fit}")


# ---------------------------------------------------------------------------
# action data
# ---------------------------------------------------------------------------

@dataclass
class ActionData:
    I0: float
    L0: float
    gradL: float
    hessL: float | None
    A_avg: float
    omega: RotationData

    @property
    def identity_residual(self) -> float:
        """Defect of L(I0) - I0*gradL = average chord action."""
        return self.L0 - self.I0 * self.gradL - self.A_avg

    def as_dict(self) -> dict:
        return {"I0": self.I0, "L0": self.L0, "gradL": self.gradL,
                "hessL": self.hessL, "A_avg": self.A_avg,
                "omega": self.omega.omega, "omega_method": self.omega.method,
                "identity_residual": self.identity_residual}


def _chord_average(curve: BoundaryCurve, circ: InvariantCircle, n: int) -> float:
    s, xi = circ.phase_nodes(n)
    total = 0.0
    for i in range(n):
        _, chord = billiard_map(curve, PhasePoint(float(s[i]), float(xi[i])))
        total += chord.length
    return total / n


def _loop_action(circ: InvariantCircle, n: int) -> float:
    phi = TWO_PI * np.arange(n) / n
    return float(np.mean(circ.xi_of_phi(phi) * circ.sprime_of_phi(phi)))


def _geometric_L0(curve: BoundaryCurve, circ: InvariantCircle) -> float:
    """Action along the chord from F(0) plus the arc of the circle back to
    F(0): the loop whose xi dx integral defines L(I0)."""
    p0 = circ.point(0.0)
    _, chord = billiard_map(curve, p0)
    # Fourier antiderivative of xi(phi) * s'(phi) between 0 and 2*pi*omega_orbit
    K = len(circ.xi_coeffs) // 2
    kk = np.arange(-K, K + 1)
    sprime = 1j * kk * circ.s_coeffs
    sprime[K] += circ.total_length / TWO_PI
    prod = np.convolve(circ.xi_coeffs, sprime)
    kk2 = np.arange(-2 * K, 2 * K + 1)
    phi1 = TWO_PI * circ.omega_orbit
    partial = np.real(prod[2 * K]) * phi1
    nz = kk2 != 0
    partial += float(np.real(np.sum(prod[nz] * (np.exp(1j * kk2[nz] * phi1) - 1.0)
                                    / (1j * kk2[nz]))))
    return chord.length - partial


def action_data(curve: BoundaryCurve, circ: InvariantCircle,
                n_nodes: int = 1024, hess: bool = True,
                hess_delta: float | None = None) -> ActionData:
    """Action variable, loop action and normal-form derivatives of L.

    Every ingredient is computed by an independent route (loop integral,
    chord average, geometric loop action, orbit rotation number), so the
    identity_residual is a genuine check of the normal-form identities.
    hessL uses two neighboring circles refit from perturbed seeds.
    """
    I0 = _loop_action(circ, n_nodes)
    A_avg = _chord_average(curve, circ, n_nodes)
    gradL = TWO_PI * circ.omega.omega
    L0 = _geometric_L0(curve, circ)
    hessL = None
    if hess:
        delta = hess_delta if hess_delta is not None else 1e-3 * (1.0 - abs(I0))
        xi0 = circ.seed.xi
        dxi = math.copysign(delta, xi0 if xi0 != 0.0 else 1.0)
        samples = [(I0, gradL)]
        for sign in (-1.0, 1.0):
            nb = circle_conjugacy(curve, PhasePoint(circ.seed.s, xi0 + sign * dxi),
                                  n_modes=circ.n_modes)
            samples.append((_loop_action(nb, n_nodes), TWO_PI * nb.omega.omega))
        (i0, g0), (im, gm), (ip, gp) = samples
        hessL = (gm * (i0 - ip) / ((im - i0) * (im - ip))
                 + g0 * (2.0 * i0 - im - ip) / ((i0 - im) * (i0 - ip))
                 + gp * (i0 - im) / ((ip - im) * (ip - i0)))
    return ActionData(I0=I0, L0=L0, gradL=gradL, hessL=hessL, A_avg=A_avg,
                      omega=circ.omega)


# ---------------------------------------------------------------------------
# elliptic periodic points
# ---------------------------------------------------------------------------

@dataclass
class EllipticData:
    alphas: tuple[float, ...]
    trace: float
    verdict: str               # "elliptic" | "parabolic"
    resonant_orders: tuple[int, ...]
    jacobian: np.ndarray = field(repr=False)


def elliptic_fixed_point_data(curve: BoundaryCurve, periodic_orbit,
                              tol_periodic: float = 1e-10,
                              fd_step: float = 1e-6,
                              resonance_tol: float = 1e-6) -> EllipticData:
    """Spectrum of the linearized return map at a periodic orbit.

    Differentiates B^m by central differences; classifies elliptic vs
    parabolic and scans resonances <alpha,k> in Z up to order 4.
    """
    pts = list(periodic_orbit)
    m = len(pts)
    if m < 1:
        raise ValueError("empty orbit")
    p0 = pts[0]
    q = p0
    for _ in range(m):
        q, _ = billiard_map(curve, q)
    L = curve.total_length
    gap = math.hypot(((q.s - p0.s + 0.5 * L) % L) - 0.5 * L, q.xi - p0.xi)
    if gap > tol_periodic:
        raise NonPeriodicOrbit(f"B^{m} moves the point by {gap:.3e}")
    jac = map_jacobian(curve, p0, step=fd_step, iterations=m)
    tr = float(np.trace(jac))
    tol_unit = 1e-6
    if abs(tr) > 2.0 + tol_unit:
        raise HyperbolicPoint(f"trace {tr:.6f} is off the elliptic window")
    if abs(abs(tr) - 2.0) <= tol_unit:
        return EllipticData(alphas=(), trace=tr, verdict="parabolic",
                            resonant_orders=(), jacobian=jac)
    alpha = math.acos(max(-1.0, min(1.0, tr / 2.0))) / TWO_PI
    resonant = tuple(k for k in range(1, 5)
                     if abs(k * alpha - round(k * alpha)) < resonance_tol)
    return EllipticData(alphas=(alpha,), trace=tr, verdict="elliptic",
                        resonant_orders=resonant, jacobian=jac)
