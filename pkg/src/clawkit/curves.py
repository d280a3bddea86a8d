"""Closed plane-curve flow by the arclength derivative of curvature.

Curves are sampled uniformly in their parameter and stored as complex
points z = x + iy; derivatives in the parameter are spectral.  The flow
moves each point with normal speed k_s (signed curvature convention:
k = +1/R for a counterclockwise circle, with the normal n = i*T pointing
toward the center), plus a tangential redistribution velocity that is a
pure reparametrization: it keeps the samples uniform in arclength and
anchors sample 0, so the sampled curvature signal lives in a fixed
arclength gauge.  In that gauge the curvature obeys an mKdV-type law
k_t = k_sss + (3/2) k^2 k_s - c k_s with c = k(sample 0)^2 / 2, which is
what `mkdv_residual` measures.

Stability: the normal speed has a third-derivative character, so the
update velocity is low-pass filtered to `filter_modes` Fourier modes and
dt must satisfy dt <= 2.8 / q_max^3 with q_max = 2 pi filter_modes / L
(the classical RK4 imaginary-axis bound).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .expr import ExprError

RK4_IMAGINARY_BOUND = 2.8
DEFAULT_FILTER_MODES = 42


class CurveError(ExprError):
    pass


class DegenerateTangentError(CurveError):
    pass


class SelfIntersectionError(CurveError):
    pass


class CurveStabilityError(CurveError):
    pass


def _modes(N: int) -> np.ndarray:
    return np.fft.fftfreq(N, d=1.0 / N)


def _dtheta(z: np.ndarray, order: int = 1) -> np.ndarray:
    N = z.shape[0]
    m = _modes(N)
    mult = (1j * m) ** order
    if order % 2 == 1:
        mult[N // 2] = 0.0
    return np.fft.ifft(mult * np.fft.fft(z))


def _real_dtheta(v: np.ndarray, order: int = 1) -> np.ndarray:
    return np.real(_dtheta(v.astype(complex), order))


@dataclass
class CurveState:
    z: np.ndarray          # complex samples, closed curve, uniform parameter
    t: float = 0.0

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=complex)
        n = self.z.shape[0]
        if n < 16 or n & (n - 1):
            raise CurveError(f"need a power-of-two number of samples >= 16, got {n}")
        if not np.all(np.isfinite(self.z)):
            raise CurveError("non-finite curve coordinates")

    @property
    def N(self) -> int:
        return self.z.shape[0]

    @property
    def x(self) -> np.ndarray:
        return np.real(self.z)

    @property
    def y(self) -> np.ndarray:
        return np.imag(self.z)


def curve_from_samples(x, y, t: float = 0.0, require_simple: bool = True) -> CurveState:
    state = CurveState(np.asarray(x, dtype=float) + 1j * np.asarray(y, dtype=float), t)
    if require_simple and self_intersects(state):
        raise SelfIntersectionError("initial curve is not simple")
    return state


def curve_from_polar(radius_fn, N: int, t: float = 0.0) -> CurveState:
    theta = 2.0 * np.pi * np.arange(N) / N
    r = np.asarray(radius_fn(theta), dtype=float)
    return curve_from_samples(r * np.cos(theta), r * np.sin(theta), t)


def self_intersects(state: CurveState) -> bool:
    """Segment sweep over all non-adjacent sample segment pairs.

    Coincident non-neighbor vertices (a crossing exactly at a sample)
    count as an intersection too.
    """
    z = state.z
    N = state.N
    scale = max(float(np.max(np.abs(z - np.mean(z)))), 1e-30)
    for off in range(2, N - 1):
        if np.min(np.abs(z - np.roll(z, off))) < 1e-12 * scale:
            return True
    a = z
    b = np.roll(z, -1)
    ax, ay = np.real(a), np.imag(a)
    bx, by = np.real(b), np.imag(b)
    for i in range(N - 2):
        j = np.arange(i + 2, N if i > 0 else N - 1)
        d1x, d1y = bx[i] - ax[i], by[i] - ay[i]
        d2x, d2y = bx[j] - ax[j], by[j] - ay[j]
        denom = d1x * d2y - d1y * d2x
        ex, ey = ax[j] - ax[i], ay[j] - ay[i]
        with np.errstate(divide="ignore", invalid="ignore"):
            s = (ex * d2y - ey * d2x) / denom
            u = (ex * d1y - ey * d1x) / (-denom) * -1.0
        hit = (np.abs(denom) > 1e-14) & (s > 1e-12) & (s < 1 - 1e-12) \
            & (u > 1e-12) & (u < 1 - 1e-12)
        if np.any(hit):
            return True
    return False


def metric(state: CurveState) -> np.ndarray:
    g = np.abs(_dtheta(state.z))
    if np.min(g) <= 1e-9 * max(float(np.mean(g)), 1e-30):
        raise DegenerateTangentError("tangent vector vanishes at a sample")
    return g


def curvature_profile(state: CurveState) -> Tuple[np.ndarray, np.ndarray]:
    """Signed curvature k and its arclength derivative k1 at every sample."""
    zp = _dtheta(state.z)
    g = np.abs(zp)
    if np.min(g) <= 1e-9 * max(float(np.mean(g)), 1e-30):
        raise DegenerateTangentError("tangent vector vanishes at a sample")
    zpp = _dtheta(state.z, 2)
    k = np.imag(np.conj(zp) * zpp) / g ** 3
    k1 = _real_dtheta(k) / g
    return k, k1


@dataclass
class MomentSet:
    length: float
    area: float
    moment_x: float
    moment_y: float
    moment_r2: float
    degenerate: bool = False

    def as_tuple(self) -> tuple:
        return (self.length, self.area, self.moment_x, self.moment_y, self.moment_r2)

    def to_dict(self) -> dict:
        return {"length": self.length, "area": self.area,
                "moment_x": self.moment_x, "moment_y": self.moment_y,
                "moment_r2": self.moment_r2, "degenerate": self.degenerate}


def moments(state: CurveState) -> MomentSet:
    """Boundary-integral evaluation with spectral quadrature.

    length = closed integral of |z'|; area = (1/2) (x dy - y dx);
    int x dA = (x^2/2) dy; int y dA = -(y^2/2) dx;
    int (x^2+y^2) dA = (x^3/3) dy - (y^3/3) dx.
    """
    x, y = state.x, state.y
    xp = _real_dtheta(x)
    yp = _real_dtheta(y)
    g = np.abs(_dtheta(state.z))
    two_pi = 2.0 * np.pi
    length = float(np.mean(g) * two_pi)
    area = float(0.5 * np.mean(x * yp - y * xp) * two_pi)
    mx = float(np.mean(0.5 * x ** 2 * yp) * two_pi)
    my = float(np.mean(-0.5 * y ** 2 * xp) * two_pi)
    m2 = float(np.mean(x ** 3 / 3.0 * yp - y ** 3 / 3.0 * xp) * two_pi)
    degenerate = abs(area) < 1e-8 * max(length ** 2, 1e-30)
    return MomentSet(length=length, area=area, moment_x=mx, moment_y=my,
                     moment_r2=m2, degenerate=degenerate)


def resample_uniform_arclength(state: CurveState) -> CurveState:
    """Spectrally interpolate to samples equally spaced in arclength.

    Sample 0 is kept fixed; the others move along the curve only
    (pure reparametrization).
    """
    z = state.z
    N = state.N
    g = np.abs(_dtheta(z))
    g_hat = np.fft.fft(g) / N
    L = float(np.real(g_hat[0]) * 2.0 * np.pi)
    m = _modes(N)

    def arclength(theta):
        # s(theta) = (L / 2 pi) theta + periodic part
        s = np.real(g_hat[0]) * theta
        for idx in np.nonzero(np.abs(g_hat) > 1e-15 * np.abs(g_hat[0]))[0]:
            if m[idx] == 0:
                continue
            c = g_hat[idx] / (1j * m[idx])
            s = s + np.real(c * (np.exp(1j * m[idx] * theta) - 1.0))
        return s

    def metric_at(theta):
        vals = np.zeros_like(theta, dtype=complex)
        for idx in range(N):
            if abs(g_hat[idx]) > 1e-15 * abs(g_hat[0]):
                vals = vals + g_hat[idx] * np.exp(1j * m[idx] * theta)
        return np.real(vals)

    targets = np.arange(N) * (L / N)
    theta = 2.0 * np.pi * np.arange(N) / N
    for _ in range(30):
        err = arclength(theta) - targets
        theta = theta - err / metric_at(theta)
        if np.max(np.abs(err)) < 1e-13 * max(L, 1.0):
            break
    theta[0] = 0.0
    z_hat = np.fft.fft(z) / N
    z_new = np.zeros(N, dtype=complex)
    for idx in range(N):
        if abs(z_hat[idx]) > 1e-16 * max(np.max(np.abs(z_hat)), 1e-30):
            z_new = z_new + z_hat[idx] * np.exp(1j * m[idx] * theta)
    return CurveState(z_new, state.t)


@dataclass
class CurveTrajectory:
    states: List[CurveState]
    dt: float
    self_intersection_times: List[float] = field(default_factory=list)
    redistributed: bool = True

    @property
    def flagged(self) -> bool:
        return bool(self.self_intersection_times)


def _velocity(z: np.ndarray, redistribute: bool, keep: np.ndarray) -> np.ndarray:
    zp = _dtheta(z)
    g = np.abs(zp)
    tangent = zp / g
    normal = 1j * tangent
    zpp = _dtheta(z, 2)
    k = np.imag(np.conj(zp) * zpp) / g ** 3
    k1 = _real_dtheta(k) / g
    vel = k1 * normal
    if redistribute:
        # (V_t)_theta = k W g - <k W g> keeps the metric uniform in theta;
        # the integration constant anchors sample 0 (V_t(0) = 0).
        source = k * k1 * g
        source = source - np.mean(source)
        s_hat = np.fft.fft(source)
        m = _modes(z.shape[0])
        with np.errstate(divide="ignore", invalid="ignore"):
            prim = np.where(m == 0, 0.0, s_hat / (1j * m))
        vt = np.real(np.fft.ifft(prim))
        vt = vt - vt[0]
        vel = vel + vt * tangent
    return np.fft.ifft(np.fft.fft(vel) * keep)


def evolve(state: CurveState, T: float, dt: Optional[float] = None,
           record_every: Optional[int] = None,
           redistribute: bool = True,
           filter_modes: int = DEFAULT_FILTER_MODES,
           check_intersections: bool = True) -> CurveTrajectory:
    """RK4 time stepping of the k1 flow with tangential redistribution.

    Self-intersections found at recording times flag the run but do not
    abort it.  dt defaults to half the RK4 stability bound for the
    retained modes.
    """
    N = state.N
    filter_modes = min(filter_modes, N // 2 - 2)
    length0 = moments(state).length
    q_max = 2.0 * np.pi * filter_modes / length0
    bound = RK4_IMAGINARY_BOUND / q_max ** 3
    if dt is None:
        dt = 0.5 * bound
    if dt > bound:
        raise CurveStabilityError(
            f"dt = {dt:.3e} exceeds the stability bound {bound:.3e} "
            f"for {filter_modes} retained modes")
    if redistribute:
        state = resample_uniform_arclength(state)
    m = _modes(N)
    keep = (np.abs(m) <= filter_modes).astype(float)

    steps = max(1, int(round(T / dt)))
    if record_every is None:
        record_every = max(1, steps // 50)
    z = state.z.copy()
    t = state.t
    states = [CurveState(z.copy(), t)]
    hits: List[float] = []
    for step in range(1, steps + 1):
        a = _velocity(z, redistribute, keep)
        b = _velocity(z + 0.5 * dt * a, redistribute, keep)
        c = _velocity(z + 0.5 * dt * b, redistribute, keep)
        d = _velocity(z + dt * c, redistribute, keep)
        z = z + dt / 6.0 * (a + 2 * b + 2 * c + d)
        t = state.t + step * dt
        if step % record_every == 0 or step == steps:
            if not np.all(np.isfinite(z)):
                raise CurveError(f"curve flow diverged at t = {t:.6g}")
            snap = CurveState(z.copy(), t)
            if check_intersections and self_intersects(snap):
                hits.append(t)
            states.append(snap)
    return CurveTrajectory(states=states, dt=dt, self_intersection_times=hits,
                           redistributed=redistribute)


def self_similar_residual(state: CurveState, a0: float, a1: float = 0.0,
                          a2: float = 0.0) -> float:
    """max over samples of |k1^2 + k^4/4 + a2 k^2 + a1 k + a0|."""
    k, k1 = curvature_profile(state)
    return float(np.max(np.abs(k1 ** 2 + 0.25 * k ** 4 + a2 * k ** 2 + a1 * k + a0)))


def fit_self_similar(state: CurveState) -> Tuple[float, float, float, float]:
    """Least-squares (a0, a1, a2) minimizing the self-similarity residual."""
    k, k1 = curvature_profile(state)
    design = np.stack([np.ones_like(k), k, k ** 2], axis=1)
    target = -(k1 ** 2 + 0.25 * k ** 4)
    coeffs, *_ = np.linalg.lstsq(design, target, rcond=None)
    a0, a1, a2 = (float(c) for c in coeffs)
    return a0, a1, a2, self_similar_residual(state, a0, a1, a2)


def mkdv_residual(traj: CurveTrajectory, fit_advection: bool = True) -> float:
    """Residual of k_t = k_sss + (3/2) k^2 k_s - c k_s on the middle snapshots.

    Requires a redistributed run (fixed arclength gauge anchored at
    sample 0).  With fit_advection=False, c is taken as k(sample 0)^2/2.
    """
    if len(traj.states) < 3:
        raise CurveError("need at least three recorded states")
    if not traj.redistributed:
        raise CurveError("the mKdV gauge requires the redistributed flow")
    mid = len(traj.states) // 2
    before, center, after = traj.states[mid - 1], traj.states[mid], traj.states[mid + 1]
    dt = after.t - before.t
    k_b, _ = curvature_profile(before)
    k_c, k1_c = curvature_profile(center)
    k_a, _ = curvature_profile(after)
    dk_dt = (k_a - k_b) / dt
    g = np.abs(_dtheta(center.z))
    k_s = k1_c
    k_ss = _real_dtheta(k_s) / g
    k_sss = _real_dtheta(k_ss) / g
    rhs = k_sss + 1.5 * k_c ** 2 * k_s
    if fit_advection:
        num = float(np.dot(k_s, rhs - dk_dt))
        den = float(np.dot(k_s, k_s))
        c = num / den if den > 0 else 0.0
    else:
        c = 0.5 * float(k_c[0]) ** 2
    resid = dk_dt - (rhs - c * k_s)
    scale = max(float(np.max(np.abs(rhs))), 1e-30)
    return float(np.max(np.abs(resid)) / scale)
