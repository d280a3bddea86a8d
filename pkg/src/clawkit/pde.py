"""Periodic pseudospectral verifier for u_t = u_xxx + g(x, u, u_x).

The linear dispersion u_xxx is integrated exactly in Fourier space with
an integrating factor; the nonlinear part g is evaluated pointwise on the
grid and stepped with classical fourth-order Runge-Kutta.  Conserved
integrals I(t) = integral of rho dx are monitored with spectral-accuracy
quadrature (the periodic trapezoid rule) so that the time drift of I
isolates integrator error.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from .expr import Expr, ExprError
from .numeval import evaluate
from .structure import EvolutionEq

DEFAULT_STABILITY_CONST = 0.02
DEFAULT_DRIFT_FLOOR = 1e-8


class PdeError(ExprError):
    pass


class UnsupportedEquationError(PdeError):
    """The numerical leg handles f = 1 and g = g(x, u, u_x) only."""


class NonPeriodicEquationError(PdeError):
    """g depends on x, which breaks periodicity (enable compact-support mode)."""


class DivergenceError(PdeError):
    pass


class StabilityBoundError(PdeError):
    pass


@dataclass
class GridState:
    L: float
    u: np.ndarray
    t: float

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        n = self.u.shape[0]
        if n < 16 or n & (n - 1):
            raise PdeError(f"grid size must be a power of two >= 16, got {n}")
        if not np.all(np.isfinite(self.u)):
            raise DivergenceError("non-finite samples in grid state")

    @property
    def N(self) -> int:
        return self.u.shape[0]

    def grid(self) -> np.ndarray:
        return np.arange(self.N) * (self.L / self.N) - self.L / 2.0


@dataclass
class Trajectory:
    eq: EvolutionEq
    states: List[GridState]
    dt: float
    indicative: bool = False   # set when sponge mode was used

    @property
    def L(self) -> float:
        return self.states[0].L


def wavenumbers(N: int, L: float) -> np.ndarray:
    return 2.0 * np.pi * np.fft.fftfreq(N, d=1.0 / N) / L


def spectral_derivative(u: np.ndarray, L: float, order: int = 1) -> np.ndarray:
    k = wavenumbers(u.shape[0], L)
    mult = (1j * k) ** order
    if order % 2 == 1:
        # Zero the Nyquist mode for odd derivatives (it is pure noise there).
        mult[u.shape[0] // 2] = 0.0
    return np.real(np.fft.ifft(mult * np.fft.fft(u)))


def _sponge_profile(N: int, L: float, width_fraction: float = 0.1,
                    strength: float = 10.0) -> np.ndarray:
    x = np.arange(N) / N  # 0 .. 1
    w = width_fraction
    ramp = np.zeros(N)
    left = x < w
    right = x > 1.0 - w
    ramp[left] = 0.5 * (1.0 + np.cos(np.pi * x[left] / w))
    ramp[right] = 0.5 * (1.0 + np.cos(np.pi * (1.0 - x[right]) / w))
    return strength * ramp


def integrate(eq: EvolutionEq, u0: Sequence[float], L: float, T: float, dt: float,
              record_every: Optional[int] = None,
              allow_x: bool = False,
              stability_const: float = DEFAULT_STABILITY_CONST) -> Trajectory:
    """Integrate to time T from the samples u0 and record states on a cadence.

    Preconditions: f = 1; g free of u_xx and higher; g free of explicit x
    unless allow_x (compact-support mode with a boundary sponge; results
    are flagged indicative).  dt must satisfy dt <= stability_const * L/N.
    """
    eq = eq.bound()
    if not eq.f.is_one():
        raise UnsupportedEquationError("numerical integration requires f = 1")
    if eq.g.jet_order() > 1:
        raise UnsupportedEquationError(
            "numerical integration requires g = g(x, u, u_x)")
    x_dependent = eq.g.depends_on("x")
    if x_dependent and not allow_x:
        raise NonPeriodicEquationError(
            "g depends on x; pass allow_x=True for compact-support mode")
    state = GridState(L=float(L), u=np.asarray(u0, dtype=float), t=0.0)
    N = state.N
    if dt <= 0:
        raise PdeError("dt must be positive")
    bound = stability_const * L / N
    if dt > bound:
        raise StabilityBoundError(
            f"dt = {dt} exceeds the stability bound {bound:.3e} "
            f"(= {stability_const} * L/N)")
    steps = int(round(T / dt))
    if abs(steps * dt - T) > 1e-12 * max(1.0, abs(T)):
        steps = int(np.ceil(T / dt))
    if record_every is None:
        record_every = max(1, steps // 100)

    k = wavenumbers(N, L)
    lin = (1j * k) ** 3
    E = np.exp(dt * lin)
    E2 = np.exp(0.5 * dt * lin)
    x_grid = state.grid()
    g_expr = eq.g
    sponge = _sponge_profile(N, L) if (x_dependent and allow_x) else None

    # 2/3-rule dealiasing mask for the quadratic-and-higher nonlinearity.
    mask = np.ones(N)
    cutoff = N // 3
    mask[cutoff + 1:N - cutoff] = 0.0

    deriv_mult = 1j * k
    deriv_mult[N // 2] = 0.0

    def nonlinear(v_hat: np.ndarray) -> np.ndarray:
        u = np.real(np.fft.ifft(v_hat))
        ux = np.real(np.fft.ifft(deriv_mult * v_hat))
        g_val = evaluate(g_expr, {"x": x_grid, "u": u, "p1": ux})
        g_val = np.broadcast_to(np.asarray(g_val, dtype=float), u.shape)
        out = np.fft.fft(g_val) * mask
        if sponge is not None:
            out = out - np.fft.fft(sponge * u)
        return out

    v = np.fft.fft(state.u)
    states = [GridState(L=state.L, u=state.u.copy(), t=0.0)]
    t = 0.0
    for step in range(1, steps + 1):
        a = nonlinear(v)
        b = nonlinear(E2 * (v + 0.5 * dt * a))
        c = nonlinear(E2 * v + 0.5 * dt * b)
        d = nonlinear(E * v + dt * E2 * c)
        v = E * v + dt / 6.0 * (E * a + 2.0 * E2 * (b + c) + d)
        t = step * dt
        if step % record_every == 0 or step == steps:
            u = np.real(np.fft.ifft(v))
            if not np.all(np.isfinite(u)):
                raise DivergenceError(f"solution diverged at t = {t:.6g}")
            states.append(GridState(L=state.L, u=u, t=t))
    return Trajectory(eq=eq, states=states, dt=dt,
                      indicative=sponge is not None)


@dataclass
class DriftReport:
    densities: List[str]
    times: np.ndarray
    values: np.ndarray       # shape (n_densities, n_times)
    drifts: List[float]
    floor: float
    indicative: bool = False

    def to_dict(self) -> dict:
        return {
            "densities": list(self.densities),
            "times": [float(t) for t in self.times],
            "values": [[float(v) for v in row] for row in self.values],
            "drifts": [float(d) for d in self.drifts],
            "scale_floor": self.floor,
            "indicative": self.indicative,
        }


def conserved_integral(rho: Expr, state: GridState) -> float:
    """Spectral quadrature of rho over the periodic domain."""
    order = max(rho.jet_order(), 0)
    env: Dict[str, object] = {"x": state.grid(), "t": state.t, "u": state.u}
    for i in range(1, order + 1):
        env[f"p{i}"] = spectral_derivative(state.u, state.L, order=i)
    values = evaluate(rho, env)
    arr = np.broadcast_to(np.asarray(values, dtype=float), state.u.shape)
    if not np.all(np.isfinite(arr)):
        raise PdeError("density evaluation overflowed")
    return float(arr.mean() * state.L)


def monitor(trajectory: Trajectory, densities: Sequence,
            floor: float = DEFAULT_DRIFT_FLOOR) -> DriftReport:
    """Time series and relative drift of each conserved integral.

    `densities` may contain ConservationLaw objects or bare expressions.
    Drift is max |I(t) - I(0)| / max(|I(0)|, floor).
    """
    rhos = [getattr(d, "rho", d) for d in densities]
    names = [str(r) for r in rhos]
    times = np.array([s.t for s in trajectory.states])
    values = np.empty((len(rhos), len(trajectory.states)))
    for i, rho in enumerate(rhos):
        for j, state in enumerate(trajectory.states):
            values[i, j] = conserved_integral(rho, state)
    drifts = []
    for row in values:
        scale = max(abs(row[0]), floor)
        drifts.append(float(np.max(np.abs(row - row[0])) / scale))
    return DriftReport(densities=names, times=times, values=values,
                       drifts=drifts, floor=floor,
                       indicative=trajectory.indicative)
