"""Method-of-lines evolution of the coupled scalar/spinor system."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import CflViolation, CflWarning, NumericalBlowup
from .fields import (
    FieldState,
    GridSpec,
    ModelParams,
    bilinear,
    cos_sin,
    dx_central,
    dxx_central,
    number_density,
    vector_current,
)

EXP_GUARD = 700.0
BLOWUP = 1e12
CFL_LIMIT = 0.5
DEFAULT_CFL = 0.25


@dataclass(frozen=True, eq=False)
class StateDerivative:
    d_phi: np.ndarray
    d_phi_t: np.ndarray
    d_psi_plus: np.ndarray
    d_psi_minus: np.ndarray


def mass_phase(p: ModelParams) -> complex:
    c, s = cos_sin(p.theta0)
    return complex(c, s)


def effective_mass(phi_value, p: ModelParams):
    """m_f * e^{i theta0} * e^{beta phi}."""
    m = p.m_f * mass_phase(p) * np.exp(p.beta * np.asarray(phi_value))
    return complex(m) if np.ndim(m) == 0 else m


def _guard(phi, p: ModelParams) -> None:
    if np.max(np.abs(p.beta * np.real(phi))) > EXP_GUARD:
        raise NumericalBlowup(f"|beta*phi| exceeds {EXP_GUARD}; exponentials would overflow")


def rhs(state: FieldState, p: ModelParams, spec: GridSpec) -> StateDerivative:
    state.check(spec)
    _guard(state.phi, p)
    phi = state.phi
    rho = bilinear(state)
    d_phi_t = dxx_central(phi, spec) - (p.m_s**2 / p.beta) * np.sinh(p.beta * phi)
    if p.backreaction:
        d_phi_t = d_phi_t + p.backreaction * rho
    m = effective_mass(phi, p)
    d_psi_plus = -1j * m * state.psi_plus - dx_central(state.psi_minus, spec)
    d_psi_minus = 1j * m * state.psi_minus - dx_central(state.psi_plus, spec)
    return StateDerivative(np.array(state.phi_t, copy=True), d_phi_t, d_psi_plus, d_psi_minus)


def _advance(state: FieldState, k: StateDerivative, h: float, t: float) -> FieldState:
    return FieldState(
        t,
        state.phi + h * k.d_phi,
        state.phi_t + h * k.d_phi_t,
        state.psi_plus + h * k.d_psi_plus,
        state.psi_minus + h * k.d_psi_minus,
        complex_scalar=state.complex_scalar,
    )


def check_cfl(dt: float, spec: GridSpec, strict: bool = False) -> None:
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    if dt > CFL_LIMIT * spec.dx:
        msg = f"dt = {dt:.4g} exceeds {CFL_LIMIT} * dx = {CFL_LIMIT * spec.dx:.4g}"
        if strict:
            raise CflViolation(msg)
        warnings.warn(msg, CflWarning, stacklevel=3)


def step_rk4(state: FieldState, dt: float, p: ModelParams, spec: GridSpec, strict_cfl: bool = False) -> FieldState:
    """One classical Runge-Kutta step over all four field grids."""
    check_cfl(dt, spec, strict_cfl)
    return _rk4(state, dt, p, spec)


def _rk4(state, dt, p, spec):
    t = state.t
    k1 = rhs(state, p, spec)
    k2 = rhs(_advance(state, k1, 0.5 * dt, t + 0.5 * dt), p, spec)
    k3 = rhs(_advance(state, k2, 0.5 * dt, t + 0.5 * dt), p, spec)
    k4 = rhs(_advance(state, k3, dt, t + dt), p, spec)
    w = dt / 6.0
    return FieldState(
        t + dt,
        state.phi + w * (k1.d_phi + 2 * k2.d_phi + 2 * k3.d_phi + k4.d_phi),
        state.phi_t + w * (k1.d_phi_t + 2 * k2.d_phi_t + 2 * k3.d_phi_t + k4.d_phi_t),
        state.psi_plus + w * (k1.d_psi_plus + 2 * k2.d_psi_plus + 2 * k3.d_psi_plus + k4.d_psi_plus),
        state.psi_minus + w * (k1.d_psi_minus + 2 * k2.d_psi_minus + 2 * k3.d_psi_minus + k4.d_psi_minus),
        complex_scalar=state.complex_scalar,
    )


def evolve(state: FieldState, dt: float, n_steps: int, p: ModelParams, spec: GridSpec, strict_cfl: bool = False) -> FieldState:
    check_cfl(dt, spec, strict_cfl)
    for _ in range(n_steps):
        state = _rk4(state, dt, p, spec)
    return state


# ---------------------------------------------------------------- observers

Observer = Callable[[FieldState, ModelParams, GridSpec], dict]


def base_record(state: FieldState, p: ModelParams, spec: GridSpec) -> dict:
    """Integrated fermion observables recorded at every observer stride."""
    rho = bilinear(state)
    e_rho = np.exp(p.beta * np.real(state.phi)) * rho
    return {
        "t": state.t,
        "n_total": spec.integrate(number_density(state)),
        "rho_total": spec.integrate(rho),
        "J_total": spec.integrate(vector_current(state)),
        "e_rho_total": spec.integrate(e_rho),
        "backreaction_total": p.backreaction * spec.integrate(rho) if p.backreaction else 0.0,
    }


def simulate(
    initial: FieldState,
    p: ModelParams,
    spec: GridSpec,
    dt: float,
    n_steps: int,
    observer_stride: int = 1,
    observers: Iterable[Observer] = (),
    strict_cfl: bool = False,
) -> list[dict]:
    """Integrate ``n_steps`` RK4 steps, recording a row every ``observer_stride`` steps.

    The first row is the initial state; the final state is always recorded.
    """
    return run(initial, p, spec, dt, n_steps, observer_stride, observers, strict_cfl)[0]


def run(initial, p, spec, dt, n_steps, observer_stride=1, observers=(), strict_cfl=False):
    """Like :func:`simulate` but also returns the final state."""
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    if observer_stride < 1:
        raise ValueError("observer_stride must be >= 1")
    initial.check(spec)
    check_cfl(dt, spec, strict_cfl)
    observers = list(observers)

    def record(s):
        row = base_record(s, p, spec)
        for obs in observers:
            row.update(obs(s, p, spec))
        return row

    state = initial
    rows = [record(state)]
    for step in range(1, n_steps + 1):
        state = _rk4(state, dt, p, spec)
        if not state.max_abs() < BLOWUP:
            raise NumericalBlowup(f"field magnitude exceeded {BLOWUP:g} at t = {state.t:.6g}")
        if step % observer_stride == 0 or step == n_steps:
            rows.append(record(state))
    return rows, state


def constraint_surface_residuals(state: FieldState, spec: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    """Residuals of the surface ``phi_t = -2i psibar psi``, ``phi_x = 0``.

    For real phi and nonzero bilinear the first one cannot vanish; no reality
    convention is imposed here, the residuals are only reported.
    """
    return state.phi_t + 2j * bilinear(state), dx_central(state.phi, spec)


# ---------------------------------------------------------------- initial conditions


def homogeneous(spec: GridSpec, phi0: float = 0.0, phi_t0: float = 0.0) -> FieldState:
    ones = np.ones(spec.n)
    z = np.zeros(spec.n, dtype=complex)
    return FieldState(0.0, phi0 * ones, phi_t0 * ones, z, z)


def gaussian_phi(spec: GridSpec, amplitude: float = 0.5, width: float = 1.0, center: float = 0.0) -> FieldState:
    x = spec.x
    z = np.zeros(spec.n, dtype=complex)
    return FieldState(0.0, amplitude * np.exp(-((x - center) ** 2) / (2 * width**2)), np.zeros(spec.n), z, z)


def gaussian_packet(
    spec: GridSpec,
    amplitude: float = 1.0,
    width: float = 1.0,
    center: float = 0.0,
    momentum: float = 0.0,
    ratio: complex = 0.5,
    phi0: float = 0.0,
) -> FieldState:
    """Gaussian spinor packet ``psi+ = A g(x) e^{ikx}``, ``psi- = ratio * psi+``."""
    x = spec.x
    env = amplitude * np.exp(-((x - center) ** 2) / (2 * width**2)) * np.exp(1j * momentum * x)
    return FieldState(0.0, phi0 * np.ones(spec.n), np.zeros(spec.n), env, ratio * env)


def constrained(spec: GridSpec, phi0: float = 0.0, amplitude: float = 1.0, width: float = 1.0, center: float = 0.0) -> FieldState:
    """Static homogeneous phi with psi+ = psi-, so that psi-bar psi vanishes pointwise."""
    x = spec.x
    env = amplitude * np.exp(-((x - center) ** 2) / (2 * width**2)).astype(complex)
    return FieldState(0.0, phi0 * np.ones(spec.n), np.zeros(spec.n), env, env.copy())


PRESETS = {
    "homogeneous": homogeneous,
    "gaussian_phi": gaussian_phi,
    "gaussian_packet": gaussian_packet,
    "constrained": constrained,
}


def initial_state(preset: str, spec: GridSpec, **kwargs) -> FieldState:
    try:
        factory = PRESETS[preset]
    except KeyError:
        raise ValueError(f"unknown initial-condition preset {preset!r}") from None
    return factory(spec, **kwargs)


def linear_frequency(k: float, p: ModelParams, spec: GridSpec) -> float:
    """Frequency of a small scalar plane wave on the discrete grid (g = 0)."""
    k_eff = 2.0 * math.sin(0.5 * k * spec.dx) / spec.dx
    return math.sqrt(k_eff**2 + p.m_s**2)

