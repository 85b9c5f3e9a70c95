"""Model parameters, periodic grids, field snapshots and derivative stencils."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .errors import LengthMismatch, ValidationError

HALF_PI = 0.5 * math.pi


def cos_sin(theta: float) -> tuple[float, float]:
    """cos and sin of ``theta`` with the endpoints 0 and pi/2 made exact.

    ``math.cos(math.pi / 2)`` is 6e-17 rather than 0; snapping it keeps the
    theta0 = pi/2 backreaction identically zero.
    """
    if theta == 0.0:
        return 1.0, 0.0
    if abs(theta - HALF_PI) <= 4 * math.ulp(HALF_PI):
        return 0.0, 1.0
    return math.cos(theta), math.sin(theta)


@dataclass(frozen=True)
class ModelParams:
    """Couplings of one member of the deformed family.

    ``lam`` and ``mu`` default to ``m_s / beta``.
    """

    m_s: float = 1.0
    m_f: float = 1.0
    beta: float = 1.0
    g: float = 0.0
    theta0: float = 0.0
    lam: float | None = None
    mu: float | None = None

    def __post_init__(self):
        for key in ("m_s", "m_f", "beta"):
            if not getattr(self, key) > 0:
                raise ValidationError(key, f"must be > 0, got {getattr(self, key)!r}")
        if not 0.0 <= self.theta0 <= HALF_PI:
            raise ValidationError("theta0", f"must lie in [0, pi/2], got {self.theta0!r}")
        default = self.m_s / self.beta
        for key in ("lam", "mu"):
            value = getattr(self, key)
            if value is None:
                object.__setattr__(self, key, default)
            elif not value > 0:
                raise ValidationError(key, f"must be > 0, got {value!r}")

    @property
    def cos_theta(self) -> float:
        return cos_sin(self.theta0)[0]

    @property
    def sin_theta(self) -> float:
        return cos_sin(self.theta0)[1]

    @property
    def backreaction(self) -> float:
        """Coefficient g*cos(theta0) of the fermion source in the scalar equation."""
        return self.g * self.cos_theta

    def with_theta(self, theta0: float) -> "ModelParams":
        return replace(self, theta0=theta0)


@dataclass(frozen=True)
class GridSpec:
    n: int
    length: float
    stencil_order: int = 2

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 8:
            raise ValidationError("grid.n", f"must be an integer >= 8, got {self.n!r}")
        if not self.length > 0:
            raise ValidationError("grid.length", f"must be > 0, got {self.length!r}")
        if self.stencil_order not in (2, 4):
            raise ValidationError("grid.stencil_order", f"must be 2 or 4, got {self.stencil_order!r}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def x(self) -> np.ndarray:
        """Node positions, centred on the origin."""
        return -0.5 * self.length + self.dx * np.arange(self.n)

    def integrate(self, values) -> complex | float:
        """Periodic trapezoid sum ``dx * sum(values)`` in fixed left-to-right order."""
        values = np.asarray(values)
        if values.shape[-1] != self.n:
            raise LengthMismatch(f"grid has {values.shape[-1]} points, spec expects {self.n}")
        total = math.fsum(values.real) + (1j * math.fsum(values.imag) if np.iscomplexobj(values) else 0.0)
        return self.dx * total


@dataclass(frozen=True, eq=False)
class FieldState:
    """One time slice of the coupled scalar/spinor system."""

    t: float
    phi: np.ndarray
    phi_t: np.ndarray
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    complex_scalar: bool = field(default=False)

    def __post_init__(self):
        sdtype = complex if self.complex_scalar else float
        phi = np.asarray(self.phi)
        phi_t = np.asarray(self.phi_t)
        if not self.complex_scalar and (np.iscomplexobj(phi) or np.iscomplexobj(phi_t)):
            if np.any(np.imag(phi)) or np.any(np.imag(phi_t)):
                raise ValidationError("phi", "complex scalar data needs complex_scalar=True")
            phi, phi_t = phi.real, phi_t.real
        arrays = {
            "phi": np.array(phi, dtype=sdtype),
            "phi_t": np.array(phi_t, dtype=sdtype),
            "psi_plus": np.array(self.psi_plus, dtype=complex),
            "psi_minus": np.array(self.psi_minus, dtype=complex),
        }
        n = arrays["phi"].shape
        for name, arr in arrays.items():
            if arr.ndim != 1 or arr.shape != n:
                raise LengthMismatch(f"{name} has shape {arr.shape}, expected {n}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.phi.shape[0]

    def check(self, spec: GridSpec) -> None:
        if self.n != spec.n:
            raise LengthMismatch(f"state has {self.n} points, grid spec expects {spec.n}")

    @classmethod
    def zeros(cls, spec: GridSpec, t: float = 0.0) -> "FieldState":
        z = np.zeros(spec.n)
        return cls(t, z, z, z, z)

    def replace(self, **changes) -> "FieldState":
        return replace(self, **changes)

    def max_abs(self) -> float:
        return max(float(np.max(np.abs(a))) for a in (self.phi, self.phi_t, self.psi_plus, self.psi_minus))


# ---------------------------------------------------------------- observables


def _abs2(z: np.ndarray) -> np.ndarray:
    return z.real**2 + z.imag**2


def bilinear(state: FieldState) -> np.ndarray:
    """psi-bar psi = |psi+|^2 - |psi-|^2."""
    return _abs2(state.psi_plus) - _abs2(state.psi_minus)


def vector_current(state: FieldState) -> np.ndarray:
    """J = psi+^* psi- + psi-^* psi+ = 2 Re(psi+^* psi-)."""
    return 2.0 * (np.conj(state.psi_plus) * state.psi_minus).real


def number_density(state: FieldState) -> np.ndarray:
    return _abs2(state.psi_plus) + _abs2(state.psi_minus)


def axial_combination(state: FieldState) -> np.ndarray:
    """psi+^* psi- - psi-^* psi+; purely imaginary by construction."""
    z = np.conj(state.psi_plus) * state.psi_minus
    return 1j * (2.0 * z.imag)


# ---------------------------------------------------------------- stencils


def _check_len(values: np.ndarray, spec: GridSpec) -> np.ndarray:
    values = np.asarray(values)
    if values.ndim != 1 or values.shape[0] != spec.n:
        raise LengthMismatch(f"grid of shape {values.shape} does not match n = {spec.n}")
    return values


def dx_central(values, spec: GridSpec, order: int | None = None) -> np.ndarray:
    """Centred first derivative with periodic wraparound (order 2 or 4)."""
    v = _check_len(values, spec)
    order = spec.stencil_order if order is None else order
    if order == 2:
        return (np.roll(v, -1) - np.roll(v, 1)) / (2.0 * spec.dx)
    if order == 4:
        return (8.0 * (np.roll(v, -1) - np.roll(v, 1)) - (np.roll(v, -2) - np.roll(v, 2))) / (12.0 * spec.dx)
    raise ValueError(f"unsupported stencil order {order}")


def dxx_central(values, spec: GridSpec, order: int | None = None) -> np.ndarray:
    """Centred second derivative, a single compact stencil."""
    v = _check_len(values, spec)
    order = spec.stencil_order if order is None else order
    if order == 2:
        return (np.roll(v, -1) - 2.0 * v + np.roll(v, 1)) / spec.dx**2
    if order == 4:
        return (
            -(np.roll(v, -2) + np.roll(v, 2)) + 16.0 * (np.roll(v, -1) + np.roll(v, 1)) - 30.0 * v
        ) / (12.0 * spec.dx**2)
    raise ValueError(f"unsupported stencil order {order}")


def lightcone_pair(dt_grid, dx_grid) -> tuple[np.ndarray, np.ndarray]:
    """Return (d+, d-) = ((dt + dx)/2, (dt - dx)/2)."""
    dt_grid = np.asarray(dt_grid)
    dx_grid = np.asarray(dx_grid)
    if dt_grid.shape != dx_grid.shape:
        raise LengthMismatch(f"shapes differ: {dt_grid.shape} vs {dx_grid.shape}")
    return 0.5 * (dt_grid + dx_grid), 0.5 * (dt_grid - dx_grid)


# ---------------------------------------------------------------- CSV snapshots

SNAPSHOT_COLUMNS = ("x", "phi", "phi_t", "re_psi_plus", "im_psi_plus", "re_psi_minus", "im_psi_minus")


def _fmt(v: float) -> str:
    return repr(float(v))


def snapshot_csv(state: FieldState, spec: GridSpec) -> str:
    state.check(spec)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SNAPSHOT_COLUMNS)
    cols = (
        spec.x,
        np.real(state.phi),
        np.real(state.phi_t),
        state.psi_plus.real,
        state.psi_plus.imag,
        state.psi_minus.real,
        state.psi_minus.imag,
    )
    for row in zip(*cols):
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def write_snapshot(path: str | Path, state: FieldState, spec: GridSpec) -> None:
    Path(path).write_text(snapshot_csv(state, spec), encoding="utf-8", newline="")


def read_snapshot(path: str | Path, t: float = 0.0) -> tuple[FieldState, np.ndarray]:
    """Load a snapshot CSV; returns the state and the x column."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader))
        if header != SNAPSHOT_COLUMNS:
            raise ValueError(f"unexpected snapshot header {header}")
        data = np.array([[float(v) for v in row] for row in reader])
    x, phi, phi_t, rp, ip, rm, im = data.T
    return FieldState(t, phi, phi_t, rp + 1j * ip, rm + 1j * im), x
