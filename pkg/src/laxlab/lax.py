"""Deformed Lax pair, its zero-curvature field and the grade/Laurent split.

Conventions: ``F = d_-A_+ - d_+A_- + [A_+, A_-]`` with ``d_pm = (d_t pm d_x)/2``.

    A_+ = P_+ H + lam e^{+i th/2} E+ + zeta^-1 mu e^{-i th/2} e^{+b phi} E-
    A_- = P_- H + zeta mu e^{+i th/2} e^{-b phi} E+ + lam e^{-i th/2} E-

with ``P_pm = d_pm phi + i psibar psi``. Each of A_+ and A_- is a sum of a
zeta^0 part and one zeta^(-1) or zeta^(+1) part, so F has exactly three
Laurent powers; its nonzero slots are zeta^-1 E-, zeta^0 {H, E+, E-} and
zeta^+1 E+.
"""

from __future__ import annotations

import cmath
import csv
import io
from dataclasses import dataclass, field, fields as dc_fields

import numpy as np

from . import dynamics
from .errors import ZeroSpectralParameter
from .fields import FieldState, GridSpec, ModelParams, bilinear, dx_central, dxx_central
from .sl2 import commutator, mat2

SLOTS = ("c_em_zm1", "c_ep_zp1", "c_ep_z0", "c_em_z0", "c_h_z0")
# (laurent power, row, col) of each slot
SLOT_INDEX = {
    "c_em_zm1": (-1, 1, 0),
    "c_ep_zp1": (1, 0, 1),
    "c_ep_z0": (0, 0, 1),
    "c_em_z0": (0, 1, 0),
    "c_h_z0": (0, 0, 0),
}
PROBE_ZETAS = (1.0 + 0j, 2.0 + 0j, 1j)
DEFAULT_THETAS = (0.0, np.pi / 6, np.pi / 4, np.pi / 3, np.pi / 2)


def _check_zeta(zeta) -> complex:
    zeta = complex(zeta)
    if zeta == 0:
        raise ZeroSpectralParameter("spectral parameter zeta must be nonzero")
    return zeta


def build_a_plus(phi, dplus_phi, rho, zeta, p: ModelParams) -> np.ndarray:
    zeta = _check_zeta(zeta)
    diag = np.asarray(dplus_phi) + 1j * np.asarray(rho)
    lower = p.mu * cmath.exp(-0.5j * p.theta0) * np.exp(p.beta * np.asarray(phi)) / zeta
    return mat2(diag, p.lam * cmath.exp(0.5j * p.theta0), lower, -diag)


def build_a_minus(phi, dminus_phi, rho, zeta, p: ModelParams) -> np.ndarray:
    zeta = _check_zeta(zeta)
    diag = np.asarray(dminus_phi) + 1j * np.asarray(rho)
    upper = p.mu * cmath.exp(0.5j * p.theta0) * np.exp(-p.beta * np.asarray(phi)) * zeta
    return mat2(diag, upper, p.lam * cmath.exp(-0.5j * p.theta0), -diag)


@dataclass(frozen=True, eq=False)
class LaxPoint:
    a_plus: np.ndarray
    a_minus: np.ndarray


@dataclass(frozen=True, eq=False)
class LaxFields:
    """Grid data the Lax matrices are built from."""

    phi: np.ndarray
    dplus_phi: np.ndarray
    dminus_phi: np.ndarray
    rho: np.ndarray


def lax_fields(state: FieldState, spec: GridSpec, order: int | None = None) -> LaxFields:
    state.check(spec)
    phi_x = dx_central(state.phi, spec, order)
    return LaxFields(state.phi, 0.5 * (state.phi_t + phi_x), 0.5 * (state.phi_t - phi_x), bilinear(state))


def lax_pair(state: FieldState, p: ModelParams, spec: GridSpec, zeta) -> LaxPoint:
    f = lax_fields(state, spec)
    return LaxPoint(
        build_a_plus(f.phi, f.dplus_phi, f.rho, zeta, p),
        build_a_minus(f.phi, f.dminus_phi, f.rho, zeta, p),
    )


# ---------------------------------------------------------------- Laurent parts


@dataclass(frozen=True, eq=False)
class LaxParts:
    """``A_+ = plus0 + plus_m1 / zeta``, ``A_- = minus0 + zeta * minus_p1`` on a grid."""

    plus0: np.ndarray
    plus_m1: np.ndarray
    minus0: np.ndarray
    minus_p1: np.ndarray

    def map(self, fn) -> "LaxParts":
        return LaxParts(*(fn(getattr(self, f.name)) for f in dc_fields(self)))

    def at(self, zeta) -> tuple[np.ndarray, np.ndarray]:
        zeta = _check_zeta(zeta)
        return self.plus0 + self.plus_m1 / zeta, self.minus0 + zeta * self.minus_p1


def _parts(f: LaxFields, p: ModelParams) -> LaxParts:
    # zeta = 1 builds, split by which entries carry the spectral parameter
    ap = build_a_plus(f.phi, f.dplus_phi, f.rho, 1.0, p)
    am = build_a_minus(f.phi, f.dminus_phi, f.rho, 1.0, p)
    ap_m1 = np.zeros_like(ap)
    ap_m1[..., 1, 0] = ap[..., 1, 0]
    am_p1 = np.zeros_like(am)
    am_p1[..., 0, 1] = am[..., 0, 1]
    return LaxParts(ap - ap_m1, ap_m1, am - am_p1, am_p1)


def _rho_t(state: FieldState, d: dynamics.StateDerivative) -> np.ndarray:
    return 2.0 * (
        (np.conj(state.psi_plus) * d.d_psi_plus).real - (np.conj(state.psi_minus) * d.d_psi_minus).real
    )


def _parts_dt_analytic(state: FieldState, p: ModelParams, spec: GridSpec, parts: LaxParts) -> LaxParts:
    d = dynamics.rhs(state, p, spec)
    phi_tx = dx_central(state.phi_t, spec)
    rho_t = _rho_t(state, d)
    pp_t = 0.5 * (d.d_phi_t + phi_tx) + 1j * rho_t
    pm_t = 0.5 * (d.d_phi_t - phi_tx) + 1j * rho_t
    zero = np.zeros_like(pp_t)
    bphi_t = p.beta * state.phi_t
    plus_m1 = parts.plus_m1 * bphi_t[:, None, None]
    minus_p1 = parts.minus_p1 * (-bphi_t)[:, None, None]
    return LaxParts(mat2(pp_t, zero, zero, -pp_t), plus_m1, mat2(pm_t, zero, zero, -pm_t), minus_p1)


def _parts_dt_fd(state: FieldState, p: ModelParams, spec: GridSpec, dt_probe: float) -> LaxParts:
    if not dt_probe > 0:
        raise ValueError("dt_probe must be positive")
    fwd = dynamics._rk4(state, dt_probe, p, spec)
    bwd = dynamics._rk4(state, -dt_probe, p, spec)
    pf = _parts(lax_fields(fwd, spec), p)
    pb = _parts(lax_fields(bwd, spec), p)
    return LaxParts(
        *((getattr(pf, f.name) - getattr(pb, f.name)) / (2.0 * dt_probe) for f in dc_fields(LaxParts))
    )


def _dx_matrix(m: np.ndarray, spec: GridSpec) -> np.ndarray:
    out = np.empty_like(m)
    for i in range(2):
        for j in range(2):
            out[:, i, j] = dx_central(m[:, i, j], spec)
    return out


@dataclass(frozen=True, eq=False)
class LaxJet:
    """Lax parts with their time and space derivatives on a grid."""

    parts: LaxParts
    dt: LaxParts
    dx: LaxParts


def lax_jet(state: FieldState, p: ModelParams, spec: GridSpec, mode: str = "analytic", dt_probe: float | None = None) -> LaxJet:
    """Parts of the Lax pair and their derivatives.

    ``mode`` is ``"analytic"`` (time derivatives by the chain rule through the
    equations of motion) or ``"fd_time"`` (one RK4 step of +-dt_probe and a
    central difference). Space derivatives always use ``dx_central``.
    """
    state.check(spec)
    f = lax_fields(state, spec)
    parts = _parts(f, p)
    if mode == "analytic":
        dt = _parts_dt_analytic(state, p, spec, parts)
    elif mode == "fd_time":
        dt = _parts_dt_fd(state, p, spec, dt_probe if dt_probe is not None else 0.25 * spec.dx)
    else:
        raise ValueError(f"unknown curvature mode {mode!r}")
    return LaxJet(parts, dt, parts.map(lambda m: _dx_matrix(m, spec)))


def curvature_from_jet(jet: LaxJet, zeta) -> np.ndarray:
    """``F(zeta) = d_-A_+ - d_+A_- + [A_+, A_-]`` from precomputed derivatives."""
    ap, am = jet.parts.at(zeta)
    ap_t, am_t = jet.dt.at(zeta)
    ap_x, am_x = jet.dx.at(zeta)
    dminus_ap = 0.5 * (ap_t - ap_x)
    dplus_am = 0.5 * (am_t + am_x)
    return dminus_ap - dplus_am + commutator(ap, am)


def curvature_field(state: FieldState, p: ModelParams, spec: GridSpec, zeta, mode: str = "analytic", dt_probe: float | None = None) -> np.ndarray:
    _check_zeta(zeta)
    return curvature_from_jet(lax_jet(state, p, spec, mode, dt_probe), zeta)


# ---------------------------------------------------------------- coefficients


@dataclass(frozen=True, eq=False)
class LaurentGradeCoeffs:
    c_em_zm1: np.ndarray
    c_ep_zp1: np.ndarray
    c_ep_z0: np.ndarray
    c_em_z0: np.ndarray
    c_h_z0: np.ndarray

    def slot(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def reassemble(self, zeta) -> np.ndarray:
        zeta = _check_zeta(zeta)
        h = self.c_h_z0
        return mat2(h, self.c_ep_z0 + zeta * self.c_ep_zp1, self.c_em_z0 + self.c_em_zm1 / zeta, -h)

    def linf_diff(self, other: "LaurentGradeCoeffs") -> dict[str, float]:
        return {s: float(np.max(np.abs(self.slot(s) - other.slot(s)))) for s in SLOTS}

    def linf(self) -> dict[str, float]:
        return {s: float(np.max(np.abs(self.slot(s)))) for s in SLOTS}


def laurent_parts(jet: LaxJet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Curvature split into its zeta^-1, zeta^0 and zeta^+1 matrices."""
    P, T, X = jet.parts, jet.dt, jet.dx
    f_m1 = 0.5 * (T.plus_m1 - X.plus_m1) + commutator(P.plus_m1, P.minus0)
    f_0 = (
        0.5 * (T.plus0 - X.plus0)
        - 0.5 * (T.minus0 + X.minus0)
        + commutator(P.plus0, P.minus0)
        + commutator(P.plus_m1, P.minus_p1)
    )
    f_p1 = -0.5 * (T.minus_p1 + X.minus_p1) + commutator(P.plus0, P.minus_p1)
    return f_m1, f_0, f_p1


def _coeffs_from_laurent(f_m1, f_0, f_p1) -> LaurentGradeCoeffs:
    by_power = {-1: f_m1, 0: f_0, 1: f_p1}
    return LaurentGradeCoeffs(*(by_power[k][..., i, j] for k, i, j in (SLOT_INDEX[s] for s in SLOTS)))


def laurent_grade_split(state: FieldState, p: ModelParams, spec: GridSpec, mode: str = "analytic", dt_probe: float | None = None) -> LaurentGradeCoeffs:
    return _coeffs_from_laurent(*laurent_parts(lax_jet(state, p, spec, mode, dt_probe)))


def laurent_from_probes(state, p, spec, mode="analytic", dt_probe=None, zetas=PROBE_ZETAS) -> LaurentGradeCoeffs:
    """Recover the Laurent coefficients from F evaluated at three spectral values."""
    jet = lax_jet(state, p, spec, mode, dt_probe)
    zetas = [complex(z) for z in zetas]
    vander = np.array([[1 / z, 1.0, z] for z in zetas])
    samples = np.stack([curvature_from_jet(jet, z) for z in zetas])
    solved = np.tensordot(np.linalg.inv(vander), samples, axes=(1, 0))
    return _coeffs_from_laurent(*solved)


def spurious_entries(state, p, spec, mode="analytic", dt_probe=None) -> float:
    """Largest curvature entry outside the five tracked slots (should be rounding-level)."""
    f_m1, f_0, f_p1 = laurent_parts(lax_jet(state, p, spec, mode, dt_probe))
    mask_m1 = np.ones((2, 2), bool)
    mask_m1[1, 0] = False
    mask_p1 = np.ones((2, 2), bool)
    mask_p1[0, 1] = False
    tr0 = np.abs(f_0[..., 0, 0] + f_0[..., 1, 1])
    return float(max(np.max(np.abs(f_m1[..., mask_m1])), np.max(np.abs(f_p1[..., mask_p1])), np.max(tr0)))


def predicted_coefficients(state: FieldState, p: ModelParams, spec: GridSpec, order: int = 4) -> LaurentGradeCoeffs:
    """Closed forms of the five curvature slots evaluated from field data.

    Space derivatives use the ``order`` stencil (4 by default) so that a
    comparison with the measured split exposes the order-2 truncation of the
    measurement.
    """
    state.check(spec)
    f = lax_fields(state, spec, order)
    rho_x = dx_central(f.rho, spec, order)
    pp = f.dplus_phi + 1j * f.rho
    pm = f.dminus_phi + 1j * f.rho
    half = cmath.exp(0.5j * p.theta0)
    e_plus = np.exp(p.beta * f.phi)
    e_minus = np.exp(-p.beta * f.phi)
    return LaurentGradeCoeffs(
        c_em_zm1=p.mu / half * e_plus * (p.beta * f.dminus_phi + 2 * pm),
        c_ep_zp1=p.mu * half * e_minus * (p.beta * f.dplus_phi + 2 * pp),
        c_ep_z0=-2 * p.lam * half * pm,
        c_em_z0=-2 * p.lam / half * pp,
        c_h_z0=-1j * rho_x + (p.lam**2 - p.mu**2) * np.ones_like(pp),
    )


def paper_coefficients(state: FieldState, p: ModelParams, spec: GridSpec, order: int = 4) -> LaurentGradeCoeffs:
    """The zeta^0 slots as printed in the source derivation, for side-by-side reporting.

    E+: ``2 lam e^{i th/2} (d_-phi + i rho)``; E-: the mirror image; H:
    ``-4 d_+d_-phi + 2 lam mu (e^{b phi} - e^{-b phi}) + i (d_-rho - d_+rho)``
    with ``d_+d_-phi = (phi_tt - phi_xx)/4`` and phi_tt from the equation of
    motion. The zeta^{+-1} slots are copied from :func:`predicted_coefficients`.
    """
    exact = predicted_coefficients(state, p, spec, order)
    f = lax_fields(state, spec, order)
    phi_tt = dynamics.rhs(state, p, spec).d_phi_t
    box_quarter = 0.25 * (phi_tt - dxx_central(state.phi, spec, order))
    rho_x = dx_central(f.rho, spec, order)
    half = cmath.exp(0.5j * p.theta0)
    return LaurentGradeCoeffs(
        c_em_zm1=exact.c_em_zm1,
        c_ep_zp1=exact.c_ep_zp1,
        c_ep_z0=2 * p.lam * half * (f.dminus_phi + 1j * f.rho),
        c_em_z0=2 * p.lam / half * (f.dplus_phi + 1j * f.rho),
        c_h_z0=-4 * box_quarter + 2 * p.lam * p.mu * (np.exp(p.beta * f.phi) - np.exp(-p.beta * f.phi)) - 1j * rho_x,
    )


def commutator_h_contribution(state: FieldState, p: ModelParams, spec: GridSpec, zeta=1.0) -> np.ndarray:
    """H coefficient of ``[A_+, A_-]`` on the grid (the zeta^0 cross terms)."""
    pair = lax_pair(state, p, spec, zeta)
    return commutator(pair.a_plus, pair.a_minus)[..., 0, 0]


def constraint_residuals(state: FieldState, p: ModelParams, spec: GridSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(d_+phi + i rho, d_-phi + i rho, d_x rho)`` pointwise."""
    f = lax_fields(state, spec)
    return f.dplus_phi + 1j * f.rho, f.dminus_phi + 1j * f.rho, dx_central(f.rho, spec)


# ---------------------------------------------------------------- report


@dataclass(eq=False)
class CurvatureReport:
    zetas: tuple
    curvature: dict
    measured: LaurentGradeCoeffs
    predicted: LaurentGradeCoeffs
    paper: LaurentGradeCoeffs
    constraints: tuple
    x: np.ndarray
    residual_norms: dict = field(default_factory=dict)
    paper_residual_norms: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["x"] + [f"abs_{s}" for s in SLOTS] + [f"abs_pred_{s}" for s in SLOTS]
        header += ["abs_constraint_plus", "abs_constraint_minus", "constraint_dx_rho"]
        w.writerow(header)
        cols = [self.x]
        cols += [np.abs(self.measured.slot(s)) for s in SLOTS]
        cols += [np.abs(self.predicted.slot(s)) for s in SLOTS]
        cols += [np.abs(self.constraints[0]), np.abs(self.constraints[1]), np.real(self.constraints[2])]
        for row in zip(*cols):
            w.writerow([repr(float(v)) for v in row])
        return buf.getvalue()

    def summary(self) -> str:
        lines = ["[curvature]"]
        for z in self.zetas:
            lines.append(f"max_abs_F(zeta={z!r}) = {float(np.max(np.abs(self.curvature[z]))):.6e}")
        for s in SLOTS:
            lines.append(f"{s}_measured_Linf = {self.measured.linf()[s]:.6e}")
            lines.append(f"{s}_measured_minus_predicted_Linf = {self.residual_norms[s]:.6e}")
            lines.append(f"{s}_measured_minus_printed_Linf = {self.paper_residual_norms[s]:.6e}")
        names = ("constraint_dplus_Linf", "constraint_dminus_Linf", "constraint_dx_rho_Linf")
        for name, grid in zip(names, self.constraints):
            lines.append(f"{name} = {float(np.max(np.abs(grid))):.6e}")
        return "\n".join(lines)


def curvature_report(state: FieldState, p: ModelParams, spec: GridSpec, zetas=(1.0,), mode: str = "analytic", dt_probe: float | None = None) -> CurvatureReport:
    jet = lax_jet(state, p, spec, mode, dt_probe)
    zetas = tuple(complex(z) for z in zetas)
    measured = _coeffs_from_laurent(*laurent_parts(jet))
    predicted = predicted_coefficients(state, p, spec)
    printed = paper_coefficients(state, p, spec)
    report = CurvatureReport(
        zetas=zetas,
        curvature={z: curvature_from_jet(jet, z) for z in zetas},
        measured=measured,
        predicted=predicted,
        paper=printed,
        constraints=constraint_residuals(state, p, spec),
        x=spec.x,
    )
    report.residual_norms = measured.linf_diff(predicted)
    report.paper_residual_norms = measured.linf_diff(printed)
    return report

