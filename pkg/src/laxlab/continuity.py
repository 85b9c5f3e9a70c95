"""Continuity relation for the fermion current with a complex mass.

Two candidate relations are evaluated:

* ``paper``:   d_t(psibar psi) + d_x J - 2 m_f sin(th) e^{b phi} psi^dag psi
* ``adjoint``: d_t(psi^dag psi) + d_x J - 2 m_f sin(th) e^{b phi} psibar psi

Substituting the component Dirac equations shows that ``adjoint`` is an
identity while ``paper`` leaves ``4 Re(psi_-^* d_x psi_+)``; the derivation is
in ``docs/continuity_derivation.md``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import dynamics
from .errors import InsufficientSamples
from .fields import FieldState, GridSpec, ModelParams, bilinear, dx_central, number_density, vector_current

VARIANTS = ("paper", "adjoint")
IDENTITY_VARIANT = "adjoint"


def _time_derivatives(state: FieldState, p: ModelParams, spec: GridSpec):
    d = dynamics.rhs(state, p, spec)
    sp = 2.0 * (np.conj(state.psi_plus) * d.d_psi_plus).real
    sm = 2.0 * (np.conj(state.psi_minus) * d.d_psi_minus).real
    return sp - sm, sp + sm  # d_t(psibar psi), d_t(psi^dag psi)


def source_factor(state: FieldState, p: ModelParams) -> np.ndarray:
    return 2.0 * p.m_f * p.sin_theta * np.exp(p.beta * np.real(state.phi))


def continuity_residual(state: FieldState, p: ModelParams, spec: GridSpec, variant: str = IDENTITY_VARIANT) -> np.ndarray:
    """Pointwise residual of one candidate relation; time derivatives are analytic."""
    state.check(spec)
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}, got {variant!r}")
    dt_rho, dt_n = _time_derivatives(state, p, spec)
    div_j = dx_central(vector_current(state), spec)
    src = source_factor(state, p)
    if variant == "paper":
        return dt_rho + div_j - src * number_density(state)
    return dt_n + div_j - src * bilinear(state)


def paper_variant_defect(state: FieldState, spec: GridSpec) -> np.ndarray:
    """Continuum value of the ``paper`` residual: ``4 Re(psi_-^* d_x psi_+)``."""
    return 4.0 * (np.conj(state.psi_minus) * dx_central(state.psi_plus, spec)).real


@dataclass
class GrowthLawReport:
    times: np.ndarray
    measured_slope: np.ndarray
    predicted_slope: np.ndarray
    max_abs_mismatch: float
    mismatch_rel: float
    drift_rel: float

    def block(self) -> str:
        return "\n".join(
            [
                f"growth_law_mismatch_rel = {self.mismatch_rel:.6e}",
                f"growth_law_mismatch_abs = {self.max_abs_mismatch:.6e}",
                f"number_drift_rel = {self.drift_rel:.6e}",
            ]
        )


def growth_law_check(rows: list[dict], p: ModelParams) -> GrowthLawReport:
    """Compare d/dt of the integrated number density with the integrated source.

    The slope is a second-order difference over the observer samples
    (``numpy.gradient``); the prediction is ``2 m_f sin(th) * int e^{b phi} psibar psi``.
    """
    if len(rows) < 3:
        raise InsufficientSamples(f"need at least 3 observer rows, got {len(rows)}")
    t = np.array([r["t"] for r in rows], dtype=float)
    n_tot = np.array([r["n_total"] for r in rows], dtype=float)
    src = np.array([r["e_rho_total"] for r in rows], dtype=float)
    measured = np.gradient(n_tot, t, edge_order=2)
    predicted = 2.0 * p.m_f * p.sin_theta * src
    mismatch = np.abs(measured - predicted)
    scale = float(np.max(np.abs(predicted)))
    return GrowthLawReport(
        times=t,
        measured_slope=measured,
        predicted_slope=predicted,
        max_abs_mismatch=float(np.max(mismatch)),
        mismatch_rel=float(np.max(mismatch) / scale) if scale > 0 else float(np.max(mismatch)),
        drift_rel=float(np.max(np.abs(n_tot - n_tot[0])) / abs(n_tot[0])) if n_tot[0] else 0.0,
    )


def report_block(state: FieldState, p: ModelParams, spec: GridSpec, growth: GrowthLawReport | None = None) -> str:
    lines = [
        "[continuity]",
        f"continuity_paper_residual_Linf = {float(np.max(np.abs(continuity_residual(state, p, spec, 'paper')))):.6e}",
        f"continuity_adjoint_residual_Linf = {float(np.max(np.abs(continuity_residual(state, p, spec, 'adjoint')))):.6e}",
    ]
    if growth is not None:
        lines.append(growth.block())
    return "\n".join(lines)
