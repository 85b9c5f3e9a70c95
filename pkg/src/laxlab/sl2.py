"""Complex 2x2 matrix algebra for sl(2, C).

Matrices are plain ``numpy`` arrays of shape ``(..., 2, 2)`` and complex
dtype, so every routine here works on a single matrix or on a whole grid of
them at once.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import NonTraceless

_GENERATORS = {
    "H": ((1, 0), (0, -1)),
    "E_plus": ((0, 1), (0, 0)),
    "E_minus": ((0, 0), (1, 0)),
}

# eigenvalue-gap threshold (relative to the matrix norm) below which
# mat_exp falls back to the series for sinh(s)/s
_DEGENERATE_GAP = 1e-6


def mat2(a11, a12, a21, a22) -> np.ndarray:
    """Assemble a (grid of) 2x2 complex matrices from entry arrays."""
    a11, a12, a21, a22 = np.broadcast_arrays(
        *(np.asarray(v, dtype=complex) for v in (a11, a12, a21, a22))
    )
    out = np.empty(a11.shape + (2, 2), dtype=complex)
    out[..., 0, 0] = a11
    out[..., 0, 1] = a12
    out[..., 1, 0] = a21
    out[..., 1, 1] = a22
    return out


def generator(name: str) -> np.ndarray:
    try:
        m = np.array(_GENERATORS[name], dtype=complex)
    except KeyError:
        raise ValueError(f"unknown generator {name!r}; expected one of {sorted(_GENERATORS)}") from None
    m.setflags(write=False)
    return m


H = generator("H")
E_PLUS = generator("E_plus")
E_MINUS = generator("E_minus")
IDENTITY = np.eye(2, dtype=complex)
IDENTITY.setflags(write=False)


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def trace(m: np.ndarray):
    return m[..., 0, 0] + m[..., 1, 1]


def det(m: np.ndarray):
    return m[..., 0, 0] * m[..., 1, 1] - m[..., 0, 1] * m[..., 1, 0]


def default_trace_tol(m: np.ndarray) -> float:
    scale = float(np.max(np.abs(m))) if np.size(m) else 0.0
    return 1e-10 * max(scale, 1.0)


@dataclass(frozen=True)
class GradedElement:
    """Coefficients of H, E+ and E- in a traceless 2x2 matrix."""

    h: complex
    ep: complex
    em: complex

    def to_matrix(self) -> np.ndarray:
        return mat2(self.h, self.ep, self.em, -self.h)


def grade_decompose(m: np.ndarray, tol: float | None = None) -> GradedElement:
    """Split a traceless matrix into its H, E+ and E- coefficients.

    Raises NonTraceless when ``|trace(m)|`` exceeds ``tol``; the default
    tolerance is ``1e-10 * max(1, max |entry|)``.
    """
    m = np.asarray(m, dtype=complex)
    if tol is None:
        tol = default_trace_tol(m)
    tr = trace(m)
    if np.any(np.abs(tr) > tol):
        raise NonTraceless(f"trace {np.max(np.abs(tr)):.3e} exceeds tolerance {tol:.3e}")
    if m.ndim == 2:
        return GradedElement(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]))
    return GradedElement(m[..., 0, 0].copy(), m[..., 0, 1].copy(), m[..., 1, 0].copy())


def twisted_involution(theta: float, g: GradedElement) -> GradedElement:
    """Apply H -> H, E+ -> e^{2i theta} E+, E- -> e^{-2i theta} E-."""
    return GradedElement(
        g.h,
        cmath.exp(2j * theta) * g.ep,
        cmath.exp(-2j * theta) * g.em,
    )


def mat_exp(m: np.ndarray) -> np.ndarray:
    """Matrix exponential in closed form.

    Writes ``m = (tr/2) I + N`` with ``N`` traceless, so that ``N**2 = s**2 I``
    with ``s**2 = -det N`` and ``exp(m) = e^{tr/2} (cosh s I + sinh(s)/s N)``.
    When the eigenvalue gap ``2|s|`` is tiny relative to ``|m|`` the ratio
    ``sinh(s)/s`` comes from its Taylor series instead.
    """
    m = np.asarray(m, dtype=complex)
    half_tr = 0.5 * trace(m)
    n = m - half_tr[..., None, None] * IDENTITY
    s = np.sqrt(-det(n))
    norm = np.sqrt(np.sum(np.abs(m) ** 2, axis=(-2, -1)))
    near = np.abs(2 * s) <= _DEGENERATE_GAP * norm
    s2 = s * s
    series = 1 + s2 / 6 * (1 + s2 / 20 * (1 + s2 / 42))
    with np.errstate(invalid="ignore", divide="ignore"):
        direct = np.sinh(s) / np.where(near, 1.0, s)
    sinhc = np.where(near, series, direct)
    out = np.cosh(s)[..., None, None] * IDENTITY + sinhc[..., None, None] * n
    return np.exp(half_tr)[..., None, None] * out
