"""Independent reference implementations used by the tests.

None of these import the code under test except for plain data containers.
"""

from __future__ import annotations

import math

import numpy as np
import sympy as sp


# ---------------------------------------------------------------- 2x2 algebra


def taylor_expm(m: np.ndarray, terms: int = 30) -> np.ndarray:
    out = np.eye(2, dtype=complex)
    term = np.eye(2, dtype=complex)
    for k in range(1, terms):
        term = term @ m / k
        out = out + term
    return out


def entrywise_commutator(a, b):
    (a11, a12), (a21, a22) = a
    (b11, b12), (b21, b22) = b
    ab = [[a11 * b11 + a12 * b21, a11 * b12 + a12 * b22], [a21 * b11 + a22 * b21, a21 * b12 + a22 * b22]]
    ba = [[b11 * a11 + b12 * a21, b11 * a12 + b12 * a22], [b21 * a11 + b22 * a21, b21 * a12 + b22 * a22]]
    return np.array([[ab[i][j] - ba[i][j] for j in range(2)] for i in range(2)])


# ---------------------------------------------------------------- Dirac / sinh-Gordon endpoint


GAMMA0 = np.array([[1, 0], [0, -1]], dtype=complex)
GAMMA1 = np.array([[0, 1], [-1, 0]], dtype=complex)


def dsg_rhs(phi, phi_t, psi_p, psi_m, dx, m_s, m_f, beta, g):
    """Undeformed Dirac/sinh-Gordon in covariant form.

    (i g^mu d_mu - m e^{beta phi}) psi = 0 with g0 = sigma_3, g1 = i sigma_2,
    phi_tt = phi_xx - (m_s^2/beta) sinh(beta phi) + g psi^dag g0 psi.
    """
    psi = np.stack([psi_p, psi_m])
    dpsi = (np.roll(psi, -1, axis=1) - np.roll(psi, 1, axis=1)) / (2 * dx)
    mass = m_f * np.exp(beta * phi)
    # i g0 psi_t = m psi - i g1 psi_x  =>  psi_t = -i g0 m psi - g0 g1 psi_x
    psi_t = -1j * mass * (GAMMA0 @ psi) - (GAMMA0 @ GAMMA1) @ dpsi
    bil = np.real(np.einsum("ix,ij,jx->x", psi.conj(), GAMMA0, psi))
    lap = (np.roll(phi, -1) - 2 * phi + np.roll(phi, 1)) / dx**2
    phi_tt = lap - (m_s**2 / beta) * np.sinh(beta * phi) + g * bil
    return phi_t, phi_tt, psi_t[0], psi_t[1]


# ---------------------------------------------------------------- AKNS recursion in sympy


def sympy_akns(n_max: int, lam, mu, beta, theta):
    """Recursion with E = e^{beta phi} treated as a symbol and d_+ as a total derivative.

    Returns (symbols, list of rho_n as sympy expressions).
    """
    order = n_max + 1
    E = sp.Symbol("E")
    u = sp.symbols(f"u1:{order + 2}")

    def dplus(expr):
        out = sp.diff(expr, E) * beta * u[0] * E
        for k in range(order):
            out += sp.diff(expr, u[k]) * u[k + 1]
        return sp.expand(out)

    kappa = lam * sp.exp(sp.I * theta / 2)
    R = mu * sp.exp(-sp.I * theta / 2) * E
    r = [sp.expand(R / (2 * kappa))]
    for n in range(1, n_max):
        quad = sum((r[k - 1] * r[n - k - 1] for k in range(1, n)), sp.Integer(0))
        r.append(sp.expand(-(dplus(r[n - 1]) + kappa * quad) / (2 * kappa)))
    return (E, u), [sp.expand(kappa * rn) for rn in r]


def sympy_terms(expr, E, u) -> dict:
    """{(q, ((k, a), ...)): complex coefficient} from a polynomial in E and u_k."""
    poly = sp.Poly(expr, E, *u)
    out = {}
    for monom, coeff in poly.terms():
        q = monom[0]
        powers = tuple((k + 1, a) for k, a in enumerate(monom[1:]) if a)
        out[(q, powers)] = complex(sp.N(coeff, 30))
    return out


# ---------------------------------------------------------------- continuity by substitution


def continuity_oracle():
    """Substitute the component Dirac equations into both candidate relations.

    Spinor values and their x-derivatives are independent real symbols, so the
    product rule is applied by hand. Returns the simplified residuals
    (adjoint, paper - 4 Re(psi_-^* psi_+,x)); both are expected to be 0.
    """
    m, th, q = sp.symbols("m theta q", positive=True)
    a, b, c, d, ax, bx, cx, dx = sp.symbols("a b c d a_x b_x c_x d_x", real=True)
    pp, pm = a + sp.I * b, c + sp.I * d
    pp_x, pm_x = ax + sp.I * bx, cx + sp.I * dx
    conj = sp.conjugate
    M = m * sp.exp(sp.I * th) * q
    pp_t = -sp.I * M * pp - pm_x
    pm_t = sp.I * M * pm - pp_x

    def dt_abs2(z, z_t):
        return z_t * conj(z) + z * conj(z_t)

    dt_n = dt_abs2(pp, pp_t) + dt_abs2(pm, pm_t)
    dt_rho = dt_abs2(pp, pp_t) - dt_abs2(pm, pm_t)
    dx_j = conj(pp_x) * pm + conj(pp) * pm_x + conj(pm_x) * pp + conj(pm) * pp_x
    n = conj(pp) * pp + conj(pm) * pm
    rho = conj(pp) * pp - conj(pm) * pm
    src = 2 * m * sp.sin(th) * q
    adjoint = dt_n + dx_j - src * rho
    paper = dt_rho + dx_j - src * n
    defect = 4 * sp.re(conj(pm) * pp_x)

    def simp(e):
        return sp.simplify(sp.expand(sp.expand_complex(e)))

    return simp(adjoint), simp(paper - defect)


# ---------------------------------------------------------------- misc


def fit_order(hs, errs) -> float:
    """Least-squares slope of log(err) against log(h)."""
    return float(np.polyfit(np.log(hs), np.log(errs), 1)[0])


def period(m_s: float) -> float:
    return 2 * math.pi / m_s
