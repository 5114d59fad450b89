"""Linear almost-Poisson bracket on the dual, Hamilton equations, the
dissipative term and the projected vector field on the base.

Coordinate layout on the dual of a rank-n algebroid over an m-dim chart:
x_full = (q^1..q^m, p_0, p_1, ..., p_{n-1}).  For adapted algebroids p_0
is the fiber coordinate dual to the cocycle direction and the reduced
phase space (q, p_1..p_{n-1}) carries the dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .algebroid import DualSection, SkewAlgebroid
from .calculus import Curve, ScalarField, as_scalar_field, fd_gradient, integrate_rk4


@dataclass(frozen=True)
class PhasePoint:
    """A point of the reduced phase space, optionally with the p_0 slot."""

    q: np.ndarray
    p: np.ndarray
    p0: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "q", np.asarray(self.q, dtype=float))
        object.__setattr__(self, "p", np.asarray(self.p, dtype=float))

    def full_coords(self) -> np.ndarray:
        """(q, p0, p) concatenated; requires p0."""
        if self.p0 is None:
            raise ValueError("phase point has no p0 component")
        return np.concatenate([self.q, [float(self.p0)], self.p])

    def reduced_coords(self) -> np.ndarray:
        return np.concatenate([self.q, self.p])


@dataclass(frozen=True)
class HamiltonianSystem:
    """An adapted algebroid plus a Hamiltonian H(q, p_1..p_{n-1}).

    ``H`` is a ScalarField over the concatenated (q, p) coordinates of the
    reduced phase space.
    """

    algebroid: SkewAlgebroid
    H: ScalarField
    name: str = "system"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.algebroid.adapted:
            raise ValueError("HamiltonianSystem requires an adapted algebroid")
        object.__setattr__(self, "H", as_scalar_field(self.H))

    @property
    def chart(self):
        return self.algebroid.chart

    @property
    def n_momenta(self) -> int:
        return self.algebroid.rank - 1

    def split_state(self, x: np.ndarray):
        m = self.chart.dim
        x = np.asarray(x, dtype=float)
        return x[:m], x[m:]

    def phase_point(self, x) -> PhasePoint:
        if isinstance(x, PhasePoint):
            return x
        q, p = self.split_state(x)
        if len(p) != self.n_momenta:
            raise ValueError("state length does not match the system")
        return PhasePoint(q=q, p=p)

    def h_value(self, q, p) -> float:
        return self.H(np.concatenate([np.asarray(q, dtype=float), np.asarray(p, dtype=float)]))

    def h_partials(self, q, p):
        """(dH/dq, dH/dp) at (q, p), analytic when H carries a gradient."""
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        g = fd_gradient(self.H, np.concatenate([q, p]))
        return g[: len(q)], g[len(q):]


def f_h_eval(sys: HamiltonianSystem, x: PhasePoint) -> float:
    """The fiberwise-affine function representing the hamiltonian section:
    F(q, p0, p) = p0 + H(q, p)."""
    if x.p0 is None:
        raise ValueError("f_h_eval needs a phase point with p0")
    return float(x.p0) + sys.h_value(x.q, x.p)


def poisson_bracket_eval(A: SkewAlgebroid, F, G, x) -> float:
    """Linear almost-Poisson bracket {F, G} on the full dual of A.

    F and G are scalar fields of the full dual coordinates
    (q, p_0..p_{rank-1}); x is a PhasePoint with p0 (adapted layout) or a
    raw coordinate vector of length m + rank.  The bivector is

        rho_a^i  d/dq^i ^ d/dp_a  -  (1/2) C_{ab}^c p_c  d/dp_a ^ d/dp_b,

    which for adapted frames splits into the p_0 / reduced parts.
    """
    if isinstance(x, PhasePoint):
        xf = x.full_coords()
    else:
        xf = np.asarray(x, dtype=float)
    m = A.chart.dim
    if len(xf) != m + A.rank:
        raise ValueError("phase coordinates do not match the algebroid")
    q = xf[:m]
    p = xf[m:]
    gF = fd_gradient(as_scalar_field(F), xf)
    gG = fd_gradient(as_scalar_field(G), xf)
    dFq, dFp = gF[:m], gF[m:]
    dGq, dGp = gG[:m], gG[m:]
    rho = A.anchor_at(q)
    val = float(dFq @ rho @ dGp - dGq @ rho @ dFp)
    for (a, b), fn in A.structure_pairs():
        pc = float(np.asarray(fn(q), dtype=float) @ p)
        if pc != 0.0:
            val -= pc * (dFp[a] * dGp[b] - dFp[b] * dGp[a])
    return val


def _pdot_rhs(sys: HamiltonianSystem, q, p, dHq=None, dHp=None) -> np.ndarray:
    """Right-hand side of the momentum equations at (q, p):

        dp_b/dt = -rho_b^i dH/dq^i + (C_{0b}^c + C_{ab}^c dH/dp_a) p_c
    """
    A = sys.algebroid
    if dHq is None or dHp is None:
        dHq, dHp = sys.h_partials(q, p)
    rho = A.anchor_at(q)
    C = A.structure_at(q)
    n = A.rank
    # weights w_alpha against the full frame: w_0 = 1, w_a = dH/dp_a
    w = np.empty(n)
    w[0] = 1.0
    w[1:] = dHp
    # (C_{alpha b}^c) contracted with w_alpha and p_c, for b, c >= 1
    coeff = np.einsum("abc,a->bc", C[:, 1:, 1:], w)
    return -(rho[:, 1:].T @ dHq) + coeff @ p


def hamilton_rhs(sys: HamiltonianSystem, t: float, x) -> np.ndarray:
    """Rates (dq/dt, dp/dt) of the Hamilton equations at the state x.

    Explicit time enters only through chart coordinates, so t is unused
    here; it is kept for integrator compatibility.
    """
    pt = sys.phase_point(x)
    dHq, dHp = sys.h_partials(pt.q, pt.p)
    rho = sys.algebroid.anchor_at(pt.q)
    qdot = rho[:, 0] + rho[:, 1:] @ dHp
    pdot = _pdot_rhs(sys, pt.q, pt.p, dHq, dHp)
    return np.concatenate([qdot, pdot])


def integrate_hamilton(sys: HamiltonianSystem, x0, t0: float, t1: float, dt: float) -> Curve:
    """Integrate the Hamilton equations with RK4; states are (q, p) rows."""
    pt = sys.phase_point(x0) if not isinstance(x0, PhasePoint) else x0
    state0 = pt.reduced_coords()
    return integrate_rk4(lambda t, x: hamilton_rhs(sys, t, x), state0, t0, t1, dt)


def dissipation_rate(sys: HamiltonianSystem, x) -> float:
    """Rate of change of H along the flow:

        {H, F} = rho_0^i dH/dq^i + C_{0b}^c p_c dH/dp_b.

    Vanishes when the cocycle direction is anchored to zero and does not
    bracket into the kernel (conservative case).
    """
    pt = sys.phase_point(x)
    dHq, dHp = sys.h_partials(pt.q, pt.p)
    A = sys.algebroid
    rho = A.anchor_at(pt.q)
    val = float(rho[:, 0] @ dHq)
    for (a, b), fn in A.structure_pairs():
        if a != 0:
            continue
        pc = float(np.asarray(fn(pt.q), dtype=float)[1:] @ pt.p)
        val += pc * dHp[b - 1]
    return val


def projected_field(sys: HamiltonianSystem, alpha: DualSection, q) -> np.ndarray:
    """The vector field on the base obtained by composing the hamiltonian
    flow direction with the section alpha:

        (R^alpha)^i = rho_0^i + rho_a^i (dH/dp_a)(q, alpha(q)).
    """
    q = np.asarray(q, dtype=float)
    p = alpha(q)
    _, dHp = sys.h_partials(q, p)
    rho = sys.algebroid.anchor_at(q)
    return rho[:, 0] + rho[:, 1:] @ dHp
