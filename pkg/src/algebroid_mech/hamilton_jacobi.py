"""Hamilton-Jacobi residuals, lift verification and the riemannian
auto-parallel residual.

The central equivalence being exercised: a section alpha of the reduced
dual has zero residual exactly when composing it with integral curves of
the projected field on the base yields integral curves of the hamiltonian
field.  The residual is computed as

    residual_a(q) = (transport of alpha_a along the projected field)
                    - (momentum equation RHS at p = alpha(q)),

so the lift property itself, not transcription of index conventions,
fixes the signs; ``verify_lift`` checks the equivalence directly.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
import numpy as np

from .algebroid import DualSection, ESection, d_oneform_eval, v_restriction
from .calculus import Curve, fd_gradient, fd_jacobian, integrate_rk4
from .errors import DomainError
from .hamilton import HamiltonianSystem, _pdot_rhs, integrate_hamilton, projected_field
from .util import parallel_map

GRID_POINT_CAP = 100_000


@dataclass(frozen=True)
class HJReport:
    """Residuals of a section over a coordinate grid."""

    residual_grid: tuple  # ((q, residual vector), ...)
    max_norm: float
    tol: float
    box: tuple
    resolution: tuple

    @property
    def passed(self) -> bool:
        return self.max_norm <= self.tol

    def to_json_dict(self) -> dict:
        worst = sorted(self.residual_grid, key=lambda t: -float(np.max(np.abs(t[1]))))[:5]
        return {
            "max_norm": self.max_norm,
            "tol": self.tol,
            "pass": self.passed,
            "grid": {
                "box": [[float(lo), float(hi)] for lo, hi in self.box],
                "resolution": list(self.resolution),
                "points": len(self.residual_grid),
            },
            "worst": [
                {"q": list(map(float, q)), "residual": list(map(float, r))} for q, r in worst
            ],
        }


@dataclass(frozen=True)
class LiftReport:
    """Comparison of the lifted base curve against the hamiltonian flow."""

    base_curve: Curve
    lifted_curve: Curve
    hamilton_curve: Curve
    max_deviation: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation <= self.tol

    def to_json_dict(self) -> dict:
        dev = np.max(np.abs(self.lifted_curve.points - self.hamilton_curve.points), axis=1)
        order = np.argsort(-dev)[:5]
        return {
            "max_deviation": self.max_deviation,
            "tol": self.tol,
            "pass": self.passed,
            "times": {
                "t0": float(self.base_curve.times[0]),
                "t1": float(self.base_curve.times[-1]),
                "samples": len(self.base_curve),
            },
            "worst": [
                {"t": float(self.lifted_curve.times[i]), "deviation": float(dev[i])}
                for i in sorted(order)
            ],
        }


def zeta_eval(sys: HamiltonianSystem, alpha: DualSection, q) -> np.ndarray:
    """The characteristic section evaluated at q: component 0 is exactly 1,
    component a is (dH/dp_a)(q, alpha(q))."""
    q = np.asarray(q, dtype=float)
    _, dHp = sys.h_partials(q, alpha(q))
    out = np.empty(sys.algebroid.rank)
    out[0] = 1.0
    out[1:] = dHp
    return out


def zeta_section(sys: HamiltonianSystem, alpha: DualSection) -> ESection:
    return ESection(components=lambda q: zeta_eval(sys, alpha, q))


def hj_residual(sys: HamiltonianSystem, alpha: DualSection, q) -> np.ndarray:
    """Hamilton-Jacobi residual of a reduced-dual section at q.

    Zero for all q in a neighborhood exactly when alpha lifts integral
    curves of the projected field to solutions of the Hamilton equations.
    """
    if alpha.space != "V*":
        raise ValueError("hj_residual expects a reduced-dual section (space 'V*')")
    q = np.asarray(q, dtype=float)
    p = alpha(q)
    R = projected_field(sys, alpha, q)
    J = alpha.jac(q)  # (n-1, m)
    return J @ R - _pdot_rhs(sys, q, p)


def hj_residual_dual(sys: HamiltonianSystem, beta: DualSection, q) -> np.ndarray:
    """Hamilton-Jacobi residual for a full-dual section beta:

        component a = d beta (zeta, e_a) + rho_a^i d(F o beta)/dq^i,

    where (F o beta)(q) = beta_0(q) + H(q, beta_1..beta_{n-1}(q)).
    """
    q = np.asarray(q, dtype=float)
    if beta.space != "E*":
        raise ValueError("hj_residual_dual expects a full-dual section")
    A = sys.algebroid
    n = A.rank

    def mu_beta(qq):
        return beta(qq)[1:]

    mu = DualSection(components=mu_beta, space="V*")
    zeta = zeta_section(sys, mu)

    def f_of_beta(qq):
        b = beta(qq)
        return float(b[0]) + sys.h_value(qq, b[1:])

    grad_f = fd_gradient(f_of_beta, q)
    rho = A.anchor_at(q)
    out = np.empty(n - 1)
    for a in range(1, n):
        out[a - 1] = d_oneform_eval(A, beta, zeta, A.basis_section(a), q) + float(
            rho[:, a] @ grad_f
        )
    return out


def hj_forced_residual(sys: HamiltonianSystem, F, alpha: DualSection, q) -> np.ndarray:
    """Hamilton-Jacobi residual in the forced form, on the base algebroid of
    a force extension:

        component a = d alpha (zeta_H, e_a) + rho_a^i d(H o alpha)/dq^i
                      + F_a^b alpha_b.

    Algebraically identical to ``hj_residual`` on the extended system; kept
    as an independent evaluation path.
    """
    q = np.asarray(q, dtype=float)
    base = v_restriction(sys.algebroid)

    def zeta_base(qq):
        _, dHp = sys.h_partials(qq, alpha(qq))
        return dHp

    zeta = ESection(components=zeta_base)

    def h_of_alpha(qq):
        return sys.h_value(qq, alpha(qq))

    grad_h = fd_gradient(h_of_alpha, q)
    rho = base.anchor_at(q)
    av = alpha(q)
    Fq = F.at(q) if hasattr(F, "at") else np.asarray(F(q), dtype=float)
    beta_view = DualSection(components=alpha.components, space="E*", jacobian=alpha.jacobian)
    out = np.empty(base.rank)
    for a in range(base.rank):
        out[a] = (
            d_oneform_eval(base, beta_view, zeta, base.basis_section(a), q)
            + float(rho[:, a] @ grad_h)
            + float(Fq[a, :] @ av)
        )
    return out


def grid_points(box, resolution) -> tuple:
    """Inclusive cartesian grid over the box; resolution per axis."""
    box = [(float(lo), float(hi)) for lo, hi in box]
    if isinstance(resolution, int):
        resolution = [resolution] * len(box)
    resolution = [int(r) for r in resolution]
    if len(resolution) != len(box):
        raise ValueError("resolution must match the box dimension")
    if any(r < 2 for r in resolution):
        raise ValueError("resolution must be >= 2 per axis")
    total = int(np.prod(resolution))
    if total > GRID_POINT_CAP:
        raise ValueError(f"grid of {total} points exceeds the cap {GRID_POINT_CAP}")
    axes = [np.linspace(lo, hi, r) for (lo, hi), r in zip(box, resolution)]
    pts = [np.array(p) for p in itertools.product(*axes)]
    return tuple(box), tuple(resolution), pts


def hj_grid_check(
    sys: HamiltonianSystem,
    alpha: DualSection,
    box,
    resolution=11,
    tol: float = 1e-9,
) -> HJReport:
    """Evaluate the HJ residual over a grid and report the max norm."""
    box, resolution, pts = grid_points(box, resolution)
    residuals = parallel_map(lambda q: hj_residual(sys, alpha, q), pts)
    grid = tuple(zip(pts, residuals))
    max_norm = max((float(np.max(np.abs(r))) for r in residuals), default=0.0)
    return HJReport(residual_grid=grid, max_norm=max_norm, tol=float(tol), box=box, resolution=resolution)


def verify_lift(
    sys: HamiltonianSystem,
    alpha: DualSection,
    q0,
    t0: float,
    t1: float,
    dt: float,
    tol: float = 1e-6,
) -> LiftReport:
    """Integrate the base curve under the projected field, lift it through
    alpha, and compare with the hamiltonian flow started at alpha(q0)."""
    q0 = np.asarray(q0, dtype=float)
    base = integrate_rk4(lambda t, q: projected_field(sys, alpha, q), q0, t0, t1, dt)
    lifted_pts = np.array([np.concatenate([qq, alpha(qq)]) for qq in base.points])
    lifted = Curve(times=base.times, points=lifted_pts)
    ham = integrate_hamilton(sys, lifted_pts[0], t0, t1, dt)
    dev = float(np.max(np.abs(lifted.points - ham.points)))
    return LiftReport(
        base_curve=base,
        lifted_curve=lifted,
        hamilton_curve=ham,
        max_deviation=dev,
        tol=float(tol),
    )


def christoffel_at(G, q) -> np.ndarray:
    """Christoffel symbols Gamma[k, i, j] of the Levi-Civita connection of a
    riemannian metric, by finite differences of the metric matrix."""
    q = np.asarray(q, dtype=float)
    mat = G.at if hasattr(G, "at") else (lambda qq: np.asarray(G(qq), dtype=float))
    g = mat(q)
    m = g.shape[0]
    try:
        np.linalg.cholesky(g)
    except np.linalg.LinAlgError:
        raise DomainError(f"metric not positive-definite at q={q!r}")
    dg = fd_jacobian(lambda qq: mat(qq).ravel(), q).reshape(m, m, m)  # dg[i, j, k] = d_k g_ij
    # Gamma^k_ij = (1/2) g^{kl} (d_i g_lj + d_j g_li - d_l g_ij)
    rhs = 0.5 * (
        np.einsum("lji->lij", dg) + np.einsum("lij->lij", dg) - np.einsum("ijl->lij", dg)
    )
    return np.linalg.solve(g, rhs.reshape(m, -1)).reshape(m, m, m)


def autoparallel_residual(G, X, q) -> np.ndarray:
    """Residual of the auto-parallel condition for a vector field X:

        residual^k = X^i d_i X^k + Gamma^k_ij X^i X^j.

    Zero exactly when the integral curves of X are geodesics of G.
    """
    q = np.asarray(q, dtype=float)
    fn = X.components if isinstance(X, ESection) else X
    Xq = np.asarray(fn(q), dtype=float)
    JX = fd_jacobian(fn, q)
    Gamma = christoffel_at(G, q)
    return JX @ Xq + np.einsum("kij,i,j->k", Gamma, Xq, Xq)
