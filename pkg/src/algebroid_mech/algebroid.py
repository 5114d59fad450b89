"""Skew-symmetric algebroid data model and the operations on it.

An algebroid here is basis-explicit: one chart, one global frame, an anchor
matrix field rho(q) (columns are the anchored frame vectors) and structure
functions C_{ab}^c(q) stored for a < b only, so antisymmetry holds by
construction and is never validated.

When ``adapted`` is set, frame index 0 is dual to the distinguished
cocycle: the frame covector (1, 0, ..., 0) annihilates brackets, i.e.
C_{ab}^0 = 0.  Builders are expected to emit adapted algebroids and
validate that property at construction samples (``validate_adapted``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .calculus import Chart, fd_gradient, fd_jacobian
from .errors import ConstructionError

# Relative singular-value threshold for numeric rank decisions.
RANK_RTOL = 1e-8
# Nested finite differencing in flag_rank amplifies roundoff by 1/h per
# bracket level; 1e-3 keeps the noise floor under RANK_RTOL at depth 4.
FLAG_FD_SCALE = 1e-3


@dataclass(frozen=True)
class ESection:
    """A section of the algebroid: frame components as a function of q."""

    components: Callable[[np.ndarray], np.ndarray]

    def __call__(self, q) -> np.ndarray:
        return np.asarray(self.components(np.asarray(q, dtype=float)), dtype=float)


@dataclass(frozen=True)
class DualSection:
    """A covector field: length-n components for E*, length n-1 for V*.

    ``jacobian`` is optional and analytic, mirroring ScalarField.grad; when
    present it is used instead of finite differences of the components.
    """

    components: Callable[[np.ndarray], np.ndarray]
    space: str = "E*"
    jacobian: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if self.space not in ("E*", "V*"):
            raise ValueError("space must be 'E*' or 'V*'")

    def __call__(self, q) -> np.ndarray:
        return np.asarray(self.components(np.asarray(q, dtype=float)), dtype=float)

    def jac(self, q) -> np.ndarray:
        """(k, m) derivative of the components, analytic when available."""
        q = np.asarray(q, dtype=float)
        if self.jacobian is not None:
            return np.asarray(self.jacobian(q), dtype=float)
        return fd_jacobian(self.components, q)


def constant_section(values) -> ESection:
    v = np.array(values, dtype=float)
    return ESection(components=lambda q: v)


def zero_section(rank: int) -> ESection:
    return constant_section(np.zeros(rank))


@dataclass(frozen=True)
class CheckReport:
    """Structured pass/fail result of a sampled numerical check."""

    name: str
    max_violation: float
    tol: float
    samples: int
    seed: int
    witnesses: tuple = ()

    @property
    def passed(self) -> bool:
        return self.max_violation <= self.tol

    def to_json_dict(self) -> dict:
        return {
            "name": self.name,
            "max_violation": self.max_violation,
            "tol": self.tol,
            "samples": self.samples,
            "seed": self.seed,
            "pass": self.passed,
            "witnesses": [
                {"q": list(map(float, q)), "value": float(v)} for q, v in self.witnesses
            ],
        }


class SkewAlgebroid:
    """Anchor + structure functions over one chart.

    Parameters
    ----------
    chart : Chart
    rank : int
        Fiber rank n.
    anchor : callable q -> (m, n) array
        Columns are the anchored frame fields rho(e_a).
    structure : dict {(a, b): callable q -> (n,) array} with a < b
        Components of the frame brackets [[e_a, e_b]]; missing pairs are
        zero.  Antisymmetry is definitional.
    adapted : bool
        Frame index 0 is dual to the cocycle (C_{ab}^0 = 0).
    """

    def __init__(self, chart: Chart, rank: int, anchor, structure=None, adapted=False):
        if rank < 1:
            raise ValueError("rank must be >= 1")
        structure = dict(structure or {})
        for (a, b) in structure:
            if not (0 <= a < b < rank):
                raise ValueError(f"structure pair {(a, b)} must satisfy 0 <= a < b < rank")
        self.chart = chart
        self.rank = int(rank)
        self._anchor = anchor
        self._structure = structure
        self.adapted = bool(adapted)

    def anchor_at(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        rho = np.asarray(self._anchor(q), dtype=float)
        if rho.shape != (self.chart.dim, self.rank):
            raise ValueError(
                f"anchor must return shape {(self.chart.dim, self.rank)}, got {rho.shape}"
            )
        return rho

    def structure_pairs(self):
        """Sorted (a, b) -> component-function items (a < b only)."""
        return sorted(self._structure.items())

    def structure_pair_at(self, a: int, b: int, q) -> np.ndarray:
        """C_{ab}^.(q) for a < b; zeros when the pair is absent."""
        fn = self._structure.get((a, b))
        if fn is None:
            return np.zeros(self.rank)
        return np.asarray(fn(np.asarray(q, dtype=float)), dtype=float)

    def structure_at(self, q) -> np.ndarray:
        """Dense (n, n, n) tensor C[a, b, :], antisymmetrized from pairs."""
        C = np.zeros((self.rank, self.rank, self.rank))
        q = np.asarray(q, dtype=float)
        for (a, b), fn in self._structure.items():
            v = np.asarray(fn(q), dtype=float)
            C[a, b, :] = v
            C[b, a, :] = -v
        return C

    def basis_section(self, a: int) -> ESection:
        e = np.zeros(self.rank)
        e[a] = 1.0
        return constant_section(e)

    def validate_adapted(self, points, tol: float = 1e-9):
        """Check C_{ab}^0 = 0 at the given sample points (adapted frames)."""
        worst = 0.0
        for q in points:
            for (a, b), fn in self._structure.items():
                v = abs(float(np.asarray(fn(np.asarray(q, dtype=float)))[0]))
                worst = max(worst, v)
        if worst > tol:
            raise ConstructionError(
                f"frame not adapted to the cocycle: |C_ab^0| = {worst:g} > {tol:g}"
            )
        return worst


def tangent_algebroid(chart: Chart, adapted: bool = False) -> SkewAlgebroid:
    """The tangent bundle of the chart: identity anchor, zero bracket.

    With ``adapted=True`` the first coordinate direction is declared dual
    to the cocycle (used for fibrations over time).
    """
    eye = np.eye(chart.dim)
    return SkewAlgebroid(
        chart=chart, rank=chart.dim, anchor=lambda q: eye, structure={}, adapted=adapted
    )


def anchor_apply(A: SkewAlgebroid, sigma: ESection, q) -> np.ndarray:
    """rho(sigma) at q: the tangent vector rho(q) @ sigma(q)."""
    q = np.asarray(q, dtype=float)
    return A.anchor_at(q) @ sigma(q)


def _directional(A: SkewAlgebroid, f, vec: np.ndarray, q: np.ndarray) -> float:
    """Derivative of the scalar function f along the tangent vector vec."""
    return float(fd_gradient(f, q) @ vec)


def bracket(A: SkewAlgebroid, sigma: ESection, gamma: ESection) -> ESection:
    """The bracket [[sigma, gamma]] as a section.

    Componentwise: C_{ab}^c sigma^a gamma^b + rho(sigma)(gamma^c)
    - rho(gamma)(sigma^c).  The pair terms are evaluated so that swapping
    the arguments negates the result exactly in floating point.
    """

    def comps(q):
        q = np.asarray(q, dtype=float)
        sv = sigma(q)
        gv = gamma(q)
        out = np.zeros(A.rank)
        for (a, b), fn in A.structure_pairs():
            coeff = sv[a] * gv[b] - sv[b] * gv[a]
            if coeff != 0.0:
                out = out + np.asarray(fn(q), dtype=float) * coeff
        rho = A.anchor_at(q)
        vs = rho @ sv
        vg = rho @ gv
        out = out + (fd_jacobian(gamma.components, q) @ vs - fd_jacobian(sigma.components, q) @ vg)
        return out

    return ESection(components=comps)


def d_function(A: SkewAlgebroid, f) -> DualSection:
    """Almost differential of a function: (d f)(e_a) = rho(e_a)(f)."""

    def comps(q):
        q = np.asarray(q, dtype=float)
        return A.anchor_at(q).T @ fd_gradient(f, q)

    return DualSection(components=comps, space="E*")


def d_oneform_eval(A: SkewAlgebroid, alpha: DualSection, sigma: ESection, gamma: ESection, q) -> float:
    """Almost differential of a one-form, evaluated on a pair of sections:

        d alpha (sigma, gamma) = rho(sigma)(alpha(gamma))
                                 - rho(gamma)(alpha(sigma))
                                 - alpha([[sigma, gamma]]).

    Antisymmetric in (sigma, gamma) exactly, by the evaluation order used.
    """
    q = np.asarray(q, dtype=float)
    rho = A.anchor_at(q)
    vs = rho @ sigma(q)
    vg = rho @ gamma(q)

    def a_of_gamma(qq):
        return float(alpha(qq) @ gamma(qq))

    def a_of_sigma(qq):
        return float(alpha(qq) @ sigma(qq))

    t1 = _directional(A, a_of_gamma, vs, q)
    t2 = _directional(A, a_of_sigma, vg, q)
    t3 = float(alpha(q) @ bracket(A, sigma, gamma)(q))
    return (t1 - t2) - t3


def sample_box(box, samples: int, seed: int) -> np.ndarray:
    """Seeded uniform samples in a coordinate box [(lo, hi), ...] -> (N, m)."""
    box = [(float(lo), float(hi)) for lo, hi in box]
    if not box:
        raise ValueError("sampling box must be non-empty")
    for lo, hi in box:
        if not hi > lo:
            raise ValueError("box bounds must satisfy lo < hi")
    rng = np.random.default_rng(seed)
    lo = np.array([b[0] for b in box])
    hi = np.array([b[1] for b in box])
    return lo + (hi - lo) * rng.random((samples, len(box)))


def check_cocycle(
    A: SkewAlgebroid,
    phi: DualSection,
    box,
    samples: int = 128,
    seed: int = 42,
    tol: float = 1e-9,
) -> CheckReport:
    """Max of |d phi (e_a, e_b)| over seeded samples and all frame pairs."""
    pts = sample_box(box, samples, seed)
    basis = [A.basis_section(a) for a in range(A.rank)]
    worst = []
    for q in pts:
        v = 0.0
        for a in range(A.rank):
            for b in range(a + 1, A.rank):
                v = max(v, abs(d_oneform_eval(A, phi, basis[a], basis[b], q)))
        worst.append((q, v))
    worst.sort(key=lambda t: -t[1])
    max_violation = worst[0][1] if worst else 0.0
    return CheckReport(
        name="cocycle",
        max_violation=float(max_violation),
        tol=float(tol),
        samples=samples,
        seed=seed,
        witnesses=tuple((q, v) for q, v in worst[:5]),
    )


def _svd_rank(M: np.ndarray) -> int:
    if M.size == 0:
        return 0
    s = np.linalg.svd(M, compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > RANK_RTOL * s[0]))


def flag_rank(A: SkewAlgebroid, q, max_depth: int) -> list:
    """Ranks of the bracket-generated flag of the anchor distribution at q.

    Depth 1 spans the anchor columns; each further depth adds numerically
    evaluated Lie brackets of the generators with the previous level.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    q = np.asarray(q, dtype=float)
    m = A.chart.dim

    def column_field(a):
        return lambda qq: A.anchor_at(qq)[:, a]

    generators = [column_field(a) for a in range(A.rank)]

    def lie(f, g):
        def field(qq):
            qq = np.asarray(qq, dtype=float)
            Jf = fd_jacobian(f, qq, h=FLAG_FD_SCALE * np.maximum(1.0, np.abs(qq)))
            Jg = fd_jacobian(g, qq, h=FLAG_FD_SCALE * np.maximum(1.0, np.abs(qq)))
            return Jg @ f(qq) - Jf @ g(qq)

        return field

    ranks = []
    level = list(generators)
    all_fields = list(generators)
    for depth in range(1, max_depth + 1):
        M = np.column_stack([f(q) for f in all_fields]) if all_fields else np.zeros((m, 0))
        ranks.append(_svd_rank(M))
        if depth == max_depth or ranks[-1] >= m:
            # pad once full rank is reached; deeper levels cannot shrink
            ranks.extend([ranks[-1]] * (max_depth - depth))
            break
        new_level = [lie(f, g) for f in generators for g in level]
        # cap combinatorial growth; enough for desk-scale examples
        if len(all_fields) + len(new_level) > 256:
            new_level = new_level[: max(0, 256 - len(all_fields))]
        all_fields.extend(new_level)
        level = new_level
    return ranks


def v_restriction(A: SkewAlgebroid) -> SkewAlgebroid:
    """The rank n-1 algebroid on the cocycle kernel (frame indices 1..n-1).

    Requires an adapted frame, which guarantees the kernel is closed under
    the bracket.
    """
    if not A.adapted:
        raise ValueError("v_restriction requires an adapted algebroid")
    n = A.rank

    def anchor(q):
        return A.anchor_at(q)[:, 1:]

    structure = {}
    for (a, b), fn in A.structure_pairs():
        if a == 0:
            continue
        structure[(a - 1, b - 1)] = (lambda f: (lambda q: np.asarray(f(q), dtype=float)[1:]))(fn)
    return SkewAlgebroid(chart=A.chart, rank=n - 1, anchor=anchor, structure=structure, adapted=False)
