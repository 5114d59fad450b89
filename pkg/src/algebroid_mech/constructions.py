"""Builders that produce skew-symmetric algebroids with a cocycle, plus the
hamiltonian-morphism checker.

Three constructions are provided:

* ``force_extension`` -- extend a rank n-1 algebroid by a trivial line with
  brackets twisted by a bundle homomorphism (linear external forces);
* ``projector_restriction`` -- restrict a Lie algebroid to a subbundle via
  a projector (linear nonholonomic constraints);
* ``affine_constraints`` -- the affine-constraint setup: a drift section
  X0, a constrained subbundle U and a bundle metric produce an adapted
  rank |U|+1 system with kinetic-plus-potential Hamiltonian.

Structure functions of the restricted/affine algebroids are evaluated
lazily per point (bracket then project) with a small cache keyed by
quantized coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .algebroid import CheckReport, ESection, SkewAlgebroid, sample_box, v_restriction
from .calculus import ScalarField, as_scalar_field, fd_gradient, fd_jacobian
from .errors import ConstructionError
from .hamilton import HamiltonianSystem, poisson_bracket_eval

_CACHE_QUANTUM = 1e-9
_CACHE_LIMIT = 200_000


class _PointCache:
    """Per-point memoization keyed by coordinates quantized to 1e-9.

    Only cached *values* are ever consumed downstream (never differentiated
    through the cache), so the quantization does not pollute derivatives.
    Concurrent readers are safe under the GIL; insertion is last-writer-wins.
    """

    def __init__(self, fn):
        self.fn = fn
        self.data = {}

    def __call__(self, q):
        q = np.asarray(q, dtype=float)
        key = tuple(np.round(q / _CACHE_QUANTUM).astype(np.int64).tolist())
        hit = self.data.get(key)
        if hit is None:
            if len(self.data) > _CACHE_LIMIT:
                self.data.clear()
            hit = self.fn(q)
            self.data[key] = hit
        return hit


@dataclass(frozen=True)
class Homomorphism:
    """A fiberwise linear map of the algebroid, F(e_a) = coeff[a, b] e_b."""

    coeff: Callable[[np.ndarray], np.ndarray]

    def at(self, q) -> np.ndarray:
        return np.asarray(self.coeff(np.asarray(q, dtype=float)), dtype=float)

    @staticmethod
    def constant(matrix) -> "Homomorphism":
        M = np.array(matrix, dtype=float)
        return Homomorphism(coeff=lambda q: M)

    @staticmethod
    def scalar(k: float, rank: int) -> "Homomorphism":
        return Homomorphism.constant(float(k) * np.eye(rank))

    @staticmethod
    def zero(rank: int) -> "Homomorphism":
        return Homomorphism.constant(np.zeros((rank, rank)))


@dataclass(frozen=True)
class MetricField:
    """A bundle metric: symmetric positive-definite fiber matrix per point."""

    matrix: Callable[[np.ndarray], np.ndarray]

    def at(self, q) -> np.ndarray:
        return np.asarray(self.matrix(np.asarray(q, dtype=float)), dtype=float)

    @staticmethod
    def constant(matrix) -> "MetricField":
        M = np.array(matrix, dtype=float)
        return MetricField(matrix=lambda q: M)


@dataclass(frozen=True)
class MorphismPair:
    """A bundle morphism of duals over a base map: q -> psi(q) and
    (q, covector) -> covector in the target fiber."""

    base_map: Callable[[np.ndarray], np.ndarray]
    fiber_map: Callable[[np.ndarray, np.ndarray], np.ndarray]

    def full(self, A_src: SkewAlgebroid, x_full: np.ndarray) -> np.ndarray:
        m = A_src.chart.dim
        q = x_full[:m]
        p = x_full[m:]
        qbar = np.atleast_1d(np.asarray(self.base_map(q), dtype=float))
        pbar = np.asarray(self.fiber_map(q, p), dtype=float)
        return np.concatenate([qbar, pbar])


def force_extension(base: SkewAlgebroid, F: Optional[Homomorphism]) -> SkewAlgebroid:
    """Extend ``base`` by a trivial line: rank n = base.rank + 1, adapted.

    The new frame direction e_0 is anchored to zero and brackets as
    [[e_0, e_a]] = -F_a^b e_b; the base bracket is kept on indices >= 1.
    The frame covector (1, 0, ..., 0) is a cocycle of the result.
    """
    r = base.rank
    if F is not None:
        probe = F.at(np.zeros(base.chart.dim))
        if probe.shape != (r, r):
            raise ValueError(f"homomorphism must be {r}x{r}, got {probe.shape}")
    n = r + 1
    m = base.chart.dim

    def anchor(q):
        out = np.zeros((m, n))
        out[:, 1:] = base.anchor_at(q)
        return out

    structure = {}
    for (a, b), fn in base.structure_pairs():
        def padded(q, _fn=fn):
            v = np.zeros(n)
            v[1:] = np.asarray(_fn(q), dtype=float)
            return v

        structure[(a + 1, b + 1)] = padded
    if F is not None:
        for a in range(r):
            def force_pair(q, _a=a):
                v = np.zeros(n)
                v[1:] = -F.at(q)[_a, :]
                return v

            structure[(0, a + 1)] = force_pair
    return SkewAlgebroid(chart=base.chart, rank=n, anchor=anchor, structure=structure, adapted=True)


def projector_restriction(
    E: SkewAlgebroid,
    D_basis: List[ESection],
    P: Callable[[np.ndarray, np.ndarray], np.ndarray],
    validation_points=None,
    tol: float = 1e-9,
) -> SkewAlgebroid:
    """Restrict E to the subbundle spanned by ``D_basis`` via the projector P.

    P maps (q, E-fiber vector) to coordinates in the D frame and must
    restrict to the identity on D; this is validated at sample points.
    The restricted bracket is project-after-bracket, the anchor is the
    anchored inclusion.
    """
    r = len(D_basis)
    if r < 1:
        raise ValueError("D_basis must be non-empty")
    m = E.chart.dim
    if validation_points is None:
        validation_points = sample_box([(-1.0, 1.0)] * m, samples=8, seed=0)
    eye = np.eye(r)
    worst = 0.0
    for q in validation_points:
        for i in range(r):
            dev = np.max(np.abs(np.asarray(P(q, D_basis[i](q)), dtype=float) - eye[i]))
            worst = max(worst, float(dev))
    if worst > tol:
        raise ConstructionError(f"P restricted to D is not the identity: {worst:g} > {tol:g}")

    def frame_matrix(q):
        return np.stack([s(q) for s in D_basis])  # (r, n_E)

    def compute(q):
        B = frame_matrix(q)
        dB = fd_jacobian(lambda qq: frame_matrix(qq).ravel(), q).reshape(r, E.rank, m)
        CE = E.structure_at(q)
        rhoE = E.anchor_at(q)
        anchored = B @ rhoE.T  # (r, m): rows rho(D_i)
        pairs = {}
        for i in range(r):
            for j in range(i + 1, r):
                val = np.einsum("abg,a,b->g", CE, B[i], B[j])
                val = val + dB[j] @ anchored[i] - dB[i] @ anchored[j]
                pairs[(i, j)] = np.asarray(P(q, val), dtype=float)
        return {"anchor": rhoE @ B.T, "pairs": pairs}

    cache = _PointCache(compute)

    structure = {}
    for i in range(r):
        for j in range(i + 1, r):
            structure[(i, j)] = (lambda ij: (lambda q: cache(q)["pairs"][ij]))((i, j))
    return SkewAlgebroid(
        chart=E.chart,
        rank=r,
        anchor=lambda q: cache(q)["anchor"],
        structure=structure,
        adapted=False,
    )


def gram_schmidt_at(G: MetricField, basis: List[ESection], q) -> np.ndarray:
    """Coefficients T of a G-orthonormal frame at q: ebar_a = T[a, b] basis_b.

    Modified Gram-Schmidt with one re-orthogonalization pass; T[a, b] = 0
    for b > a.  Raises on pivots below 1e-10 (degenerate metric or
    dependent basis).
    """
    q = np.asarray(q, dtype=float)
    Gq = G.at(q)
    B = np.stack([s(q) for s in basis])  # (r, n)
    return _gram_schmidt(Gq, B)


def _gram_schmidt(Gq: np.ndarray, B: np.ndarray) -> np.ndarray:
    # Triangular orthonormalization via Cholesky of the Gram matrix (the
    # factor Gram-Schmidt would produce), plus one re-orthogonalization
    # pass on the residual Gram matrix.
    r = B.shape[0]
    gram = B @ Gq @ B.T
    T = _chol_inverse(gram)
    gram2 = T @ gram @ T.T
    return _chol_inverse(gram2) @ T


def _chol_inverse(gram: np.ndarray) -> np.ndarray:
    try:
        L = np.linalg.cholesky(gram)
    except np.linalg.LinAlgError:
        raise ConstructionError("degenerate metric/basis: Gram matrix not positive-definite")
    piv = float(np.min(np.diag(L)))
    if not np.isfinite(piv) or piv < 1e-10:
        raise ConstructionError(f"degenerate metric/basis: pivot {piv:g}")
    return np.linalg.solve(L, np.eye(gram.shape[0]))


def affine_constraints(
    E: SkewAlgebroid,
    G: MetricField,
    U_basis: List[ESection],
    X0: ESection,
    V_potential: Optional[ScalarField] = None,
    validation_points=None,
    name: str = "affine",
    params: Optional[dict] = None,
) -> HamiltonianSystem:
    """Mechanical system with affine constraints: drift X0 plus subbundle U.

    Builds the adapted rank |U|+1 algebroid on the bidual of the affine
    subbundle, with frame {(1, X0), (0, ebar_a)} for a pointwise
    G-orthonormal frame ebar of U, and the Hamiltonian
    H = (1/2) sum p_a^2 + V in that frame.
    """
    r = len(U_basis)
    if r < 1:
        raise ValueError("U_basis must be non-empty")
    m = E.chart.dim
    nE = E.rank
    if validation_points is None:
        validation_points = sample_box([(-1.0, 1.0)] * m, samples=8, seed=0)

    def frame(q):
        """Rows: X0 then the orthonormalized U frame, in E components."""
        Gq = G.at(q)
        B = np.stack([s(q) for s in U_basis])
        T = _gram_schmidt(Gq, B)
        return np.vstack([X0(q), T @ B])  # (r+1, nE)

    # precondition: X0 is G-orthogonal to U
    worst = 0.0
    for q in validation_points:
        M = frame(q)
        Gq = G.at(q)
        dev = np.max(np.abs(M[1:] @ Gq @ M[0]))
        worst = max(worst, float(dev))
    if worst > 1e-9:
        raise ConstructionError(f"P(X0) != 0: G(X0, U) reaches {worst:g} at validation samples")

    def compute(q):
        M = frame(q)
        Gq = G.at(q)
        dM = fd_jacobian(lambda qq: frame(qq).ravel(), q).reshape(r + 1, nE, m)
        CE = E.structure_at(q)
        rhoE = E.anchor_at(q)
        anchored = M @ rhoE.T  # (r+1, m)
        ebar = M[1:]
        proj = ebar @ Gq  # (r, nE): rows G(ebar_a, .)
        pairs = {}
        for i in range(r + 1):
            for j in range(i + 1, r + 1):
                val = np.einsum("abg,a,b->g", CE, M[i], M[j])
                val = val + dM[j] @ anchored[i] - dM[i] @ anchored[j]
                comp = np.zeros(r + 1)
                comp[1:] = proj @ val
                pairs[(i, j)] = comp
        return {"anchor": rhoE @ M.T, "pairs": pairs}

    cache = _PointCache(compute)

    structure = {}
    for i in range(r + 1):
        for j in range(i + 1, r + 1):
            structure[(i, j)] = (lambda ij: (lambda q: cache(q)["pairs"][ij]))((i, j))
    A = SkewAlgebroid(
        chart=E.chart,
        rank=r + 1,
        anchor=lambda q: cache(q)["anchor"],
        structure=structure,
        adapted=True,
    )
    A.validate_adapted(validation_points)

    V = as_scalar_field(V_potential) if V_potential is not None else None

    def h_eval(x):
        qq, pp = x[:m], x[m:]
        val = 0.5 * float(pp @ pp)
        if V is not None:
            val += V(qq)
        return val

    def h_grad(x):
        qq, pp = x[:m], x[m:]
        gq = fd_gradient(V, qq) if V is not None else np.zeros(m)
        return np.concatenate([gq, pp])

    H = ScalarField(eval=h_eval, grad=h_grad)
    return HamiltonianSystem(algebroid=A, H=H, name=name, params=dict(params or {}))


@dataclass(frozen=True)
class MorphismEndpoint:
    """One side of a hamiltonian-morphism check: an algebroid (for its
    bracket), the affine hamiltonian function on the full dual, and the
    cocycle components in the frame (None when the side carries none)."""

    algebroid: SkewAlgebroid
    f_h: Callable[[np.ndarray], float]
    cocycle: Optional[Callable[[np.ndarray], np.ndarray]] = None

    @staticmethod
    def from_system(sys: HamiltonianSystem) -> "MorphismEndpoint":
        m = sys.chart.dim
        phi = np.zeros(sys.algebroid.rank)
        phi[0] = 1.0
        return MorphismEndpoint(
            algebroid=sys.algebroid,
            f_h=lambda xf: float(xf[m]) + sys.h_value(xf[:m], xf[m + 1:]),
            cocycle=lambda q: phi,
        )

    @staticmethod
    def v_side(sys: HamiltonianSystem) -> "MorphismEndpoint":
        """The reduced dual of a system: kernel algebroid, H as hamiltonian,
        zero cocycle (the projection kills the distinguished direction)."""
        A = v_restriction(sys.algebroid)
        m = sys.chart.dim
        zero = np.zeros(A.rank)
        return MorphismEndpoint(
            algebroid=A,
            f_h=lambda xf: sys.h_value(xf[:m], xf[m:]),
            cocycle=lambda q: zero,
        )


def _coerce_endpoint(obj) -> MorphismEndpoint:
    if isinstance(obj, MorphismEndpoint):
        return obj
    if isinstance(obj, HamiltonianSystem):
        return MorphismEndpoint.from_system(obj)
    raise ValueError("expected a HamiltonianSystem or MorphismEndpoint")


def morphism_check(
    src,
    dst,
    pair: MorphismPair,
    box,
    samples: int = 128,
    seed: int = 42,
    tol: float = 1e-6,
):
    """The three numeric conditions of a hamiltonian morphism.

    Returns CheckReports (bracket, cocycle, hamiltonian):

    1. almost-Poisson morphism on the probe family of target base
       coordinates and fiber coordinates;
    2. the cocycles correspond under the fiber map;
    3. the target hamiltonian function pulls back to the source one.
    """
    src = _coerce_endpoint(src)
    dst = _coerce_endpoint(dst)
    A, Abar = src.algebroid, dst.algebroid
    m, n = A.chart.dim, A.rank
    mbar, nbar = Abar.chart.dim, Abar.rank

    qs = sample_box(box, samples, seed)
    rng = np.random.default_rng(seed + 1)
    ps = -1.0 + 2.0 * rng.random((samples, n))

    def probe(idx):
        return lambda x: float(x[idx])

    probes = [probe(i) for i in range(mbar + nbar)]

    def psi_full(xf):
        return pair.full(A, xf)

    worst1, worst2, worst3 = [], [], []
    for q, p in zip(qs, ps):
        xf = np.concatenate([q, p])
        image = psi_full(xf)
        v1 = 0.0
        for i in range(len(probes)):
            for j in range(i + 1, len(probes)):
                Fi, Fj = probes[i], probes[j]
                lhs = poisson_bracket_eval(A, lambda x: Fi(psi_full(x)), lambda x: Fj(psi_full(x)), xf)
                rhs = poisson_bracket_eval(Abar, Fi, Fj, image)
                v1 = max(v1, abs(lhs - rhs))
        worst1.append((q, v1))
        if src.cocycle is not None and dst.cocycle is not None:
            v2 = float(
                np.max(np.abs(np.asarray(pair.fiber_map(q, src.cocycle(q)), dtype=float) - dst.cocycle(np.asarray(pair.base_map(q), dtype=float))))
            )
            worst2.append((q, v2))
        worst3.append((q, abs(dst.f_h(image) - src.f_h(xf))))

    def report(name, worst, count):
        worst = sorted(worst, key=lambda t: -t[1])
        return CheckReport(
            name=name,
            max_violation=float(worst[0][1]) if worst else 0.0,
            tol=float(tol),
            samples=count,
            seed=seed,
            witnesses=tuple(worst[:5]),
        )

    return (
        report("poisson_morphism", worst1, samples),
        report("cocycle_related", worst2, len(worst2)),
        report("hamiltonian_pullback", worst3, samples),
    )
