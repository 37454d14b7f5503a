"""Submanifolds of the unit sphere attached to a symmetric Clifford system.

Supported families (z denotes a unit vector in R^{2l}):

* ``M_chain(i)``  : <P_j z, z> = 0 for j = 0..i                (0 <= i <= m)
* ``N_chain(i)``  : sum_{j<=i} <P_j z, z>^2 = 1                (1 <= i <= m)
* ``M_minus``     : alias for N_chain(m), the F = -1 focal set
* ``M_plus_t(t)`` : |x| = cos t, |y| = sin t, <x, y> = 0,
                    <x, E_a y> = 0,  z = (x, y)                (0 < t <= pi/4)
* ``level_U(i,c)``: M_chain(i) together with <P_{i+1} z, z> = c
* ``level_V(i,c)``: N_chain(i) together with <P_i z, z> = c

For ``level_U``/``level_V`` the values c = +-1 select the focal spheres
(unit spheres of the +-1 eigenspaces), which are handled exactly.

Every point of ``N_chain(i)`` satisfies P_c z = z for the unit coefficient
vector c_j = <P_j z, z>; the chain's level sets are singular levels, so
frames and retractions for the N side use this eigenspace description
instead of constraint gradients.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .clifford import CliffordSystem, unit_combination
from .errors import DegenerateError, FrameError, SamplingError
from .numerics import complete_orthonormal_basis, newton_project, orthonormalize

POINT_TOL = 1e-10
UNIT_TOL = 1e-12

M_CHAIN = "M_chain"
N_CHAIN = "N_chain"
M_PLUS_T = "M_plus_t"
M_MINUS = "M_minus"
LEVEL_U = "level_U"
LEVEL_V = "level_V"


def require_nondegenerate(system: CliffordSystem) -> None:
    """Geometric operations need both multiplicities positive."""
    if system.m < 1 or system.l - system.m - 1 < 1:
        raise DegenerateError(
            f"degenerate multiplicities (m1, m2) = ({system.m}, {system.l - system.m - 1}); "
            "geometric operations require both positive"
        )


@dataclass(frozen=True)
class ManifoldSpec:
    """A named submanifold of S^{2l-1} attached to ``system``."""

    system: CliffordSystem
    kind: str
    i: int | None = None
    t: float | None = None
    c: float | None = None

    def __post_init__(self):
        m = self.system.m
        if self.kind == M_CHAIN:
            if self.i is None or not 0 <= self.i <= m:
                raise ValueError(f"M_chain index must satisfy 0 <= i <= {m}")
        elif self.kind == N_CHAIN:
            if self.i is None or not 1 <= self.i <= m:
                raise ValueError(f"N_chain index must satisfy 1 <= i <= {m}")
        elif self.kind == M_MINUS:
            object.__setattr__(self, "i", m)
        elif self.kind == M_PLUS_T:
            if self.t is None or not 0.0 < self.t <= math.pi / 4 + 1e-15:
                raise ValueError("M_plus_t requires t in (0, pi/4]")
            if self.system.l - m < 1:
                raise DegenerateError("M_plus_t requires l - m >= 1")
        elif self.kind == LEVEL_U:
            if self.i is None or not 0 <= self.i <= m - 1:
                raise ValueError(f"level_U index must satisfy 0 <= i <= {m - 1}")
            if self.c is None or abs(self.c) > 1.0:
                raise ValueError("level_U requires c in [-1, 1]")
        elif self.kind == LEVEL_V:
            if self.i is None or not 2 <= self.i <= m:
                raise ValueError(f"level_V index must satisfy 2 <= i <= {m}")
            if self.c is None or abs(self.c) > 1.0:
                raise ValueError("level_V requires c in [-1, 1]")
        else:
            raise ValueError(f"unknown manifold kind {self.kind!r}")

    # -- constructors ------------------------------------------------------
    @staticmethod
    def m_chain(system: CliffordSystem, i: int) -> "ManifoldSpec":
        return ManifoldSpec(system, M_CHAIN, i=i)

    @staticmethod
    def n_chain(system: CliffordSystem, i: int) -> "ManifoldSpec":
        return ManifoldSpec(system, N_CHAIN, i=i)

    @staticmethod
    def m_plus(system: CliffordSystem, t: float) -> "ManifoldSpec":
        return ManifoldSpec(system, M_PLUS_T, t=t)

    @staticmethod
    def m_minus(system: CliffordSystem) -> "ManifoldSpec":
        return ManifoldSpec(system, M_MINUS, i=system.m)

    @staticmethod
    def level_u(system: CliffordSystem, i: int, c: float) -> "ManifoldSpec":
        return ManifoldSpec(system, LEVEL_U, i=i, c=c)

    @staticmethod
    def level_v(system: CliffordSystem, i: int, c: float) -> "ManifoldSpec":
        return ManifoldSpec(system, LEVEL_V, i=i, c=c)

    # -- bookkeeping -------------------------------------------------------
    @property
    def is_focal_level(self) -> bool:
        return self.kind in (LEVEL_U, LEVEL_V) and abs(abs(self.c) - 1.0) < 1e-14

    @property
    def dim(self) -> int:
        l, m, i = self.system.l, self.system.m, self.i
        if self.kind == M_CHAIN:
            return 2 * l - 2 - i
        if self.kind in (N_CHAIN, M_MINUS):
            return l + i - 1
        if self.kind == M_PLUS_T:
            return 2 * l - m - 2
        if self.kind == LEVEL_U:
            return l - 1 if self.is_focal_level else 2 * l - 3 - i
        if self.kind == LEVEL_V:
            return l - 1 if self.is_focal_level else l + i - 2
        raise AssertionError(self.kind)

    @property
    def codim_sphere(self) -> int:
        return (2 * self.system.l - 1) - self.dim

    def describe(self) -> str:
        if self.kind == M_PLUS_T:
            return f"M_plus_t(t={self.t:.6g})"
        if self.kind in (LEVEL_U, LEVEL_V):
            return f"{self.kind}(i={self.i}, c={self.c:.6g})"
        if self.kind == M_MINUS:
            return "M_minus"
        return f"{self.kind}(i={self.i})"

    # -- q-frame for M_plus_t ---------------------------------------------
    def q_matrix(self, alpha: int) -> np.ndarray:
        """Q_0 = diag(tan t I, -cot t I); Q_a = P_a for a >= 1."""
        if self.kind != M_PLUS_T:
            raise ValueError("q_matrix is defined for M_plus_t specs only")
        if alpha == 0:
            l = self.system.l
            a, b = math.tan(self.t), 1.0 / math.tan(self.t)
            return np.diag(np.concatenate([np.full(l, a), np.full(l, -b)]))
        return self.system.matrices[alpha]

    # -- constraints -------------------------------------------------------
    def constraint_values(self, z: np.ndarray) -> np.ndarray:
        """Residuals of the defining equations at z (including |z|^2 = 1)."""
        mats = self.system.matrices
        vals = [float(z @ z) - 1.0]
        if self.kind == M_CHAIN:
            vals.extend(float(z @ (mats[j] @ z)) for j in range(self.i + 1))
        elif self.kind in (N_CHAIN, M_MINUS):
            s = [float(z @ (mats[j] @ z)) for j in range(self.i + 1)]
            vals.append(sum(v * v for v in s) - 1.0)
        elif self.kind == M_PLUS_T:
            for alpha in range(self.system.m + 1):
                vals.append(float(z @ (self.q_matrix(alpha) @ z)))
        elif self.kind == LEVEL_U:
            vals.extend(float(z @ (mats[j] @ z)) for j in range(self.i + 1))
            vals.append(float(z @ (mats[self.i + 1] @ z)) - self.c)
        elif self.kind == LEVEL_V:
            s = [float(z @ (mats[j] @ z)) for j in range(self.i + 1)]
            vals.append(sum(v * v for v in s) - 1.0)
            vals.append(s[self.i] - self.c)
        return np.array(vals)

    def constraint_residual(self, z: np.ndarray) -> float:
        return float(np.max(np.abs(self.constraint_values(z))))


@dataclass(frozen=True)
class SurfacePoint:
    """A validated ambient point on the submanifold ``spec``."""

    spec: ManifoldSpec
    z: np.ndarray
    constraint_residual: float

    def __post_init__(self):
        if abs(float(self.z @ self.z) - 1.0) > UNIT_TOL:
            raise ValueError("surface point is not a unit vector")
        if self.constraint_residual > POINT_TOL:
            raise ValueError(
                f"constraint residual {self.constraint_residual:.3e} exceeds {POINT_TOL:.0e} "
                f"on {self.spec.describe()}"
            )


def surface_point(spec: ManifoldSpec, z: np.ndarray) -> SurfacePoint:
    z = np.asarray(z, dtype=float)
    return SurfacePoint(spec=spec, z=z, constraint_residual=spec.constraint_residual(z))


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _unit(v: np.ndarray) -> np.ndarray:
    return v / float(np.sqrt(v @ v))


def _newton_constraints(spec: ManifoldSpec) -> Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]:
    """Residual-and-Jacobian callable for the Newton-projected specs."""
    mats = spec.system.matrices
    if spec.kind == M_CHAIN:
        quads = [mats[j] for j in range(spec.i + 1)]
        targets = np.zeros(len(quads))
    elif spec.kind == LEVEL_U:
        quads = [mats[j] for j in range(spec.i + 1)] + [mats[spec.i + 1]]
        targets = np.zeros(len(quads))
        targets[-1] = spec.c
    elif spec.kind == M_PLUS_T:
        quads = [spec.q_matrix(alpha) for alpha in range(spec.system.m + 1)]
        targets = np.zeros(len(quads))
    else:
        raise ValueError(f"no Newton constraint system for kind {spec.kind!r}")

    def fun(z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        res = [float(z @ z) - 1.0]
        rows = [2.0 * z]
        for mat, target in zip(quads, targets):
            mz = mat @ z
            res.append(float(z @ mz) - target)
            rows.append(2.0 * mz)
        return np.array(res), np.array(rows)

    return fun


def _eigenspace_point(system: CliffordSystem, coeff: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Unit vector in the +1 eigenspace of P_coeff closest in direction to v."""
    pc = unit_combination(system, coeff)
    w = 0.5 * (v + pc @ v)
    norm = float(np.sqrt(w @ w))
    if norm < 1e-8:
        raise SamplingError("draw fell in the -1 eigenspace; retry")
    return w / norm


def sample_point(spec: ManifoldSpec, seed=0) -> SurfacePoint:
    """Draw one point on ``spec``.

    M_plus_t and the N-side manifolds are sampled exactly from their
    parametrizations; M_chain and regular level_U use a Gaussian start
    followed by Gauss-Newton projection (up to 10 fresh draws before
    giving up).
    """
    rng = _as_rng(seed)
    system = spec.system
    m, l = system.m, system.l
    dim = system.ambient_dim

    if spec.kind == M_PLUS_T:
        skew = system.skew_source.generators
        for _ in range(10):
            xhat = _unit(rng.standard_normal(l))
            span = [xhat] + [e @ xhat for e in skew]
            basis = orthonormalize(span)
            resid = rng.standard_normal(l)
            ortho = orthonormalize([resid], against=basis)
            if len(ortho) == 1:
                yhat = ortho[0]
                z = np.concatenate([math.cos(spec.t) * xhat, math.sin(spec.t) * yhat])
                return surface_point(spec, z)
        raise SamplingError("could not draw a direction orthogonal to the skew span")

    if spec.kind in (N_CHAIN, M_MINUS):
        coeff = _unit(rng.standard_normal(spec.i + 1))
        z = _eigenspace_point(system, coeff, rng.standard_normal(dim))
        return surface_point(spec, z)

    if spec.kind == LEVEL_V:
        if spec.is_focal_level:
            coeff = np.zeros(spec.i + 1)
            coeff[spec.i] = math.copysign(1.0, spec.c)
        else:
            head = _unit(rng.standard_normal(spec.i)) * math.sqrt(1.0 - spec.c**2)
            coeff = np.concatenate([head, [spec.c]])
        z = _eigenspace_point(system, coeff, rng.standard_normal(dim))
        return surface_point(spec, z)

    if spec.kind == LEVEL_U and spec.is_focal_level:
        sign = math.copysign(1.0, spec.c)
        coeff = np.zeros(spec.i + 2)
        coeff[spec.i + 1] = sign
        z = _eigenspace_point(system, coeff, rng.standard_normal(dim))
        return surface_point(spec, z)

    if spec.kind in (M_CHAIN, LEVEL_U):
        fun = _newton_constraints(spec)
        last_exc: Exception | None = None
        for _ in range(10):
            z0 = _unit(rng.standard_normal(dim))
            try:
                z = newton_project(z0, fun, tol=1e-13, max_iter=100)
                return surface_point(spec, z)
            except Exception as exc:  # retry with a fresh draw
                last_exc = exc
        raise SamplingError(f"Newton projection failed 10 times: {last_exc}")

    raise ValueError(f"unknown manifold kind {spec.kind!r}")


def sample_points(spec: ManifoldSpec, count: int, seed=0) -> list[SurfacePoint]:
    rng = _as_rng(seed)
    return [sample_point(spec, rng) for _ in range(count)]


@dataclass(frozen=True)
class Frame:
    """Orthonormal tangent and (inside-the-sphere) normal bases at a point.

    ``tangent`` has shape (dim, 2l) and ``normal`` shape (codim-1, 2l),
    rows being ambient vectors; together with z they span R^{2l}.
    """

    point: SurfacePoint
    tangent: np.ndarray
    normal: np.ndarray

    def validate(self, tol: float = 1e-10) -> float:
        z = self.point.z
        stack = np.vstack([self.tangent, self.normal, z[None, :]])
        gram = stack @ stack.T
        worst = float(np.max(np.abs(gram - np.eye(stack.shape[0]))))
        if worst > tol:
            raise FrameError(f"frame Gram residual {worst:.3e} exceeds {tol:.0e}")
        spec = self.point.spec
        if self.tangent.shape[0] != spec.dim or self.normal.shape[0] != spec.codim_sphere:
            raise FrameError(
                f"frame counts ({self.tangent.shape[0]}, {self.normal.shape[0]}) do not match "
                f"dim {spec.dim} / sphere codim {spec.codim_sphere}"
            )
        return worst


def _coeff_vector(spec: ManifoldSpec, z: np.ndarray) -> np.ndarray:
    """<P_j z, z> for j = 0..i (the N-side eigenspace coefficients)."""
    return np.array([float(z @ (spec.system.matrices[j] @ z)) for j in range(spec.i + 1)])


def _n_side_bases(system: CliffordSystem, coeff: np.ndarray, z: np.ndarray):
    """Tangent pieces of {x : P_c x = x} at z: the unit-sphere directions of
    the +1 eigenspace and the coefficient-rotation directions P_d z, d ⊥ c."""
    pc = unit_combination(system, coeff)
    dim = system.ambient_dim
    proj = 0.5 * (np.eye(dim) + pc)
    eig_part = orthonormalize(list(proj), against=[z])  # l - 1 rows
    d_basis = complete_orthonormal_basis([coeff], coeff.size, coeff.size - 1)
    rot_part = np.array([unit_combination(system, d) @ z for d in d_basis]) if len(d_basis) else np.zeros((0, dim))
    return eig_part, rot_part


def tangent_normal_frame(point: SurfacePoint) -> Frame:
    """Construct the orthonormal tangent/normal frame at ``point``.

    M_plus_t uses the analytic normal basis {Q_0 z, ..., Q_m z}; the
    M-side chains and regular U-levels use their (orthonormal) constraint
    gradients; the N-side uses the eigenspace description.
    """
    spec = point.spec
    system = spec.system
    z = point.z
    dim = system.ambient_dim
    mats = system.matrices

    if spec.kind == M_PLUS_T:
        normal = np.array([spec.q_matrix(alpha) @ z for alpha in range(system.m + 1)])
        gram = normal @ normal.T
        if np.max(np.abs(gram - np.eye(system.m + 1))) > 1e-8:
            raise FrameError("analytic normal frame is not orthonormal; non-regular point")
        tangent = complete_orthonormal_basis([z, *normal], dim, spec.dim)
        frame = Frame(point=point, tangent=tangent, normal=normal)
    elif spec.kind == M_CHAIN:
        normal = np.array([mats[j] @ z for j in range(spec.i + 1)])
        tangent = complete_orthonormal_basis([z, *normal], dim, spec.dim)
        frame = Frame(point=point, tangent=tangent, normal=normal)
    elif spec.kind == LEVEL_U and not spec.is_focal_level:
        xi = (mats[spec.i + 1] @ z - spec.c * z) / math.sqrt(1.0 - spec.c**2)
        normal = np.array([mats[j] @ z for j in range(spec.i + 1)] + [xi])
        tangent = complete_orthonormal_basis([z, *normal], dim, spec.dim)
        frame = Frame(point=point, tangent=tangent, normal=normal)
    elif spec.kind in (N_CHAIN, M_MINUS):
        coeff = _coeff_vector(spec, z)
        eig_part, rot_part = _n_side_bases(system, coeff, z)
        tangent = np.vstack([eig_part, rot_part])
        normal = complete_orthonormal_basis([z, *tangent], dim, spec.codim_sphere)
        frame = Frame(point=point, tangent=tangent, normal=normal)
    elif spec.kind == LEVEL_V and not spec.is_focal_level:
        coeff = _coeff_vector(spec, z)
        pc = unit_combination(system, coeff)
        proj = 0.5 * (np.eye(dim) + pc)
        eig_part = orthonormalize(list(proj), against=[z])
        dhat = -spec.c * coeff
        dhat[spec.i] += 1.0
        dhat /= math.sqrt(1.0 - spec.c**2)
        xi = unit_combination(system, dhat) @ z
        d_rest = complete_orthonormal_basis([coeff, dhat], coeff.size, coeff.size - 2)
        rot_part = (
            np.array([unit_combination(system, d) @ z for d in d_rest])
            if len(d_rest)
            else np.zeros((0, dim))
        )
        tangent = np.vstack([eig_part, rot_part])
        normal = np.vstack(
            [complete_orthonormal_basis([z, xi, *tangent], dim, spec.codim_sphere - 1), xi[None, :]]
        )
        frame = Frame(point=point, tangent=tangent, normal=normal)
    elif spec.is_focal_level:
        mat = mats[spec.i + 1] if spec.kind == LEVEL_U else mats[spec.i]
        sign = math.copysign(1.0, spec.c)
        proj = 0.5 * (np.eye(dim) + sign * mat)
        tangent = orthonormalize(list(proj), against=[z])
        normal = complete_orthonormal_basis([z, *tangent], dim, spec.codim_sphere)
        frame = Frame(point=point, tangent=tangent, normal=normal)
    else:
        raise ValueError(f"unknown manifold kind {spec.kind!r}")

    frame.validate()
    return frame


def retraction(spec: ManifoldSpec) -> Callable[[np.ndarray], np.ndarray]:
    """A smooth map sending ambient points near ``spec`` back onto it.

    Newton projection for the regularly-constrained kinds; the exact
    eigenspace projection for the N-side and focal levels.  Fixes points of
    the manifold and is therefore a retraction: curves s -> R(z + s v) with
    tangent v have manifold-independent normal second derivative.
    """
    system = spec.system
    mats = system.matrices

    if spec.kind in (M_CHAIN, M_PLUS_T) or (spec.kind == LEVEL_U and not spec.is_focal_level):
        fun = _newton_constraints(spec)

        def newton_retract(w: np.ndarray) -> np.ndarray:
            return newton_project(w, fun, tol=1e-14, max_iter=100)

        return newton_retract

    if spec.kind in (N_CHAIN, M_MINUS):
        idx = spec.i

        def n_retract(w: np.ndarray) -> np.ndarray:
            wn = _unit(w)
            coeff = np.array([float(wn @ (mats[j] @ wn)) for j in range(idx + 1)])
            coeff = _unit(coeff)
            return _eigenspace_point(system, coeff, wn)

        return n_retract

    if spec.kind == LEVEL_V and not spec.is_focal_level:
        idx, c = spec.i, spec.c
        scale = math.sqrt(1.0 - c**2)

        def v_retract(w: np.ndarray) -> np.ndarray:
            wn = _unit(w)
            head = np.array([float(wn @ (mats[j] @ wn)) for j in range(idx)])
            head = _unit(head) * scale
            coeff = np.concatenate([head, [c]])
            return _eigenspace_point(system, coeff, wn)

        return v_retract

    if spec.is_focal_level:
        mat = mats[spec.i + 1] if spec.kind == LEVEL_U else mats[spec.i]
        sign = math.copysign(1.0, spec.c)

        def focal_retract(w: np.ndarray) -> np.ndarray:
            return _unit(0.5 * (w + sign * (mat @ w)))

        return focal_retract

    raise ValueError(f"unknown manifold kind {spec.kind!r}")


def points_to_json(points: list[SurfacePoint]) -> str:
    """Serialize a batch of points (spec parameters + coordinates)."""
    rows = []
    for p in points:
        rows.append(
            {
                "kind": p.spec.kind,
                "i": p.spec.i,
                "t": p.spec.t,
                "c": p.spec.c,
                "z": p.z.tolist(),
            }
        )
    return json.dumps(rows)


def points_from_json(system: CliffordSystem, text: str) -> list[SurfacePoint]:
    out = []
    for row in json.loads(text):
        spec = ManifoldSpec(system, row["kind"], i=row["i"], t=row["t"], c=row["c"])
        out.append(surface_point(spec, np.asarray(row["z"], dtype=float)))
    return out
