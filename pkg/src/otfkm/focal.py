"""Focal maps onto the S^{l-1} focal spheres of the chain functions, and the
numerical verification that they are submersive eigenmaps.

* phi family: M_chain(i+1) -> U_{+-1},  x -> (x +- P_{i+1} x) / sqrt(2),
  for 0 <= i <= m - 1; every coordinate of the image is an eigenfunction
  of the domain Laplacian with eigenvalue 2l - i - 3 = dim M_{i+1}.
* psi family: N_chain(i-1) -> V_{+-1},  x -> (x +- P_i x) / sqrt(2),
  for 2 <= i <= m, with eigenvalue l + i - 2 = dim N_{i-1}.  (On the domain
  N_{i-1} the value <P_i x, x> vanishes, which is what makes the image a
  unit vector; this pins the domain to chain index i - 1.)

The eigenfunction property is equivalent, for linear coordinate functions,
to the minimal-immersion identity H_eucl = -n z with n the domain
dimension, which the numeric second fundamental form estimates directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .clifford import CliffordSystem
from .curvature import numeric_second_fundamental_form, RICHARDSON_STEP
from .errors import DegenerateError
from .manifolds import (
    M_CHAIN,
    M_MINUS,
    N_CHAIN,
    ManifoldSpec,
    SurfacePoint,
    sample_point,
    surface_point,
    tangent_normal_frame,
)
from .numerics import symmetric_eigendecomposition

PHI = "phi"
PSI = "psi"


@dataclass(frozen=True)
class FocalMapSpec:
    """One focal map: family ``phi`` (M-chain) or ``psi`` (N-chain), chain
    index ``i``, and the sign of the eigenspace it lands on."""

    system: CliffordSystem
    family: str
    i: int
    sign: int = +1

    def __post_init__(self):
        m = self.system.m
        if self.family == PHI:
            if not 0 <= self.i <= m - 1:
                raise ValueError(f"phi requires 0 <= i <= {m - 1}")
        elif self.family == PSI:
            if not 2 <= self.i <= m:
                raise ValueError(f"psi requires 2 <= i <= {m}")
        else:
            raise ValueError(f"unknown focal family {self.family!r}")
        if self.sign not in (+1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def matrix(self) -> np.ndarray:
        """P_{i+1} for phi, P_i for psi."""
        idx = self.i + 1 if self.family == PHI else self.i
        return self.system.matrices[idx]

    def domain(self) -> ManifoldSpec:
        if self.family == PHI:
            return ManifoldSpec.m_chain(self.system, self.i + 1)
        return ManifoldSpec.n_chain(self.system, self.i - 1)

    @property
    def eigenvalue(self) -> int:
        """The shared Laplace eigenvalue; equals the domain dimension."""
        l = self.system.l
        return 2 * l - self.i - 3 if self.family == PHI else l + self.i - 2

    def image_spec(self) -> ManifoldSpec:
        c = float(self.sign)
        if self.family == PHI:
            return ManifoldSpec.level_u(self.system, self.i, c)
        return ManifoldSpec.level_v(self.system, self.i, c)


def apply_focal_map(spec: FocalMapSpec, point: SurfacePoint) -> np.ndarray:
    """Evaluate the focal map at a validated domain point; the result is a
    unit vector fixed (up to sign) by the defining matrix."""
    dom = spec.domain()
    if point.spec.kind != dom.kind or point.spec.i != dom.i:
        raise ValueError(
            f"point lives on {point.spec.describe()}, expected {dom.describe()}"
        )
    z = point.z
    out = (z + spec.sign * (spec.matrix @ z)) / math.sqrt(2.0)
    return out


def differential_rank(spec: FocalMapSpec, point: SurfacePoint, tol: float = 1e-8) -> int:
    """Numeric rank of the focal-map differential on the tangent space.

    The differential is X -> (X +- P X)/sqrt(2); singular values are the
    square roots of the Gram-matrix eigenvalues of its images on an
    orthonormal tangent basis.
    """
    frame = tangent_normal_frame(point)
    images = (frame.tangent + spec.sign * (frame.tangent @ spec.matrix.T)) / math.sqrt(2.0)
    gram = images @ images.T
    evals, _ = symmetric_eigendecomposition(0.5 * (gram + gram.T), tol=1e-13)
    return int(np.sum(np.sqrt(np.clip(evals, 0.0, None)) > tol))


def verify_eigenmap(
    spec: FocalMapSpec,
    samples: int = 5,
    seed: int = 0,
    fd_step: float = RICHARDSON_STEP,
) -> dict:
    """Check the submersive-eigenmap properties at sampled domain points.

    Per point: (a) the image is a unit vector in the target eigenspace and
    satisfies the target's defining constraints; (b) the minimal-immersion
    residual |H_eucl + n z| with n the domain dimension (equivalently, the
    coordinate functions are Laplace eigenfunctions with eigenvalue n);
    (c) the differential has rank l - 1 (submersion onto the focal sphere).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    dom = spec.domain()
    n = dom.dim
    if spec.eigenvalue != n:
        raise DegenerateError("domain dimension does not match the stated eigenvalue")
    image = spec.image_spec()
    max_unit = 0.0
    max_fix = 0.0
    max_image_constraint = 0.0
    max_minimal = 0.0
    ranks = []
    for _ in range(samples):
        point = sample_point(dom, rng)
        out = apply_focal_map(spec, point)
        max_unit = max(max_unit, abs(float(out @ out) - 1.0))
        max_fix = max(max_fix, float(np.max(np.abs(spec.matrix @ out - spec.sign * out))))
        max_image_constraint = max(max_image_constraint, image.constraint_residual(out))
        sff = numeric_second_fundamental_form(point, fd_step=fd_step, richardson=True)
        residual = sff.h_euclidean + n * point.z
        max_minimal = max(max_minimal, float(np.sqrt(residual @ residual)))
        ranks.append(differential_rank(spec, point))
    return {
        "eigenvalue": spec.eigenvalue,
        "domain_dim": n,
        "max_unit_residual": max_unit,
        "max_fixpoint_residual": max_fix,
        "max_image_constraint": max_image_constraint,
        "max_minimal_residual": max_minimal,
        "ranks": ranks,
        "expected_rank": spec.system.l - 1,
        "samples": samples,
        "seed": seed,
    }
