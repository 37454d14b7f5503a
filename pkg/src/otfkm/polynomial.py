"""The quartic isoparametric polynomial of a symmetric Clifford system.

    F(x) = |x|^4 - 2 sum_a <P_a x, x>^2

together with its Euclidean gradient and Laplacian, and the residual checks
of the two defining identities

    |grad F|^2 = 16 |x|^6,      lap F = 8 (l - 2m - 1) |x|^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .clifford import CliffordSystem


@dataclass(frozen=True)
class FkmPolynomial:
    """Evaluator for F and its sphere restriction f, with multiplicities
    (m1, m2) = (m, l - m - 1).  Degenerate parameter sets (m1 or m2 <= 0)
    are representable but flagged via :attr:`nondegenerate`."""

    system: CliffordSystem

    g: int = 4

    @property
    def m1(self) -> int:
        return self.system.m

    @property
    def m2(self) -> int:
        return self.system.l - self.system.m - 1

    @property
    def nondegenerate(self) -> bool:
        return self.m1 > 0 and self.m2 > 0

    def _forms(self, x: np.ndarray) -> np.ndarray:
        """The values <P_a x, x> for all a, shape (m+1,)."""
        return np.array([float(x @ (p @ x)) for p in self.system.matrices])

    def eval_F(self, x: np.ndarray) -> float:
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        s = self._forms(x)
        return r2 * r2 - 2.0 * float(s @ s)

    def eval_f(self, z: np.ndarray) -> float:
        """Restriction to the unit sphere (asserts |z| = 1 to 1e-10)."""
        z = np.asarray(z, dtype=float)
        if abs(float(z @ z) - 1.0) > 1e-10:
            raise ValueError("eval_f expects a unit vector")
        return self.eval_F(z)

    def grad_F(self, x: np.ndarray) -> np.ndarray:
        """Analytic gradient 4 |x|^2 x - 8 sum_a <P_a x, x> P_a x."""
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        out = 4.0 * r2 * x
        for p in self.system.matrices:
            px = p @ x
            out -= 8.0 * float(px @ x) * px
        return out

    def laplacian_F(self, x: np.ndarray) -> float:
        """Analytic Laplacian, evaluated through the matrices.

        Writing s_a = <P_a x, x>:

            lap F = (8 + 8 l) |x|^2 - 8 sum_a (2 |P_a x|^2 + s_a tr P_a),

        which collapses to 8 (l - 2m - 1) |x|^2 for an exact Clifford
        system; evaluating the uncollapsed form keeps the identity check
        sensitive to defects in the matrices.
        """
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        acc = (8.0 + 8.0 * self.system.l) * r2
        for p in self.system.matrices:
            px = p @ x
            acc -= 8.0 * (2.0 * float(px @ px) + float(px @ x) * float(np.trace(p)))
        return acc

    def gradient_identity_residual(self, x: np.ndarray) -> float:
        """Relative residual of |grad F|^2 = 16 |x|^6 at x."""
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        grad = self.grad_F(x)
        return abs(float(grad @ grad) - 16.0 * r2**3) / max(1.0, r2**3)

    def laplacian_identity_residual(self, x: np.ndarray) -> float:
        """Relative residual of lap F = 8 (l - 2m - 1) |x|^2 at x."""
        x = np.asarray(x, dtype=float)
        r2 = float(x @ x)
        expected = 8.0 * (self.system.l - 2 * self.system.m - 1) * r2
        return abs(self.laplacian_F(x) - expected) / max(1.0, r2)


def verify_cm_identities(
    poly: FkmPolynomial, samples: int = 1000, seed: int = 0, tol: float = 1e-10
) -> dict:
    """Check both polynomial identities at seeded Gaussian sample points.

    Returns ``{"max_grad_residual", "max_lap_residual", "pass", "samples",
    "seed", "tol"}``; ``pass`` is False when either max residual exceeds
    ``tol`` (a valid outcome, e.g. at ``tol=0``).
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    dim = poly.system.ambient_dim
    max_grad = 0.0
    max_lap = 0.0
    for _ in range(samples):
        x = rng.standard_normal(dim)
        max_grad = max(max_grad, poly.gradient_identity_residual(x))
        max_lap = max(max_lap, poly.laplacian_identity_residual(x))
    return {
        "max_grad_residual": max_grad,
        "max_lap_residual": max_lap,
        "pass": bool(max_grad <= tol and max_lap <= tol),
        "samples": samples,
        "seed": seed,
        "tol": tol,
    }
