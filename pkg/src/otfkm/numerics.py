"""Self-contained numerical kernels: Jacobi eigensolver, Gauss-Newton
projection, fixed-step RK4, and orthonormalization helpers.

All kernels are deterministic for identical inputs and avoid LAPACK-backed
solver calls; numpy is used for array storage and products only.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np

from .errors import IntegrationError, NumericError, ProjectionError

SYMMETRY_TOL = 1e-12


def require_symmetric(a: np.ndarray, tol: float = SYMMETRY_TOL) -> np.ndarray:
    """Validate that ``a`` is square and symmetric to ``tol`` entrywise."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a))))
    if np.max(np.abs(a - a.T)) > tol * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    return a


def _round_robin_pairs(n: int) -> list[list[tuple[int, int]]]:
    """Tournament schedule: n-1 rounds of disjoint index pairs covering all
    (p, q), p < q.  A dummy slot handles odd n."""
    players = list(range(n))
    if n % 2 == 1:
        players.append(-1)
    size = len(players)
    rounds = []
    for _ in range(size - 1):
        pairs = []
        for i in range(size // 2):
            p, q = players[i], players[size - 1 - i]
            if p >= 0 and q >= 0:
                pairs.append((min(p, q), max(p, q)))
        rounds.append(pairs)
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def symmetric_eigendecomposition(
    a: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100
) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and eigenvectors of a symmetric matrix by Jacobi rotation.

    Uses the parallel (round-robin) ordering: each round annihilates a set
    of disjoint off-diagonal entries with one orthogonal similarity, which
    keeps the inner loop in matrix products.  Returns ``(w, v)`` with
    eigenvalues ``w`` sorted ascending and orthonormal eigenvectors in the
    columns of ``v`` so that ``a @ v = v @ diag(w)``.  Convergence
    criterion: the Frobenius norm of the off-diagonal part falls below
    ``tol`` times the Frobenius norm of the input (floor of ``tol``).

    Raises
    ------
    NumericError
        If the off-diagonal norm has not converged after ``max_sweeps``
        sweeps.
    """
    a = require_symmetric(a).copy()
    n = a.shape[0]
    if n > 4096:
        raise ValueError("matrix order exceeds the supported limit of 4096")
    v = np.eye(n)
    if n == 1:
        return a.diagonal().copy(), v

    threshold = tol * max(float(np.sqrt(np.sum(a * a))), 1.0)
    skip_level = threshold / (2.0 * n)
    rounds = [
        (np.array([p for p, _ in pairs]), np.array([q for _, q in pairs]))
        for pairs in _round_robin_pairs(n)
    ]

    def offdiag_norm(mat: np.ndarray) -> float:
        off = mat - np.diag(mat.diagonal())
        return float(np.sqrt(np.sum(off * off)))

    converged = False
    for _ in range(max_sweeps):
        if offdiag_norm(a) <= threshold:
            converged = True
            break
        for ps, qs in rounds:
            apq = a[ps, qs]
            live = np.abs(apq) > skip_level
            if not np.any(live):
                continue
            ps_l, qs_l, apq_l = ps[live], qs[live], apq[live]
            # 2x2 symmetric Schur rotations annihilating each a[p, q];
            # pairs are disjoint, so one orthogonal similarity applies all.
            theta = (a[qs_l, qs_l] - a[ps_l, ps_l]) / (2.0 * apq_l)
            t = np.where(
                theta == 0.0,
                1.0,
                np.sign(theta) / (np.abs(theta) + np.sqrt(theta * theta + 1.0)),
            )
            c = 1.0 / np.sqrt(t * t + 1.0)
            s = t * c
            rot = np.eye(n)
            rot[ps_l, ps_l] = c
            rot[qs_l, qs_l] = c
            rot[ps_l, qs_l] = s
            rot[qs_l, ps_l] = -s
            a = rot.T @ a @ rot
            a = 0.5 * (a + a.T)
            a[ps_l, qs_l] = 0.0
            a[qs_l, ps_l] = 0.0
            v = v @ rot
    if not converged and offdiag_norm(a) > threshold:
        raise NumericError(
            f"Jacobi eigensolver did not converge in {max_sweeps} sweeps "
            f"(off-diagonal norm {offdiag_norm(a):.3e})"
        )

    w = a.diagonal().copy()
    order = np.argsort(w, kind="stable")
    return w[order], v[:, order]


def solve_spd(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a x = b`` for a small symmetric positive-definite ``a``.

    Gaussian elimination with partial pivoting; sizes here are tiny (the
    number of active constraints), so stability and auditability beat
    asymptotics.
    """
    a = np.array(a, dtype=float)
    b = np.array(b, dtype=float)
    n = a.shape[0]
    aug = np.hstack([a, b.reshape(n, -1)])
    for col in range(n):
        piv = col + int(np.argmax(np.abs(aug[col:, col])))
        if abs(aug[piv, col]) < 1e-300:
            raise NumericError("singular system in solve_spd")
        if piv != col:
            aug[[col, piv]] = aug[[piv, col]]
        aug[col] = aug[col] / aug[col, col]
        for row in range(n):
            if row != col and aug[row, col] != 0.0:
                aug[row] -= aug[row, col] * aug[col]
    x = aug[:, n:]
    return x[:, 0] if b.ndim == 1 else x


def orthonormalize(
    vectors: Sequence[np.ndarray],
    against: Sequence[np.ndarray] = (),
    drop_tol: float = 1e-10,
) -> np.ndarray:
    """Modified Gram-Schmidt with one reorthogonalization pass.

    Orthonormalizes ``vectors`` against ``against`` (assumed orthonormal)
    and against the vectors already accepted; inputs whose residual norm
    falls below ``drop_tol`` are dropped.  Returns the accepted vectors as
    rows, in input order.
    """
    basis = [np.asarray(u, dtype=float) for u in against]
    kept: list[np.ndarray] = []
    for vec in vectors:
        w = np.array(vec, dtype=float)
        for _ in range(2):  # twice is enough
            for u in basis:
                w -= (w @ u) * u
            for u in kept:
                w -= (w @ u) * u
        norm = float(np.sqrt(w @ w))
        if norm > drop_tol:
            kept.append(w / norm)
    return np.array(kept) if kept else np.zeros((0, len(against[0]) if against else 0))


def complete_orthonormal_basis(
    against: Sequence[np.ndarray], dim: int, count: int
) -> np.ndarray:
    """Extend the orthonormal set ``against`` by ``count`` vectors in R^dim.

    Candidates are the standard basis vectors in index order, which makes
    the completion deterministic.
    """
    basis = [np.asarray(u, dtype=float) for u in against]
    kept: list[np.ndarray] = []
    for idx in range(dim):
        if len(kept) == count:
            break
        w = np.zeros(dim)
        w[idx] = 1.0
        for _ in range(2):
            for u in basis:
                w -= (w @ u) * u
            for u in kept:
                w -= (w @ u) * u
        norm = float(np.sqrt(w @ w))
        if norm > 1e-8:
            kept.append(w / norm)
    if len(kept) != count:
        raise NumericError(
            f"could not complete orthonormal basis: wanted {count}, got {len(kept)}"
        )
    return np.array(kept)


def newton_project(
    z0: np.ndarray,
    constraints: Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]],
    tol: float = 1e-12,
    max_iter: int = 100,
) -> np.ndarray:
    """Project ``z0`` onto the zero set of ``constraints`` by Gauss-Newton.

    ``constraints(z)`` must return ``(r, J)`` with residual vector ``r`` of
    shape (p,) and Jacobian ``J`` of shape (p, n).  Steps are the minimum-
    norm solutions ``-J^T (J J^T)^{-1} r``, halved (up to 20 times) whenever
    the residual norm would increase.  Iteration stops once the residual
    norm is below ``tol``; one extra full step is then taken if it improves
    the residual further, which for the quadratic constraints used here
    lands near machine precision.

    Raises
    ------
    ProjectionError
        After ``max_iter`` iterations above ``tol``.
    """
    z = np.array(z0, dtype=float)
    r, jac = constraints(z)
    rnorm = float(np.sqrt(r @ r))
    for _ in range(max_iter):
        if rnorm <= tol:
            break
        gram = jac @ jac.T
        try:
            lam = solve_spd(gram, r)
        except NumericError as exc:
            raise ProjectionError(f"rank-deficient constraint Jacobian: {exc}") from exc
        step = -(jac.T @ lam)
        scale = 1.0
        for _ in range(20):
            z_new = z + scale * step
            r_new, jac_new = constraints(z_new)
            rnorm_new = float(np.sqrt(r_new @ r_new))
            if rnorm_new < rnorm or rnorm_new <= tol:
                break
            scale *= 0.5
        else:
            raise ProjectionError(
                f"damped Gauss-Newton stalled at residual {rnorm:.3e}"
            )
        z, r, jac, rnorm = z_new, r_new, jac_new, rnorm_new
    else:
        raise ProjectionError(
            f"Gauss-Newton did not reach tol={tol:.1e} in {max_iter} iterations "
            f"(final residual {rnorm:.3e})"
        )
    # Polishing step: from residual ~tol one more Gauss-Newton step is
    # quadratic and typically reaches ~1e-16.
    if rnorm > 0.0:
        gram = jac @ jac.T
        try:
            lam = solve_spd(gram, r)
            z_new = z - jac.T @ lam
            r_new, _ = constraints(z_new)
            if float(np.sqrt(r_new @ r_new)) < rnorm:
                z = z_new
        except NumericError:
            pass
    return z


def rk4_integrate(
    f: Callable[[float, np.ndarray], np.ndarray],
    y0: np.ndarray,
    t0: float,
    t1: float,
    dt: float,
    store_every: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Classical fixed-step RK4 for ``dy/dt = f(t, y)``.

    The last step is shortened so the trajectory lands exactly on ``t1``.
    Returns ``(ts, ys)``; states are stored every ``store_every`` steps
    (the initial and final states are always stored).
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if t1 <= t0:
        raise ValueError("t1 must exceed t0")
    y = np.array(y0, dtype=float)
    t = float(t0)
    ts = [t]
    ys = [y.copy()]
    step_count = 0
    while t < t1 - 1e-15 * max(1.0, abs(t1)):
        h = min(dt, t1 - t)
        k1 = f(t, y)
        k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = f(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        step_count += 1
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={t:.6g}")
        if step_count % store_every == 0 or t >= t1 - 1e-15 * max(1.0, abs(t1)):
            ts.append(t)
            ys.append(y.copy())
    return np.array(ts), np.array(ys)
