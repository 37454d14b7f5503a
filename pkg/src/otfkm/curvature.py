"""Second fundamental forms, shape-operator spectra, scalar curvature, the
extrinsic quantity sigma, and the isoparametric-function identities.

Sign conventions (used consistently by the analytic and numeric paths):
the second fundamental form of a curve s -> gamma(s) on the manifold is the
normal part of gamma''(0), so for a normal field xi the shape operator is
A_xi = -(grad xi)^tangential and <A_xi X, Y> = <B(X, Y), xi>.  All reported
components are taken with respect to the unit sphere as ambient space; the
Euclidean form differs by -<X, Y> z, which only enters the Euclidean mean
curvature vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, NearFocalError
from .manifolds import (
    LEVEL_U,
    LEVEL_V,
    M_CHAIN,
    M_MINUS,
    M_PLUS_T,
    N_CHAIN,
    Frame,
    ManifoldSpec,
    SurfacePoint,
    retraction,
    sample_point,
    tangent_normal_frame,
    require_nondegenerate,
)
from .numerics import symmetric_eigendecomposition

# Base step for Richardson-extrapolated estimates: large enough that the
# O(h^2) truncation term dominates rounding, so the extrapolation wins.
RICHARDSON_STEP = 1e-3


@dataclass(frozen=True)
class SecondFundamentalForm:
    """Components <B(e_i, e_j), xi_beta> in the bases of ``frame``.

    ``components`` has shape (codim, dim, dim); ``h_euclidean`` is the
    Euclidean mean curvature vector (trace of the Euclidean form), only
    available from the numeric estimator or from analytic minimal data.
    """

    frame: Frame
    components: np.ndarray
    h_euclidean: np.ndarray | None = None

    @property
    def mean_curvature_components(self) -> np.ndarray:
        """H^beta = trace of the beta-th component matrix."""
        return np.array([float(np.trace(c)) for c in self.components])

    @property
    def mean_sq(self) -> float:
        h = self.mean_curvature_components
        return float(h @ h)

    @property
    def norm_sq(self) -> float:
        """|B|^2 = sum of all squared components."""
        return float(np.sum(self.components**2))

    def mean_curvature_vector(self) -> np.ndarray:
        """The sphere-ambient mean curvature vector sum_beta H^beta xi_beta."""
        return self.mean_curvature_components @ self.frame.normal

    def symmetry_residual(self) -> float:
        return float(
            np.max(np.abs(self.components - np.transpose(self.components, (0, 2, 1))))
        )


def analytic_shape_operators(point: SurfacePoint, frame: Frame | None = None) -> SecondFundamentalForm:
    """Shape operators of M_+^t from A_alpha X = -(Q_alpha X)^tangential.

    Components are the matrices -E Q_alpha E^T in the tangent basis E; the
    Euclidean mean curvature vector follows from the sphere-ambient one.
    """
    spec = point.spec
    if spec.kind != M_PLUS_T:
        raise ValueError("analytic shape operators are available on M_plus_t only")
    require_nondegenerate(spec.system)
    if frame is None:
        frame = tangent_normal_frame(point)
    tang = frame.tangent
    comps = []
    for alpha in range(spec.system.m + 1):
        q = spec.q_matrix(alpha)
        mat = -(tang @ q @ tang.T)
        comps.append(0.5 * (mat + mat.T))
    comps = np.array(comps)
    h_sphere = np.array([float(np.trace(c)) for c in comps]) @ frame.normal
    h_eucl = h_sphere - spec.dim * point.z
    return SecondFundamentalForm(frame=frame, components=comps, h_euclidean=h_eucl)


def expected_shape_spectrum(spec: ManifoldSpec, alpha: int) -> np.ndarray:
    """Sorted principal curvatures of A_alpha on M_+^t with multiplicities
    (l - m - 1, m, l - m - 1): {cot t, 0, -tan t} for alpha = 0 and
    {1, 0, -1} for alpha >= 1."""
    l, m, t = spec.system.l, spec.system.m, spec.t
    mult = l - m - 1
    if alpha == 0:
        lo, hi = -math.tan(t), 1.0 / math.tan(t)
    else:
        lo, hi = -1.0, 1.0
    return np.array([lo] * mult + [0.0] * m + [hi] * mult)


def numeric_second_fundamental_form(
    point: SurfacePoint,
    fd_step: float = 1e-4,
    frame: Frame | None = None,
    richardson: bool = False,
) -> SecondFundamentalForm:
    """Estimate the second fundamental form by quadratic finite differences.

    For tangent directions v the point ``z + s v`` is retracted back onto
    the manifold; the normal part of the second difference is B(v, v), and
    polarization recovers the off-diagonal entries.  With ``richardson``
    the step-h and step-h/2 estimates are combined to cancel the O(h^2)
    truncation term.  Components are sphere-ambient; ``h_euclidean`` keeps
    the -|v|^2 z part of the Euclidean form.
    """
    if not 1e-6 <= fd_step <= 1e-2:
        raise ValueError("fd_step must lie in [1e-6, 1e-2]")
    spec = point.spec
    if frame is None:
        frame = tangent_normal_frame(point)
    retract = retraction(spec)
    z = point.z
    tang, norm = frame.tangent, frame.normal
    n = tang.shape[0]

    def quad(v: np.ndarray, h: float) -> np.ndarray:
        return (retract(z + h * v) + retract(z - h * v) - 2.0 * z) / (h * h)

    def quad_acc(v: np.ndarray) -> np.ndarray:
        q1 = quad(v, fd_step)
        if not richardson:
            return q1
        q2 = quad(v, 0.5 * fd_step)
        return (4.0 * q2 - q1) / 3.0

    diag = [quad_acc(tang[i]) for i in range(n)]
    comps = np.zeros((norm.shape[0], n, n))
    h_eucl = np.zeros_like(z)
    for i in range(n):
        normal_coeffs = norm @ diag[i]
        comps[:, i, i] = normal_coeffs
        h_eucl += normal_coeffs @ norm + float(diag[i] @ z) * z
    for i in range(n):
        for j in range(i + 1, n):
            mixed = quad_acc(tang[i] + tang[j])
            coeffs = 0.5 * (norm @ mixed - comps[:, i, i] - comps[:, j, j])
            comps[:, i, j] = coeffs
            comps[:, j, i] = coeffs
    return SecondFundamentalForm(frame=frame, components=comps, h_euclidean=h_eucl)


# -- Lemma-style products of the normal frame fields ------------------------

def frame_product_identities(point: SurfacePoint) -> dict:
    """Residuals of the seven <Q_a Q_b z, Q_c z> identities on M_+^t.

    The right-hand sides are -2 cot 2t for <Q_0 Q_0 z, Q_0 z>, the value
    -2 delta_ab cot 2t for <Q_0 Q_a z, Q_b z>, and zero for the five mixed
    groups; indices a, b run over 1..m.
    """
    spec = point.spec
    if spec.kind != M_PLUS_T:
        raise ValueError("frame product identities hold on M_plus_t only")
    z = point.z
    m, t = spec.system.m, spec.t
    cot2t = 1.0 / math.tan(2.0 * t) if abs(t - math.pi / 4) > 1e-15 else 0.0
    q = [spec.q_matrix(alpha) for alpha in range(m + 1)]
    qz = [mat @ z for mat in q]

    res = {}
    res["q0q0_q0"] = abs(float(q[0] @ qz[0] @ qz[0]) + 2.0 * cot2t)
    res["qa_q0_q0"] = max(
        abs(float(q[a] @ qz[0] @ qz[0])) for a in range(1, m + 1)
    )
    res["q0_qa_q0"] = max(
        abs(float(q[0] @ qz[a] @ qz[0])) for a in range(1, m + 1)
    )
    res["q0q0_qa"] = max(
        abs(float(q[0] @ qz[0] @ qz[a])) for a in range(1, m + 1)
    )
    res["qa_qb_q0"] = max(
        abs(float(q[a] @ qz[b] @ qz[0]))
        for a in range(1, m + 1)
        for b in range(1, m + 1)
    )
    res["qa_q0_qb"] = max(
        abs(float(q[a] @ qz[0] @ qz[b]))
        for a in range(1, m + 1)
        for b in range(1, m + 1)
    )
    res["q0_qa_qb"] = max(
        abs(float(q[0] @ qz[a] @ qz[b]) + (2.0 * cot2t if a == b else 0.0))
        for a in range(1, m + 1)
        for b in range(1, m + 1)
    )
    res["max"] = max(res.values())
    return res


def kernel_distribution_residual(point: SurfacePoint, sff: SecondFundamentalForm | None = None) -> float:
    """Check that Span{Q_a Q_b z | b != a} is tangent and killed by A_a
    for every a >= 1; returns the worst residual."""
    spec = point.spec
    if spec.kind != M_PLUS_T:
        raise ValueError("kernel distributions are defined on M_plus_t only")
    if sff is None:
        sff = analytic_shape_operators(point)
    frame = sff.frame
    z = point.z
    m = spec.system.m
    q = [spec.q_matrix(alpha) for alpha in range(m + 1)]
    worst = 0.0
    for a in range(1, m + 1):
        for b in range(m + 1):
            if b == a:
                continue
            v = q[a] @ (q[b] @ z)
            v = v / float(np.sqrt(v @ v))
            # tangency: no component along z or the normal frame
            worst = max(worst, abs(float(v @ z)), float(np.max(np.abs(frame.normal @ v))))
            coords = frame.tangent @ v
            worst = max(worst, float(np.max(np.abs(sff.components[a] @ coords))))
    return worst


# -- scalar curvature --------------------------------------------------------

def scalar_curvature_analytic(l: int, m: int, t: float) -> float:
    """Closed-form scalar curvature of M_+^t in the unit sphere."""
    if not 0.0 < t <= math.pi / 4 + 1e-15:
        raise ValueError("t must lie in (0, pi/4]")
    if m < 1 or l - m - 1 < 1:
        raise DegenerateError("scalar curvature formula needs positive multiplicities")
    tan2 = math.tan(t) ** 2
    cot2 = 1.0 / tan2
    return (
        (2 * l - m - 2) * (2 * l - m - 3)
        - 2 * (l - m - 1) * (l - 1)
        + (l - m - 1) * (l - m - 2) * (tan2 + cot2)
    )


def scalar_curvature_numeric(sff: SecondFundamentalForm) -> float:
    """Scalar curvature from the contracted Gauss equation,
    S = n(n-1) + |H|^2 - |B|^2."""
    n = sff.frame.tangent.shape[0]
    return n * (n - 1) + sff.mean_sq - sff.norm_sq


def norm_b_sq_analytic(l: int, m: int, t: float) -> float:
    """|B|^2 of M_+^t: 2m(l-m-1) + (l-m-1)(tan^2 t + cot^2 t)."""
    tan2 = math.tan(t) ** 2
    return 2.0 * m * (l - m - 1) + (l - m - 1) * (tan2 + 1.0 / tan2)


def mean_curvature_h0(l: int, m: int, t: float) -> float:
    """Trace of A_0 on M_+^t: 2 (l - m - 1) cot 2t (all other traces vanish)."""
    return 2.0 * (l - m - 1) / math.tan(2.0 * t) if abs(t - math.pi / 4) > 1e-15 else 0.0


# -- sigma = max |B(X, X)|^2 over unit tangent vectors ----------------------

def _sigma_value(comps: np.ndarray, x: np.ndarray) -> float:
    vals = np.array([float(x @ c @ x) for c in comps])
    return float(vals @ vals)


def _sigma_ascent(comps: np.ndarray, x0: np.ndarray, iters: int = 400) -> tuple[np.ndarray, float]:
    """Projected gradient ascent for sum_beta <C_beta x, x>^2 on the unit
    sphere, with adaptive step and retraction by normalization."""
    x = x0 / float(np.sqrt(x0 @ x0))
    val = _sigma_value(comps, x)
    step = 0.5
    for _ in range(iters):
        grad = np.zeros_like(x)
        for c in comps:
            grad += 4.0 * float(x @ c @ x) * (c @ x)
        grad -= float(grad @ x) * x
        gnorm = float(np.sqrt(grad @ grad))
        if gnorm < 1e-14:
            break
        improved = False
        while step > 1e-14:
            cand = x + step * grad
            cand /= float(np.sqrt(cand @ cand))
            cand_val = _sigma_value(comps, cand)
            if cand_val > val:
                x, val = cand, cand_val
                step *= 1.3
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return x, val


def _sigma_polish(comps: np.ndarray, x: np.ndarray, iters: int = 60) -> tuple[np.ndarray, float]:
    """Alternating maximization: w <- B(x,x)/|B(x,x)|, x <- top eigenvector
    of sum_beta w_beta C_beta.  Each half-step is an exact block
    maximization, so the objective is monotone."""
    val = _sigma_value(comps, x)
    for _ in range(iters):
        w = np.array([float(x @ c @ x) for c in comps])
        wnorm = float(np.sqrt(w @ w))
        if wnorm < 1e-15:
            break
        w /= wnorm
        combined = np.tensordot(w, comps, axes=1)
        combined = 0.5 * (combined + combined.T)
        evals, evecs = symmetric_eigendecomposition(combined)
        cand = evecs[:, -1] if abs(evals[-1]) >= abs(evals[0]) else evecs[:, 0]
        cand_val = _sigma_value(comps, cand)
        if cand_val <= val + 1e-16:
            break
        x, val = cand, cand_val
    return x, val


def sigma_extrinsic(
    spec: ManifoldSpec,
    restarts: int = 100,
    seed: int = 0,
    fd_step: float = RICHARDSON_STEP,
    full_output: bool = False,
):
    """Best-found value of max |B(X, X)|^2 over unit tangent vectors.

    Defined for the two focal submanifolds: M_plus_t(pi/4), where the shape
    operators are analytic, and M_minus, where the numeric estimator (with
    Richardson extrapolation) supplies them.  Projected gradient ascent
    from ``restarts`` random unit starts, with the top candidates polished
    by alternating maximization; the result is a lower bound for sigma by
    construction.  With ``full_output`` returns ``(value, stats)`` where
    stats carries the per-restart values.
    """
    require_nondegenerate(spec.system)
    rng = np.random.default_rng(seed)
    if spec.kind == M_PLUS_T:
        if abs(spec.t - math.pi / 4) > 1e-12:
            raise ValueError("sigma is defined on the focal submanifold M_plus_t(pi/4)")
        point = sample_point(spec, rng)
        sff = analytic_shape_operators(point)
    elif spec.kind == M_MINUS:
        point = sample_point(spec, rng)
        sff = numeric_second_fundamental_form(point, fd_step=fd_step, richardson=True)
    else:
        raise ValueError("sigma is defined on M_plus_t(pi/4) or M_minus")

    comps = sff.components
    n = comps.shape[1]
    results = []
    candidates = []
    for _ in range(max(1, restarts)):
        x0 = rng.standard_normal(n)
        x, val = _sigma_ascent(comps, x0)
        results.append(val)
        candidates.append((val, x))
    candidates.sort(key=lambda pair: -pair[0])
    best_val = candidates[0][0]
    for val, x in candidates[:3]:
        _, polished = _sigma_polish(comps, x)
        best_val = max(best_val, polished)
    if full_output:
        stats = {
            "restarts": len(results),
            "restart_values": np.array(results),
            "best": best_val,
            "spread": float(np.max(results) - np.min(results)),
        }
        return best_val, stats
    return best_val


# -- isoparametric function identities (chain functions) --------------------

def isoparametric_identity_check(
    point: SurfacePoint, fd_step: float = RICHARDSON_STEP
) -> dict:
    """Residuals of |grad f|^2 = 4 (1 - f^2) and the Laplacian identity for
    the chain functions.

    On ``M_chain(i)`` (i <= m-1) the function is f(z) = <P_{i+1} z, z> with
    expected Laplacian -4 (l - i - 1) f; on ``N_chain(i)`` (i >= 2) it is
    g(z) = <P_i z, z> with expected Laplacian -4 i g.  The gradient uses the
    exact tangential projection; the Laplacian combines the ambient Hessian
    trace with the numerically estimated Euclidean mean curvature vector.
    """
    spec = point.spec
    system = spec.system
    z = point.z
    if spec.kind == M_CHAIN:
        if spec.i > system.m - 1:
            raise ValueError("the chain function on M_chain needs i <= m - 1")
        mat = system.matrices[spec.i + 1]
        lap_coeff = -4.0 * (system.l - spec.i - 1)
    elif spec.kind in (N_CHAIN, M_MINUS):
        if spec.i < 2:
            raise ValueError("the chain function on N_chain needs i >= 2")
        mat = system.matrices[spec.i]
        lap_coeff = -4.0 * spec.i
    else:
        raise ValueError("isoparametric identities apply to chain manifolds")

    frame = tangent_normal_frame(point)
    fval = float(z @ (mat @ z))
    ambient_grad = 2.0 * (mat @ z)
    tangential = frame.tangent @ ambient_grad
    grad_sq = float(tangential @ tangential)
    grad_residual = abs(grad_sq - 4.0 * (1.0 - fval * fval))

    sff = numeric_second_fundamental_form(point, fd_step=fd_step, frame=frame, richardson=True)
    hess_trace = 2.0 * float(np.sum((frame.tangent @ mat) * frame.tangent))
    laplacian = hess_trace + float(ambient_grad @ sff.h_euclidean)
    lap_residual = abs(laplacian - lap_coeff * fval)

    return {
        "value": fval,
        "grad_sq": grad_sq,
        "grad_residual": grad_residual,
        "laplacian": laplacian,
        "lap_residual": lap_residual,
    }


# -- level-set principal curvature spectra ----------------------------------

def expected_level_spectrum(spec: ManifoldSpec) -> np.ndarray:
    """Sorted expected principal curvatures of a regular level set.

    Both families share the values -sqrt((1-c)/(1+c)), 0, sqrt((1+c)/(1-c));
    the multiplicities are (l-i-2, i+1, l-i-2) for U-levels inside the
    M-chain and (i-1, l-i, i-1) for V-levels inside the N-chain.
    """
    l, i, c = spec.system.l, spec.i, spec.c
    lo = -math.sqrt((1.0 - c) / (1.0 + c))
    hi = math.sqrt((1.0 + c) / (1.0 - c))
    if spec.kind == LEVEL_U:
        mults = (l - i - 2, i + 1, l - i - 2)
    elif spec.kind == LEVEL_V:
        mults = (i - 1, l - i, i - 1)
    else:
        raise ValueError("expected spectrum applies to level sets")
    return np.array([lo] * mults[0] + [0.0] * mults[1] + [hi] * mults[2])


def level_set_spectrum(point: SurfacePoint, fd_step: float = RICHARDSON_STEP) -> np.ndarray:
    """Principal curvatures of a regular level set with respect to the unit
    normal in the gradient direction of the chain function.

    The frame construction places that normal last, so the spectrum is the
    eigenvalue list of the last component matrix of the numeric second
    fundamental form.
    """
    spec = point.spec
    if spec.kind not in (LEVEL_U, LEVEL_V):
        raise ValueError("level-set spectra apply to level_U / level_V points")
    if abs(spec.c) >= 1.0 - 1e-6:
        raise NearFocalError(f"level value c={spec.c} is within 1e-6 of a focal value")
    sff = numeric_second_fundamental_form(point, fd_step=fd_step, richardson=True)
    evals, _ = symmetric_eigendecomposition(sff.components[-1], tol=1e-13)
    return evals


# -- minimality / totally-geodesic diagnostics ------------------------------

def chain_minimality_residual(point: SurfacePoint, fd_step: float = RICHARDSON_STEP) -> float:
    """Largest |trace| of the numeric second fundamental form over all
    sphere-normal directions.  Zero means minimal in the sphere, which for
    M_chain(i) also gives minimality inside every earlier chain member
    (their extra normal directions are among the sphere normals used)."""
    sff = numeric_second_fundamental_form(point, fd_step=fd_step, richardson=True)
    return float(np.max(np.abs(sff.mean_curvature_components)))


def totally_geodesic_residual(point: SurfacePoint, fd_step: float = RICHARDSON_STEP) -> float:
    """Largest |component| of the numeric second fundamental form; zero
    means totally geodesic in the sphere (hence in every chain member)."""
    sff = numeric_second_fundamental_form(point, fd_step=fd_step, richardson=True)
    return float(np.max(np.abs(sff.components)))
