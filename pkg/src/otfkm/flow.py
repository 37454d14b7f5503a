"""The exact mean-curvature flow through the family M_+^t and its type-I
singularity diagnostics.

Writing kappa = l - m - 1, the angle beta(t) of the evolving leaf obeys

    dbeta/dt = -2 kappa cot(2 beta),
    cos 2beta(t) = cos 2beta(0) * exp(4 kappa t),

so the flow is ancient, shrinks to the singular time
T = -ln(cos 2beta(0)) / (4 kappa), and the product sup|B|^2 * (T - t)
converges to 1/2 (a type-I blow-up).  A point cloud advected by the
analytic mean curvature field cross-checks the closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .clifford import CliffordSystem
from .curvature import norm_b_sq_analytic
from .errors import DegenerateError, IntegrationError
from .manifolds import ManifoldSpec, require_nondegenerate, sample_point
from .numerics import rk4_integrate

BETA_HANDOFF = 0.01  # below this angle the ODE is stiff; use the closed form


def _kappa(l: int, m: int) -> int:
    kappa = l - m - 1
    if kappa < 1:
        raise DegenerateError(f"flow requires l - m - 1 >= 1, got {kappa}")
    return kappa


def singular_time(beta0: float, l: int, m: int) -> float:
    """T with cos 2beta(0) e^{4 kappa T} = 1; +inf for the minimal leaf
    beta0 = pi/4 (which never flows)."""
    kappa = _kappa(l, m)
    if not 0.0 < beta0 <= math.pi / 4 + 1e-15:
        raise ValueError("beta0 must lie in (0, pi/4]")
    if abs(beta0 - math.pi / 4) < 1e-15:
        return math.inf
    return -math.log(math.cos(2.0 * beta0)) / (4.0 * kappa)


def beta_closed_form(beta0: float, l: int, m: int, t: float) -> float:
    """The angle beta(t) in (0, pi/4); defined for all t < T (ancient)."""
    kappa = _kappa(l, m)
    if not 0.0 < beta0 < math.pi / 4:
        raise ValueError("beta0 must lie in (0, pi/4)")
    horizon = singular_time(beta0, l, m)
    if t >= horizon:
        raise ValueError(f"t = {t} is not before the singular time T = {horizon}")
    return 0.5 * math.acos(math.cos(2.0 * beta0) * math.exp(4.0 * kappa * t))


def beta_rate(beta: float, l: int, m: int) -> float:
    """dbeta/dt = -2 (l - m - 1) cot 2beta."""
    return -2.0 * _kappa(l, m) / math.tan(2.0 * beta)


def sup_b_sq(beta: float, l: int, m: int) -> float:
    """sup |B|^2 over the leaf at angle beta (constant on the leaf)."""
    return norm_b_sq_analytic(l, m, beta)


@dataclass(frozen=True)
class FlowConfig:
    """Parameters of a flow run; ``beta0 = pi/4`` is the stationary leaf."""

    system: CliffordSystem
    beta0: float
    dt: float = 1e-4
    n_points: int = 200
    seed: int = 0

    def __post_init__(self):
        require_nondegenerate(self.system)
        if not 0.0 < self.beta0 <= math.pi / 4 + 1e-15:
            raise ValueError("beta0 must lie in (0, pi/4]")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")

    @property
    def kappa(self) -> int:
        return _kappa(self.system.l, self.system.m)

    @property
    def singular_time(self) -> float:
        return singular_time(self.beta0, self.system.l, self.system.m)


@dataclass(frozen=True)
class BetaTrajectory:
    ts: np.ndarray
    betas: np.ndarray
    truncated: bool = False


def integrate_beta(config: FlowConfig, t_end: float, store_every: int = 1) -> BetaTrajectory:
    """RK4 integration of the scalar angle ODE up to ``t_end``.

    If the requested horizon would step across the singular time the
    integration is truncated at T - dt and flagged.
    """
    horizon = config.singular_time
    truncated = False
    if t_end >= horizon - config.dt:
        t_end = horizon - config.dt
        truncated = True
    l, m = config.system.l, config.system.m

    def fun(_t: float, y: np.ndarray) -> np.ndarray:
        return np.array([beta_rate(float(y[0]), l, m)])

    ts, ys = rk4_integrate(fun, np.array([config.beta0]), 0.0, t_end, config.dt, store_every)
    return BetaTrajectory(ts=ts, betas=ys[:, 0], truncated=truncated)


@dataclass(frozen=True)
class FlowState:
    """Cloud snapshot of the flow at one time."""

    config: FlowConfig
    time: float
    beta: float
    cloud: np.ndarray
    base_points: np.ndarray = field(repr=False)
    T: float = math.inf
    beta_spread: float = 0.0
    max_constraint_residual: float = 0.0

    @property
    def consistent(self) -> bool:
        """Per-point recovered angles agree to 1e-10."""
        return self.beta_spread <= 1e-10


def sample_base_cloud(config: FlowConfig) -> np.ndarray:
    """Points (x, y) on M_+ = M_+^{pi/4}, so |x| = |y| = 1/sqrt(2)."""
    spec = ManifoldSpec.m_plus(config.system, math.pi / 4)
    rng = np.random.default_rng(config.seed)
    return np.array([sample_point(spec, rng).z for _ in range(config.n_points)])


def cloud_at_angle(base: np.ndarray, beta: float, l: int) -> np.ndarray:
    """The exact leaf positions (sqrt2 cos(beta) x, sqrt2 sin(beta) y)."""
    out = np.empty_like(base)
    out[:, :l] = math.sqrt(2.0) * math.cos(beta) * base[:, :l]
    out[:, l:] = math.sqrt(2.0) * math.sin(beta) * base[:, l:]
    return out


def recovered_betas(cloud: np.ndarray, l: int) -> np.ndarray:
    """Per-point angle from the second block: beta = arcsin(|y-part|)."""
    norms = np.sqrt(np.sum(cloud[:, l:] ** 2, axis=1))
    return np.arcsin(np.clip(norms, 0.0, 1.0))


def mean_curvature_field(cloud: np.ndarray, l: int, m: int) -> np.ndarray:
    """The analytic mean curvature vector of the leaf through each point:
    H(u, v) = 2 kappa cot(2 beta) (tan(beta) u, -cot(beta) v)."""
    kappa = l - m - 1
    betas = recovered_betas(cloud, l)
    cot2b = 1.0 / np.tan(2.0 * betas)
    tanb = np.tan(betas)
    out = np.empty_like(cloud)
    out[:, :l] = (2.0 * kappa * cot2b * tanb)[:, None] * cloud[:, :l]
    out[:, l:] = (-2.0 * kappa * cot2b / tanb)[:, None] * cloud[:, l:]
    return out


def flow_point_cloud(config: FlowConfig, t_end: float) -> FlowState:
    """Advect a seeded cloud from the leaf at angle beta0 by dz/dt = H(z).

    The ambient integration runs while beta > BETA_HANDOFF; past that the
    closed form (exact for this flow) carries the positions, which keeps
    the stiff tail out of the integrator.  For beta0 = pi/4 the cloud is
    stationary (H = 0) and t_end may be arbitrary.
    """
    system = config.system
    l, m = system.l, system.m
    base = sample_base_cloud(config)
    start = cloud_at_angle(base, config.beta0, l)

    horizon = config.singular_time
    if math.isinf(horizon):
        # minimal leaf: stationary solution
        return FlowState(
            config=config, time=t_end, beta=config.beta0, cloud=start,
            base_points=base, T=horizon, beta_spread=float(np.ptp(recovered_betas(start, l))),
            max_constraint_residual=_leaf_residual(config, start, config.beta0),
        )
    if t_end >= horizon:
        raise ValueError(f"t_end = {t_end} is not before the singular time T = {horizon}")

    # time at which the closed-form angle reaches the handoff threshold
    tau_handoff = -math.log(math.cos(2.0 * BETA_HANDOFF)) / (4.0 * config.kappa)
    t_handoff = horizon - tau_handoff
    t_ambient = min(t_end, t_handoff)

    cloud = start
    if t_ambient > 0.0:
        def fun(_t: float, y: np.ndarray) -> np.ndarray:
            return mean_curvature_field(y.reshape(config.n_points, 2 * l), l, m).reshape(-1)

        _, ys = rk4_integrate(fun, start.reshape(-1), 0.0, t_ambient, config.dt, store_every=10**9)
        cloud = ys[-1].reshape(config.n_points, 2 * l)

    if t_end > t_ambient:
        # hand off: rescale blocks exactly to the closed-form angle
        beta_end = beta_closed_form(config.beta0, l, m, t_end)
        cloud = cloud_at_angle(base, beta_end, l)

    beta_expected = beta_closed_form(config.beta0, l, m, t_end)
    betas = recovered_betas(cloud, l)
    spread = float(np.ptp(betas))
    residual = _leaf_residual(config, cloud, float(np.mean(betas)))
    if residual > 1e-6:
        raise IntegrationError(f"cloud drifted off the leaf: residual {residual:.3e}")
    return FlowState(
        config=config, time=t_end, beta=beta_expected, cloud=cloud,
        base_points=base, T=horizon, beta_spread=spread,
        max_constraint_residual=residual,
    )


def _leaf_residual(config: FlowConfig, cloud: np.ndarray, beta: float) -> float:
    """Worst defining-constraint residual of the cloud against M_+^beta."""
    spec = ManifoldSpec.m_plus(config.system, beta)
    return max(spec.constraint_residual(z) for z in cloud)


def closed_form_cloud(config: FlowConfig, base: np.ndarray, t: float) -> np.ndarray:
    beta = beta_closed_form(config.beta0, config.system.l, config.system.m, t)
    return cloud_at_angle(base, beta, config.system.l)


def blowup_profile(config: FlowConfig, levels: int = 24) -> dict:
    """The product sup|B|^2 (T - t) on the dyadic grid t_j = T (1 - 2^{-j})
    and its Richardson extrapolation (expected limit: 1/2).

    Also reports the product at t = 0 (exactly |B|^2(beta0) * T) and the
    empirical constant C = sup of the product over the grid.
    """
    horizon = config.singular_time
    if math.isinf(horizon):
        raise ValueError("blow-up analysis needs a finite singular time (beta0 < pi/4)")
    l, m = config.system.l, config.system.m
    taus = horizon * 0.5 ** np.arange(1, levels + 1)
    products = np.array(
        [sup_b_sq(beta_closed_form(config.beta0, l, m, horizon - tau), l, m) * tau for tau in taus]
    )
    # Richardson on the halving grid: successive columns cancel tau^s terms.
    table = [products]
    for s in range(1, 7):
        prev = table[-1]
        factor = 2.0**s
        table.append((factor * prev[1:] - prev[:-1]) / (factor - 1.0))
    extrapolated = float(table[-1][-1])
    product_at_zero = sup_b_sq(config.beta0, l, m) * horizon
    return {
        "T": horizon,
        "taus": taus,
        "products": products,
        "extrapolated_limit": extrapolated,
        "product_at_zero": product_at_zero,
        "empirical_C": float(max(np.max(products), product_at_zero)),
    }


def convergence_check(state: FlowState) -> dict:
    """Distance of the cloud to the limit sphere {(x, 0) : |x| = 1}.

    Must be called near the singular time (within 1e-3).  The closed form
    gives distance = 2 sin(beta/2) <= 2 sin(beta) for every point.
    """
    if not math.isfinite(state.T) or state.T - state.time > 1e-3:
        raise ValueError("convergence check applies within 1e-3 of the singular time")
    l = state.config.system.l
    xnorm = np.sqrt(np.sum(state.cloud[:, :l] ** 2, axis=1))
    ynorm = np.sqrt(np.sum(state.cloud[:, l:] ** 2, axis=1))
    dists = np.sqrt((xnorm - 1.0) ** 2 + ynorm**2)
    return {
        "max_distance": float(np.max(dists)),
        "bound": 2.0 * math.sin(state.beta),
        "beta": state.beta,
    }


def trajectory_rows(config: FlowConfig, t_end: float | None = None, n_rows: int = 50) -> list[dict]:
    """Sampled flow diagnostics for export: t, beta, sup|B|^2, the type-I
    product, and the cloud constraint residual at checkpoints."""
    horizon = config.singular_time
    if t_end is None:
        t_end = 0.9 * horizon if math.isfinite(horizon) else 1.0
    l, m = config.system.l, config.system.m
    base = sample_base_cloud(config)
    times = np.linspace(0.0, t_end, n_rows)
    rows = []
    for t in times:
        if math.isfinite(horizon):
            beta = beta_closed_form(config.beta0, l, m, float(t))
        else:
            beta = config.beta0
        state_cloud = cloud_at_angle(base, beta, l)
        rows.append(
            {
                "t": float(t),
                "beta": beta,
                "sup_B2": sup_b_sq(beta, l, m),
                "product": sup_b_sq(beta, l, m) * (horizon - float(t)) if math.isfinite(horizon) else math.inf,
                "cloud_residual": _leaf_residual(config, state_cloud, beta),
            }
        )
    return rows
