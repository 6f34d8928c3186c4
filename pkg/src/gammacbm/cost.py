"""Inspection and repair cost processes tied to the degradation components.

The cumulative variable cost ``U(t) = sum_k c_k X_k(t)`` shares the gamma
components of the degradation level ``Y(t)``, so the pair ``(Y, U)`` is
dependent.  The conditional cost density given an observed level is
recovered by inverting their joint characteristic function on a truncated
plane with Gauss-Legendre quadrature, doubling node counts until the
profile stabilises.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.special import roots_legendre

from .degradation import (
    GammaProcessSpec,
    LinearCombination,
    moschopoulos_expand,
    overall_pdf,
)
from .errors import DomainError, NumericalError

CF_BOUNDARY_FLOOR = 1e-8
NEGATIVE_RIPPLE_TOL = 1e-6


class CostKind(Enum):
    """How the variable repair cost of a defect depends on its level."""

    CONSTANT = "constant"
    LINEAR = "linear"
    QUADRATIC = "quadratic"


class NumericalWarning(RuntimeWarning):
    """Raised as a warning when a numerical artefact was detected and handled."""


@dataclass(frozen=True)
class CostStructure:
    """Cost parameters of the maintenance policy.

    ``fixed`` and ``variable_rates`` are per defect type, aligned with the
    combination's component order.  ``budget`` caps the variable cost rate
    when present.
    """

    inspection: float
    fixed: tuple[float, ...]
    variable_kind: CostKind
    variable_rates: tuple[float, ...]
    threshold_penalty: float
    replacement: float
    budget: float | None = None

    def __post_init__(self):
        if len(self.fixed) != len(self.variable_rates):
            raise DomainError(
                f"{len(self.fixed)} fixed costs for "
                f"{len(self.variable_rates)} variable rates"
            )
        for name in ("inspection", "threshold_penalty", "replacement"):
            if getattr(self, name) < 0.0:
                raise DomainError(f"{name} cost must be non-negative")
        if any(v < 0.0 for v in self.fixed) or any(
            v < 0.0 for v in self.variable_rates
        ):
            raise DomainError("per-defect costs must be non-negative")
        if self.budget is not None and not self.budget > 0.0:
            raise DomainError(f"budget must be positive, got {self.budget}")

    @property
    def size(self) -> int:
        return len(self.fixed)


@dataclass(frozen=True)
class QuadratureSpec:
    """Controls for the 2-D characteristic-function inversion.

    ``radius`` fixes the truncation half-widths ``(R1, R2)``; when None
    they are chosen so the CF magnitude has decayed to CF_BOUNDARY_FLOOR
    along each axis.
    """

    radius: tuple[float, float] | None = None
    initial_nodes: int = 128
    max_doublings: int = 6
    rel_tol: float = 1e-4

    def __post_init__(self):
        if self.radius is not None:
            r1, r2 = self.radius
            if not (r1 > 0.0 and r2 > 0.0):
                raise DomainError(f"radius must be positive, got {self.radius}")
        if self.initial_nodes < 8:
            raise DomainError("initial_nodes must be at least 8")
        if self.max_doublings < 0:
            raise DomainError("max_doublings must be non-negative")
        if not self.rel_tol > 0.0:
            raise DomainError("rel_tol must be positive")


def _check_alignment(combo: LinearCombination, costs: CostStructure):
    if costs.size != combo.size:
        raise DomainError(
            f"cost structure covers {costs.size} defect types but the "
            f"combination has {combo.size}"
        )


def cost_combination(
    combo: LinearCombination, costs: CostStructure
) -> LinearCombination:
    """The cumulative cost process as a combination of the same components.

    Only meaningful when the variable cost is linear in the defect level.
    """
    _check_alignment(combo, costs)
    if costs.variable_kind is not CostKind.LINEAR:
        raise DomainError(
            "cost_combination requires a linear variable cost, got "
            f"{costs.variable_kind.value}"
        )
    return LinearCombination(costs.variable_rates, combo.processes)


def cov_yu(combo: LinearCombination, costs: CostStructure, t: float) -> float:
    """Covariance of the degradation level and cumulative cost at time t."""
    _check_alignment(combo, costs)
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    total = 0.0
    for b, c, proc in zip(combo.weights, costs.variable_rates, combo.processes):
        total += b * c * proc.shape_at(t) * proc.scale**2
    return total


def joint_cf(combo: LinearCombination, costs: CostStructure, t: float, t1, t2):
    """Joint characteristic function of (level, cost) at time t.

    Accepts scalars or broadcastable arrays for the two frequency
    arguments; complex powers use the principal branch.
    """
    _check_alignment(combo, costs)
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    t1_arr = np.asarray(t1, dtype=float)
    t2_arr = np.asarray(t2, dtype=float)
    log_acc = np.zeros(np.broadcast(t1_arr, t2_arr).shape, dtype=complex)
    for b, c, proc in zip(combo.weights, costs.variable_rates, combo.processes):
        s = (b * t1_arr + c * t2_arr) * proc.scale
        log_acc -= proc.shape_at(t) * np.log(1.0 - 1j * s)
    value = np.exp(log_acc)
    if np.isscalar(t1) and np.isscalar(t2):
        return complex(value)
    return value


def expected_variable_cost(
    proc: GammaProcessSpec,
    rate: float,
    kind: CostKind,
    horizon: float,
    scale_factor: float = 1.0,
) -> float:
    """Expected variable repair cost of one defect observed at the horizon.

    ``scale_factor`` multiplies the process scale, as happens after
    imperfect repairs.  Closed forms: constant cost is the rate itself,
    linear cost is rate times the mean level, quadratic cost is rate times
    the second moment.
    """
    if rate < 0.0:
        raise DomainError(f"rate must be non-negative, got {rate}")
    if not horizon > 0.0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if not scale_factor > 0.0:
        raise DomainError(f"scale_factor must be positive, got {scale_factor}")
    if kind is CostKind.CONSTANT:
        return rate
    shape = proc.shape_at(horizon)
    scale = proc.scale * scale_factor
    if kind is CostKind.LINEAR:
        return rate * shape * scale
    if kind is CostKind.QUADRATIC:
        return rate * scale**2 * (shape + shape**2)
    raise DomainError(f"unknown cost kind {kind!r}")


def _axis_radius(decay, floor: float) -> float:
    """Smallest radius at which a monotone CF-magnitude profile drops below floor."""
    lo, hi = 0.0, 1.0
    for _ in range(80):
        if decay(hi) < floor:
            break
        lo, hi = hi, hi * 4.0
    else:
        raise NumericalError(
            "characteristic function does not decay along a quadrature axis; "
            "supply an explicit radius"
        )
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if decay(mid) < floor:
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-9 * hi:
            break
    return hi


def _cf_abs_axis(combo, costs, t, axis: int):
    weights = combo.weights if axis == 0 else costs.variable_rates

    def decay(r: float) -> float:
        log_abs = 0.0
        for w, proc in zip(weights, combo.processes):
            log_abs -= 0.5 * proc.shape_at(t) * math.log1p((w * proc.scale * r) ** 2)
        return math.exp(log_abs)

    return decay


def _inversion_radii(combo, costs, t, quad: QuadratureSpec) -> tuple[float, float]:
    if quad.radius is not None:
        return quad.radius
    r1 = _axis_radius(_cf_abs_axis(combo, costs, t, 0), CF_BOUNDARY_FLOOR)
    r2 = _axis_radius(_cf_abs_axis(combo, costs, t, 1), CF_BOUNDARY_FLOOR)
    return r1, r2


def _gauss_nodes(n: int, radius: float) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(n)
    return x * radius, w * radius


_MAX_AXIS_NODES = 1 << 15


def _starting_nodes(
    combo, costs, t, y: float, u_max: float, radii, floor: int
) -> tuple[int, int]:
    """Initial node counts per axis, scaled to resolve the phase oscillation.

    Along each axis the integrand oscillates no faster than the conjugate
    variable plus the CF's own phase rate (bounded by the process mean).
    Legendre nodes are spaced about pi/n mid-interval, so resolving a
    total phase of R*V radians needs roughly R*V nodes plus a margin.
    """
    mean_y = _weighted_mean(combo, combo.weights, t)
    mean_u = _weighted_mean(combo, costs.variable_rates, t)
    n1 = int(max(floor, 1.15 * radii[0] * (y + mean_y) + 64))
    n2 = int(max(floor, 1.15 * radii[1] * (u_max + mean_u) + 64))
    if max(n1, n2) > _MAX_AXIS_NODES:
        raise NumericalError(
            f"inversion would need about {max(n1, n2)} nodes per axis; "
            "supply an explicit (smaller) radius or narrower evaluation grid"
        )
    return n1, n2


def _weighted_mean(combo, weights, t) -> float:
    w = np.asarray(weights)
    scales = np.array([p.scale for p in combo.processes])
    return float(np.sum(w * scales * combo.shapes_at(t)))


def _joint_profile(
    combo: LinearCombination,
    costs: CostStructure,
    t: float,
    y: float,
    u: np.ndarray,
    nodes: tuple[int, int],
    radii: tuple[float, float],
) -> np.ndarray:
    """Joint density f(y, u) on a u-grid by truncated 2-D Fourier inversion.

    Conjugate symmetry of the CF folds the plane integral onto the
    half-plane of positive level frequencies, doubling the real part.
    """
    x1, w1 = _gauss_nodes(nodes[0], radii[0])
    x2, w2 = _gauss_nodes(nodes[1], radii[1])
    positive = x1 > 0.0
    x1, w1 = x1[positive], w1[positive]

    b = np.asarray(combo.weights)
    c = np.asarray(costs.variable_rates)
    shapes = combo.shapes_at(t)
    scales = np.array([p.scale for p in combo.processes])

    n2 = len(x2)
    acc_re = np.zeros(n2)
    acc_im = np.zeros(n2)
    block = 64
    buf_s = np.empty((block, n2))
    buf_t = np.empty((block, n2))
    buf_lm = np.empty((block, n2))
    buf_ph = np.empty((block, n2))
    buf_cos = np.empty((block, n2))
    buf_sin = np.empty((block, n2))
    for start in range(0, len(x1), block):
        t1 = x1[start : start + block, None]
        wt1 = w1[start : start + block]
        m = len(wt1)
        s, tmp = buf_s[:m], buf_t[:m]
        lm, ph = buf_lm[:m], buf_ph[:m]
        lm.fill(0.0)
        np.multiply(t1, -y, out=ph[:, :1])
        ph[:] = ph[:, :1]
        for bk, ck, ak, sk in zip(b, c, shapes, scales):
            np.multiply(x2[None, :], ck * sk, out=s)
            s += t1 * (bk * sk)
            np.multiply(s, s, out=tmp)
            np.log1p(tmp, out=tmp)
            tmp *= 0.5 * ak
            lm -= tmp
            np.arctan(s, out=s)
            s *= ak
            ph += s
        np.exp(lm, out=lm)
        np.cos(ph, out=buf_cos[:m])
        np.sin(ph, out=buf_sin[:m])
        buf_cos[:m] *= lm
        buf_sin[:m] *= lm
        acc_re += wt1 @ buf_cos[:m]
        acc_im += wt1 @ buf_sin[:m]
    acc = acc_re + 1j * acc_im
    phase_u = np.exp(-1j * np.outer(x2, u))
    values = 2.0 * np.real((w2 * acc) @ phase_u) / (4.0 * math.pi**2)
    return values


def conditional_cost_pdf(
    combo: LinearCombination,
    costs: CostStructure,
    t: float,
    y: float,
    u,
    quad: QuadratureSpec | None = None,
):
    """Density of the cumulative cost given the observed level at time t.

    ``u`` may be a scalar or an array of cost values, evaluated in one
    inversion pass.  Negative ripple within NEGATIVE_RIPPLE_TOL of zero is
    clamped; anything beyond it is kept signed (so oscillatory tails of
    near-degenerate combinations still integrate correctly) and reported
    through a NumericalWarning.
    """
    _check_alignment(combo, costs)
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if not y > 0.0:
        raise DomainError(f"level y must be positive, got {y}")
    u_arr = np.asarray(u, dtype=float)
    if np.any(u_arr <= 0.0):
        raise DomainError("cost u must be positive")
    if quad is None:
        quad = QuadratureSpec()

    marginal = overall_pdf(moschopoulos_expand(combo, t), y)
    if marginal <= 0.0:
        raise NumericalError(
            f"marginal level density underflows at y={y}; cannot condition"
        )

    radii = _inversion_radii(combo, costs, t, quad)
    u_flat = np.atleast_1d(u_arr).ravel()
    nodes = _starting_nodes(
        combo, costs, t, y, float(u_flat.max()), radii, quad.initial_nodes
    )
    profile = _joint_profile(combo, costs, t, y, u_flat, nodes, radii)
    for _ in range(quad.max_doublings):
        nodes = (nodes[0] * 2, nodes[1] * 2)
        if max(nodes) > _MAX_AXIS_NODES:
            raise NumericalError(
                "inversion did not stabilise below the node-count cap; "
                "supply an explicit radius or coarser tolerance"
            )
        refined = _joint_profile(combo, costs, t, y, u_flat, nodes, radii)
        scale = max(np.max(np.abs(refined)), 1e-300)
        if np.max(np.abs(refined - profile)) <= quad.rel_tol * scale:
            profile = refined
            break
        profile = refined
    else:
        raise NumericalError(
            f"inversion did not stabilise within {quad.max_doublings} "
            f"node doublings (last node counts {nodes})"
        )

    values = profile / marginal
    worst = float(values.min()) if values.size else 0.0
    if worst < -NEGATIVE_RIPPLE_TOL:
        warnings.warn(
            f"inversion produced negative density down to {worst:.3e}; "
            "values beyond the ripple tolerance are kept signed",
            NumericalWarning,
        )
    # Tiny negative ripple is numerical noise; zeroing it keeps densities
    # usable without disturbing integrals.  Larger oscillation (degenerate
    # combinations) must stay signed so cancellation is preserved.
    values = np.where((values < 0.0) & (values > -NEGATIVE_RIPPLE_TOL), 0.0, values)
    if np.isscalar(u) or u_arr.ndim == 0:
        return float(values[0])
    return values.reshape(u_arr.shape)
