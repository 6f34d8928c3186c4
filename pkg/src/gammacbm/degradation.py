"""Weighted sums of independent gamma degradation processes.

A system degrades as ``Y(t) = sum_k b_k X_k(t)`` where each ``X_k`` is a
gamma process with power-law shape ``a_k t^p_k`` and scale ``s_k``.  The
law of ``Y(t)`` at a fixed time is represented exactly as an infinite
mixture of gamma distributions sharing the smallest weighted scale
(Moschopoulos' expansion); truncating once the mixture mass is within a
tail tolerance of one gives densities, survival probabilities and first
hitting-time distributions with controlled error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaincc, gammaln

from .errors import DomainError, TruncationError
from .rng import RngStream
from .special import regularized_upper_gamma

MAX_EXPANSION_TERMS = 100_000
DEFAULT_TAIL_TOL = 1e-10

# Rescale the recursion workspace when coefficients exceed this magnitude,
# so extreme shape totals cannot overflow intermediate terms.
_RESCALE_LIMIT = 1e250


@dataclass(frozen=True)
class GammaProcessSpec:
    """A gamma process with shape ``shape_coeff * t**shape_power`` and a fixed scale."""

    shape_coeff: float
    shape_power: float
    scale: float

    def __post_init__(self):
        if not self.shape_coeff > 0.0:
            raise DomainError(f"shape_coeff must be positive, got {self.shape_coeff}")
        if not self.shape_power > 0.0:
            raise DomainError(f"shape_power must be positive, got {self.shape_power}")
        if not self.scale > 0.0:
            raise DomainError(f"scale must be positive, got {self.scale}")

    def shape_at(self, t: float) -> float:
        """Shape parameter accumulated by time t."""
        return self.shape_coeff * t**self.shape_power

    def with_scale(self, scale: float) -> "GammaProcessSpec":
        return GammaProcessSpec(self.shape_coeff, self.shape_power, scale)


@dataclass(frozen=True)
class LinearCombination:
    """An ordered set of gamma processes combined with non-negative weights."""

    weights: tuple[float, ...]
    processes: tuple[GammaProcessSpec, ...]

    def __post_init__(self):
        if len(self.weights) != len(self.processes):
            raise DomainError(
                f"{len(self.weights)} weights for {len(self.processes)} processes"
            )
        if not self.processes:
            raise DomainError("combination needs at least one process")
        if any(w < 0.0 for w in self.weights):
            raise DomainError(f"weights must be non-negative, got {self.weights}")
        if not any(w > 0.0 for w in self.weights):
            raise DomainError("at least one weight must be positive")

    @classmethod
    def of_pairs(cls, pairs) -> "LinearCombination":
        weights, processes = zip(*pairs)
        return cls(tuple(float(w) for w in weights), tuple(processes))

    @property
    def size(self) -> int:
        return len(self.weights)

    def pruned(self) -> "LinearCombination":
        """Drop zero-weight components (they contribute nothing to the sum)."""
        pairs = [
            (w, p) for w, p in zip(self.weights, self.processes) if w > 0.0
        ]
        if len(pairs) == self.size:
            return self
        return LinearCombination.of_pairs(pairs)

    def effective_scales(self) -> np.ndarray:
        """Scale of each weighted component ``w_k * X_k``."""
        return np.array(
            [w * p.scale for w, p in zip(self.weights, self.processes)]
        )

    def shapes_at(self, t: float) -> np.ndarray:
        return np.array([p.shape_at(t) for p in self.processes])

    def scaled(self, factor: float) -> "LinearCombination":
        """Multiply every process scale by a common factor."""
        if not factor > 0.0:
            raise DomainError(f"scale factor must be positive, got {factor}")
        return LinearCombination(
            self.weights,
            tuple(p.with_scale(p.scale * factor) for p in self.processes),
        )


def gamma_pdf(x, shape: float, scale: float):
    """Gamma density with the given shape and scale; zero for x <= 0.

    Evaluated in log space so large shapes and extreme arguments underflow
    gracefully instead of overflowing.
    """
    if not shape > 0.0:
        raise DomainError(f"shape must be positive, got {shape}")
    if not scale > 0.0:
        raise DomainError(f"scale must be positive, got {scale}")
    x_arr = np.asarray(x, dtype=float)
    out = np.zeros_like(x_arr)
    pos = x_arr > 0.0
    if np.any(pos):
        xp = x_arr[pos]
        log_pdf = (
            (shape - 1.0) * np.log(xp)
            - xp / scale
            - math.lgamma(shape)
            - shape * math.log(scale)
        )
        out[pos] = np.exp(log_pdf)
    if np.isscalar(x) or x_arr.ndim == 0:
        return float(out)
    return out


def combo_moments(combo: LinearCombination, t: float) -> tuple[float, float]:
    """Mean and variance of the combined level at time t."""
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    w = np.asarray(combo.weights)
    scales = np.array([p.scale for p in combo.processes])
    shapes = combo.shapes_at(t)
    mean = float(np.sum(w * scales * shapes))
    var = float(np.sum(w**2 * scales**2 * shapes))
    return mean, var


@dataclass(frozen=True)
class MoschopoulosExpansion:
    """Truncated gamma-mixture representation of a combined level at one time.

    The law is ``sum_k weights[k] * Gamma(shape_total + k, base_scale)``
    with ``weights`` summing to one up to ``tail_tol``.  ``series_coeffs``
    are the raw recursion coefficients (first one is exactly 1) and
    ``log_norm`` the log of the constant relating them to the weights.
    """

    base_scale: float
    shape_total: float
    log_norm: float
    weights: np.ndarray
    tail_tol: float

    @property
    def truncation_order(self) -> int:
        return len(self.weights) - 1

    @property
    def mass(self) -> float:
        return float(np.sum(self.weights))

    @property
    def norm_const(self) -> float:
        return math.exp(self.log_norm)

    @property
    def series_coeffs(self) -> np.ndarray:
        with np.errstate(over="ignore"):
            return self.weights * math.exp(-self.log_norm)


def _expand(
    eff_scales: tuple[float, ...],
    shapes: tuple[float, ...],
    tail_tol: float,
    max_terms: int,
) -> MoschopoulosExpansion:
    scales = np.asarray(eff_scales)
    alphas = np.asarray(shapes)
    base_scale = float(scales.min())
    ratios = base_scale / scales
    shape_total = float(alphas.sum())
    log_norm = float(np.sum(alphas * np.log(ratios)))

    # Recursion workspace.  True coefficient k is zeta[k] * exp(log_shift);
    # the workspace is rescaled whenever entries grow past _RESCALE_LIMIT.
    cap = 1024
    zeta = np.zeros(cap)
    weighted_eta = np.zeros(cap + 1)  # entry m holds m * eta_m
    zeta[0] = 1.0
    log_shift = 0.0
    one_minus_r = 1.0 - ratios
    ratio_pows = np.ones_like(ratios)

    mass = math.exp(log_norm)  # weight of term 0
    weights = [mass]
    k = 0
    while mass < 1.0 - tail_tol:
        if k + 1 > max_terms:
            raise TruncationError(
                f"series mass {mass:.3e} short of {1.0 - tail_tol} "
                f"after {max_terms} terms",
                achieved_mass=mass,
            )
        if k + 1 >= cap:
            cap *= 2
            zeta = np.concatenate([zeta, np.zeros(cap - len(zeta))])
            weighted_eta = np.concatenate(
                [weighted_eta, np.zeros(cap + 1 - len(weighted_eta))]
            )
        ratio_pows *= one_minus_r
        weighted_eta[k + 1] = float(np.sum(alphas * ratio_pows))
        convolution = float(
            np.dot(weighted_eta[1 : k + 2], zeta[k::-1])
        )
        zeta_next = convolution / (k + 1)
        k += 1
        if zeta_next > _RESCALE_LIMIT:
            zeta[:k] *= 1e-250
            zeta_next *= 1e-250
            log_shift += 250.0 * math.log(10.0)
        zeta[k] = zeta_next
        weight = zeta_next * math.exp(log_norm + log_shift)
        weights.append(weight)
        mass += weight

    return MoschopoulosExpansion(
        base_scale=base_scale,
        shape_total=shape_total,
        log_norm=log_norm,
        weights=np.array(weights),
        tail_tol=tail_tol,
    )


@lru_cache(maxsize=512)
def _expand_cached(eff_scales, shapes, tail_tol, max_terms):
    return _expand(eff_scales, shapes, tail_tol, max_terms)


def moschopoulos_expand(
    combo: LinearCombination,
    t: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
    max_terms: int = MAX_EXPANSION_TERMS,
) -> MoschopoulosExpansion:
    """Expand the law of the combined level at time t as a gamma mixture.

    Terms are added until the retained mixture mass reaches
    ``1 - tail_tol``; raises TruncationError if ``max_terms`` is hit first.
    """
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    if not 0.0 < tail_tol < 1.0:
        raise DomainError(f"tail_tol must lie in (0, 1), got {tail_tol}")
    active = combo.pruned()
    eff_scales = tuple(float(v) for v in active.effective_scales())
    shapes = tuple(float(v) for v in active.shapes_at(t))
    return _expand_cached(eff_scales, shapes, float(tail_tol), int(max_terms))


def overall_pdf(expansion: MoschopoulosExpansion, y):
    """Density of the combined level, evaluated from its expansion."""
    y_arr = np.asarray(y, dtype=float)
    if np.any(y_arr <= 0.0):
        raise DomainError("overall_pdf requires y > 0")
    y_flat = np.atleast_1d(y_arr).ravel()
    k = np.arange(len(expansion.weights))
    shapes = expansion.shape_total + k
    with np.errstate(divide="ignore"):
        log_w = np.log(expansion.weights)
    log_terms = (
        log_w[:, None]
        + (shapes[:, None] - 1.0) * np.log(y_flat[None, :])
        - y_flat[None, :] / expansion.base_scale
        - gammaln(shapes)[:, None]
        - shapes[:, None] * math.log(expansion.base_scale)
    )
    values = np.exp(log_terms).sum(axis=0)
    if np.isscalar(y) or y_arr.ndim == 0:
        return float(values[0])
    return values.reshape(y_arr.shape)


def _survival_terms(expansion: MoschopoulosExpansion, threshold: float) -> np.ndarray:
    """Upper tail of each mixture term at the threshold.

    Uses the stable forward recurrence for the regularised upper gamma in
    the shape parameter: all increments are positive, so no cancellation.
    """
    n_terms = len(expansion.weights)
    x = threshold / expansion.base_scale
    if x == 0.0:
        return np.ones(n_terms)
    base = regularized_upper_gamma(expansion.shape_total, x)
    shapes = expansion.shape_total + np.arange(n_terms - 1)
    log_inc = shapes * math.log(x) - x - gammaln(shapes + 1.0)
    tails = base + np.concatenate([[0.0], np.cumsum(np.exp(log_inc))])
    return np.minimum(tails, 1.0)


def overall_survival(expansion: MoschopoulosExpansion, threshold: float) -> float:
    """Probability that the combined level is at or above the threshold."""
    if threshold < 0.0:
        raise DomainError(f"threshold must be non-negative, got {threshold}")
    value = float(np.dot(expansion.weights, _survival_terms(expansion, threshold)))
    return min(max(value, 0.0), 1.0)


def overall_survival_many(expansion: MoschopoulosExpansion, thresholds) -> np.ndarray:
    """Survival probabilities for a vector of thresholds in one pass.

    Broadcasts the same forward recurrence as ``overall_survival`` over the
    thresholds, chunked so the (terms x thresholds) workspace stays small.
    """
    values = np.asarray(thresholds, dtype=float)
    if np.any(values < 0.0):
        raise DomainError("thresholds must be non-negative")
    flat = np.atleast_1d(values).ravel()
    n_terms = len(expansion.weights)
    out = np.empty(flat.size)
    chunk = max(1, (1 << 22) // max(n_terms, 1))
    shapes = expansion.shape_total + np.arange(n_terms - 1)
    log_gamma_shapes = gammaln(shapes + 1.0)
    for start in range(0, flat.size, chunk):
        x = flat[start : start + chunk] / expansion.base_scale
        base = gammaincc(expansion.shape_total, x)
        with np.errstate(divide="ignore"):
            log_inc = (
                shapes[:, None] * np.log(x[None, :])
                - x[None, :]
                - log_gamma_shapes[:, None]
            )
        tails = np.vstack(
            [np.zeros((1, x.size)), np.cumsum(np.exp(log_inc), axis=0)]
        )
        tails = np.minimum(base[None, :] + tails, 1.0)
        out[start : start + chunk] = expansion.weights @ tails
    out = np.clip(out, 0.0, 1.0)
    out[flat == 0.0] = 1.0
    return out.reshape(values.shape) if values.ndim else out


def hitting_cdf(
    combo: LinearCombination,
    threshold: float,
    t: float,
    tail_tol: float = DEFAULT_TAIL_TOL,
) -> float:
    """CDF of the first time the combined level reaches the threshold.

    Because paths are non-decreasing, this equals the probability that the
    level at time t is already at or above the threshold.
    """
    expansion = moschopoulos_expand(combo, t, tail_tol=tail_tol)
    return overall_survival(expansion, threshold)


def sample_overall(combo: LinearCombination, t: float, rng: RngStream) -> float:
    """Draw one value of the combined level at time t."""
    return float(sample_overall_many(combo, t, rng, size=1)[0])


def sample_overall_many(
    combo: LinearCombination, t: float, rng: RngStream, size: int
) -> np.ndarray:
    """Draw many values of the combined level at time t in one pass."""
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    active = combo.pruned()
    total = np.zeros(size)
    for weight, proc in zip(active.weights, active.processes):
        total += weight * rng.gamma(proc.shape_at(t), proc.scale, size=size)
    return total
