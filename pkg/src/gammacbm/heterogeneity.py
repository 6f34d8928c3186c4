"""Unit-to-unit variability: covariate scale links, random effects, arrivals.

A unit-specific random effect perturbs every defect's scale parameter: the
inverse effect ``w`` follows a gamma law with shape ``delta_param`` and rate
``gamma_param``, so conditional on ``w`` each defect level is gamma with
scale ``covariate-scale / w``.  Mixing over ``w`` couples the defects and
fattens the tails of the combined level.  Defect inter-occurrence times are
exchangeable exponentials mixed over a heavy-tailed inverse-gamma-style
rate, which has a closed-form joint density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import betainc, gammaln, roots_legendre
from scipy.stats import gamma as _gamma_dist

from .degradation import (
    GammaProcessSpec,
    LinearCombination,
    moschopoulos_expand,
    overall_survival,
)
from .errors import DomainError, NumericalError

_QUANTILE_TAIL = 1e-14
_MAX_EFFECT_NODES = 1 << 14


@dataclass(frozen=True)
class RandomEffectModel:
    """Gamma-distributed inverse effect with an optional covariate link.

    ``w = 1/w0`` has density ``gamma_param^delta_param / Gamma(delta_param)
    * w^(delta_param-1) * exp(-gamma_param*w)``: mean ``delta/gamma`` and
    variance ``delta/gamma^2``.  The covariate link replaces each defect's
    scale with ``exp(covariate_coeffs . covariates)``.
    """

    gamma_param: float
    delta_param: float
    covariate_coeffs: tuple[float, ...] = ()
    covariates: tuple[float, ...] = ()

    def __post_init__(self):
        if not self.gamma_param > 0.0:
            raise DomainError(f"gamma_param must be positive, got {self.gamma_param}")
        if not self.delta_param > 0.0:
            raise DomainError(f"delta_param must be positive, got {self.delta_param}")
        if len(self.covariate_coeffs) != len(self.covariates):
            raise DomainError(
                f"{len(self.covariate_coeffs)} covariate coefficients for "
                f"{len(self.covariates)} covariates"
            )

    @property
    def effect_mean(self) -> float:
        return self.delta_param / self.gamma_param

    @property
    def effect_variance(self) -> float:
        return self.delta_param / self.gamma_param**2


@dataclass(frozen=True)
class ArrivalModel:
    """Exchangeable defect arrivals: exponential given the rate, mixed over it.

    ``rate`` is the nominal defects-per-unit-time parameter used by the
    policy economics.  ``mix_mu`` and ``mix_nu`` parameterize the mixing
    density of the joint inter-occurrence law; ``mixing_exponent`` selects
    which of the two appears inside its exponential factor ("nu" is the
    literal model, "mu" the variant under which the density normalizes for
    mix_mu != mix_nu).
    """

    rate: float
    mix_mu: float = 1.0
    mix_nu: float = 1.0
    mixing_exponent: str = "nu"

    def __post_init__(self):
        for name in ("rate", "mix_mu", "mix_nu"):
            if not getattr(self, name) > 0.0:
                raise DomainError(f"{name} must be positive")
        if self.mixing_exponent not in ("nu", "mu"):
            raise DomainError(
                f"mixing_exponent must be 'nu' or 'mu', got {self.mixing_exponent!r}"
            )


def covariate_scale(
    model: RandomEffectModel, base_spec: GammaProcessSpec | None = None
) -> float:
    """Scale parameter implied by the covariate link.

    Returns ``exp(covariate_coeffs . covariates)``; this value *replaces*
    the scale of ``base_spec`` (the link is a replacement, not a
    multiplier, so the base scale does not enter the result).
    """
    coeffs = np.asarray(model.covariate_coeffs, dtype=float)
    values = np.asarray(model.covariates, dtype=float)
    return float(math.exp(float(np.dot(coeffs, values))))


def with_covariate_scale(
    model: RandomEffectModel, base_spec: GammaProcessSpec
) -> GammaProcessSpec:
    """The process spec with its scale replaced by the covariate link value."""
    return base_spec.with_scale(covariate_scale(model, base_spec))


def mixed_joint_density(
    model: RandomEffectModel,
    specs,
    t: float,
    x,
) -> float:
    """Joint density of the defect levels after mixing out the random effect.

    Conditional on ``w`` the levels are independent gammas with scales
    ``spec.scale / w``; integrating the gamma effect out in closed form
    couples them through the factor
    ``(gamma_param + sum x_k/scale_k)^-(delta_param + total shape)``.
    """
    specs = tuple(specs)
    x_arr = np.asarray(x, dtype=float)
    if x_arr.ndim != 1 or len(x_arr) != len(specs):
        raise DomainError(
            f"{len(x_arr) if x_arr.ndim == 1 else 'non-vector'} levels for "
            f"{len(specs)} process specs"
        )
    if np.any(x_arr <= 0.0):
        raise DomainError("levels must be positive")
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    gam, delta = model.gamma_param, model.delta_param
    shapes = np.array([spec.shape_at(t) for spec in specs])
    scales = np.array([spec.scale for spec in specs])
    shape_total = float(shapes.sum())
    log_value = (
        delta * math.log(gam)
        - math.lgamma(delta)
        + math.lgamma(delta + shape_total)
        - (delta + shape_total) * math.log(gam + float(np.sum(x_arr / scales)))
        + float(np.sum((shapes - 1.0) * np.log(x_arr)))
        - float(np.sum(shapes * np.log(scales)))
        - float(np.sum(gammaln(shapes)))
    )
    return math.exp(log_value)


def _effect_bracket(model: RandomEffectModel) -> tuple[float, float]:
    """Interval carrying all but a negligible sliver of the effect law."""
    dist = _gamma_dist(model.delta_param, scale=1.0 / model.gamma_param)
    lo = float(dist.ppf(_QUANTILE_TAIL))
    hi = float(dist.ppf(1.0 - _QUANTILE_TAIL))
    return max(lo, 1e-300), hi


def mixed_hitting_prob(
    model: RandomEffectModel,
    combo: LinearCombination,
    threshold: float,
    t: float,
    rel_tol: float = 1e-8,
) -> float:
    """P(combined level >= threshold at t) averaged over the random effect.

    Gauss-Legendre quadrature over the effect variable bracketed by extreme
    quantiles of its gamma law, with node doubling until the value moves by
    less than ``rel_tol`` relatively.  The expansion is computed once: a
    common scale factor leaves the mixture weights invariant and only
    rescales the base scale.
    """
    if threshold < 0.0:
        raise DomainError(f"threshold must be non-negative, got {threshold}")
    if threshold == 0.0:
        return 1.0
    expansion = moschopoulos_expand(combo, t)
    lo, hi = _effect_bracket(model)
    gam, delta = model.gamma_param, model.delta_param
    log_norm = delta * math.log(gam) - math.lgamma(delta)

    def average(n: int) -> float:
        nodes, weights = roots_legendre(n)
        w = 0.5 * (hi - lo) * nodes + 0.5 * (hi + lo)
        wq = 0.5 * (hi - lo) * weights
        density = np.exp(log_norm + (delta - 1.0) * np.log(w) - gam * w)
        survivals = np.array(
            [
                overall_survival(
                    replace(expansion, base_scale=expansion.base_scale / wi),
                    threshold,
                )
                for wi in w
            ]
        )
        return float(np.dot(wq, density * survivals))

    n = 64
    value = average(n)
    while True:
        n *= 2
        if n > _MAX_EFFECT_NODES:
            raise NumericalError(
                "effect quadrature did not stabilise below the node cap"
            )
        refined = average(n)
        if abs(refined - value) <= rel_tol * max(abs(refined), 1e-300):
            return min(max(refined, 0.0), 1.0)
        value = refined


def mixed_hitting_series(
    model: RandomEffectModel,
    combo: LinearCombination,
    threshold: float,
    t: float,
) -> float:
    """Series route for the same probability, via regularized beta tails.

    Mixing each gamma tail of the expansion over the effect gives a beta
    tail: with ``v = L/(base_scale*gamma_param + L)`` the value is
    ``sum_k weight_k * (1 - I_v(shape_total + k, delta_param))``.
    """
    if threshold < 0.0:
        raise DomainError(f"threshold must be non-negative, got {threshold}")
    if threshold == 0.0:
        return 1.0
    expansion = moschopoulos_expand(combo, t)
    v = threshold / (expansion.base_scale * model.gamma_param + threshold)
    k = np.arange(len(expansion.weights))
    tails = 1.0 - betainc(expansion.shape_total + k, model.delta_param, v)
    value = float(np.dot(expansion.weights, tails))
    return min(max(value, 0.0), 1.0)


@dataclass(frozen=True)
class MixedHitting:
    """Both routes to the effect-averaged hitting probability."""

    quadrature: float
    series: float

    @property
    def value(self) -> float:
        return self.quadrature


def mixed_hitting_report(
    model: RandomEffectModel,
    combo: LinearCombination,
    threshold: float,
    t: float,
    rel_tol: float = 1e-8,
) -> MixedHitting:
    """Evaluate the quadrature (authoritative) and series routes together."""
    return MixedHitting(
        quadrature=mixed_hitting_prob(model, combo, threshold, t, rel_tol=rel_tol),
        series=mixed_hitting_series(model, combo, threshold, t),
    )


def sample_mixed_overall(
    model: RandomEffectModel,
    combo: LinearCombination,
    t: float,
    rng,
    size: int,
) -> np.ndarray:
    """Draw combined levels with a fresh effect per draw (for MC checks)."""
    if not t > 0.0:
        raise DomainError(f"t must be positive, got {t}")
    w = rng.gamma(model.delta_param, 1.0 / model.gamma_param, size=size)
    total = np.zeros(size)
    for weight, proc in zip(combo.weights, combo.processes):
        total += weight * rng.gamma(proc.shape_at(t), proc.scale, size=size) / w
    return total


def arrival_joint_pdf(model: ArrivalModel, times) -> float:
    """Joint density of the first n defect inter-occurrence times.

    Exponential inter-occurrence times given the rate, mixed over the
    heavy-tailed rate law, collapse to the closed form
    ``mix_mu^nu * Gamma(n+nu) / (Gamma(nu) * (E + sum t)^ (n+nu))`` where
    ``E`` is mix_nu under the literal model and mix_mu under the
    normalizing variant.
    """
    t_arr = np.asarray(times, dtype=float)
    if t_arr.ndim != 1 or t_arr.size == 0:
        raise DomainError("times must be a non-empty vector")
    if np.any(t_arr <= 0.0):
        raise DomainError("times must be positive")
    n = t_arr.size
    mu, nu = model.mix_mu, model.mix_nu
    shift = nu if model.mixing_exponent == "nu" else mu
    log_value = (
        nu * math.log(mu)
        + math.lgamma(n + nu)
        - math.lgamma(nu)
        - (n + nu) * math.log(shift + float(t_arr.sum()))
    )
    return math.exp(log_value)
