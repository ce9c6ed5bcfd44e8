"""Frequency-decay curves of two-layer networks with ReLU and tanh units.

``gamma_relu_sq`` and ``gamma_tanh_sq`` are Monte Carlo means over the
initialization law of ``a(0)``, ``b(0)`` and the tanh scale ``r``. The law is
not pinned down by the theory, so the sampler offers three modes:

* ``degenerate``: point masses at ``a0``, ``b0``, ``r0`` (default for plots);
* ``normal``: standard normal ``a`` and ``b``, ``r = |N(0,1)| + 0.1``;
* ``abs``: like ``normal`` but with ``|a|``. The ReLU term is odd in ``a``,
  so its expectation vanishes under any symmetric law; this mode keeps it
  informative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, InvalidFrequency
from .rng import XorShift64Star

MODES = ("degenerate", "normal", "abs")


@dataclass(frozen=True)
class InitSampler:
    mode: str = "degenerate"
    n: int = 1
    seed: int = 0
    a0: float = 1.0
    b0: float = 1.0
    r0: float = 1.0

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown sampler mode {self.mode!r}")
        if self.n < 1:
            raise ConfigError("sample count n must be >= 1")
        if self.mode == "degenerate" and not self.r0 > 0:
            raise ConfigError("r0 must be > 0")

    def draw(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Samples ``(a, b, r)``; identical for identical samplers."""
        if self.mode == "degenerate":
            one = np.ones(self.n)
            return self.a0 * one, self.b0 * one, self.r0 * one
        rng = XorShift64Star(self.seed)
        a = rng.normal(self.n)
        b = rng.normal(self.n)
        r = np.abs(rng.normal(self.n)) + 0.1
        if self.mode == "abs":
            a = np.abs(a)
        return a, b, r


@dataclass(frozen=True)
class DecaySample:
    xi_norm: float
    dim: int
    value: float
    stderr: float = 0.0


def _check(xi_norm: float, dim: int) -> None:
    if not xi_norm > 0:
        raise InvalidFrequency(f"frequency norm must be > 0, got {xi_norm}")
    if dim < 1:
        raise InvalidFrequency("dimension must be >= 1")


def csch_sq(x):
    """``csch(x)^2`` as ``(2 e^-x / (1 - e^-2x))^2``; underflows to 0 for large x."""
    x = np.asarray(x, dtype=float)
    e = np.exp(-x)
    return (2.0 * e / -np.expm1(-2.0 * x)) ** 2


def relu_terms(xi_norm: float, dim: int, samples) -> np.ndarray:
    a, b, _ = samples
    return a**3 / (16 * math.pi**4 * xi_norm ** (dim + 3)) + b**2 * a / (4 * math.pi**2 * xi_norm ** (dim + 1))


def tanh_terms(xi_norm: float, dim: int, samples) -> np.ndarray:
    a, _, r = samples
    cs = csch_sq(math.pi * xi_norm / r)
    inner = (math.pi**2 / r) * cs + (4 * math.pi**4 * a**2 * xi_norm**2 / r**3) * cs
    return inner / xi_norm ** (dim - 1)


def _summarize(xi_norm: float, dim: int, terms: np.ndarray) -> DecaySample:
    n = terms.shape[0]
    se = float(np.std(terms, ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    return DecaySample(xi_norm, dim, float(np.mean(terms)), se)


def gamma_relu_sample(xi_norm: float, dim: int, sampler: InitSampler, samples=None) -> DecaySample:
    _check(xi_norm, dim)
    return _summarize(xi_norm, dim, relu_terms(xi_norm, dim, samples or sampler.draw()))


def gamma_tanh_sample(xi_norm: float, dim: int, sampler: InitSampler, samples=None) -> DecaySample:
    _check(xi_norm, dim)
    return _summarize(xi_norm, dim, tanh_terms(xi_norm, dim, samples or sampler.draw()))


def gamma_relu_sq(xi_norm: float, dim: int, sampler: InitSampler) -> float:
    """Squared ReLU decay ``E[a^3/(16 pi^4 |xi|^(d+3)) + b^2 a/(4 pi^2 |xi|^(d+1))]``."""
    return gamma_relu_sample(xi_norm, dim, sampler).value


def gamma_tanh_sq(xi_norm: float, dim: int, sampler: InitSampler) -> float:
    """Squared tanh decay ``|xi|^(1-d) E[(pi^2/r + 4 pi^4 a^2 |xi|^2/r^3) csch^2(pi |xi|/r)]``."""
    return gamma_tanh_sample(xi_norm, dim, sampler).value


def decay_curves(xi_grid, dim: int, sampler: InitSampler) -> list[tuple[float, float, float]]:
    """Both curves on a grid, evaluated with one common sample set."""
    samples = sampler.draw()
    rows = []
    for xi in xi_grid:
        xi = float(xi)
        rows.append(
            (
                xi,
                gamma_relu_sample(xi, dim, sampler, samples).value,
                gamma_tanh_sample(xi, dim, sampler, samples).value,
            )
        )
    return rows
