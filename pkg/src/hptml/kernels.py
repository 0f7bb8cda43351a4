"""Excitation kernels: tempered Mittag-Leffler density and its special cases.

The tempered Mittag-Leffler (TML) density with index ``beta``, tempering
``nu`` and time scale ``gamma`` has Laplace transform

    gamma / (gamma - nu**beta + (nu + s)**beta)

and, by the shift rule and the inverse pair for 1 / (s**beta + c),

    f(t) = gamma * exp(-nu t) * t**(beta - 1) * M_{beta,beta}(-(gamma - nu**beta) t**beta).

At ``beta = 1`` the transform is gamma / (gamma + s) whatever ``nu`` is:
the tempering cancels and the density is exponential. The formula above
reproduces this through M_{1,1}(z) = exp(z); nothing is special-cased.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy import special as sc

from .special import DEFAULT_TOL, MAX_TERMS, ConvergenceError, ml_two_param, ml_two_param_scaled


@dataclass(frozen=True)
class HawkesParams:
    """Parameters of the Hawkes process with TML kernel."""

    lambda0: float
    alpha: float
    beta: float
    nu: float
    gamma: float

    def __post_init__(self):
        if not self.lambda0 > 0:
            raise ValueError(f"lambda0 must be positive, got {self.lambda0!r}")
        if not self.alpha >= 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha!r}")
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not self.nu >= 0:
            raise ValueError(f"nu must be non-negative, got {self.nu!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")

    @property
    def stationary(self) -> bool:
        # the kernel integrates to one, so the branching ratio is alpha
        return self.alpha < 1

    @property
    def denominator(self) -> float:
        """D = (alpha - 1) gamma + nu**beta, the ML argument scale of the intensity."""
        return (self.nu**self.beta - self.gamma) + self.alpha * self.gamma

    def kernel(self) -> "TemperedML":
        return TemperedML(self.beta, self.nu, self.gamma)

    def as_dict(self) -> dict:
        return {
            "lambda0": self.lambda0,
            "alpha": self.alpha,
            "beta": self.beta,
            "nu": self.nu,
            "gamma": self.gamma,
        }


@dataclass(frozen=True)
class TemperedML:
    beta: float
    nu: float
    gamma: float

    def __post_init__(self):
        if not 0 < self.beta <= 1:
            raise ValueError(f"beta must lie in (0, 1], got {self.beta!r}")
        if not self.nu >= 0:
            raise ValueError(f"nu must be non-negative, got {self.nu!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")


@dataclass(frozen=True)
class MittagLeffler:
    beta: float
    gamma: float

    def __post_init__(self):
        TemperedML(self.beta, 0.0, self.gamma)


@dataclass(frozen=True)
class Exponential:
    gamma: float

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma!r}")


@dataclass(frozen=True)
class NoKernel:
    """No excitation: the process is homogeneous Poisson."""


KernelSpec = Union[TemperedML, MittagLeffler, Exponential, NoKernel]


def tml_triple(spec: KernelSpec) -> tuple[float, float, float]:
    """(beta, nu, gamma) of the TML kernel equivalent to ``spec``."""
    if isinstance(spec, TemperedML):
        return spec.beta, spec.nu, spec.gamma
    if isinstance(spec, MittagLeffler):
        return spec.beta, 0.0, spec.gamma
    if isinstance(spec, Exponential):
        return 1.0, 0.0, spec.gamma
    raise ValueError(f"{spec!r} has no density")


def kernel_name(spec: KernelSpec) -> str:
    return {
        TemperedML: "tml",
        MittagLeffler: "ml",
        Exponential: "exponential",
        NoKernel: "none",
    }[type(spec)]


def kernel_from_dict(d: dict) -> KernelSpec:
    kind = d.get("kind", "tml")
    if kind == "tml":
        return TemperedML(float(d["beta"]), float(d["nu"]), float(d["gamma"]))
    if kind == "ml":
        return MittagLeffler(float(d["beta"]), float(d["gamma"]))
    if kind == "exponential":
        return Exponential(float(d["gamma"]))
    if kind == "none":
        return NoKernel()
    raise ValueError(f"unknown kernel kind {kind!r}")


def kernel_to_dict(spec: KernelSpec) -> dict:
    out = {"kind": kernel_name(spec)}
    if isinstance(spec, TemperedML):
        out.update(beta=spec.beta, nu=spec.nu, gamma=spec.gamma)
    elif isinstance(spec, MittagLeffler):
        out.update(beta=spec.beta, gamma=spec.gamma)
    elif isinstance(spec, Exponential):
        out.update(gamma=spec.gamma)
    return out


def kernel_density(spec: KernelSpec, t: float, tol: float = DEFAULT_TOL) -> float:
    """Kernel density at ``t > 0``."""
    t = float(t)
    if not t > 0:
        raise ValueError(f"kernel density needs t > 0, got {t!r}")
    if isinstance(spec, Exponential):
        return spec.gamma * math.exp(-spec.gamma * t)
    beta, nu, gamma = tml_triple(spec)
    z = -(gamma - nu**beta) * t**beta
    log_scale = math.log(gamma) - nu * t + (beta - 1.0) * math.log(t)
    return ml_two_param_scaled(beta, beta, z, log_scale, tol)


def kernel_lt(spec: KernelSpec, s):
    """Laplace transform of the kernel density, principal branch, Re(s) > 0."""
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0):
        raise ValueError("kernel_lt needs Re(s) > 0")
    out = kernel_lt_continued(spec, s)
    return out[()] if out.ndim == 0 else out


def kernel_lt_continued(spec: KernelSpec, s) -> np.ndarray:
    """Kernel transform continued off the negative real axis (no domain check).

    This is what contour inversion evaluates; the principal-branch cut of
    (nu + s)**beta lies on s < -nu.
    """
    s = np.asarray(s, dtype=complex)
    if isinstance(spec, NoKernel):
        raise ValueError("NoKernel has no density")
    if isinstance(spec, Exponential):
        return spec.gamma / (spec.gamma + s)
    if isinstance(spec, MittagLeffler):
        return spec.gamma / (spec.gamma + s**spec.beta)
    beta, nu, gamma = tml_triple(spec)
    return gamma / (gamma - nu**beta + (nu + s) ** beta)


# largest nu * t accepted by the tempered series; the sum needs about
# nu t + 40 sqrt(nu t) terms, which must stay within the term budget
MAX_SHIFT = 5000.0


def _poisson_log_weights(x: float, m_max: int) -> np.ndarray:
    # log(exp(-x) x^m) for m = 0..m_max-1; no factorial
    m = np.arange(m_max, dtype=float)
    if x == 0:
        return np.where(m == 0, 0.0, -np.inf)
    return -x + m * math.log(x)


def tempered_series(
    beta: float,
    shift: float,
    z: float,
    b0: float,
    tol: float,
    multiplicity: bool = False,
) -> float:
    """Sum of exp(-nu t) (nu t)^m [(m + 1)] M_{beta, b0 + m}(z) over m >= 0.

    ``shift`` is nu * t. This is the common core of the kernel CDF, the
    expected intensity and the expected count. Terms are summed until past
    the mode of the Poisson-like weights and below ``tol`` relative to the
    partial sum. For ``z <= 0`` the terms obey |M_{beta,b}(z)| <= 1/Gamma(b)
    (complete monotonicity, b >= beta), which is used to skip terms that
    cannot matter.
    """
    if shift == 0.0:
        return ml_two_param(beta, b0, z, tol)
    if shift > MAX_SHIFT:
        raise ConvergenceError(f"nu t = {shift} exceeds the supported range {MAX_SHIFT}")
    total = 0.0
    skip = None
    if z <= 0:
        m_cap = int(shift + 40 * math.sqrt(shift) + 60)
        m = np.arange(m_cap, dtype=float)
        log_bound = _poisson_log_weights(shift, m_cap) - sc.gammaln(b0 + m)
        if multiplicity:
            log_bound += np.log1p(m)
        bounds = np.exp(log_bound - log_bound.max())
        skip = bounds < 1e-4 * tol * bounds.sum()
    log_shift = math.log(shift)
    prev = 0.0
    for m in range(MAX_TERMS):
        if skip is not None:
            if m >= len(skip):
                return total
            if skip[m]:
                if m > shift:
                    return total
                continue
        log_w = -shift + m * log_shift
        if multiplicity:
            log_w += math.log1p(m)
        term = ml_two_param_scaled(beta, b0 + m, z, log_w, tol)
        total += term
        if m > shift and abs(term) <= tol * abs(total):
            # past the mode the terms fall off roughly geometrically
            ratio = abs(term / prev) if prev else 0.0
            if ratio < 1 and abs(term) * ratio / (1 - ratio) <= tol * abs(total):
                return total
        prev = term
    raise ConvergenceError(f"tempered series did not converge (nu t = {shift})")


def kernel_cdf(spec: KernelSpec, t: float, tol: float = 1e-10) -> float:
    """Kernel distribution function, clamped to [0, 1]."""
    t = float(t)
    if t < 0:
        raise ValueError(f"kernel_cdf needs t >= 0, got {t!r}")
    if t == 0:
        return 0.0
    if isinstance(spec, Exponential):
        return -math.expm1(-spec.gamma * t)
    beta, nu, gamma = tml_triple(spec)
    z = -(gamma - nu**beta) * t**beta
    value = gamma * t**beta * tempered_series(beta, nu * t, z, beta + 1.0, tol)
    return min(1.0, max(0.0, value))


def kernel_sf(spec: KernelSpec, t: float, tol: float = 1e-10) -> float:
    """Survival function 1 - F(t)."""
    return 1.0 - kernel_cdf(spec, t, tol)


def kernel_tail_rate(spec: KernelSpec) -> float:
    """Exponential decay rate of the density tail (0 for a heavy tail)."""
    beta, nu, gamma = tml_triple(spec)
    if beta == 1.0:
        return gamma
    return nu - max(nu**beta - gamma, 0.0) ** (1.0 / beta)
