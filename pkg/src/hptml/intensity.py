"""Expected intensity and expected event count of the TML Hawkes process.

With D = (nu**beta - gamma) + alpha * gamma the mean intensity is

    lambda(t) = L0 * [(nu**beta - gamma) / D
                      + (alpha gamma / D) exp(-nu t) sum_m (nu t)**m M_{beta,m+1}(D t**beta)]

and its transform is (L0 / s) (gamma - nu**beta + (nu+s)**beta)
/ (gamma (1 - alpha) - nu**beta + (nu+s)**beta). The series form divides
by D, so near D = 0 only numerical inversion of the transform is usable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .kernels import HawkesParams, tempered_series
from .laplace import invert_checked

DEFAULT_TOL = 1e-10
NUMERIC_TOL = 1e-6
MIN_DENOMINATOR = 1e-12


class DegenerateDenominator(ValueError):
    """|D| is too small for the series representation."""


def _lt_parts(params: HawkesParams, s: np.ndarray):
    nb = params.nu**params.beta
    g = params.gamma
    w = (params.nu + s) ** params.beta
    num = g - nb + w
    den = g * (1.0 - params.alpha) - nb + w
    return num, den


def intensity_lt_continued(params: HawkesParams, s) -> np.ndarray:
    """Transform of the mean intensity without the Re(s) > 0 check (for inversion)."""
    s = np.asarray(s, dtype=complex)
    num, den = _lt_parts(params, s)
    return params.lambda0 / s * num / den


def intensity_lt(params: HawkesParams, s):
    """Laplace transform of the expected intensity at ``s`` (Re(s) > 0)."""
    s = np.asarray(s, dtype=complex)
    if np.any(s.real <= 0):
        raise ValueError("intensity_lt needs Re(s) > 0")
    num, den = _lt_parts(params, s)
    if np.any(np.abs(den) < 1e-14):
        raise ZeroDivisionError("transform denominator vanishes on the evaluation path")
    out = params.lambda0 / s * num / den
    return out[()] if out.ndim == 0 else out


def _check_denominator(params: HawkesParams) -> float:
    d = params.denominator
    if abs(d) <= MIN_DENOMINATOR:
        raise DegenerateDenominator(
            f"D = (alpha-1) gamma + nu^beta = {d!r} is too close to zero; use intensity_numeric"
        )
    return d


def intensity_analytic(params: HawkesParams, t: float, tol: float = DEFAULT_TOL) -> float:
    """Expected intensity from the Mittag-Leffler series."""
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t!r}")
    d = _check_denominator(params)
    if t == 0:
        # the series collapses to (nu^beta - gamma + alpha gamma) / D = 1
        return float(params.lambda0)
    p = params
    z = d * t**p.beta
    s = tempered_series(p.beta, p.nu * t, z, 1.0, tol)
    return p.lambda0 * ((p.nu**p.beta - p.gamma) + p.alpha * p.gamma * s) / d


def intensity_numeric(
    params: HawkesParams, t: float, tol: float = NUMERIC_TOL
) -> tuple[float, float]:
    """Expected intensity by numerical Laplace inversion: (value, error estimate)."""
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t!r}")
    return invert_checked(
        lambda s: intensity_lt_continued(params, s), t, tol, small_t_limit=params.lambda0
    )


def final_value_probe(params: HawkesParams, s: float = 1e-9) -> float:
    """s * transform at a small positive s: the final-value estimate at finite s."""
    return float((s * intensity_lt(params, s)).real)


def stationary_intensity(params: HawkesParams) -> float:
    """Limit of the expected intensity as t grows, for alpha < 1.

    This is the s -> 0 limit of s times the transform, taken in closed
    form: every term is continuous at s = 0 once the 1/s is cancelled.
    Evaluating at a small s instead would carry an O(s**beta) bias.
    """
    if not params.alpha < 1:
        raise ValueError(f"no stationary regime for alpha = {params.alpha}")
    num, den = _lt_parts(params, 0.0)
    return params.lambda0 * float(num) / float(den)


def stationary_intensity_series(params: HawkesParams) -> dict:
    """Geometric-series expression for the stationary intensity, as a diagnostic.

    Sums L0 (gamma - nu^beta) / (gamma (1-alpha) - nu^beta)
    * sum_n [r1^n + nu^beta r2^n] with r1 = nu^beta / D and
    r2 = nu^beta / (D (gamma - nu^beta)), when both ratios are below one in
    modulus. The report carries the closed-form limit for comparison.
    """
    p = params
    nb = p.nu**p.beta
    d = p.denominator
    g_minus = p.gamma - nb
    limit = stationary_intensity(p) if p.alpha < 1 else math.nan
    report = {"r1": math.nan, "r2": math.nan, "converged": False, "value": math.nan,
              "stationary_intensity": limit, "difference": math.nan}
    if d == 0 or g_minus == 0:
        report["reason"] = "zero denominator in the series ratios"
        return report
    r1 = nb / d
    r2 = nb / (d * g_minus)
    report.update(r1=r1, r2=r2)
    if abs(r1) >= 1 or abs(r2) >= 1:
        report["reason"] = "geometric ratio of modulus >= 1"
        return report
    value = p.lambda0 * g_minus / (p.gamma * (1.0 - p.alpha) - nb) * (
        1.0 / (1.0 - r1) + nb / (1.0 - r2)
    )
    report.update(converged=True, value=value, difference=value - limit, reason="")
    return report


def expected_count(
    params: HawkesParams, t: float, tol: float = DEFAULT_TOL, check: bool = False
) -> float:
    """Expected number of events on [0, t].

    The double series over (m, n) is summed along diagonals k = m + n with
    multiplicity k + 1. With ``check=True`` the result is compared with
    quadrature of :func:`intensity_analytic` and a mismatch above 1e-5
    relative raises ``ArithmeticError``.
    """
    t = float(t)
    if t < 0:
        raise ValueError(f"t must be non-negative, got {t!r}")
    if t == 0:
        return 0.0
    d = _check_denominator(params)
    p = params
    s = tempered_series(p.beta, p.nu * t, d * t**p.beta, 2.0, tol, multiplicity=True)
    value = p.lambda0 * ((p.nu**p.beta - p.gamma) * t + p.alpha * p.gamma * t * s) / d
    if check:
        ref = expected_count_quadrature(p, t, tol)
        if abs(value - ref) > 1e-5 * abs(ref):
            raise ArithmeticError(f"series {value!r} and quadrature {ref!r} disagree at t={t}")
    return value


def expected_count_quadrature(params: HawkesParams, t: float, tol: float = DEFAULT_TOL) -> float:
    """Adaptive quadrature of the analytic intensity over [0, t]."""
    val, _ = quad(lambda u: intensity_analytic(params, u, tol), 0.0, float(t),
                  epsabs=0.0, epsrel=1e-9, limit=200)
    return val


@dataclass(frozen=True)
class IntensityCurve:
    """Sampled expected intensity with per-point method and error estimate."""

    params: HawkesParams
    t: tuple
    value: tuple
    method: tuple
    error: tuple = field(default=())

    def __post_init__(self):
        n = len(self.t)
        if not (len(self.value) == len(self.method) == n and len(self.error) in (0, n)):
            raise ValueError("curve columns have different lengths")
        if any(b <= a for a, b in zip(self.t, self.t[1:])):
            raise ValueError("curve grid must be strictly increasing")
        if any(not v > 0 for v in self.value):
            raise ValueError("expected intensity values must be positive")
        if any(m not in ("analytic", "numeric") for m in self.method):
            raise ValueError("method tags must be 'analytic' or 'numeric'")


def intensity_curve(
    params: HawkesParams, ts, method: str = "analytic", tol: float | None = None
) -> IntensityCurve:
    """Evaluate the expected intensity over a grid.

    ``method="analytic"`` falls back to inversion pointwise when D is
    degenerate, and the tags record which method produced each value.
    """
    ts = [float(x) for x in ts]
    values, methods, errors = [], [], []
    use_numeric = method == "numeric" or abs(params.denominator) <= MIN_DENOMINATOR
    if method not in ("analytic", "numeric"):
        raise ValueError(f"unknown method {method!r}")
    for t in ts:
        if use_numeric:
            v, e = intensity_numeric(params, t, tol or NUMERIC_TOL)
            values.append(v)
            methods.append("numeric")
            errors.append(e)
        else:
            values.append(intensity_analytic(params, t, tol or DEFAULT_TOL))
            methods.append("analytic")
            errors.append(0.0)
    return IntensityCurve(params, tuple(ts), tuple(values), tuple(methods), tuple(errors))
