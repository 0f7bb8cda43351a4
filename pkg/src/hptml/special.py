"""Mittag-Leffler functions and the Gamma function on the real line.

The three-parameter (Prabhakar) function is

    M_{a,b}^c(z) = sum_n (c)_n z^n / (Gamma(a n + b) n!)

and ``c = 1`` gives the two-parameter function. Evaluation picks, per
argument, the first method whose own error estimate meets the requested
relative tolerance:

1. the power series in double precision (log-space terms, rounding error
   tracked term by term),
2. the algebraic asymptotic expansion for large negative ``z``,
   optimally truncated,
3. the exponential asymptotic for large positive ``z`` (``c = 1`` only),
4. for negative ``z``, numerical inversion of the Laplace transform
   s^(ac-b) / (s^a - z)^c on a parabolic contour,
5. the power series in extended precision (mpmath), with the working
   precision set from the observed cancellation.

Only real ``z`` and ``0 < a <= 1`` are supported.
"""

from __future__ import annotations

import math

import mpmath
import numpy as np
from scipy import special as sc

MAX_TERMS = 10_000
DEFAULT_TOL = 1e-11

_EPS = np.finfo(float).eps
_LOG_MAX = math.log(np.finfo(float).max)
# past this value of |z|^(1/a) a positive-argument series is replaced by the
# exponential asymptotic, whose neglected part is O(exp(-X)) relative
_POSITIVE_SWITCH = 50.0
# skip the double-precision series when the expected cancellation exceeds
# exp(_CANCEL_SKIP); it cannot meet any useful tolerance there
_CANCEL_SKIP = 30.0
_MAX_DPS = 600


class ConvergenceError(ArithmeticError):
    """No evaluation method reached the requested accuracy."""


def gamma_fn(x: float) -> float:
    """Gamma function for positive real ``x``."""
    x = float(x)
    if not x > 0:
        raise ValueError(f"gamma_fn requires x > 0, got {x!r}")
    return float(sc.gamma(x))


def _check(a: float, b: float, c: float, tol: float) -> None:
    if not 0 < a <= 1:
        raise ValueError(f"a must lie in (0, 1], got {a!r}")
    if not b > 0:
        raise ValueError(f"b must be positive, got {b!r}")
    if not c > 0:
        raise ValueError(f"c must be positive, got {c!r}")
    if not 1e-15 <= tol <= 1e-6:
        raise ValueError(f"tol must lie in [1e-15, 1e-6], got {tol!r}")


def _peak_index(x: float, a: float, b: float) -> float:
    # index where |z|^n / Gamma(a n + b) stops growing: (a n + b)^a ~ |z|
    return max(0.0, (x ** (1.0 / a) - b) / a)


def _series_double(z: float, a: float, b: float, c: float, lf: float = 0.0):
    """Power series in double precision, scaled by exp(lf).

    Returns ``(value, abs_sum, err)`` or ``None`` when the term budget would
    be exceeded.
    """
    ax = abs(z)
    n_peak = _peak_index(ax, a, b)
    if n_peak > MAX_TERMS:
        return None
    lz = math.log(ax)
    # grow the index range until the tail is below rounding level
    n_max = int(n_peak * 1.3 + 10 * math.sqrt(n_peak + 1) + 40)
    while True:
        n_max = min(n_max, MAX_TERMS)
        n = np.arange(n_max, dtype=float)
        lg = sc.gammaln(a * n + b)
        logt = n * lz - lg
        if c != 1.0:
            lp = sc.gammaln(c + n) - sc.gammaln(c) - sc.gammaln(n + 1.0)
            logt += lp
            scale = np.abs(n * lz) + np.abs(lg) + np.abs(lp) + 1.0
        else:
            scale = np.abs(n * lz) + np.abs(lg) + 1.0
        top = logt.max()
        if logt[-1] < top - 42.0 and logt[-1] < logt[-2]:
            break
        if n_max >= MAX_TERMS:
            return None
        n_max *= 2
    if top + lf > _LOG_MAX - 10:
        return None
    mag = np.exp(logt + lf)
    terms = mag if z > 0 else np.where(n % 2 == 0, mag, -mag)
    value = float(np.sum(terms))
    abs_sum = float(np.sum(mag))
    err = 4 * _EPS * (float(np.sum(mag * scale)) + abs_sum * math.log2(n_max + 1))
    return value, abs_sum, err


def _log_rgamma_envelope(y: np.ndarray) -> np.ndarray:
    # log of an upper bound on |1/Gamma(y)|, continuous at y = 1/2 by reflection
    hi = y >= 0.5
    return np.where(
        hi,
        -sc.gammaln(np.where(hi, y, 1.0)),
        sc.gammaln(np.where(hi, 1.0, 1.0 - y)) - math.log(math.pi),
    )


def _asymptotic_negative(x: float, a: float, b: float, c: float, lf: float = 0.0):
    """Algebraic expansion of M_{a,b}^c(-x) for large x, optimally truncated.

    Returns ``(value, err)``.
    """
    k = np.arange(0, 400, dtype=float)
    y = b - a * (c + k)
    logw = sc.gammaln(c + k) - sc.gammaln(c) - sc.gammaln(k + 1.0) - (c + k) * math.log(x)
    logw += lf
    log_env = logw + _log_rgamma_envelope(y)
    # optimal truncation: stop at the smallest envelope term
    stop = max(int(np.argmin(log_env)), 1)
    kk, yy = k[:stop], y[:stop]
    pole = (yy <= 0) & (yy == np.round(yy))
    with np.errstate(invalid="ignore"):
        sign = np.where(pole, 0.0, sc.gammasgn(yy))
    terms = sign * np.exp(logw[:stop] - sc.gammaln(np.where(pole, 1.0, yy)))
    terms = np.where(kk % 2 == 0, terms, -terms)
    value = float(np.sum(terms))
    err = 10 * math.exp(log_env[stop]) + 4 * _EPS * float(np.sum(np.abs(terms)))
    if a == 1.0:
        # exponentially small contribution from the pole at s = z
        err += math.exp(-x + (c - b) * math.log(x) - math.lgamma(c) + lf) * 2
    return value, err


def _contour_sum(z: float, a: float, b: float, c: float, mu: float, h: float, n: int):
    u = h * np.arange(n + 1)
    w = 1.0 + 1j * u
    s = mu * w * w
    g = np.exp(s) * s ** (a * c - b) / (s**a - z) ** c * (2j * mu * w)
    im = g.imag
    im[0] *= 0.5
    return h / math.pi * float(np.sum(im)), h / math.pi * float(np.sum(np.abs(im)))


def _contour_negative(z: float, a: float, b: float, c: float):
    """Invert the transform s^(ac-b) / (s^a - z)^c at t = 1 on a parabola.

    For z < 0 and 0 < a <= 1 the integrand has no poles off the negative
    real axis, so the parabola s = mu (1 + iu)^2 needs no residue terms.
    Returns ``(value, err)``; the error combines rounding with the gap to a
    coarser rule.
    """
    value, abs_sum = _contour_sum(z, a, b, c, 3.0, 0.12, 40)
    coarse, _ = _contour_sum(z, a, b, c, 3.0, 0.15, 32)
    return value, 10 * _EPS * abs_sum + abs(value - coarse)


def _asymptotic_positive(z: float, a: float, b: float, lf: float = 0.0) -> float:
    """Exponential asymptotic of M_{a,b}(z) for large positive z (c = 1).

    Accurate only while X = z^(1/a) is well beyond b; the caller checks.
    """
    big_x = z ** (1.0 / a)
    log_main = (1.0 - b) * math.log(big_x) + big_x - math.log(a) + lf
    if log_main > _LOG_MAX:
        raise OverflowError(f"M_{{{a},{b}}}({z}) overflows double precision")
    return math.exp(log_main)


def _scaled(value: float, lf: float) -> float:
    if value == 0.0 or lf == 0.0:
        return value
    return math.copysign(math.exp(math.log(abs(value)) + lf), value)


def _ml_one_integer_b(z: float, b: int) -> float:
    """M_{1,b}(z) for integer b via the truncated exponential series."""
    partial = 0.0
    term = 1.0
    for j in range(b - 1):
        if j:
            term *= z / j
        partial += term
    return (math.exp(z) - partial) * z ** (1 - b)


def _series_mp(z: float, a: float, b: float, c: float, dps: int, lf: float = 0.0):
    """Power series in extended precision; returns (value, abs_sum) scaled by exp(lf)."""
    with mpmath.workdps(dps):
        zm = mpmath.mpf(z)
        am, bm, cm = mpmath.mpf(a), mpmath.mpf(b), mpmath.mpf(c)
        total = mpmath.mpf(0)
        abs_total = mpmath.mpf(0)
        coef = mpmath.mpf(1)  # z^n (c)_n / n!
        n_peak = _peak_index(abs(z), a, b)
        thresh = mpmath.mpf(10) ** (-dps)
        biggest = mpmath.mpf(0)
        for n in range(MAX_TERMS):
            term = coef * mpmath.rgamma(am * n + bm)
            total += term
            at = abs(term)
            abs_total += at
            if at > biggest:
                biggest = at
            if n > n_peak + 2 and at <= thresh * biggest:
                scale = mpmath.exp(lf)
                return float(total * scale), float(abs_total * scale)
            coef = coef * zm * (cm + n) / (n + 1)
    raise ConvergenceError(f"series budget of {MAX_TERMS} terms exhausted at z={z}")


def _ml(a: float, b: float, c: float, z: float, tol: float, lf: float) -> float:
    """exp(lf) * M_{a,b}^c(z); arguments already validated."""
    if z == 0.0:
        return _scaled(1.0, lf - math.lgamma(b))
    x = abs(z)
    big_x = x ** (1.0 / a) if x < 1e300**a else math.inf

    abs_sum = None
    value = None
    if z > 0:
        # the dropped part is about Q(b-1, X) relative (exact when a = 1)
        if c == 1.0 and big_x > _POSITIVE_SWITCH and (
            b <= 1.0 or sc.gammaincc(b - 1.0, big_x) <= 0.1 * tol
        ):
            return _asymptotic_positive(z, a, b, lf)
        res = _series_double(z, a, b, c, lf)
        if res is not None:
            value, abs_sum, err = res
            if err <= tol * abs(value):
                return value
    else:
        cancel = big_x - b - b * math.log(big_x / b) if big_x > b else 0.0
        if cancel * max(c, 1.0) < _CANCEL_SKIP:
            res = _series_double(z, a, b, c, lf)
            if res is not None:
                value, abs_sum, err = res
                if err <= tol * abs(value):
                    return value
        if a == 1.0 and c == 1.0 and b == int(b) and x > 2 * b:
            return _scaled(_ml_one_integer_b(z, int(b)), lf)
        cv, cerr = _contour_negative(z, a, b, c)
        candidates = [(_scaled(cv, lf), _scaled(cerr, lf))]
        if big_x > 4.0:
            candidates.append(_asymptotic_negative(x, a, b, c, lf))
        best, best_err = min(candidates, key=lambda ve: ve[1] / max(abs(ve[0]), 1e-300))
        if best_err <= tol * abs(best):
            return best
        value = best

    if _peak_index(x, a, b) > MAX_TERMS:
        raise ConvergenceError(f"M_{{{a},{b}}}^{c}({z}) is outside the supported regime")
    # extended precision: enough digits to absorb the cancellation
    if abs_sum is None:
        log_a = (big_x if math.isfinite(big_x) else 1e6) + lf - math.lgamma(b)
    else:
        log_a = math.log(abs_sum) if abs_sum > 0 else 0.0
    log_s = math.log(abs(value)) if value else log_a - 40.0
    digits = -math.log10(tol)
    dps = int(10 + digits + max(0.0, log_a - log_s) / math.log(10))
    while True:
        value, abs_sum = _series_mp(z, a, b, c, dps, lf)
        needed = 10 + digits
        if value != 0.0:
            needed += max(0.0, math.log10(abs_sum / abs(value)))
        if needed <= dps or dps >= _MAX_DPS:
            return value
        dps = min(_MAX_DPS, int(needed) + 10)


def ml_three_param(a: float, b: float, c: float, z: float, tol: float = DEFAULT_TOL) -> float:
    """Three-parameter Mittag-Leffler function M_{a,b}^c(z) for real z.

    ``tol`` is a relative accuracy target. Raises :class:`ConvergenceError`
    if no method can reach it within the term budget.
    """
    a, b, c, z = float(a), float(b), float(c), float(z)
    _check(a, b, c, tol)
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z!r}")
    return _ml(a, b, c, z, tol, 0.0)


def ml_two_param(a: float, b: float, z: float, tol: float = DEFAULT_TOL) -> float:
    """Two-parameter Mittag-Leffler function M_{a,b}(z) = M_{a,b}^1(z)."""
    return ml_three_param(a, b, 1.0, z, tol)


def ml_two_param_scaled(
    a: float, b: float, z: float, log_scale: float, tol: float = DEFAULT_TOL
) -> float:
    """exp(log_scale) * M_{a,b}(z), without intermediate overflow or underflow.

    Series over many ``b`` multiply tiny ML values (about 1/Gamma(b)) by
    huge weights; folding the weight into the evaluation keeps both finite.
    """
    a, b, z = float(a), float(b), float(z)
    _check(a, b, 1.0, tol)
    if not math.isfinite(z):
        raise ValueError(f"z must be finite, got {z!r}")
    return _ml(a, b, 1.0, z, tol, float(log_scale))


def ml_two_param_many(a: float, bs, z: float, tol: float = DEFAULT_TOL) -> np.ndarray:
    """M_{a,b}(z) for several ``b`` at a common ``a`` and ``z``."""
    return np.array([ml_two_param(a, b, z, tol) for b in np.atleast_1d(bs)], dtype=float)
