"""Mutual information over AWGN, the capacity-achieving-code profile, and
the uniform-power spectrum optimizer.

Mutual information is computed as half the integral of the MMSE over SNR
(closed form for Gaussian inputs, adaptive Simpson over the quadrature MMSE
otherwise). The profile functions give the piecewise MI/MMSE behavior of a
code decoded reliably at its design SNR: Gaussian-like up to the design
point, then flat MI and zero MMSE. The transition sits at normalized SNR 1
and the MMSE branch is zero on the closed set [1, inf).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .dists import ScalarDistribution, Gaussian, variance
from .errors import ConvergenceError
from .mmse import DEFAULT_QUADRATURE, QuadratureSpec, mmse
from .quadrature import adaptive_simpson, project_simplex
from .reports import CheckReport

MI_INTEGRATION_TOL = 1e-9
MI_MAX_DEPTH = 40


def mutual_information(
    d: ScalarDistribution,
    snr: float,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    method: str = "auto",
    integration_tol: float = MI_INTEGRATION_TOL,
) -> float:
    """I(X; sqrt(snr) X + N) in nats.

    ``method="quadrature"`` forces the integral path even for Gaussian
    inputs, which otherwise use the 0.5*log(1 + snr*var) closed form.
    """
    if not (math.isfinite(snr) and snr >= 0):
        raise ValueError("snr must be finite and >= 0")
    if snr == 0.0:
        return 0.0
    if method == "auto" and isinstance(d, Gaussian):
        return 0.5 * math.log1p(snr * d.variance)
    return adaptive_simpson(
        lambda g: 0.5 * mmse(d, g, q, method=method),
        0.0, snr, tol=integration_tol, max_depth=MI_MAX_DEPTH)


@dataclass(frozen=True)
class GoodCodeProfile:
    """A capacity-achieving code characterized by its design SNR."""
    design_snr: float

    def __post_init__(self):
        if not (math.isfinite(self.design_snr) and self.design_snr > 0):
            raise ValueError("design_snr must be finite and positive")


def good_code_mi(profile: GoodCodeProfile, gamma: float) -> float:
    """Per-component MI of the code at normalized SNR gamma, nats."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return 0.5 * math.log1p(min(gamma, 1.0) * profile.design_snr)


def good_code_mmse(profile: GoodCodeProfile, gamma: float) -> float:
    """Per-component MMSE of the code; zero on [1, inf) (reliable decoding)."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if gamma >= 1.0:
        return 0.0
    return 1.0 / (1.0 + gamma * profile.design_snr)


def good_code_mmse_jump(profile: GoodCodeProfile) -> float:
    """Size of the MMSE discontinuity at the transition: left limit minus 0."""
    return 1.0 / (1.0 + profile.design_snr)


def good_code_consistency(profile: GoodCodeProfile, tol: float = 1e-9) -> CheckReport:
    """Integral check: (snr/2) * int_0^1 mmse(gamma) dgamma equals mi(1).

    The integrand's value at gamma = 1 is taken as the left limit; the jump
    there does not affect the integral.
    """
    snr = profile.design_snr
    integral = adaptive_simpson(
        lambda g: good_code_mmse(profile, g), 0.0, 1.0,
        tol=min(tol, 1e-12), fb=good_code_mmse_jump(profile))
    err = abs(0.5 * snr * integral - good_code_mi(profile, 1.0))
    row = {"integral_times_half_snr": 0.5 * snr * integral,
           "mi_at_transition": good_code_mi(profile, 1.0)}
    return CheckReport("good-code-consistency", err < tol, err, tol, (row,))


def verify_immse(
    d: ScalarDistribution,
    snr_max: float,
    grid: int = 100,
    tol: float = 1e-4,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
    delta: float = 1e-4,
) -> CheckReport:
    """Cross-check dI/dsnr against mmse/2 by central differences.

    The MI values entering the difference quotient are integrated from zero
    independently, so the check exercises the full integration path.
    """
    if grid < 10:
        raise ValueError("grid must have at least 10 points")
    cache: dict[float, float] = {}

    def mi_at(s: float) -> float:
        if s not in cache:
            cache[s] = mutual_information(d, s, q)
        return cache[s]

    rows = []
    worst = 0.0
    for s in np.linspace(0.0, snr_max, grid)[1:]:
        h = min(delta, 0.5 * s)
        deriv = (mi_at(s + h) - mi_at(s - h)) / (2.0 * h)
        target = 0.5 * mmse(d, float(s), q)
        err = abs(deriv - target)
        worst = max(worst, err)
        rows.append({"snr": float(s), "fd_derivative": deriv,
                     "half_mmse": target, "abs_error": err})
    return CheckReport("immse", worst < tol, worst, tol, tuple(rows))


# --- uniform-power optimality of the trace-constrained MMSE ------------------

def max_trace_mmse_spectrum(
    n: int,
    gamma: float,
    trace_budget: float,
    tol: float = 1e-10,
    max_iter: int = 10_000,
) -> np.ndarray:
    """Maximize (1/n) sum_i lam_i / (1 + gamma lam_i) under a trace budget.

    Projected gradient ascent on {lam >= 0, mean(lam) = trace_budget} with a
    Barzilai-Borwein step and a monotone safeguard. The objective is strictly
    concave and symmetric, so the optimum spreads the power uniformly.
    """
    if not (2 <= n <= 64):
        raise ValueError("n must be in [2, 64]")
    if not (gamma > 0 and trace_budget > 0):
        raise ValueError("gamma and trace_budget must be positive")
    total = n * trace_budget

    def objective(lam):
        return float(np.mean(lam / (1.0 + gamma * lam)))

    def gradient(lam):
        return 1.0 / (n * (1.0 + gamma * lam) ** 2)

    # deliberately non-uniform feasible start so convergence is informative
    lam = project_simplex(np.linspace(0.2, 1.8, n) * trace_budget, total)
    grad = gradient(lam)
    step = n / (2.0 * gamma)  # inverse global curvature bound
    fval = objective(lam)
    stop = tol * max(1.0, trace_budget)
    for _ in range(max_iter):
        cand = project_simplex(lam + step * grad, total)
        move = float(np.max(np.abs(cand - lam)))
        if move < stop:
            return cand
        fcand = objective(cand)
        # reject only decreases beyond rounding noise
        if fcand < fval - 4.0 * np.finfo(float).eps * (1.0 + abs(fval)):
            step *= 0.5
            continue
        grad_new = gradient(cand)
        s = cand - lam
        y = grad_new - grad
        denom = -float(s @ y)
        if denom > 0:
            step = min(max(float(s @ s) / denom, 1e-12), 1e12)
        lam, grad, fval = cand, grad_new, fcand
    raise ConvergenceError(
        f"spectrum optimizer did not reach tolerance {tol} in {max_iter} iterations")


# --- curve export -------------------------------------------------------------

MEANING_MI = "mutual_information_nats"
MEANING_MMSE = "mmse"


@dataclass(frozen=True)
class CurveSample:
    abscissa: float
    value: float
    meaning: str

    def __post_init__(self):
        if self.meaning not in (MEANING_MI, MEANING_MMSE):
            raise ValueError("meaning must be mutual_information_nats or mmse")
        if self.value < -1e-12:
            raise ValueError("curve values must be nonnegative")


def mmse_curve(d: ScalarDistribution, snrs: Sequence[float],
               q: QuadratureSpec = DEFAULT_QUADRATURE) -> list[CurveSample]:
    return [CurveSample(float(s), mmse(d, float(s), q), MEANING_MMSE) for s in snrs]


def mi_curve(d: ScalarDistribution, snrs: Sequence[float],
             q: QuadratureSpec = DEFAULT_QUADRATURE) -> list[CurveSample]:
    return [CurveSample(float(s), mutual_information(d, float(s), q), MEANING_MI)
            for s in snrs]


def good_code_curve(profile: GoodCodeProfile, gammas: Sequence[float]) -> list[CurveSample]:
    out = [CurveSample(float(g), good_code_mi(profile, float(g)), MEANING_MI)
           for g in gammas]
    out += [CurveSample(float(g), good_code_mmse(profile, float(g)), MEANING_MMSE)
            for g in gammas]
    return out


def write_curve_csv(path, samples: Iterable[CurveSample]) -> None:
    """Columns "x","y","kind"; numbers round-trip via repr."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x", "y", "kind"])
        for s in samples:
            writer.writerow([repr(s.abscissa), repr(s.value), s.meaning])
