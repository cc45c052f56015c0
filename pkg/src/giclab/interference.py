"""Two-user Gaussian interference channel: effect of a maximal-rate code on
the interfering signal's mutual information, and the resulting corner points.

The channel at the interfered-with receiver is
y = sqrt(snr1) x + sqrt(a snr2) z + n with unit-power users, 0 < a < 1 and
cross gain b >= 0 at the other receiver. When x carries a capacity-achieving
code decoded reliably at snr1, the interferer is effectively observed
through pure AWGN at the effective SNR gamma*a*snr2/(1 + gamma*snr1); past
the reliable-decoding point the interferer's MI stops growing. Corner
points follow for the one-sided (b = 0), weak (0 < b < 1) and mixed
(b >= 1) regimes.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

from .dists import ScalarDistribution, Gaussian, variance
from .immse import mutual_information
from .mmse import DEFAULT_QUADRATURE, QuadratureSpec, mmse
from .reports import CheckReport

LN2 = math.log(2.0)


@dataclass(frozen=True)
class InterferenceParams:
    snr1: float
    snr2: float
    a: float
    b: float = 0.0

    def __post_init__(self):
        vals = (self.snr1, self.snr2, self.a, self.b)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("all channel parameters must be finite")
        if self.snr1 <= 0 or self.snr2 <= 0:
            raise ValueError("snr1 and snr2 must be positive")
        if not 0.0 < self.a < 1.0:
            raise ValueError("a must lie strictly inside (0, 1)")
        if self.b < 0:
            raise ValueError("b must be >= 0")


@dataclass(frozen=True)
class RatePair:
    rx: float
    rz: float

    def __post_init__(self):
        if not (math.isfinite(self.rx) and math.isfinite(self.rz)):
            raise ValueError("rates must be finite")
        if self.rx < 0 or self.rz < 0:
            raise ValueError("rates must be nonnegative")

    def in_bits(self) -> "RatePair":
        return RatePair(self.rx / LN2, self.rz / LN2)


def _warn_if_not_unit_variance(z: ScalarDistribution) -> None:
    if abs(variance(z) - 1.0) > 1e-9:
        warnings.warn("interferer variance differs from the unit power convention",
                      stacklevel=3)


def effective_snr(gamma: float, p: InterferenceParams) -> float:
    """SNR at which the interferer is effectively seen through clean AWGN."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return gamma * p.a * p.snr2 / (1.0 + gamma * p.snr1)


def zero_mmse_threshold(p: InterferenceParams) -> float:
    """Above this AWGN SNR the interferer's MMSE must vanish: a*snr2/(1+snr1)."""
    return p.a * p.snr2 / (1.0 + p.snr1)


def interference_mi(
    z: ScalarDistribution,
    gamma: float,
    p: InterferenceParams,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """I(z; y(gamma)) in nats; constant for gamma >= 1 (derivative is zero
    past reliable decoding of the intended message)."""
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    return mutual_information(z, effective_snr(min(gamma, 1.0), p), q)


def interference_mi_derivative(
    z: ScalarDistribution,
    gamma: float,
    p: InterferenceParams,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """dI(z; y(gamma))/dgamma in nats, valid for gamma in [0, 1).

    Equals mmse(z, effective_snr) * a*snr2 / (2 * (1 + gamma*snr1)^2): the
    interferer behaves as if observed through AWGN at the effective SNR.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("the derivative formula holds for gamma in [0, 1)")
    _warn_if_not_unit_variance(z)
    scale = p.a * p.snr2 / (1.0 + gamma * p.snr1) ** 2
    return 0.5 * mmse(z, effective_snr(gamma, p), q) * scale


def mmse_w(
    z: ScalarDistribution,
    gamma: float,
    p: InterferenceParams,
    q: QuadratureSpec = DEFAULT_QUADRATURE,
) -> float:
    """Limiting per-component MSE of the combined signal sqrt(snr1) x +
    sqrt(a snr2) z estimated from y(gamma), for gamma in [0, 1)."""
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    denom = 1.0 + gamma * p.snr1
    return p.snr1 / denom + p.a * p.snr2 / denom ** 2 * mmse(z, effective_snr(gamma, p), q)


def chain_rule_check(
    z: ScalarDistribution,
    gamma: float,
    p: InterferenceParams,
    tol: float = 1e-9,
) -> CheckReport:
    """MI additivity check for a unit Gaussian interferer.

    Computes I(w; y(gamma)) both as interferer MI plus the intended-code MI
    and in the joint Gaussian closed form, and reports the gap. Only the
    Gaussian(0, 1) interferer admits independent closed forms on both sides.
    """
    if not isinstance(z, Gaussian) or z.mean != 0.0 or z.variance != 1.0:
        raise ValueError("chain_rule_check requires z = Gaussian(0, 1)")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    via_parts = interference_mi(z, gamma, p) + 0.5 * math.log1p(gamma * p.snr1)
    joint = 0.5 * math.log1p(gamma * p.snr1 + gamma * p.a * p.snr2)
    gap = abs(via_parts - joint)
    row = {"gamma": gamma, "sum_of_parts": via_parts, "joint_closed_form": joint}
    return CheckReport("chain-rule", gap < tol, gap, tol, (row,))


# --- corner points ------------------------------------------------------------

def corner_point_z(p: InterferenceParams) -> RatePair:
    """Corner of the one-sided channel: intended user at full rate."""
    if p.b != 0.0:
        warnings.warn("one-sided corner point requested with b != 0", stacklevel=2)
    return RatePair(0.5 * math.log1p(p.snr1),
                    0.5 * math.log1p(zero_mmse_threshold(p)))


def corner_points_weak(p: InterferenceParams) -> tuple[RatePair, RatePair]:
    """Both corners of the weak channel (0 < b < 1)."""
    if not 0.0 < p.b < 1.0:
        raise ValueError("weak regime requires 0 < b < 1")
    first = RatePair(0.5 * math.log1p(p.snr1),
                     0.5 * math.log1p(p.a * p.snr2 / (1.0 + p.snr1)))
    second = RatePair(0.5 * math.log1p(p.b * p.snr1 / (1.0 + p.snr2)),
                      0.5 * math.log1p(p.snr2))
    return first, second


def corner_point_mixed(p: InterferenceParams) -> tuple[RatePair, RatePair]:
    """Mixed-regime corner (b >= 1) and the looser MAC bound for comparison."""
    if p.b < 1.0:
        raise ValueError("mixed regime requires b >= 1")
    corner = RatePair(0.5 * math.log1p(p.snr1),
                      0.5 * math.log1p(p.a * p.snr2 / (1.0 + p.snr1)))
    mac = RatePair(0.5 * math.log1p(p.snr1),
                   0.5 * math.log((1.0 + p.snr2 + p.b * p.snr1) / (1.0 + p.snr1)))
    return corner, mac


def tin_optimal_b_interval(p: InterferenceParams) -> tuple[float, float]:
    """Cross-gain interval where treating interference as noise is optimal.

    Exposed as an annotation only; this module does not assert optimality
    over the interval.
    """
    return 1.0, (1.0 - p.a + p.snr1) / (p.a * p.snr1)


def corner_report(p: InterferenceParams, regime: str, units: str = "nats") -> dict:
    """JSON-ready corner-point report for the requested regime."""
    if units not in ("nats", "bits"):
        raise ValueError("units must be 'nats' or 'bits'")

    def pair(r: RatePair) -> list[float]:
        r = r.in_bits() if units == "bits" else r
        return [r.rx, r.rz]

    out = {"regime": regime, "units": units,
           "params": {"snr1": p.snr1, "snr2": p.snr2, "a": p.a, "b": p.b}}
    if regime == "z":
        out["corner"] = pair(corner_point_z(p))
    elif regime == "weak":
        first, second = corner_points_weak(p)
        out["corner"] = pair(first)
        out["corner2"] = pair(second)
    elif regime == "mixed":
        corner, mac = corner_point_mixed(p)
        out["corner"] = pair(corner)
        out["mac_bound"] = pair(mac)
        out["tin_optimal_b_interval"] = list(tin_optimal_b_interval(p))
    else:
        raise ValueError("regime must be one of 'z', 'weak', 'mixed'")
    return out
