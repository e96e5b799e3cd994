"""Threshold sampling from the truncated-normal family on [0, 1] and the
conversion of fractional thresholds to integer resistances.

The distribution is parametrized by the standard deviation sigma of the
*truncated* law (not the underlying normal), so sigma = 0 degenerates to a
point mass at the mean and sigma = 1/sqrt(12) to the uniform distribution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import EdgeListFormatError, ParameterError
from .graphgen import Graph

SIGMA_UNIFORM = 1.0 / math.sqrt(12.0)
_UNIFORM_EDGE = SIGMA_UNIFORM - 1e-6

KINDS = ("identical", "truncated_normal", "uniform")


@dataclass(frozen=True)
class ThresholdSpec:
    """Mean, truncated standard deviation, and distribution kind."""

    sigma: float
    mean: float = 0.5
    kind: str = "truncated_normal"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ParameterError(f"unknown threshold kind {self.kind!r}")
        if not 0.0 <= self.mean <= 1.0:
            raise ParameterError(f"mean must lie in [0, 1], got {self.mean}")
        if not 0.0 <= self.sigma <= SIGMA_UNIFORM + 1e-12:
            raise ParameterError(
                f"sigma must lie in [0, 1/sqrt(12)], got {self.sigma}")
        if self.kind == "identical" and self.sigma != 0.0:
            raise ParameterError("kind='identical' requires sigma=0")
        if self.kind == "uniform" and self.sigma < _UNIFORM_EDGE:
            raise ParameterError("kind='uniform' requires sigma=1/sqrt(12)")
        if self.kind == "truncated_normal" and not 0.0 < self.sigma < _UNIFORM_EDGE:
            raise ParameterError(
                "kind='truncated_normal' requires 0 < sigma < 1/sqrt(12); "
                "use 'identical' or 'uniform' at the endpoints")

    @classmethod
    def from_sigma(cls, sigma: float, mean: float = 0.5) -> "ThresholdSpec":
        """Map sigma to its regime: 0 -> identical, 1/sqrt(12) -> uniform."""
        if sigma <= 0.0:
            return cls(sigma=0.0, mean=mean, kind="identical")
        if sigma >= _UNIFORM_EDGE:
            return cls(sigma=SIGMA_UNIFORM, mean=mean, kind="uniform")
        return cls(sigma=sigma, mean=mean, kind="truncated_normal")


def _phi_pdf(x: float) -> float:
    return math.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)


def _phi_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


def truncated_std(tau: float, mean: float = 0.5) -> float:
    """Standard deviation of Normal(mean, tau) truncated to [0, 1]."""
    alpha = (0.0 - mean) / tau
    beta = (1.0 - mean) / tau
    z = _phi_cdf(beta) - _phi_cdf(alpha)
    a_term = (alpha * _phi_pdf(alpha) - beta * _phi_pdf(beta)) / z
    b_term = (_phi_pdf(alpha) - _phi_pdf(beta)) / z
    var = tau * tau * (1.0 + a_term - b_term * b_term)
    return math.sqrt(max(var, 0.0))


def solve_tau(sigma_target: float, tol: float = 1e-9, mean: float = 0.5) -> float:
    """Width tau of the underlying normal whose truncation to [0, 1] has
    standard deviation sigma_target.

    The truncated std grows monotonically from 0 (tau -> 0) to 1/sqrt(12)
    (tau -> inf), so the root is bracketed and found with Brent's method.
    """
    if not 0.0 < sigma_target < SIGMA_UNIFORM:
        raise ParameterError(
            "sigma_target must lie strictly between 0 and 1/sqrt(12); "
            "use kind='identical' or kind='uniform' at the endpoints")
    lo, hi = 1e-12, 64.0
    tau = brentq(lambda t: truncated_std(t, mean) - sigma_target, lo, hi,
                 xtol=1e-14, rtol=8.9e-16)
    if abs(truncated_std(tau, mean) - sigma_target) > tol:
        raise ParameterError(
            f"could not match sigma={sigma_target} within tol={tol}")
    return float(tau)


def sample_thresholds(spec: ThresholdSpec, n: int, rng_seed: int) -> np.ndarray:
    """n thresholds in [0, 1]; the same (spec, n, seed) returns the same vector.

    truncated_normal uses rejection sampling from Normal(mean, tau): draws
    outside [0, 1] are discarded, which is exactly the truncation.
    """
    if n < 0:
        raise ParameterError("n must be nonnegative")
    rng = np.random.default_rng(rng_seed)
    if spec.kind == "identical":
        return np.full(n, spec.mean, dtype=np.float64)
    if spec.kind == "uniform":
        return rng.random(n)
    tau = solve_tau(spec.sigma, mean=spec.mean)
    out = np.empty(n, dtype=np.float64)
    filled = 0
    while filled < n:
        draw = rng.normal(spec.mean, tau, size=n - filled)
        keep = draw[(draw >= 0.0) & (draw <= 1.0)]
        out[filled:filled + keep.size] = keep
        filled += keep.size
    return out


def resistances(g: Graph, phi: np.ndarray) -> np.ndarray:
    """r_i = ceil(phi_i * degree_i), with a guard so products that are
    integers up to float noise (|p - round(p)| < 1e-9) are not bumped up.
    """
    phi = np.asarray(phi, dtype=np.float64)
    if phi.size != g.node_count:
        raise ParameterError(
            f"threshold vector length {phi.size} != node count {g.node_count}")
    if phi.size and (phi.min() < 0.0 or phi.max() > 1.0):
        raise ParameterError("thresholds must lie in [0, 1]")
    p = phi * g.degrees
    nearest = np.rint(p)
    p = np.where(np.abs(p - nearest) < 1e-9, nearest, p)
    return np.ceil(p).astype(np.int64)


def save_thresholds(phi: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        for i, value in enumerate(phi):
            fh.write(f"{i} {value!r}\n")


def load_thresholds(path) -> np.ndarray:
    values = {}
    with open(path) as fh:
        for ln, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise EdgeListFormatError(
                    f"line {ln}: expected 'node_id phi', got {line!r}")
            try:
                node = int(parts[0])
                value = float(parts[1])
            except ValueError:
                raise EdgeListFormatError(f"line {ln}: malformed {line!r}") from None
            if node < 0 or node in values:
                raise EdgeListFormatError(f"line {ln}: bad or repeated node id {node}")
            if not 0.0 <= value <= 1.0:
                raise EdgeListFormatError(f"line {ln}: phi outside [0, 1]")
            values[node] = value
    if not values:
        return np.empty(0, dtype=np.float64)
    n = max(values) + 1
    if len(values) != n:
        missing = next(i for i in range(n) if i not in values)
        raise EdgeListFormatError(f"missing threshold for node {missing}")
    out = np.empty(n, dtype=np.float64)
    for node, value in values.items():
        out[node] = value
    return out
