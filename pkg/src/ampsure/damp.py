"""Denoiser-based approximate message passing.

One iteration, with the index convention ``z_0 = y``, ``x_0 = 0``, ``b_1 = 0``::

    b_t     = z_{t-1} * div D(x_{t-1} + Re A^H z_{t-1}) / M
    z_t     = y - A x_t + b_t
    sigma_t = noise level estimate from z_t
    x_{t+1} = D_{sigma_t}(x_t + Re A^H z_t)

The denoiser is the bank's blind denoiser while ``sigma_t <= sigma_switch`` and
the fallback denoiser above it (or whenever the blind one refuses ``sigma_t``).
"""

import enum
import logging
from dataclasses import dataclass, field, replace

import numpy as np

from .denoise import DivergenceProbe, HardThresholdDCT, mc_divergence
from .errors import DivergenceError, ParameterError, ShapeError, SigmaRangeError

__all__ = [
    "Estimator",
    "DAmpConfig",
    "DAmpState",
    "DenoiserBank",
    "DAmpResult",
    "estimate_sigma_measurement",
    "estimate_sigma_image",
    "damp_init",
    "damp_step",
    "damp_run",
]

log = logging.getLogger(__name__)


class Estimator(enum.Enum):
    MEASUREMENT = "measurement"
    IMAGE = "image"


@dataclass(frozen=True)
class DAmpConfig:
    iterations: int = 10
    estimator: Estimator = Estimator.MEASUREMENT
    sigma_switch: float = 55.0
    probe_epsilon_factor: float = 0.1
    clamp: bool = False
    probe_seed: int = 0
    divergence_probes: int = 1

    def __post_init__(self):
        if self.iterations < 1:
            raise ParameterError(f"iterations must be >= 1, got {self.iterations}")
        if self.sigma_switch < 0:
            raise ParameterError("sigma_switch must be nonnegative")
        if self.divergence_probes < 1:
            raise ParameterError("divergence_probes must be >= 1")
        if not self.probe_epsilon_factor > 0:
            raise ParameterError("probe_epsilon_factor must be positive")
        if not isinstance(self.estimator, Estimator):
            object.__setattr__(self, "estimator", Estimator(self.estimator))


@dataclass
class DenoiserBank:
    """A blind denoiser for low noise plus a fallback for everything else.

    With ``blind=None`` every iteration uses the fallback.
    """

    blind: object = None
    fallback: object = field(default_factory=HardThresholdDCT)

    def select(self, sigma, switch):
        if self.blind is not None and sigma <= switch:
            lo, hi = getattr(self.blind, "sigma_range", (0.0, np.inf))
            if lo <= sigma <= hi:
                return self.blind, "blind"
        return self.fallback, "fallback"


@dataclass
class DAmpState:
    x: np.ndarray
    z: np.ndarray
    b: np.ndarray
    sigma_hat: float
    t: int = 0
    pseudo_clean: np.ndarray = None
    divergence: float = 0.0


@dataclass
class DAmpResult:
    image: np.ndarray
    state: DAmpState
    trace: list

    def __iter__(self):
        return iter((self.image, self.state, self.trace))


def estimate_sigma_measurement(z):
    """Residual norm over sqrt(M)."""
    z = np.asarray(z).reshape(-1)
    if z.size < 1:
        raise ShapeError("empty residual")
    return float(np.linalg.norm(z) / np.sqrt(z.size))


def estimate_sigma_image(op, z, back=None):
    """Norm of the real part of ``A^H z`` over sqrt(N).

    ``back`` may carry a precomputed ``A^H z``.
    """
    if back is None:
        back = op.adjoint(z)
    return float(np.linalg.norm(np.real(back)) / np.sqrt(op.n))


def _estimate(cfg_estimator, op, z, back):
    if cfg_estimator == Estimator.IMAGE:
        return estimate_sigma_image(op, z, back)
    return estimate_sigma_measurement(z)


def damp_init(op, y, estimator=Estimator.MEASUREMENT):
    y = np.asarray(y).reshape(-1)
    if y.size != op.m:
        raise ShapeError(f"measurement has {y.size} entries, operator has {op.m} rows")
    z = y.copy()
    back = op.adjoint(z) if estimator == Estimator.IMAGE else None
    return DAmpState(
        x=np.zeros(op.n),
        z=z,
        b=np.zeros_like(z),
        sigma_hat=_estimate(Estimator(estimator), op, z, back),
        t=0,
    )


def _check_finite(t, *arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise DivergenceError(t)


def damp_step(state, op, y, bank, cfg):
    """Advance ``state`` by one iteration; returns a new state and a trace record."""
    t = state.t + 1
    y = np.asarray(y).reshape(-1)
    m = op.m

    if state.t == 0:
        b = np.zeros_like(state.z)
    else:
        b = state.z * (state.divergence / m)
    z = y - op.apply(state.x) + b
    back = op.adjoint(z)
    sigma_meas = estimate_sigma_measurement(z)
    sigma_img = estimate_sigma_image(op, z, back)
    sigma = sigma_img if cfg.estimator == Estimator.IMAGE else sigma_meas
    pseudo = state.x + np.real(back)
    _check_finite(t, z, pseudo, [sigma])

    d, which = bank.select(sigma, cfg.sigma_switch)
    image = pseudo.reshape(op.image_shape)
    try:
        x_img = d(image, sigma)
    except SigmaRangeError:
        d, which = bank.fallback, "fallback"
        x_img = d(image, sigma)
    eps = max(sigma, 1.0) * cfg.probe_epsilon_factor
    base_seed = cfg.probe_seed * 1_000_003 + t
    div = float(np.mean([
        mc_divergence(d, image, sigma, DivergenceProbe(eps, seed=(base_seed + j * 2**32) % 2**63), reference=x_img)
        for j in range(cfg.divergence_probes)]))
    x_new = np.asarray(x_img, dtype=np.float64).reshape(-1)
    _check_finite(t, x_new, [div])

    new = DAmpState(x=x_new, z=z, b=b, sigma_hat=sigma, t=t,
                    pseudo_clean=pseudo, divergence=div)
    record = {
        "t": t,
        "sigma_hat": sigma,
        "sigma_measurement": sigma_meas,
        "sigma_image": sigma_img,
        "denoiser": which,
    }
    return new, record


def damp_run(op, y, bank, cfg, x_true=None):
    """Run ``cfg.iterations`` D-AMP steps from ``x = 0``.

    Returns ``DAmpResult(image, state, trace)``; it also unpacks as a tuple.
    ``image`` is the last denoiser output in ``op.image_shape``, clamped to
    [0, 255] when ``cfg.clamp`` is set. With ``x_true`` the trace also records
    the standard deviation of the true effective noise ``pseudo_clean - x_true``.
    """
    if not isinstance(bank, DenoiserBank):
        bank = DenoiserBank(blind=None, fallback=bank)
    state = damp_init(op, y, cfg.estimator)
    truth = None if x_true is None else np.asarray(x_true, dtype=np.float64).reshape(-1)
    trace = []
    for _ in range(cfg.iterations):
        state, record = damp_step(state, op, y, bank, cfg)
        if truth is not None:
            record["sigma_true"] = float(np.std(state.pseudo_clean - truth))
        trace.append(record)
    image = state.x.reshape(op.image_shape)
    if cfg.clamp:
        image = np.clip(image, 0.0, 255.0)
    return DAmpResult(image, state, trace)


def with_estimator(cfg, estimator):
    return replace(cfg, estimator=Estimator(estimator))
