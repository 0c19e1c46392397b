"""Confining potential, exact drift flow, and a split-step SDE integrator.

The growth-rate process is

    dr = -V'(r) dt + dL(mu, D),      V(r) = (alpha/beta) |r - r0|^beta,

a mean-reverting random walk whose noise is symmetric stable.  The drift
ODE dr/dt = -V'(r) has a closed-form solution, so the integrator alternates
the exact drift flow with a stable increment (split-step).  Explicit Euler
is useless here: after a large Levy jump into the steep potential wall the
drift term explodes; the exact flow relaxes monotonically toward r0 and is
unconditionally stable.

Noise convention: D is the Langevin amplitude of the driving process.  The
increment of dL over a window dt is symmetric stable with index mu and
stable scale D (dt/mu)^(1/mu).  For mu = 2 this is exactly D dW_t (the
quadratic-potential stationary law is then Gaussian with standard
deviation D / sqrt(2 alpha)), and for mu = 1 the unit-time increment is
Cauchy with scale D.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .errors import EmptyTrajectoryError
from .stable import StableParams, sample

_SIM_BLOCK = 1 << 20


@dataclass(frozen=True)
class Potential:
    """Confining well (alpha/beta) |r - r0|^beta with alpha, beta > 0."""

    alpha: float
    beta: float
    r0: float = 0.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.beta > 0:
            raise ValueError(f"beta must be positive, got {self.beta}")


@dataclass(frozen=True)
class SimConfig:
    """Integrator configuration.

    ``burn_in`` defaults to 10% of ``n_steps``; ``thin`` keeps every k-th
    post-burn-in point.
    """

    dt: float
    n_steps: int
    burn_in: int | None = None
    thin: int = 1
    r_init: float = 0.0

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.n_steps < 1:
            raise ValueError("n_steps must be >= 1")
        if self.burn_in is None:
            object.__setattr__(self, "burn_in", self.n_steps // 10)
        if not 0 <= self.burn_in < self.n_steps:
            raise ValueError("need 0 <= burn_in < n_steps")
        if self.thin < 1:
            raise ValueError("thin must be >= 1")

    @property
    def n_kept(self) -> int:
        return (self.n_steps - self.burn_in) // self.thin


@dataclass(frozen=True)
class Trajectory:
    """Sampled path: time stamps (yr) and growth rates (%/yr)."""

    times: np.ndarray
    rates: np.ndarray = field(repr=False)

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if t.shape != r.shape or t.ndim != 1:
            raise ValueError("times and rates must be 1-D of equal length")
        if len(t) > 1 and not np.all(np.diff(t) > 0):
            raise ValueError("times must be strictly increasing")
        t.flags.writeable = False
        r.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "rates", r)


def potential_value(p: Potential, r):
    """V(r) = (alpha/beta) |r - r0|^beta."""
    y = np.abs(np.asarray(r, dtype=float) - p.r0)
    out = (p.alpha / p.beta) * y**p.beta
    return float(out) if out.ndim == 0 else out


def force(p: Potential, r):
    """-V'(r) = -alpha sign(r - r0) |r - r0|^(beta - 1); 0 at r = r0."""
    y = np.asarray(r, dtype=float) - p.r0
    ay = np.abs(y)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = -p.alpha * np.sign(y) * ay ** (p.beta - 1.0)
    out = np.where(ay == 0.0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def drift_flow(p: Potential, r, t):
    """Exact solution of dr/dt = -V'(r) after time t >= 0.

    Monotone toward r0, never overshoots.  For beta < 2 trajectories reach
    r0 in finite time (the bracket in the closed form hits zero); for
    beta > 2 the decay is algebraic.
    """
    r_arr = np.asarray(r, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("drift_flow requires t >= 0")
    y = r_arr - p.r0
    if abs(p.beta - 2.0) < 1e-9:
        out = p.r0 + y * np.exp(-p.alpha * t_arr)
        return float(out) if out.ndim == 0 else out

    ay = np.abs(y)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        u = p.alpha * (p.beta - 2.0) * t_arr * ay ** (p.beta - 2.0)
        shrink = (1.0 + u) ** (1.0 / (2.0 - p.beta))
        # Overflowing u (huge |y|, steep beta) means the universal envelope
        # (alpha (beta-2) t)^(-1/(beta-2)) applies, independent of y.
        envelope = (p.alpha * (p.beta - 2.0) * t_arr) ** (-1.0 / (p.beta - 2.0))
        ay_new = np.where(np.isinf(u), envelope, ay * shrink)
        ay_new = np.where(1.0 + u <= 0.0, 0.0, ay_new)  # finite-time extinction
        ay_new = np.where((ay == 0.0) | (t_arr == 0.0), ay, ay_new)
    out = p.r0 + np.sign(y) * ay_new
    return float(out) if out.ndim == 0 else out


def increment_scale(noise: StableParams, dt: float) -> float:
    """Stable scale of the noise increment over a window dt.

    Maps the Langevin amplitude D to the stable scale D (dt/mu)^(1/mu); see
    the module docstring for the convention.
    """
    return noise.scale * (dt / noise.mu) ** (1.0 / noise.mu)


def step(p: Potential, noise: StableParams, r: float, dt: float, rng) -> float:
    """One split-step transition: exact drift flow then a stable kick."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    kick = sample(StableParams(noise.mu, increment_scale(noise, dt)), rng)
    return drift_flow(p, r, dt) + kick


@njit(cache=True)
def _advance_block(r, alpha, beta, r0, dt, incr, step0, burn_in, thin, out):
    """Advance the chain over one block of precomputed noise increments,
    writing kept points into ``out``.  Returns the final state."""
    beta_is_2 = abs(beta - 2.0) < 1e-9
    for m in range(incr.shape[0]):
        y = r - r0
        if beta_is_2:
            y = y * np.exp(-alpha * dt)
        elif y != 0.0:
            ay = abs(y)
            u = alpha * (beta - 2.0) * dt * ay ** (beta - 2.0)
            if np.isinf(u):
                ay = (alpha * (beta - 2.0) * dt) ** (-1.0 / (beta - 2.0))
            elif 1.0 + u <= 0.0:
                ay = 0.0
            else:
                ay = ay * (1.0 + u) ** (1.0 / (2.0 - beta))
            y = ay if y > 0.0 else -ay
        r = r0 + y + incr[m]
        i = step0 + m + 1
        if i > burn_in:
            d = i - burn_in
            if d % thin == 0:
                out[d // thin - 1] = r
    return r


def _simulate_with_increments(p: Potential, cfg: SimConfig, increments: np.ndarray) -> Trajectory:
    """Deterministic core of :func:`simulate` given the full increment array."""
    n_kept = cfg.n_kept
    if n_kept < 1:
        raise EmptyTrajectoryError(
            f"no points kept: n_steps={cfg.n_steps}, burn_in={cfg.burn_in}, thin={cfg.thin}"
        )
    if len(increments) != cfg.n_steps:
        raise ValueError("need one increment per step")
    out = np.empty(n_kept)
    r = float(cfg.r_init)
    pos = 0
    while pos < cfg.n_steps:
        block = increments[pos : pos + _SIM_BLOCK]
        r = _advance_block(
            r, p.alpha, p.beta, p.r0, cfg.dt, block, pos, cfg.burn_in, cfg.thin, out
        )
        pos += len(block)
    times = cfg.dt * (cfg.burn_in + cfg.thin * np.arange(1, n_kept + 1))
    return Trajectory(times, out)


def simulate(p: Potential, noise: StableParams, cfg: SimConfig, rng) -> Trajectory:
    """Integrate the SDE and return the thinned post-burn-in path.

    Parameters
    ----------
    p : Potential
    noise : StableParams
        Noise law (mu, amplitude D).
    cfg : SimConfig
    rng : numpy.random.Generator

    Returns
    -------
    Trajectory
        floor((n_steps - burn_in) / thin) points; times are step indices
        times dt.

    Raises
    ------
    EmptyTrajectoryError
        If the configuration keeps no points.
    """
    n_kept = cfg.n_kept
    if n_kept < 1:
        raise EmptyTrajectoryError(
            f"no points kept: n_steps={cfg.n_steps}, burn_in={cfg.burn_in}, thin={cfg.thin}"
        )
    scale = increment_scale(noise, cfg.dt)
    kick = StableParams(noise.mu, scale)
    out = np.empty(n_kept)
    r = float(cfg.r_init)
    pos = 0
    while pos < cfg.n_steps:
        nb = min(_SIM_BLOCK, cfg.n_steps - pos)
        block = sample(kick, rng, size=nb)
        r = _advance_block(
            r, p.alpha, p.beta, p.r0, cfg.dt, block, pos, cfg.burn_in, cfg.thin, out
        )
        pos += nb
    times = cfg.dt * (cfg.burn_in + cfg.thin * np.arange(1, n_kept + 1))
    return Trajectory(times, out)
