"""Closed-form Markov-chain model of dynamic bandwidth channel access (DBCA).

Evaluates the per-slot transmission probability of a saturated station whose
backoff chain is driven by the OWRP-conditioned collision probability, and the
resulting normalized saturation throughput.  All probabilities are
dimensionless, all durations are in microseconds.
"""

import math
from dataclasses import dataclass, replace

SINGULARITY_EPS = 1e-9   # |1 - 2*upsilon| below this evaluates the 0/0 limit


class DegenerateActivationError(ValueError):
    """Raised when the activation probability r is zero (no station can
    become active after an idle slot, so the OWRP conditioning event never
    occurs).  Callers that solve the full model treat this as upsilon_c = 0."""


class SolverError(RuntimeError):
    """Fixed-point solve failed to converge; carries the last residual."""

    def __init__(self, message, residual):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class ModelParams:
    """Inputs of the analytic DBCA model.

    n      -- contending stations (>= 1)
    W      -- minimum contention window in slots (power of two, >= 2)
    m      -- maximum backoff stage (>= 0), CW_max = 2^m * W
    u      -- maximum channel bonding level; 2^(u-1) channels exist in total
    kappa  -- per-channel collision proportionality constant, in [0, 1]
    p      -- probability a channel is busy in a random slot, in [0, 1]
    gamma  -- probability a station activates after an idle slot, in [0, 1]
    """

    n: int
    W: int
    m: int
    u: int = 4
    kappa: float = 0.0
    p: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if self.W < 2 or self.W & (self.W - 1):
            raise ValueError(f"W must be a power of two >= 2, got {self.W}")
        if self.m < 0:
            raise ValueError(f"m must be >= 0, got {self.m}")
        if not 1 <= self.u <= 6:
            raise ValueError(f"u must be in [1, 6], got {self.u}")
        for name in ("kappa", "p", "gamma"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {v}")


@dataclass(frozen=True)
class MacTiming:
    """Channel-occupancy timing constants, microseconds.

    header is the PHY+MAC header airtime, payload the fixed-size payload
    airtime E[P], delta the propagation delay.
    """

    sigma: float = 9.0
    sifs: float = 16.0
    difs: float = 34.0
    header: float = 40.0
    ack: float = 30.0
    delta: float = 1.0
    payload: float = 1000.0

    def __post_init__(self):
        for name in ("sigma", "sifs", "difs", "header", "ack", "delta", "payload"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"{name} must be non-negative")
        if self.payload <= 0.0:
            raise ValueError("payload must be strictly positive")
        if self.difs < self.sifs:
            raise ValueError("difs must be >= sifs")

    def validate_strict(self):
        """Simulator-grade validation: every duration strictly positive and
        difs > sifs.  Degenerate zero timings are allowed for pure formula
        evaluation but not for event scheduling."""
        for name in ("sigma", "sifs", "difs", "header", "ack", "delta", "payload"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive for simulation")
        if self.difs <= self.sifs:
            raise ValueError("difs must exceed sifs")


@dataclass(frozen=True)
class ModelSolution:
    """Self-consistent model evaluation returned by solve_fixed_point."""

    upsilon_c: float
    nu: float
    b00: float
    p_one: float
    p_s: float
    throughput: float
    iterations: int
    residual: float
    clamped: bool = False   # raw Eq-sum for upsilon_c exceeded 1 and was clamped


def bonding_prob(params: ModelParams, c: int) -> float:
    """Probability p_c that a station can transmit at bonding level c:
    primary and secondary blocks both idle ((1-p)^(2^c)), or just the full
    band at the top level ((1-p)^(2^(u-1)))."""
    if not 1 <= c <= params.u:
        raise ValueError(f"bonding level {c} outside [1, {params.u}]")
    if c < params.u:
        return (1.0 - params.p) ** (2 ** c)
    return (1.0 - params.p) ** (2 ** (params.u - 1))


def bonded_collision_prob(params: ModelParams, c: int) -> float:
    """Probability q_c of a collision on any of the 2^(c-1) bonded channels,
    with the per-channel collision probability proportional to the used
    fraction of the band: q = kappa * 2^(c-1) / 2^(u-1)."""
    if not 1 <= c <= params.u:
        raise ValueError(f"bonding level {c} outside [1, {params.u}]")
    width = 2 ** (c - 1)
    q = params.kappa * width / (2 ** (params.u - 1))
    return 1.0 - (1.0 - q) ** width


def idle_then_busy_prob(params: ModelParams) -> float:
    """Probability r that the previous slot was idle and at least one other
    station is active in the current slot."""
    return (1.0 - params.p) * (1.0 - (1.0 - params.gamma) ** (params.n - 1))


def owrp_collision_prob(params: ModelParams, clamp: bool = True) -> float:
    """Collision probability of a bonding station conditioned on the previous
    slot being idle and another station activating (upsilon_c).

    The numerator sums p_c * q_c over every bonding level.  The ratio can
    exceed 1 for inconsistent parameter combinations; by default it is
    clamped into [0, 1].
    """
    r = idle_then_busy_prob(params)
    if r == 0.0:
        raise DegenerateActivationError(
            "activation probability r is zero; treat upsilon_c as 0")
    total = 0.0
    for c in range(1, params.u + 1):
        total += bonding_prob(params, c) * bonded_collision_prob(params, c)
    value = total / r
    if clamp:
        return min(max(value, 0.0), 1.0)
    return value


def _chain_denominator(upsilon_c: float, W: int, m: int) -> float:
    return ((1.0 - 2.0 * upsilon_c) * (W + 1)
            + upsilon_c * W * (1.0 - (2.0 * upsilon_c) ** m))


def transmission_prob(upsilon_c: float, W: int, m: int) -> float:
    """Per-slot transmission probability nu of the backoff chain.

    nu = 2(1-2Y) / [(1-2Y)(W+1) + Y*W*(1-(2Y)^m)] with Y = upsilon_c.
    The removable singularity at Y = 1/2 evaluates to 4 / (2(W+1) + m*W).
    """
    if not 0.0 <= upsilon_c <= 1.0:
        raise ValueError(f"upsilon_c must be in [0, 1], got {upsilon_c}")
    if abs(1.0 - 2.0 * upsilon_c) < SINGULARITY_EPS:
        return 4.0 / (2.0 * (W + 1) + m * W)
    return 2.0 * (1.0 - 2.0 * upsilon_c) / _chain_denominator(upsilon_c, W, m)


def stationary_b00(upsilon_c: float, W: int, m: int) -> float:
    """Stationary probability of the (stage 0, counter 0) chain state,
    b00 = 2(1-2Y)(1-Y) / [(1-2Y)(W+1) + Y*W*(1-(2Y)^m)].

    Satisfies nu = b00 / (1 - Y) wherever both are defined.
    """
    if not 0.0 <= upsilon_c < 1.0:
        raise ValueError(f"upsilon_c must be in [0, 1), got {upsilon_c}")
    if abs(1.0 - 2.0 * upsilon_c) < SINGULARITY_EPS:
        return (1.0 - upsilon_c) * 4.0 / (2.0 * (W + 1) + m * W)
    return (2.0 * (1.0 - 2.0 * upsilon_c) * (1.0 - upsilon_c)
            / _chain_denominator(upsilon_c, W, m))


def success_probs(nu: float, n: int) -> tuple[float, float]:
    """(P_one, P_s): probability of at least one transmission in a slot, and
    of that transmission being a lone one, given nu per station."""
    if not 0.0 <= nu <= 1.0:
        raise ValueError(f"nu must be in [0, 1], got {nu}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    p_one = 1.0 - (1.0 - nu) ** n
    if p_one == 0.0:
        return 0.0, 0.0
    p_s = n * nu * (1.0 - nu) ** (n - 1) / p_one
    return p_one, p_s


def slot_durations(timing: MacTiming) -> tuple[float, float]:
    """(T_s, T_c): average busy time of a successful exchange and of a
    collision, including trailing DIFS."""
    t_s = (timing.header + timing.payload + timing.sifs + timing.delta
           + timing.ack + timing.difs + timing.delta)
    t_c = timing.header + timing.payload + timing.difs + timing.delta
    return t_s, t_c


def normalized_throughput(p_one: float, p_s: float, timing: MacTiming) -> float:
    """Fraction of time the channel carries successfully delivered payload."""
    if not (0.0 <= p_one <= 1.0 and 0.0 <= p_s <= 1.0):
        raise ValueError("p_one and p_s must be probabilities")
    t_s, t_c = slot_durations(timing)
    denom = ((1.0 - p_one) * timing.sigma + p_one * p_s * t_s
             + p_one * (1.0 - p_s) * t_c)
    return p_one * p_s * timing.payload / denom


def _closed_loop_upsilon(nu: float, params: ModelParams) -> tuple[float, bool]:
    """upsilon_c under the closure p = 1-(1-nu)^n, gamma = nu.  Returns the
    clamped value and whether clamping occurred."""
    p = 1.0 - (1.0 - nu) ** params.n
    closed = replace(params, p=p, gamma=nu)
    try:
        raw = owrp_collision_prob(closed, clamp=False)
    except DegenerateActivationError:
        return 0.0, False
    return min(max(raw, 0.0), 1.0), raw > 1.0


def _scan_grid():
    """nu scan grid: geometric coverage of the tiny-nu floor region followed
    by a fine linear sweep up to 1."""
    grid = [1e-9 * (10 ** (i / 25)) for i in range(151)]   # 1e-9 .. 1e-3
    grid += [1e-3 + 1e-4 * i for i in range(1, 9991)]      # .. 1.0
    return grid


def solve_fixed_point(params: ModelParams, timing: MacTiming,
                      tol: float = 1e-10, damping: float = 0.5,
                      max_iter: int = 500) -> ModelSolution:
    """Solve nu = f(nu) where f evaluates the chain at the closed-loop
    collision probability (p = 1-(1-nu)^n, gamma = nu).

    The map can have several fixed points (the OWRP conditioning saturates
    for small nu and vanishes for large p); the smallest one is returned as
    the collision-dominant operating point.  Damped iteration from below,
    nu <- (1-damping)*nu + damping*f(nu), with a left-scanning bisection
    fallback on g(nu) = f(nu) - nu.
    """

    def f(nu):
        ups, _ = _closed_loop_upsilon(nu, params)
        return transmission_prob(ups, params.W, params.m)

    unique_root = params.kappa == 0.0 or params.n == 1   # f is constant

    nu = 1e-9
    iterations = 0
    residual = math.inf
    for iterations in range(1, max_iter + 1):
        fnu = f(nu)
        residual = abs(fnu - nu)
        if residual < tol:
            nu = fnu
            break
        nu = (1.0 - damping) * nu + damping * fnu

    # Locate the leftmost sign change; the damped iteration can overshoot
    # onto a higher equilibrium when the smallest one is unstable.
    bracket = None
    if not unique_root or residual >= tol:
        prev_nu = 1e-12
        prev_g = f(prev_nu) - prev_nu
        for point in _scan_grid():
            g = f(point) - point
            if prev_g > 0.0 >= g:
                bracket = (prev_nu, point)
                break
            prev_nu, prev_g = point, g

    if bracket is not None and bracket[1] < nu - 1e-8 or residual >= tol:
        if bracket is None:
            raise SolverError("no sign change for bisection fallback", residual)
        lo, hi = bracket
        g_lo = f(lo) - lo
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            g_mid = f(mid) - mid
            if g_lo * g_mid <= 0.0:
                hi = mid
            else:
                lo, g_lo = mid, g_mid
            iterations += 1
        nu = 0.5 * (lo + hi)
        residual = abs(f(nu) - nu)
        if residual >= tol:
            raise SolverError("bisection fallback did not converge", residual)

    upsilon, clamped = _closed_loop_upsilon(nu, params)
    p_one, p_s = success_probs(nu, params.n)
    return ModelSolution(
        upsilon_c=upsilon,
        nu=nu,
        b00=stationary_b00(upsilon, params.W, params.m) if upsilon < 1.0 else 0.0,
        p_one=p_one,
        p_s=p_s,
        throughput=normalized_throughput(p_one, p_s, timing),
        iterations=iterations,
        residual=residual,
        clamped=clamped,
    )


def level_reward(params: ModelParams, timing: MacTiming, c: int) -> float:
    """Expected full-band goodput share of committing to bonding level c.

    Conditions the backoff chain on the level's own collision probability
    q_c, prices in the success probability, and scales by the fraction of
    the band the level occupies.  Lies in [0, 1].
    """
    q_c = bonded_collision_prob(params, c)
    nu = transmission_prob(min(q_c, 1.0), params.W, params.m)
    p_one, p_s = success_probs(nu, params.n)
    t_norm = normalized_throughput(p_one, p_s, timing)
    width_share = 2 ** (c - 1) / 2 ** (params.u - 1)
    return t_norm * (1.0 - q_c) * width_share


def kappa_from_collision_fraction(q_hat: float, c: int, u: int) -> float:
    """Invert q_c = 1-(1 - kappa*2^(c-1)/2^(u-1))^(2^(c-1)) for kappa given
    an observed collision fraction at level c.  Clamped to [0, 1]."""
    if not 0.0 <= q_hat <= 1.0:
        raise ValueError(f"q_hat must be in [0, 1], got {q_hat}")
    width = 2 ** (c - 1)
    per_channel = 1.0 - (1.0 - q_hat) ** (1.0 / width)
    return min(max(per_channel * (2 ** (u - 1)) / width, 0.0), 1.0)
