"""Learning controller that picks a channel bonding level per round.

Keeps a statistical table of (SNR bucket, bonding level) reward histories;
the prior is the empirical use frequency inside the bucket, the likelihood
the mean recorded reward, and the selected level maximizes their product.
Early rounds and unseen buckets explore uniformly at random.
"""

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

DEFAULT_HISTORY_BOUND = 64
DEFAULT_EXPLORATION_ROUNDS = 50


class NoHistoryError(LookupError):
    """No recorded history for the requested bucket/level."""


@dataclass(frozen=True)
class BucketConfig:
    """SNR bucketing: [snr_min, snr_max] split into width-d buckets, the
    last one closed on the right."""

    snr_min: float
    snr_max: float
    d: float

    def __post_init__(self):
        if self.d <= 0.0:
            raise ValueError(f"bucket width d must be positive, got {self.d}")
        if self.snr_min >= self.snr_max:
            raise ValueError("snr_min must be below snr_max")

    @property
    def count(self) -> int:
        return max(1, math.ceil((self.snr_max - self.snr_min) / self.d))


def bucket_of(config: BucketConfig, snr: float) -> int:
    """Bucket index of an SNR sample; out-of-range values clamp to the edge
    buckets (use clamped_bucket_of to learn whether clamping occurred)."""
    return clamped_bucket_of(config, snr)[0]


def clamped_bucket_of(config: BucketConfig, snr: float) -> tuple[int, bool]:
    clamped = False
    if snr < config.snr_min:
        snr, clamped = config.snr_min, True
    elif snr > config.snr_max:
        snr, clamped = config.snr_max, True
    j = int((snr - config.snr_min) // config.d)
    return min(j, config.count - 1), clamped


@dataclass
class LevelRecord:
    """Reward history of one bonding level inside one SNR bucket."""

    level: int
    uses: int = 0
    throughput_sum: float = 0.0
    throughput_values: deque = field(
        default_factory=lambda: deque(maxlen=DEFAULT_HISTORY_BOUND))


@dataclass
class StatTable:
    """Bucket index -> {level -> LevelRecord}."""

    config: BucketConfig
    u: int
    history_bound: int = DEFAULT_HISTORY_BOUND
    buckets: dict = field(default_factory=dict)

    def record(self, j: int, level: int) -> LevelRecord:
        bucket = self.buckets.setdefault(j, {})
        if level not in bucket:
            bucket[level] = LevelRecord(
                level=level,
                throughput_values=deque(maxlen=self.history_bound))
        return bucket[level]


def prior(table: StatTable, j: int, level: int) -> float:
    """Empirical probability that `level` was the one used in bucket j."""
    bucket = table.buckets.get(j)
    if not bucket:
        raise NoHistoryError(f"bucket {j} has no history")
    total = sum(rec.uses for rec in bucket.values())
    rec = bucket.get(level)
    return rec.uses / total if rec else 0.0


def likelihood(table: StatTable, j: int, level: int) -> float:
    """Mean recorded reward of (bucket j, level)."""
    bucket = table.buckets.get(j)
    rec = bucket.get(level) if bucket else None
    if rec is None or not rec.throughput_values:
        raise NoHistoryError(f"no history for bucket {j} level {level}")
    return sum(rec.throughput_values) / len(rec.throughput_values)


@dataclass
class PolicyState:
    """One controller instance; mutate only through decide/update."""

    table: StatTable
    t: int = 0
    t_init: int = DEFAULT_EXPLORATION_ROUNDS
    rng_seed: int = 0
    clamped_snr_count: int = 0

    def __post_init__(self):
        self._rng = np.random.default_rng(self.rng_seed)


def make_policy_state(snr_min: float = 25.0, snr_max: float = 50.0,
                      d: float = 5.0, u: int = 4,
                      t_init: int = DEFAULT_EXPLORATION_ROUNDS,
                      history_bound: int = DEFAULT_HISTORY_BOUND,
                      rng_seed: int = 0) -> PolicyState:
    table = StatTable(config=BucketConfig(snr_min, snr_max, d), u=u,
                      history_bound=history_bound)
    return PolicyState(table=table, t_init=t_init, rng_seed=rng_seed)


def posterior_select(state: PolicyState, j: int) -> int:
    """Level maximizing K * likelihood * prior over recorded levels in
    bucket j; ties break toward the lower (narrower, safer) level."""
    bucket = state.table.buckets.get(j)
    if not bucket:
        raise NoHistoryError(f"bucket {j} has no history")
    k_const = state.table.u   # positive scaling, irrelevant to the argmax
    best_level = None
    best_score = -1.0
    for level in sorted(bucket):
        rec = bucket[level]
        if not rec.throughput_values:
            continue
        score = (k_const * likelihood(state.table, j, level)
                 * prior(state.table, j, level))
        if score > best_score:
            best_level, best_score = level, score
    if best_level is None:
        raise NoHistoryError(f"bucket {j} has no recorded rewards")
    return best_level


def decide(state: PolicyState, snr: float) -> int:
    """Pick a bonding level for the next round: uniform exploration during
    the first t_init rounds and for unseen buckets, posterior argmax after."""
    state.t += 1
    j, clamped = clamped_bucket_of(state.table.config, snr)
    if clamped:
        state.clamped_snr_count += 1
    if state.t <= state.t_init or not state.table.buckets.get(j):
        return int(state._rng.integers(1, state.table.u + 1))
    return posterior_select(state, j)


def update(state: PolicyState, snr: float, level: int, throughput: float):
    """Record the reward observed after using `level` under `snr`."""
    if not 0.0 <= throughput <= 1.0:
        raise ValueError(
            f"normalized throughput must lie in [0, 1], got {throughput}")
    if not 1 <= level <= state.table.u:
        raise ValueError(f"level {level} outside [1, {state.table.u}]")
    j, clamped = clamped_bucket_of(state.table.config, snr)
    if clamped:
        state.clamped_snr_count += 1
    rec = state.table.record(j, level)
    rec.uses += 1
    rec.throughput_sum += throughput
    rec.throughput_values.append(throughput)


def to_snapshot(table: StatTable) -> str:
    """Line-oriented text dump: one line per (bucket, level) record."""
    lines = [
        "# dbcasim stat-table v1",
        f"config {table.config.snr_min!r} {table.config.snr_max!r} "
        f"{table.config.d!r} {table.u} {table.history_bound}",
    ]
    for j in sorted(table.buckets):
        for level in sorted(table.buckets[j]):
            rec = table.buckets[j][level]
            values = " ".join(repr(v) for v in rec.throughput_values)
            lines.append(f"{j} {level} {rec.uses} {rec.throughput_sum!r} {values}".rstrip())
    return "\n".join(lines) + "\n"


def from_snapshot(text: str) -> StatTable:
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("#")]
    head = lines[0].split()
    if head[0] != "config":
        raise ValueError("snapshot missing config line")
    snr_min, snr_max, d = float(head[1]), float(head[2]), float(head[3])
    u, bound = int(head[4]), int(head[5])
    table = StatTable(config=BucketConfig(snr_min, snr_max, d), u=u,
                      history_bound=bound)
    for line in lines[1:]:
        parts = line.split()
        j, level, uses = int(parts[0]), int(parts[1]), int(parts[2])
        rec = table.record(j, level)
        rec.uses = uses
        rec.throughput_sum = float(parts[3])
        for value in parts[4:]:
            rec.throughput_values.append(float(value))
    return table
