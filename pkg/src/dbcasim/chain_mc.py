"""Slot-level Monte Carlo of the backoff chain.

Drives n independent station chains with a fixed conditional collision
probability and classifies every slot as idle, solo transmission, or
overlap, which is exactly the accounting the closed-form throughput uses.
This is the hot kernel of the test suite (>= 1e7 slots per configuration);
the inner loop is JIT-compiled with numba, with a vectorized pure-numpy
fallback.  Select the backend with the DBCASIM_BACKEND environment variable
("numba" or "numpy"); default is numba when importable.
"""

import os
from dataclasses import dataclass

import numpy as np

from .markov import MacTiming, slot_durations

BACKEND_ENV = "DBCASIM_BACKEND"

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:   # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False


@dataclass(frozen=True)
class ChainStats:
    """Empirical counterparts of the analytic model quantities."""

    nu_hat: float
    p_one_hat: float
    p_s_hat: float
    throughput_hat: float
    tx_total: int
    solo_slots: int
    multi_slots: int
    idle_slots: int
    n_slots: int


def active_backend() -> str:
    """Backend chosen by DBCASIM_BACKEND, defaulting to numba."""
    choice = os.environ.get(BACKEND_ENV, "").strip().lower()
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if not _HAVE_NUMBA:
            raise RuntimeError("DBCASIM_BACKEND=numba but numba is unavailable")
        return "numba"
    if choice:
        raise ValueError(f"unknown {BACKEND_ENV} value: {choice!r}")
    return "numba" if _HAVE_NUMBA else "numpy"


if _HAVE_NUMBA:

    @njit(cache=True)
    def _chain_slots_numba(n, W, m, upsilon, n_slots, seed):
        np.random.seed(seed)
        counters = np.empty(n, np.int64)
        stages = np.zeros(n, np.int64)
        for i in range(n):
            counters[i] = np.random.randint(0, W)
        tx_total = 0
        solo = 0
        multi = 0
        idle = 0
        for _ in range(n_slots):
            ntx = 0
            for i in range(n):
                if counters[i] == 0:
                    ntx += 1
            if ntx == 0:
                idle += 1
            elif ntx == 1:
                solo += 1
            else:
                multi += 1
            for i in range(n):
                if counters[i] == 0:
                    tx_total += 1
                    if np.random.random() < upsilon:
                        if stages[i] < m:
                            stages[i] += 1
                    else:
                        stages[i] = 0
                    counters[i] = np.random.randint(0, W << stages[i])
                else:
                    counters[i] -= 1
        return tx_total, solo, multi, idle


def _station_tx_slots(rng, W, m, upsilon, n_slots):
    """Transmission slot indices of one station, generated epoch-wise.

    An epoch is (backoff countdown + the transmission slot); stages follow
    the run length of consecutive collision outcomes, capped at m.
    """
    chunk = 1 << 16
    out = []
    offset = 0
    carry = 0   # consecutive collisions entering the chunk, capped at m
    while offset < n_slots:
        collided = rng.random(chunk) < upsilon
        idx = np.arange(chunk)
        succ_pos = np.where(~collided, idx, -1)
        last_succ = np.maximum.accumulate(succ_pos)
        prev = np.empty(chunk, np.int64)
        prev[0] = -1
        prev[1:] = last_succ[:-1]
        consec = idx - 1 - prev
        consec[prev == -1] += carry
        stages = np.minimum(consec, m)
        draws = np.floor(rng.random(chunk) * (W << stages)).astype(np.int64)
        tx_times = offset + np.cumsum(draws + 1) - 1
        out.append(tx_times[tx_times < n_slots])
        offset = int(tx_times[-1]) + 1
        if last_succ[-1] >= 0:
            carry = min(int(chunk - 1 - last_succ[-1]), m)
        else:
            carry = min(carry + chunk, m)
    return np.concatenate(out)


def _chain_slots_numpy(n, W, m, upsilon, n_slots, seed):
    counts = np.zeros(n_slots, np.uint8)
    tx_total = 0
    for station in range(n):
        rng = np.random.default_rng(np.random.SeedSequence([seed, station]))
        slots = _station_tx_slots(rng, W, m, upsilon, n_slots)
        tx_total += slots.size
        np.add.at(counts, slots, 1)
    idle = int(np.count_nonzero(counts == 0))
    solo = int(np.count_nonzero(counts == 1))
    multi = n_slots - idle - solo
    return tx_total, solo, multi, idle


def simulate_chain(n: int, W: int, m: int, upsilon: float, n_slots: int,
                   timing: MacTiming, seed: int,
                   backend: str | None = None) -> ChainStats:
    """Run the chain for n_slots virtual slots and summarize it."""
    if n < 1 or n_slots < 1:
        raise ValueError("n and n_slots must be >= 1")
    if not 0.0 <= upsilon <= 1.0:
        raise ValueError(f"upsilon must be in [0, 1], got {upsilon}")
    chosen = backend or active_backend()
    if chosen == "numba":
        tx_total, solo, multi, idle = _chain_slots_numba(
            n, W, m, upsilon, n_slots, seed)
    elif chosen == "numpy":
        tx_total, solo, multi, idle = _chain_slots_numpy(
            n, W, m, upsilon, n_slots, seed)
    else:
        raise ValueError(f"unknown backend: {chosen!r}")

    t_s, t_c = slot_durations(timing)
    busy = solo + multi
    total_time = idle * timing.sigma + solo * t_s + multi * t_c
    return ChainStats(
        nu_hat=tx_total / (n * n_slots),
        p_one_hat=busy / n_slots,
        p_s_hat=solo / busy if busy else 0.0,
        throughput_hat=solo * timing.payload / total_time if total_time else 0.0,
        tx_total=int(tx_total),
        solo_slots=int(solo),
        multi_slots=int(multi),
        idle_slots=int(idle),
        n_slots=n_slots,
    )
