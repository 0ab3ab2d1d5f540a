"""Iterated water-filling game under synchronous and asynchronous schedules.

Users repeatedly water-fill against possibly stale views of each other's
powers. The schedule fixes who updates at each step and how old the views
may be; convergence is declared when a full round of updates no longer
moves the profile.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .precode import EffectiveNetwork
from .waterfill import (
    PowerProfile,
    best_response,
    interference_plus_noise,
    uniform_profile,
    user_rate,
    validate_profile,
    water_level,
)

DEFAULT_IT_MAX = 100
DEFAULT_TOL = 1e-6

SCHEDULE_KINDS = ("jacobi", "gauss_seidel", "random_async")


class ScheduleError(ValueError):
    """Raised for unknown schedule kinds or invalid bounds."""


@dataclass(frozen=True)
class Schedule:
    """Update plan for the iterated game.

    update_sets[n] lists the users revising their power at step n.
    delays, present only for the random schedule, holds at [n, q, r] the
    age of the view user q has of user r at step n; ages never exceed
    delay_bound, and no user goes more than update_bound steps without
    an update.
    """

    kind: str
    it_max: int
    update_sets: tuple[tuple[int, ...], ...]
    delay_bound: int
    update_bound: int
    seed: int
    delays: np.ndarray | None


@dataclass
class GameTrace:
    """Full record of one game run.

    profiles[0] is the starting point and profiles[n] the state after step
    n; residuals[n-1] is the largest power change made at step n.
    """

    profiles: list[PowerProfile]
    updated: list[tuple[int, ...]]
    residuals: list[float]
    converged: bool
    iterations_used: int
    final_rates: np.ndarray
    nash_gap: float


def make_schedule(
    kind: str,
    num_users: int,
    it_max: int = DEFAULT_IT_MAX,
    seed: int = 0,
    delay_bound: int = 0,
    update_bound: int = 1,
) -> Schedule:
    """Build a deterministic update plan.

    jacobi updates everyone at every step from fresh views; gauss_seidel
    cycles one user per step; random_async flips a fair coin per user and
    step (forcing an update when update_bound would otherwise be broken)
    and draws view ages uniformly from {0..delay_bound}.
    """
    if kind not in SCHEDULE_KINDS:
        raise ScheduleError(f"unknown schedule kind {kind!r}, expected one of {SCHEDULE_KINDS}")
    if num_users < 1 or it_max < 1:
        raise ScheduleError("num_users and it_max must be positive")

    if kind == "jacobi":
        everyone = tuple(range(num_users))
        return Schedule(kind, it_max, (everyone,) * it_max, 0, 1, int(seed), None)

    if kind == "gauss_seidel":
        sets = tuple((n % num_users,) for n in range(it_max))
        return Schedule(kind, it_max, sets, 0, num_users, int(seed), None)

    if delay_bound < 0 or update_bound < 1:
        raise ScheduleError(
            f"random_async needs delay_bound >= 0 and update_bound >= 1, "
            f"got {delay_bound}, {update_bound}"
        )
    rng = np.random.default_rng(seed)
    last = np.full(num_users, -1)
    sets = []
    delays = np.zeros((it_max, num_users, num_users), dtype=np.int64)
    for n in range(it_max):
        coins = rng.random(num_users) < 0.5
        forced = (n - last) >= update_bound
        members = np.flatnonzero(coins | forced)
        if delay_bound > 0:
            delays[n] = rng.integers(0, delay_bound + 1, size=(num_users, num_users))
            np.fill_diagonal(delays[n], 0)  # own power is always current
        last[members] = n
        sets.append(tuple(int(q) for q in members))
    return Schedule(
        kind, it_max, tuple(sets), int(delay_bound), int(update_bound), int(seed), delays
    )


def run_game(
    net: EffectiveNetwork,
    schedule: Schedule,
    start: PowerProfile | None = None,
    tol: float = DEFAULT_TOL,
) -> GameTrace:
    """Iterate water-filling responses under a schedule.

    Convergence is declared once every user has updated inside the last
    update_bound steps and no power moved by more than tol across them.
    """
    cfg = net.config
    n_users = cfg.num_users
    profile = uniform_profile(cfg) if start is None else start.copy()
    validate_profile(profile, cfg)

    offsets = np.concatenate(([0], np.cumsum(cfg.tx_antennas)))
    current = profile.stacked()
    # history[-1] always equals the state at the start of the step (age 0)
    history = [current.copy()]
    window = max(schedule.update_bound, 1)
    last_update = np.full(n_users, -1)

    profiles = [profile.copy()]
    updated: list[tuple[int, ...]] = []
    residuals: list[float] = []
    converged = False
    steps = 0

    for n in range(schedule.it_max):
        members = schedule.update_sets[n]
        new_powers = {}
        for q in members:
            if schedule.delays is None:
                view = current
            else:
                view = current.copy()
                age_row = schedule.delays[n, q]
                for r in range(n_users):
                    if r == q:
                        continue
                    age = min(int(age_row[r]), len(history) - 1)
                    if age > 0:
                        src = history[-1 - age]
                        view[offsets[r] : offsets[r + 1]] = src[offsets[r] : offsets[r + 1]]
            c = net.noise_floor[q] + net.stacked_coupling[q] @ view
            wf = water_level(c, cfg.power_budget[q])
            p_new = np.zeros(cfg.tx_antennas[q])
            p_new[: c.size] = wf.powers
            new_powers[q] = p_new

        residual = 0.0
        for q, p_new in new_powers.items():
            residual = max(residual, float(np.abs(p_new - profile.powers[q]).max()))
            profile.powers[q] = p_new
            current[offsets[q] : offsets[q + 1]] = p_new
            last_update[q] = n

        history.append(current.copy())
        if len(history) > schedule.delay_bound + 1:
            history.pop(0)

        profiles.append(profile.copy())
        updated.append(tuple(members))
        residuals.append(residual)
        steps = n + 1

        if (
            steps >= window
            and np.all(last_update > n - window)
            and max(residuals[-window:]) < tol
        ):
            converged = True
            break

    final_rates = np.array(
        [
            user_rate(profile.powers[q], interference_plus_noise(net, profile, q))
            for q in range(n_users)
        ]
    )
    gap = check_nash(net, profile)
    return GameTrace(
        profiles=profiles,
        updated=updated,
        residuals=residuals,
        converged=converged,
        iterations_used=steps,
        final_rates=final_rates,
        nash_gap=gap,
    )


def check_nash(net: EffectiveNetwork, profile: PowerProfile) -> float:
    """Largest distance of any user's power from its own best response."""
    gap = 0.0
    for q in range(net.config.num_users):
        br = best_response(net, profile, q)
        gap = max(gap, float(np.abs(profile.powers[q] - br).max()))
    return gap


def trace_to_csv(trace: GameTrace, path: str) -> None:
    """Write (iteration, user, antenna, power, residual) rows."""
    try:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write("iteration,user,antenna,power,residual\n")
            for n, prof in enumerate(trace.profiles):
                res = 0.0 if n == 0 else trace.residuals[n - 1]
                for q, powers in enumerate(prof.powers):
                    for a, p in enumerate(powers):
                        fh.write(
                            f"{n},{q},{a},{format(p, '.9g')},{format(res, '.9g')}\n"
                        )
    except OSError as exc:
        raise OSError(f"cannot write game trace to {path!r}: {exc}") from exc
