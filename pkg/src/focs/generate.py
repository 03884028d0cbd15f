"""Seeded random feasible instances."""
from __future__ import annotations

import random
from fractions import Fraction
from typing import Optional, Sequence

from .instance import Instance, Job
from .rational import RationalLike, as_rational

DEFAULT_P_MAX = ("3.7", "7.4", "11", "22")


def random_instance(
    n: int,
    horizon: RationalLike = 24,
    seed: Optional[int] = None,
    rng: Optional[random.Random] = None,
    p_max_choices: Sequence[RationalLike] = DEFAULT_P_MAX,
    time_step: RationalLike = 1,
    energy_step: RationalLike = "0.1",
) -> Instance:
    """``n`` jobs with windows on the ``time_step`` grid inside ``[0, horizon]``.

    Energies are multiples of ``energy_step`` no larger than ``p_max * window``,
    so the instance is always feasible.
    """
    if n < 1:
        raise ValueError("need at least one job")
    horizon, time_step, energy_step = as_rational(horizon), as_rational(time_step), as_rational(energy_step)
    slots = horizon / time_step
    if horizon <= 0 or slots.denominator != 1:
        raise ValueError("horizon must be a positive multiple of the time step")
    slots = int(slots)
    rng = rng or random.Random(seed)
    p_choices = [as_rational(p) for p in p_max_choices]
    jobs = []
    for k in range(n):
        a = rng.randint(0, slots - 1)
        d = rng.randint(a + 1, slots)
        p_max = rng.choice(p_choices)
        cap = p_max * (d - a) * time_step
        energy = rng.randint(0, int(cap / energy_step)) * energy_step
        jobs.append(Job(f"ev{k + 1}", a * time_step, d * time_step, energy, p_max))
    return Instance(tuple(jobs))
