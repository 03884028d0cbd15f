# %% [markdown]
# # A random fleet, and a brute-force cross-check
#
# Generate a day of charging sessions, schedule them, then confirm on small
# cases that exhaustive search over a fine energy grid finds nothing better,
# for both squared and cubed power.

# %%
import random

from focs import Instance, Job, Objective, aggregate_power, objective_value, oracle_solve, run_focs
from focs.generate import random_instance

day = random_instance(12, horizon=24, seed=3)
result = run_focs(day)
print(f"{len(day)} cars, {result.partition.m} atomic intervals, {len(result.rounds)} rounds, {result.iterations} max-flow iterations")
for i, p in enumerate(result.profile):
    start, end = result.partition.bounds(i)
    print(f"  [{str(start):>2}, {str(end):>2}]  {float(p):7.3f} kW")

# %%
rng = random.Random(0)
for trial in range(5):
    jobs = []
    for k in range(3):
        a = rng.randint(0, 2)
        d = rng.randint(a + 1, 3)
        p = rng.choice([1, 2])
        jobs.append(Job(str(k + 1), a, d, rng.randint(0, min(2, p * (d - a))), p))
    inst = Instance(tuple(jobs))
    ours = run_focs(inst).profile
    for alpha in (2, 3):
        brute = aggregate_power(oracle_solve(inst, Objective(alpha), "1/6"))
        assert objective_value(brute, Objective(alpha)) == objective_value(ours, Objective(alpha))
    print("instance", trial, "profile", [str(p) for p in ours], "matches brute force for alpha 2 and 3")
