# %% [markdown]
# # Certifying a schedule without trusting the scheduler
#
# A schedule is optimal exactly when, for every car, the hours it charges at
# full power are no busier than the hours it charges partially, which are no
# busier than the hours it skips. The multipliers that prove it can be read
# off directly.

# %%
from focs import Instance, Objective, Schedule, check_kkt, recover_duals

fleet = Instance.from_tuples([(0, 3, 2, 2), (1, 2, 2, 2)])
good = Schedule.from_rows(fleet, {"1": [1, 0, 1], "2": [0, 2, 0]})
bad = Schedule.from_rows(fleet, {"1": [2, 0, 0], "2": [0, 2, 0]})

# %%
for name, sched in [("balanced", good), ("front-loaded", bad)]:
    report = check_kkt(sched)
    cert = recover_duals(sched, Objective(2))
    print(name, "passes:", report.passed)
    for v in report.violations:
        print("  ", v.condition, "job", v.job, "intervals", v.intervals, "gap", v.magnitude)
    print("   delta:", {k: str(v) for k, v in cert.delta.items()}, "failures:", cert.failures)

# %% [markdown]
# Floating-point schedules from other tools can be checked with a tolerance.

# %%
lone = Instance.from_tuples([(0, 3, 1, 2), (1, 2, 0, 1)])
approx = Schedule.from_rows(lone, {"1": ["0.3333333333", "0.3333333333", "0.3333333334"]})
print("exact:", check_kkt(approx).passed, " tol=1e-9:", check_kkt(approx, tol=1e-9).passed)
