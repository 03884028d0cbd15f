# %% [markdown]
# # Why per-vehicle power limits change the answer
#
# Two cars share a charger bank. Car 1 is plugged in from t=0 to t=2 but can
# only draw 1 kW; car 2 arrives at t=1 and can draw 2 kW. Both need 2 kWh.

# %%
from focs import Instance, Schedule, ScheduleError, objective_value, run_focs

fleet = Instance.from_tuples([(0, 2, 2, 1), (1, 2, 2, 2)], ids=["car1", "car2"])

# %% [markdown]
# Ignoring the limits, the flattest profile would be 2 kW in both hours. In
# the first hour only car 1 is present, and it cannot take 2 kWh there:

# %%
try:
    Schedule.from_rows(fleet, {"car1": [2, 0], "car2": [0, 2]})
except ScheduleError as exc:
    print("flat profile rejected:", exc)

# %% [markdown]
# The scheduler finds the best profile that respects the limits.

# %%
result = run_focs(fleet)
print("power per hour:", [str(p) for p in result.profile])
print("schedule:", {k: [str(x) for x in v] for k, v in result.schedule.rows().items()})
print("sum of squared power:", objective_value(result.profile))

# %% [markdown]
# The hour both cars share is fixed first (round 1), then the remaining hour.

# %%
for rnd in result.rounds:
    print(f"round {rnd.round}: critical intervals {sorted(rnd.critical)}")
