# %% [markdown]
# # Watching the scheduler work
#
# One car with a wide window and one with a narrow window in the middle.
# Each round raises the per-interval sink capacities of the flow network until
# the whole remaining demand fits; intervals that cannot fill up get parked.

# %%
import json

from focs import Instance, run_focs
from focs.maxflow import build_network, max_flow, to_dot
from focs.algorithm import initial_sink_caps

fleet = Instance.from_tuples([(0, 3, 2, 2), (1, 2, 2, 2)])
result = run_focs(fleet, trace=True)

# %%
for record in result.trace_records():
    print(json.dumps(record))

# %% [markdown]
# The first iteration tries a flat 4/3 in every hour. Only 10/3 units fit, the
# outer hours are parked, and the middle hour is pushed up to 2. Here is that
# first maximum flow as Graphviz text:

# %%
part = result.partition
net = build_network(fleet, part, sink_caps=initial_sink_caps(fleet.total_energy, range(part.m), part))
print(to_dot(max_flow(net)))

# %%
print("final profile:", [str(p) for p in result.profile])
print("ranks:", result.ranks)
