"""Exact offline EV charging scheduling via maximum flows."""
from .algorithm import FocsResult, ProgressError, rank, run_focs
from .instance import (
    AtomicPartition,
    InfeasibleInstanceError,
    Instance,
    InstanceError,
    Job,
    Objective,
    PowerProfile,
    Schedule,
    ScheduleError,
    aggregate_power,
    build_partition,
    check_feasibility,
    objective_value,
)
from .verification import check_kkt, oracle_solve, recover_duals

__all__ = [
    "AtomicPartition",
    "FocsResult",
    "InfeasibleInstanceError",
    "Instance",
    "InstanceError",
    "Job",
    "Objective",
    "PowerProfile",
    "ProgressError",
    "Schedule",
    "ScheduleError",
    "aggregate_power",
    "build_partition",
    "check_feasibility",
    "check_kkt",
    "objective_value",
    "oracle_solve",
    "rank",
    "recover_duals",
    "run_focs",
]
