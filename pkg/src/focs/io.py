"""Instance JSON and schedule/profile CSV files.

All numbers travel as strings: exact decimals when they terminate, otherwise
``num/den``.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from typing import Dict, Tuple, Union

from .instance import AtomicPartition, Instance, InstanceError, Job, PowerProfile, Schedule, ScheduleError, build_partition
from .rational import as_rational, format_rational

PathLike = Union[str, Path]

SCHEDULE_HEADER = ["interval_start", "interval_end", "job_id", "energy"]
PROFILE_HEADER = ["interval_start", "interval_end", "power"]


def _number(value, where: str) -> Fraction:
    if isinstance(value, float):
        raise InstanceError(f"{where}: numbers must be strings, got float {value!r}")
    try:
        return as_rational(value)
    except (TypeError, ValueError) as exc:
        raise InstanceError(f"{where}: {exc}") from exc


def instance_from_dict(data: dict) -> Instance:
    if not isinstance(data, dict) or not isinstance(data.get("jobs"), list):
        raise InstanceError('expected an object with a "jobs" list')
    jobs = []
    for k, raw in enumerate(data["jobs"]):
        jid = str(raw.get("id", k + 1))
        try:
            fields = {name: _number(raw[name], f"job {jid} {name}") for name in ("arrival", "departure", "energy", "p_max")}
        except KeyError as exc:
            raise InstanceError(f"job {jid}: missing field {exc}") from None
        jobs.append(Job(jid, **fields))
    return Instance(tuple(jobs))


def instance_to_dict(instance: Instance) -> dict:
    return {
        "jobs": [
            {
                "id": job.id,
                "arrival": format_rational(job.arrival),
                "departure": format_rational(job.departure),
                "energy": format_rational(job.energy),
                "p_max": format_rational(job.p_max),
            }
            for job in instance
        ]
    }


def read_instance(path: PathLike) -> Instance:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InstanceError(f"{path}: invalid JSON ({exc})") from exc
    return instance_from_dict(data)


def dumps_instance(instance: Instance) -> str:
    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def write_instance(instance: Instance, path: PathLike) -> None:
    Path(path).write_text(dumps_instance(instance))


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def dumps_schedule(schedule: Schedule) -> str:
    part = schedule.partition
    rows = []
    for i in range(part.m):
        start, end = part.bounds(i)
        for j in part.jobs_at[i]:
            rows.append([format_rational(start), format_rational(end), schedule.instance.jobs[j].id,
                         format_rational(schedule.get(i, j))])
    return _csv_text(SCHEDULE_HEADER, rows)


def dumps_profile(profile: PowerProfile) -> str:
    part = profile.partition
    rows = []
    for i, p in enumerate(profile.powers):
        start, end = part.bounds(i)
        rows.append([format_rational(start), format_rational(end), format_rational(p)])
    return _csv_text(PROFILE_HEADER, rows)


def write_schedule(schedule: Schedule, path: PathLike) -> None:
    Path(path).write_text(dumps_schedule(schedule))


def write_profile(profile: PowerProfile, path: PathLike) -> None:
    Path(path).write_text(dumps_profile(profile))


def read_schedule(path: PathLike, instance: Instance, partition: AtomicPartition = None) -> Schedule:
    """Read a schedule CSV against ``instance``; rows must name atomic intervals exactly.

    Raises ScheduleError on unknown intervals or jobs, duplicate rows, or any
    constraint violation.
    """
    partition = partition or build_partition(instance)
    index: Dict[Tuple[Fraction, Fraction], int] = {partition.bounds(i): i for i in range(partition.m)}
    e = {}
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or list(reader.fieldnames) != SCHEDULE_HEADER:
            raise ScheduleError(f"{path}: expected header {','.join(SCHEDULE_HEADER)}")
        for line, row in enumerate(reader, start=2):
            try:
                key = (as_rational(row["interval_start"]), as_rational(row["interval_end"]))
                value = as_rational(row["energy"])
            except (TypeError, ValueError) as exc:
                raise ScheduleError(f"{path}:{line}: {exc}") from exc
            if key not in index:
                raise ScheduleError(f"{path}:{line}: [{row['interval_start']}, {row['interval_end']}] is not an atomic interval")
            try:
                j = instance.index_of(row["job_id"])
            except KeyError:
                raise ScheduleError(f"{path}:{line}: unknown job {row['job_id']!r}") from None
            if (index[key], j) in e:
                raise ScheduleError(f"{path}:{line}: duplicate entry")
            e[(index[key], j)] = value
    return Schedule(instance, partition, e)


def read_profile(path: PathLike) -> Tuple[Tuple[Fraction, Fraction, Fraction], ...]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        return tuple(
            (as_rational(r["interval_start"]), as_rational(r["interval_end"]), as_rational(r["power"])) for r in reader
        )
