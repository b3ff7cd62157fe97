"""Performance statistics over a finished trace.

Speedup is measured against a supplied baseline cycle count; effective
parallelization inverts Amdahl's law at the observed speedup, with the
k = 1 singularity defined as 1.  The model calculator reproduces the
closed-form parallelization/speedup/efficiency numbers for the textbook
comparison of parallelism models, in exact rational arithmetic.
"""

from dataclasses import dataclass
from fractions import Fraction

from . import trace as tr


class MissingBaseline(Exception):
    """Speedup requested without a baseline cycle count."""


def alpha_eff(k, s):
    """Effective parallelization inferred from speedup s on k cores."""
    if k == 1:
        return 1.0
    return (k / (k - 1)) * (1.0 - 1.0 / s)


def model_calculator(ops, cycles, units):
    """(parallelization, speedup, efficiency) for `ops` operations done
    in `cycles` machine cycles on `units` processing units.  Accepts and
    returns exact rationals; cycles/units may be fractional (rent-cost
    model)."""
    ops = Fraction(ops)
    cycles = Fraction(cycles)
    units = Fraction(units)
    if ops <= 0 or cycles <= 0 or units <= 0:
        raise ValueError("model inputs must be positive")
    speedup = ops / cycles
    return speedup, speedup, speedup / units


@dataclass
class Stats:
    total_cycles: int
    cores: int
    cores_used: int
    per_core_busy: list
    max_concurrent: int
    speedup: float = None
    alpha_eff: float = None


def _busy_intervals(events, total_cycles):
    """Per-core busy cycle ranges from QT creation/termination pairs."""
    spans = {}          # qt id -> [core, start, end]
    for ev in events:
        if ev.kind == tr.QT_CREATED:
            spans[ev.qt] = [ev.core, ev.cycle, None]
        elif ev.kind == tr.QT_TERMINATED and ev.qt in spans:
            spans[ev.qt][2] = ev.cycle
    root_cores = {ev.core for ev in events if ev.qt == "1"}
    if events and "1" not in spans:
        first = min(ev.cycle for ev in events)
        spans["1"] = [min(root_cores) if root_cores else 0, first, None]
    per_core = {}
    for core, start, end in spans.values():
        per_core.setdefault(core, []).append((start, end if end is not None
                                              else total_cycles))
    return per_core


def compute_stats(events, cores, baseline_cycles=None):
    """Statistics for a complete trace produced on a `cores`-core run."""
    total_cycles = max((ev.cycle for ev in events), default=0)
    per_core = _busy_intervals(events, total_cycles)
    busy = [0] * cores
    for core, intervals in per_core.items():
        cycles = set()
        for start, end in intervals:
            cycles.update(range(start, end + 1))
        busy[core] = len(cycles)
    concurrent = {}
    for core, intervals in per_core.items():
        marked = set()
        for start, end in intervals:
            for c in range(start, end + 1):
                if c not in marked:
                    concurrent[c] = concurrent.get(c, 0) + 1
                    marked.add(c)
    stats = Stats(
        total_cycles=total_cycles,
        cores=cores,
        cores_used=sum(1 for b in busy if b),
        per_core_busy=busy,
        max_concurrent=max(concurrent.values(), default=0),
    )
    if baseline_cycles is not None:
        if total_cycles == 0:
            raise ValueError("empty trace has no cycle count")
        if baseline_cycles <= 0:
            raise ValueError("baseline cycle count must be positive")
        stats.speedup = baseline_cycles / total_cycles
        stats.alpha_eff = alpha_eff(cores, stats.speedup)
    return stats


def require_baseline(baseline_cycles):
    if baseline_cycles is None:
        raise MissingBaseline("speedup needs a baseline cycle count")
    return baseline_cycles


def format_stats(stats):
    """Machine-readable key-value form (also the human-facing one)."""
    lines = [
        "totalCycles=%d" % stats.total_cycles,
        "cores=%d" % stats.cores,
        "coresUsed=%d" % stats.cores_used,
        "maxConcurrent=%d" % stats.max_concurrent,
        "perCoreBusyCycles=%s" % ",".join(str(b) for b in stats.per_core_busy),
    ]
    if stats.speedup is not None:
        lines.append("speedup=%.6f" % stats.speedup)
        lines.append("alphaEff=%.6f" % stats.alpha_eff)
    return "\n".join(lines) + "\n"


def parse_baseline(text):
    """Baseline cycles from a stats key-value file or a bare integer."""
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("totalCycles="):
            return int(line.partition("=")[2])
    stripped = text.strip()
    if stripped:
        try:
            return int(stripped.split()[0], 0)
        except ValueError:
            pass
    raise ValueError("no totalCycles in baseline file")
