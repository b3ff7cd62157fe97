"""Event log model and its line-delimited serialization.

One self-describing key-value record per line, append-only:

    cycle=<n> core=<n> qt=<id> kind=<k> addr=<hex> payload=<hex?>

The trace is the sole input to diagrams and statistics.
"""

from dataclasses import dataclass

# Event kinds.  IDLE is part of the vocabulary but the engine never emits
# it: idle time is the absence of events (and the deadlock watchdog counts
# event-less cycles).
QT_CREATED = "QtCreated"
QT_TERMINATED = "QtTerminated"
INSTR_RETIRED = "InstrRetired"
META_RETIRED = "MetaRetired"
WAIT_BEGIN = "WaitBegin"
WAIT_END = "WaitEnd"
LATCH_READ = "LatchRead"
LATCH_WRITE = "LatchWrite"
SUM_FEED = "SumFeed"
IDLE = "Idle"

KINDS = frozenset((
    QT_CREATED, QT_TERMINATED, INSTR_RETIRED, META_RETIRED,
    WAIT_BEGIN, WAIT_END, LATCH_READ, LATCH_WRITE, SUM_FEED, IDLE,
))


@dataclass(frozen=True)
class Event:
    cycle: int
    core: int
    qt: str
    kind: str
    addr: int
    payload: int = None


class TraceFormatError(Exception):
    pass


def format_event(ev):
    line = "cycle=%d core=%d qt=%s kind=%s addr=0x%04x" % (
        ev.cycle, ev.core, ev.qt, ev.kind, ev.addr)
    if ev.payload is not None:
        line += " payload=0x%08x" % ev.payload
    return line


def format_trace(events):
    return "".join(format_event(ev) + "\n" for ev in events)


def parse_event(line, lineno=None):
    fields = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise TraceFormatError("bad token %r on line %s" % (token, lineno))
        fields[key] = value
    try:
        kind = fields["kind"]
        if kind not in KINDS:
            raise TraceFormatError("unknown kind %r on line %s" % (kind, lineno))
        payload = fields.get("payload")
        return Event(
            cycle=int(fields["cycle"]),
            core=int(fields["core"]),
            qt=fields["qt"],
            kind=kind,
            addr=int(fields["addr"], 16),
            payload=int(payload, 16) if payload is not None else None,
        )
    except (KeyError, ValueError) as exc:
        raise TraceFormatError("line %s: %s" % (lineno, exc)) from None


def parse_trace(text):
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if line:
            events.append(parse_event(line, lineno))
    return events
