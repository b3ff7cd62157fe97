"""The cycle-accurate machine: global clock, shared multi-ported memory,
per-core instruction timing, event collection and halt detection.

Each tick runs the supervisor phase first (so a QTerm retired at cycle t
takes effect at t+1), then lets every unblocked running core burn one
cycle of its current instruction, retiring it when the budget reaches
zero.  Identical inputs give identical machines and traces.
"""

from dataclasses import dataclass, field

from . import isa, trace as tr
from .assembler import ObjectImage
from .coremodel import CoreState, Latch, Phase, Status, step_instruction
from .coremodel import HALTED, META
from .errors import (AddressOutOfRange, Deadlock, ImageTooLarge,
                     InvariantViolation, RuntimeFault, WatchdogExpired)
from .supervisor import KIND_PLAIN, QTDescriptor, Supervisor

# instruction class -> default cycles; "arbitrary, but reasonable"
DEFAULT_TIMING = {
    "halt": 1, "nop": 1, "rrmovl": 1, "irmovl": 1, "opl": 1, "jxx": 1,
    "mrmovl": 3, "rmmovl": 3, "call": 2, "ret": 2, "pushl": 2, "popl": 2,
    "meta": 1,
}


def timing_class(opcode):
    group = opcode & 0xF0
    if group == 0xE0:
        return "meta"
    if group == isa.RRMOVL:
        return "rrmovl"
    if group == 0x60:
        return "opl"
    if group == isa.JMP:
        return "jxx"
    return {isa.HALT: "halt", isa.NOP: "nop", isa.IRMOVL: "irmovl",
            isa.RMMOVL: "rmmovl", isa.MRMOVL: "mrmovl", isa.CALL: "call",
            isa.RET: "ret", isa.PUSHL: "pushl", isa.POPL: "popl"}[opcode]


class TimingConfig:
    """Cycles per instruction class; a total function, everything >= 1."""

    def __init__(self, overrides=None):
        self.cycles = dict(DEFAULT_TIMING)
        if overrides:
            for key, value in overrides.items():
                if key not in DEFAULT_TIMING:
                    raise ValueError("unknown instruction class %r" % key)
                self.cycles[key] = int(value)
        for key, value in self.cycles.items():
            if value < 1:
                raise ValueError("class %r needs at least 1 cycle" % key)

    @classmethod
    def from_text(cls, text):
        """Parse `class = cycles` lines (# comments allowed)."""
        overrides = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ValueError("line %d: expected class=cycles" % lineno)
            overrides[key.strip()] = int(value.strip(), 0)
        return cls(overrides)

    def cycles_for(self, opcode):
        return self.cycles[timing_class(opcode)]


@dataclass
class MachineConfig:
    cores: int = 8
    mem_bytes: int = 4096
    timing: TimingConfig = field(default_factory=TimingConfig)
    watchdog: int = 10000

    def __post_init__(self):
        if not 1 <= self.cores <= 64:
            raise ValueError("core count must be between 1 and 64")


class Memory:
    """Flat byte memory; multi-ported, any number of cores per cycle."""

    def __init__(self, data):
        self.data = bytearray(data)

    def __len__(self):
        return len(self.data)

    def _check(self, address, core, addr):
        if address + 4 > len(self.data) or address < 0:
            raise AddressOutOfRange("memory access at 0x%08x beyond image"
                                    % address, core=core, addr=addr)

    def read_word(self, address, core=None, addr=None):
        self._check(address, core, addr)
        return int.from_bytes(self.data[address:address + 4], "little")

    def write_word(self, address, value, core=None, addr=None):
        self._check(address, core, addr)
        self.data[address:address + 4] = (value & isa.WORD_MASK).to_bytes(4, "little")


ROOT_QT_ID = "1"


class Machine:
    """Self-contained machine state; step it with tick() or run_to_halt()."""

    def __init__(self, image, cfg=None):
        cfg = cfg or MachineConfig()
        if image.size > cfg.mem_bytes:
            raise ImageTooLarge("image of %d bytes exceeds %d-byte memory"
                                % (image.size, cfg.mem_bytes))
        self.cfg = cfg
        self.memory = Memory(bytes(image.memory).ljust(cfg.mem_bytes, b"\0"))
        self.cores = [CoreState(i) for i in range(cfg.cores)]
        self.sv = Supervisor(self)
        self.clock = 0
        self.events = []
        self.warnings = []
        self.halted = False
        self._last_event_clock = 0

        self.root_qt = QTDescriptor(ROOT_QT_ID, None, 0, image.entry, None,
                                    isa.REG_ENO, KIND_PLAIN)
        root = self.cores[0]
        root.status = Status.RUNNING
        root.pc = image.entry
        root.qt = self.root_qt
        root.phase = Phase.GENERAL

    # ---- event sink ------------------------------------------------------

    def emit(self, cycle, core, qt_id, kind, addr, payload=None):
        self.events.append(tr.Event(cycle, core, qt_id, kind, addr, payload))
        self._last_event_clock = self.clock

    def warn(self, message):
        self.warnings.append(message)

    def latch_read(self, core, latch, value, addr):
        self.emit(self.clock, core.index, core.qt.id, tr.LATCH_READ, addr,
                  payload=value)

    def latch_write(self, core, latch, value, addr):
        self.emit(self.clock, core.index, core.qt.id, tr.LATCH_WRITE, addr,
                  payload=value)
        if latch is Latch.FOR_PARENT:
            self.sv.sumup_feed(core, value, addr, self.clock)

    # ---- stepping -----------------------------------------------------------

    def tick(self):
        """One global clock advance."""
        if self.halted:
            raise RuntimeFault("tick on a halted machine")
        self.clock += 1
        self.sv.phase(self.clock)
        for core in self.cores:
            if core.status is not Status.RUNNING or core.blocked is not None:
                continue
            if core.inflight is None:
                self._fetch(core)
            core.remaining -= 1
            if core.remaining == 0:
                self._retire(core)
            if self.halted:
                break
        self._check_invariants()
        if self.clock - self._last_event_clock >= self.cfg.watchdog:
            self._watchdog_failed()

    def _fetch(self, core):
        try:
            instr, _ = isa.decode(self.memory.data, core.pc)
        except isa.EncodingError as exc:
            core.status = Status.WAITING   # error-parked, never resumes
            raise RuntimeFault("fetch failed: %s" % exc, core=core.index,
                               qt=core.qt.id, addr=core.pc) from None
        core.inflight = instr
        core.inflight_addr = core.pc
        core.remaining = self.cfg.timing.cycles_for(instr.opcode)

    def _retire(self, core):
        instr = core.inflight
        addr = core.inflight_addr
        duration = self.cfg.timing.cycles_for(instr.opcode)
        outcome = step_instruction(core, self.memory, self)
        core.inflight = None
        if outcome is META:
            self.emit(self.clock, core.index, core.qt.id, tr.META_RETIRED,
                      addr, payload=duration)
            self.sv.submit(core, instr, addr)
            return
        self.emit(self.clock, core.index, core.qt.id, tr.INSTR_RETIRED,
                  addr, payload=duration)
        if outcome is HALTED:
            if core.qt.parent is not None:
                core.status = Status.WAITING
                raise RuntimeFault("halt outside the root QT",
                                   core=core.index, qt=core.qt.id, addr=addr)
            self.halted = True

    def run_to_halt(self, max_cycles=None):
        """Tick until the root QT halts.  Returns (events, self)."""
        while not self.halted:
            if max_cycles is not None and self.clock >= max_cycles:
                raise WatchdogExpired("cycle budget of %d exhausted" % max_cycles)
            self.tick()
        return self.events, self

    # ---- health ------------------------------------------------------------

    def _watchdog_failed(self):
        stuck = []
        for req in self.sv.queue:
            core = self.cores[req.core_index]
            stuck.append("core %d (QT %s) blocked at 0x%04x"
                         % (core.index, core.qt.id if core.qt else "-", req.addr))
        for core in self.cores:
            if core.status is Status.WAITING and core.wait_cond is not None:
                stuck.append("core %d (QT %s) waiting at 0x%04x"
                             % (core.index, core.qt.id, core.wait_cond[0]))
            elif core.blocked == "massloop":
                stuck.append("core %d (QT %s) in a mass loop"
                             % (core.index, core.qt.id))
        window = self.cfg.watchdog
        if stuck:
            raise Deadlock("no event for %d cycles; stuck: %s"
                           % (window, "; ".join(stuck)))
        raise WatchdogExpired("no event for %d cycles" % window)

    def _check_invariants(self):
        free, prealloc, busy = self.sv.pool_sets()
        everything = free | prealloc | busy
        if everything != set(range(self.cfg.cores)) or \
                len(free) + len(prealloc) + len(busy) != self.cfg.cores:
            raise InvariantViolation(
                "pool sets do not partition the cores at cycle %d" % self.clock)
        for core in self.cores:
            if core.status is Status.FREE and core.qt is not None:
                raise InvariantViolation(
                    "free core %d still bound to QT %s" % (core.index, core.qt.id))
        # live forest acyclicity (parent chain must reach the root)
        for core in self.cores:
            qt, hops = core.qt, 0
            while qt is not None:
                qt = qt.parent
                hops += 1
                if hops > 1000:
                    raise InvariantViolation("QT parent chain does not terminate")

    # ---- views -------------------------------------------------------------

    def live_qts(self):
        """The live QT forest as (depth, descriptor) pairs, root first."""
        out = []

        def walk(qt, depth):
            if qt.alive:
                out.append((depth, qt))
            for child in qt.children:
                walk(child, depth + 1)

        walk(self.root_qt, 0)
        return out


def load(image, cfg=None):
    """Initialize a machine from an assembled image."""
    return Machine(image, cfg)


def run_image(image, cfg=None, max_cycles=None):
    machine = Machine(image, cfg)
    return machine.run_to_halt(max_cycles)


def image_from_bytes(data, size=None):
    """Wrap raw flat bytes as a loadable image."""
    image = ObjectImage(size or max(len(data), 1))
    image.memory[:len(data)] = data
    return image
