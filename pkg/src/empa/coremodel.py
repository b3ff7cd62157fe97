"""One Y86 core extended with the EMPA latch set, mode state and the
context-dependent %esv mapping.

A core is stepped by the engine when its current instruction's cycle
budget runs out; meta-instructions are never executed here, they raise a
request for the supervisor.  %esv is never a storage cell: every access
resolves at the moment of access through the phase-keyed latch map.
"""

import enum
from dataclasses import dataclass, field

from . import isa
from .errors import RuntimeFault

WORD_MASK = isa.WORD_MASK


class Latch(enum.Enum):
    FOR_CHILD = "ForChild"
    FROM_CHILD = "FromChild"
    FOR_PARENT = "ForParent"
    FROM_PARENT = "FromParent"


class EsvContext(enum.Enum):
    """The five rows of the latch-mapping table."""
    CLONING = "cloning"
    MASS_CHILD = "mass-child"
    MASS_PRE = "mass-pre"
    MASS_POST = "mass-post"
    GENERAL = "general"


READ = "read"
WRITE = "write"

_ESV_TABLE = {
    (EsvContext.CLONING, READ): Latch.FOR_PARENT,
    (EsvContext.CLONING, WRITE): Latch.FROM_CHILD,
    (EsvContext.MASS_CHILD, READ): Latch.FROM_PARENT,
    (EsvContext.MASS_CHILD, WRITE): Latch.FOR_PARENT,
    (EsvContext.MASS_PRE, READ): Latch.FROM_PARENT,
    (EsvContext.MASS_PRE, WRITE): Latch.FOR_CHILD,
    (EsvContext.MASS_POST, READ): Latch.FROM_CHILD,
    (EsvContext.MASS_POST, WRITE): Latch.FOR_PARENT,
    (EsvContext.GENERAL, READ): Latch.FROM_CHILD,
    (EsvContext.GENERAL, WRITE): Latch.FOR_PARENT,
}


def map_esv(context, access):
    """Latch addressed by an %esv access in the given context.  Total."""
    return _ESV_TABLE[(context, access)]


class Phase(enum.Enum):
    NONE = "none"
    GENERAL = "general"
    MASS_PRE = "mass-pre"
    MASS_CHILD = "mass-child"
    MASS_POST = "mass-post"


_PHASE_TO_CONTEXT = {
    Phase.NONE: EsvContext.GENERAL,
    Phase.GENERAL: EsvContext.GENERAL,
    Phase.MASS_PRE: EsvContext.MASS_PRE,
    Phase.MASS_CHILD: EsvContext.MASS_CHILD,
    Phase.MASS_POST: EsvContext.MASS_POST,
}


class Status(enum.Enum):
    FREE = "free"
    PREALLOCATED = "preallocated"
    RUNNING = "running"
    WAITING = "waiting"


@dataclass
class LatchSet:
    """The four inter-core mailboxes of one core."""
    for_child: int = 0
    from_child: int = 0
    for_parent: int = 0
    from_parent: int = 0

    _ATTR = {
        Latch.FOR_CHILD: "for_child",
        Latch.FROM_CHILD: "from_child",
        Latch.FOR_PARENT: "for_parent",
        Latch.FROM_PARENT: "from_parent",
    }

    def get(self, latch):
        return getattr(self, self._ATTR[latch])

    def set(self, latch, value):
        setattr(self, self._ATTR[latch], value & WORD_MASK)


@dataclass
class CoreState:
    index: int
    regs: list = field(default_factory=lambda: [0] * isa.GPR_COUNT)
    zf: bool = True
    sf: bool = False
    of: bool = False
    pc: int = 0
    latches: LatchSet = field(default_factory=LatchSet)
    mode: int = 0
    parent_mode: int = 0
    status: Status = Status.FREE
    qt = None
    phase: Phase = Phase.NONE

    # execution bookkeeping (engine-owned)
    inflight = None          # decoded Instruction currently executing
    inflight_addr: int = 0
    remaining: int = 0
    blocked = None           # None | "sv" | "massloop"
    wait_cond = None         # (instr_addr, frozenset of QTDescriptor)
    for_parent_dirty: bool = False
    brackets: list = field(default_factory=list)   # open inline QFCreate blocks
    last_alloc = None        # None | "granted" | "denied"

    def esv_context(self):
        return _PHASE_TO_CONTEXT[self.phase]

    def reset_runtime(self):
        self.inflight = None
        self.remaining = 0
        self.blocked = None
        self.wait_cond = None
        self.for_parent_dirty = False
        self.brackets = []
        self.last_alloc = None


def clone_into(parent, child, link):
    """Creation-trigger transfers: full register file and flags, parent's
    ForChild into the child's FromParent, parent Mode into ParentMode.
    The link register is recorded by the caller on the QT descriptor."""
    child.regs = list(parent.regs)
    child.zf, child.sf, child.of = parent.zf, parent.sf, parent.of
    child.latches = LatchSet(from_parent=parent.latches.for_child)
    child.parent_mode = parent.mode
    child.mode = 0
    child.reset_runtime()


def read_register(core, code, sink, addr):
    if code < isa.GPR_COUNT:
        return core.regs[code]
    if code == isa.REG_ENO:
        return 0
    if code == isa.REG_ECC:
        return core.qt.ecc_index if core.qt is not None else 0
    if code == isa.REG_ESV:
        latch = map_esv(core.esv_context(), READ)
        value = core.latches.get(latch)
        sink.latch_read(core, latch, value, addr)
        return value
    raise RuntimeFault("read of invalid register 0x%x" % code,
                       core=core.index, addr=addr)


def write_register(core, code, value, sink, addr):
    value &= WORD_MASK
    if code < isa.GPR_COUNT:
        core.regs[code] = value
    elif code == isa.REG_ENO:
        pass
    elif code == isa.REG_ECC:
        raise RuntimeFault("%ecc is read-only", core=core.index, addr=addr)
    elif code == isa.REG_ESV:
        latch = map_esv(core.esv_context(), WRITE)
        core.latches.set(latch, value)
        if latch is Latch.FOR_PARENT:
            core.for_parent_dirty = True
        sink.latch_write(core, latch, value, addr)
    else:
        raise RuntimeFault("write of invalid register 0x%x" % code,
                           core=core.index, addr=addr)


def _set_flags(core, result, a, b, op):
    result &= WORD_MASK
    core.zf = result == 0
    core.sf = bool(result & 0x80000000)
    sa, sb, sr = a & 0x80000000, b & 0x80000000, result & 0x80000000
    if op == isa.ADDL:
        core.of = sa == sb and sr != sa
    elif op == isa.SUBL:
        core.of = sa != sb and sr != sb
    else:
        core.of = False
    return result


def condition_holds(core, fn):
    zf, sf, of = core.zf, core.sf, core.of
    if fn == 0:
        return True
    if fn == 1:                      # le
        return (sf != of) or zf
    if fn == 2:                      # l
        return sf != of
    if fn == 3:                      # e
        return zf
    if fn == 4:                      # ne
        return not zf
    if fn == 5:                      # ge
        return not (sf != of)
    if fn == 6:                      # g
        return not (sf != of) and not zf
    raise AssertionError(fn)


HALTED = "halt"
META = "meta"
DONE = "done"


def step_instruction(core, memory, sink):
    """Retire core.inflight: apply Y86 semantics, advance pc, emit latch
    events through the sink.  Meta-instructions only advance pc and
    return META so the supervisor can pick them up.  Never touches any
    other core's state."""
    instr = core.inflight
    addr = core.inflight_addr
    op = instr.opcode
    group = op & 0xF0
    fn = op & 0x0F
    core.pc = (addr + instr.length) & WORD_MASK

    if instr.is_meta:
        return META
    if op == isa.HALT:
        return HALTED
    if op == isa.NOP:
        return DONE

    if group == isa.RRMOVL:
        value = read_register(core, instr.ra, sink, addr)
        if condition_holds(core, fn):
            write_register(core, instr.rb, value, sink, addr)
    elif op == isa.IRMOVL:
        write_register(core, instr.rb, instr.imm, sink, addr)
    elif op == isa.RMMOVL:
        base = 0 if instr.rb == isa.RNONE else read_register(core, instr.rb, sink, addr)
        value = read_register(core, instr.ra, sink, addr)
        memory.write_word((instr.imm + base) & WORD_MASK, value, core=core.index, addr=addr)
    elif op == isa.MRMOVL:
        base = 0 if instr.rb == isa.RNONE else read_register(core, instr.rb, sink, addr)
        value = memory.read_word((instr.imm + base) & WORD_MASK, core=core.index, addr=addr)
        write_register(core, instr.ra, value, sink, addr)
    elif group == 0x60:
        a = read_register(core, instr.ra, sink, addr)
        b = read_register(core, instr.rb, sink, addr)
        if op == isa.ADDL:
            result = b + a
        elif op == isa.SUBL:
            result = b - a
        elif op == isa.ANDL:
            result = b & a
        else:
            result = b ^ a
        result = _set_flags(core, result, a, b, op)
        write_register(core, instr.rb, result, sink, addr)
    elif group == isa.JMP:
        if condition_holds(core, fn):
            core.pc = instr.imm
    elif op == isa.CALL:
        sp = (read_register(core, isa.REG_ESP, sink, addr) - 4) & WORD_MASK
        memory.write_word(sp, core.pc, core=core.index, addr=addr)
        write_register(core, isa.REG_ESP, sp, sink, addr)
        core.pc = instr.imm
    elif op == isa.RET:
        sp = read_register(core, isa.REG_ESP, sink, addr)
        core.pc = memory.read_word(sp, core=core.index, addr=addr)
        write_register(core, isa.REG_ESP, (sp + 4) & WORD_MASK, sink, addr)
    elif op == isa.PUSHL:
        value = read_register(core, instr.ra, sink, addr)
        sp = (read_register(core, isa.REG_ESP, sink, addr) - 4) & WORD_MASK
        memory.write_word(sp, value, core=core.index, addr=addr)
        write_register(core, isa.REG_ESP, sp, sink, addr)
    elif op == isa.POPL:
        sp = read_register(core, isa.REG_ESP, sink, addr)
        value = memory.read_word(sp, core=core.index, addr=addr)
        write_register(core, isa.REG_ESP, (sp + 4) & WORD_MASK, sink, addr)
        write_register(core, instr.ra, value, sink, addr)
    else:
        raise RuntimeFault("unexecutable opcode 0x%02x" % op,
                           core=core.index, addr=addr)
    return DONE
