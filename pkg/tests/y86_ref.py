"""Independent Y86 oracle interpreter for differential testing.

Deliberately written as one flat routine over raw bytes, with no tables
and no imports from the package under test.  Overflow is computed from
the true signed result's range rather than sign-bit comparisons, so the
two implementations share no code or formulation.
"""

MASK = 0xFFFFFFFF


def _signed(v):
    return v - 0x100000000 if v & 0x80000000 else v


def _cond(fn, zf, sf, of):
    if fn == 0:
        return True
    if fn == 1:
        return (sf != of) or zf
    if fn == 2:
        return sf != of
    if fn == 3:
        return zf
    if fn == 4:
        return not zf
    if fn == 5:
        return sf == of
    if fn == 6:
        return sf == of and not zf
    raise ValueError("bad condition %d" % fn)


def run_y86(image, max_steps=1000000):
    """Execute raw Y86 bytes from address 0 until halt.

    Returns (registers, memory) where registers is the 8-entry GPR file
    %eax..%edi in code order.
    """
    mem = bytearray(image)
    regs = [0] * 8
    zf, sf, of = True, False, False
    pc = 0

    def word(a):
        return int.from_bytes(mem[a:a + 4], "little")

    def store(a, v):
        mem[a:a + 4] = (v & MASK).to_bytes(4, "little")

    for _ in range(max_steps):
        op = mem[pc]
        hi, lo = op >> 4, op & 0x0F
        if op == 0x00:                      # halt
            return regs, mem
        if op == 0x10:                      # nop
            pc += 1
        elif hi == 0x2:                     # rrmovl / cmovXX
            ra, rb = mem[pc + 1] >> 4, mem[pc + 1] & 0xF
            if _cond(lo, zf, sf, of):
                regs[rb] = regs[ra]
            pc += 2
        elif op == 0x30:                    # irmovl
            rb = mem[pc + 1] & 0xF
            regs[rb] = word(pc + 2)
            pc += 6
        elif op == 0x40:                    # rmmovl
            ra, rb = mem[pc + 1] >> 4, mem[pc + 1] & 0xF
            base = 0 if rb == 0xF else regs[rb]
            store((word(pc + 2) + base) & MASK, regs[ra])
            pc += 6
        elif op == 0x50:                    # mrmovl
            ra, rb = mem[pc + 1] >> 4, mem[pc + 1] & 0xF
            base = 0 if rb == 0xF else regs[rb]
            regs[ra] = word((word(pc + 2) + base) & MASK)
            pc += 6
        elif hi == 0x6:                     # addl/subl/andl/xorl
            ra, rb = mem[pc + 1] >> 4, mem[pc + 1] & 0xF
            a, b = _signed(regs[ra]), _signed(regs[rb])
            if lo == 0:
                res = b + a
                of = not (-(1 << 31) <= res < (1 << 31))
            elif lo == 1:
                res = b - a
                of = not (-(1 << 31) <= res < (1 << 31))
            elif lo == 2:
                res = b & a
                of = False
            elif lo == 3:
                res = b ^ a
                of = False
            else:
                raise ValueError("bad OPl function %d" % lo)
            res &= MASK
            regs[rb] = res
            zf = res == 0
            sf = bool(res & 0x80000000)
            pc += 2
        elif hi == 0x7:                     # jXX
            dest = word(pc + 1)
            pc = dest if _cond(lo, zf, sf, of) else pc + 5
        elif op == 0x80:                    # call
            dest = word(pc + 1)
            regs[4] = (regs[4] - 4) & MASK
            store(regs[4], pc + 5)
            pc = dest
        elif op == 0x90:                    # ret
            pc = word(regs[4])
            regs[4] = (regs[4] + 4) & MASK
        elif op == 0xA0:                    # pushl
            ra = mem[pc + 1] >> 4
            value = regs[ra]
            regs[4] = (regs[4] - 4) & MASK
            store(regs[4], value)
            pc += 2
        elif op == 0xB0:                    # popl
            ra = mem[pc + 1] >> 4
            value = word(regs[4])
            regs[4] = (regs[4] + 4) & MASK
            regs[ra] = value
            pc += 2
        else:
            raise ValueError("illegal opcode 0x%02x at 0x%x" % (op, pc))
    raise RuntimeError("oracle step budget exhausted")
