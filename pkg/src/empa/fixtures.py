"""Sample task programs from the mass-processing and dynamic-parallelism
walk-throughs, as source builders so tests can inject arbitrary vectors.

The shipped .eyo files are these builders rendered with the documented
default inputs (vector [5, 7, 1, 2], sum 15; dynpar operands 3, 4, 5, 6
giving A=18, B=0xfffffffc).
"""

DEFAULT_VECTOR = (5, 7, 1, 2)
DEFAULT_DYNPAR = (3, 4, 5, 6)

DATA_BASE = 0x200


def _data_block(values):
    lines = ["", "        .pos 0x%x" % DATA_BASE, "Vec:"]
    for v in values:
        lines.append("        .long 0x%x" % (v & 0xFFFFFFFF))
    lines.append("Sum:    .long 0")
    return lines


def _no_body(prefix):
    """The conventional counting loop: the item is addressed from base
    plus a running offset, fetched, summed; the counter is advanced and
    verified.  Needs %ebx=base, %ecx=count, %eax=0; result in %eax."""
    p = prefix
    return [
        "        andl %ecx,%ecx        # anything to sum?",
        "        je {p}Done".format(p=p),
        "        addl %ecx,%ecx",
        "        addl %ecx,%ecx        # count -> byte limit",
        "        irmovl $4,%edi        # item stride",
        "        xorl %edx,%edx        # running offset",
        "{p}Loop:  rrmovl %ebx,%ebp     # address the item: base".format(p=p),
        "        addl %edx,%ebp        #   plus offset",
        "        mrmovl 0(%ebp),%esi   # fetch the item",
        "        addl %esi,%eax        # payload: fold into the sum",
        "        addl %edi,%edx        # advance to the next item",
        "        rrmovl %edx,%ebp      # verify the counter:",
        "        subl %ecx,%ebp        #   offset against the limit",
        "        jne {p}Loop".format(p=p),
        "{p}Done:".format(p=p),
    ]


def _header(title):
    return ["# %s" % title,
            "Init:   irmovl Vec,%ebx       # vector base",
            "        irmovl $N,%ecx        # item count",
            "        xorl %eax,%eax        # clear the sum"]


def _set_count(lines, n):
    return [line.replace("$N", "$%d" % n) for line in lines]


def no_mode_source(values=DEFAULT_VECTOR):
    """Vector sum with no mass-processing facilities at all."""
    lines = _header("Vector sum, conventional coding (NO mass processing).")
    lines += _no_body("N")
    lines += ["        rmmovl %eax,Sum",
              "        halt"]
    lines += _data_block(values)
    return "\n".join(_set_count(lines, len(values))) + "\n"


def for_mode_source(values=DEFAULT_VECTOR):
    """Vector sum through the FOR looping facility, with a conventional
    fallback when no extra core can be rented."""
    lines = _header("Vector sum using the FOR looping facility.")
    lines += [
        "        QAlloc 1,%ecx         # FOR mode, %ecx repetitions",
        "        rrmovl %ebx,%esv      # hand over the item address base",
        "FTC:    QTCreate FTT,%eax     # link carries the partial sum",
        "        mrmovl 0(%esv),%edx   # child: fetch my item",
        "        addl %edx,%eax        # child: fold into the partial sum",
        "FTT:    QTerm",
        "FFC:    QFCreate FFT,%eax     # no core granted: sum conventionally",
    ]
    lines += _no_body("F")
    lines += ["FFT:    QTerm",
              "        rmmovl %eax,Sum",
              "        halt"]
    lines += _data_block(values)
    return "\n".join(_set_count(lines, len(values))) + "\n"


def sumup_mode_source(values=DEFAULT_VECTOR):
    """Vector sum through the SUMUP facility: helper cores feed the
    parent-side adder; conventional fallback otherwise."""
    lines = _header("Vector sum using the SUMUP facility.")
    lines += [
        "        QAlloc 5,%ecx         # SUMUP mode, %ecx helper cores",
        "        rrmovl %ebx,%esv      # base address for the first child",
        "STC:    QTCreate STT,%eno     # the link register plays no role",
        "        mrmovl 0(%esv),%edx   # child: fetch my item",
        "        rrmovl %edx,%esv      # child: send the summand to the adder",
        "STT:    QTerm",
        "        QWait -1              # let every summand arrive",
        "        rrmovl %esv,%eax      # latch the adder output",
        "SFC:    QFCreate SFT,%eno     # not enough cores: sum conventionally",
    ]
    lines += _no_body("S")
    lines += ["SFT:    QTerm",
              "        rmmovl %eax,Sum",
              "        halt"]
    lines += _data_block(values)
    return "\n".join(_set_count(lines, len(values))) + "\n"


def adaptive_source(values=DEFAULT_VECTOR):
    """Adaptive vector sum: SUMUP if the cores are there, FOR if at least
    one is, the conventional loop otherwise.  Nesting per the adaptive
    walk-through."""
    lines = _header("Adaptive vector sum: SUMUP, else FOR, else conventional.")
    lines += [
        "        QAlloc 5,%ecx         # first choice: SUMUP on %ecx cores",
        "        rrmovl %ebx,%esv",
        "ATC:    QTCreate ATT,%eno",
        "        mrmovl 0(%esv),%edx",
        "        rrmovl %edx,%esv",
        "ATT:    QTerm",
        "        QWait -1",
        "        rrmovl %esv,%eax      # adder output (or 0 when denied)",
        "AFC:    QFCreate AFT,%eno     # SUMUP denied: try FOR",
        "        QAlloc 1,%ecx",
        "        rrmovl %ebx,%esv",
        "FTC:    QTCreate FTT,%eax",
        "        mrmovl 0(%esv),%edx",
        "        addl %edx,%eax",
        "FTT:    QTerm",
        "FFC:    QFCreate FFT,%eax     # FOR denied too: conventional loop",
    ]
    lines += _no_body("A")
    lines += ["FFT:    QTerm",
              "AFT:    QTerm",
              "        rmmovl %eax,Sum",
              "        halt"]
    lines += _data_block(values)
    return "\n".join(_set_count(lines, len(values))) + "\n"


def dynpar_source(operands=DEFAULT_DYNPAR):
    """Dynamic-parallelism demo: A=(C+D)+(E+F) and B=(C+D)-(E+F), every
    elementary operation in its own quasi-thread so the processing graph
    mirrors the theoretical dependence graph.  Needs at least 4 cores;
    peak demand is 7, so the 8th core of an 8-core machine stays idle."""
    c, d, e, f = (v & 0xFFFFFFFF for v in operands)
    lines = [
        "# Dynamic parallelism: helpers compute the bracketed halves,",
        "# loader QTs fetch the operands, two more QTs combine them.",
        "O:      QCreate H1T,%esi      # H1 delivers C+D in %esi",
        "        QCreate L11T,%esi     #   L11 loads C",
        "        mrmovl VC,%esi",
        "L11T:   QTerm",
        "        QCreate L12T,%ebp     #   L12 loads D",
        "        mrmovl VD,%ebp",
        "L12T:   QTerm",
        "        QWait -1              #   both operands in",
        "        addl %ebp,%esi        #   C+D",
        "H1T:    QTerm",
        "        QCreate H2T,%edi      # H2 delivers E+F in %edi",
        "        QCreate L21T,%edi",
        "        mrmovl VE,%edi",
        "L21T:   QTerm",
        "        QCreate L22T,%ebp",
        "        mrmovl VF,%ebp",
        "L22T:   QTerm",
        "        QWait -1",
        "        addl %ebp,%edi        #   E+F",
        "H2T:    QTerm",
        "        QWait -1              # root: both halves in",
        "        QCreate PT,%eax       # adder QT delivers A",
        "        rrmovl %esi,%eax",
        "        addl %edi,%eax",
        "PT:     QTerm",
        "        QCreate MT,%ebx       # subtractor QT delivers B",
        "        rrmovl %esi,%ebx",
        "        subl %edi,%ebx",
        "MT:     QTerm",
        "        QWait -1",
        "        rmmovl %eax,RA",
        "        rmmovl %ebx,RB",
        "        halt",
        "",
        "        .pos 0x%x" % DATA_BASE,
        "VC:     .long 0x%x" % c,
        "VD:     .long 0x%x" % d,
        "VE:     .long 0x%x" % e,
        "VF:     .long 0x%x" % f,
        "RA:     .long 0",
        "RB:     .long 0",
    ]
    return "\n".join(lines) + "\n"


FIXTURES = {
    "no_mode": no_mode_source,
    "for_mode": for_mode_source,
    "sumup_mode": sumup_mode_source,
    "adaptive": adaptive_source,
    "dynpar": dynpar_source,
}


def write_fixture_files(directory):
    import os
    paths = []
    for name, builder in FIXTURES.items():
        path = os.path.join(directory, name + ".eyo")
        with open(path, "w") as fh:
            fh.write(builder())
        paths.append(path)
    return paths
