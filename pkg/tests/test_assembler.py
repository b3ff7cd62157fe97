"""Assembler tests: spec examples, directives, listing round-trip,
error reporting, bracket checking."""

import pytest

from empa import assembler, fixtures, isa


def test_qpwait_wildcard_example():
    image = assembler.assemble("QPWait -1 # Wait all sister QTs\n")
    assert bytes(image.memory[:5]) == bytes([0xE3, 0xFF, 0xFF, 0xFF, 0xFF])


def test_qcall_label_example():
    source = """
        .pos 0x0
        QCall CLabel
        halt
        .pos 0x40
CLabel: QCreate TLabel,%eax
        nop
TLabel: QTerm
"""
    image = assembler.assemble(source)
    assert image.symbols["CLabel"] == 0x40
    assert bytes(image.memory[0:5]) == bytes([0xE4, 0x40, 0x00, 0x00, 0x00])


def test_empty_source():
    image = assembler.assemble("")
    assert bytes(image.memory) == bytes(image.size)
    assert image.symbols == {}


def test_sumup_fixture_has_mode_5_qalloc():
    image = assembler.assemble(fixtures.sumup_mode_source())
    qallocs = [addr for addr, _, _ in _instructions(image)
               if image.memory[addr] == isa.QALLOC]
    assert qallocs
    instr, _ = isa.decode(image.memory, qallocs[0])
    assert instr.imm == 5


def _instructions(image):
    for addr, data, src in image.listing:
        if data and image.memory[addr] == data[0]:
            yield addr, data, src


def test_listing_format_qterm():
    image = assembler.assemble(".pos 0x10\nQTerm\n")
    line = [ln for ln in assembler.write_listing(image).splitlines()
            if ln.endswith("| QTerm")][0]
    assert line.startswith("0x0010: e1")


def test_listing_pos_line_shows_target_no_bytes():
    image = assembler.assemble(".pos 0x100\nnop\n")
    lines = assembler.write_listing(image).splitlines()
    assert lines[0].startswith("0x0100:")
    assert lines[0].split(" | ")[0].split(":")[1].strip() == ""


def test_listing_roundtrip_reassembles_identically():
    source = fixtures.adaptive_source()
    image1 = assembler.assemble(source)
    recovered = assembler.listing_source(assembler.write_listing(image1))
    image2 = assembler.assemble(recovered)
    assert bytes(image1.memory) == bytes(image2.memory)


def test_listing_deterministic():
    src = fixtures.no_mode_source()
    a = assembler.write_listing(assembler.assemble(src))
    b = assembler.write_listing(assembler.assemble(src))
    assert a == b


def test_load_listing_rebuilds_memory():
    image = assembler.assemble(fixtures.for_mode_source())
    loaded = assembler.load_listing(assembler.write_listing(image))
    assert bytes(loaded.memory) == bytes(image.memory)


def test_undefined_label():
    with pytest.raises(assembler.UndefinedLabel) as exc:
        assembler.assemble("jmp Nowhere\n")
    assert exc.value.line == 1


def test_duplicate_label():
    with pytest.raises(assembler.DuplicateLabel) as exc:
        assembler.assemble("A: nop\nA: nop\n")
    assert exc.value.line == 2


def test_syntax_error_has_line_number():
    with pytest.raises(assembler.AssemblySyntaxError) as exc:
        assembler.assemble("nop\nfrobnicate %eax\n")
    assert exc.value.line == 2


def test_bad_operand_count():
    with pytest.raises(assembler.AssemblySyntaxError):
        assembler.assemble("addl %eax\n")


def test_unknown_register():
    with pytest.raises(assembler.AssemblySyntaxError):
        assembler.assemble("addl %foo,%eax\n")


def test_unmatched_qterm_target():
    source = """
CLabel: QCreate Data,%eax
        QTerm
Data:   .long 7
"""
    with pytest.raises(assembler.UnmatchedQTermTarget):
        assembler.assemble(source)


def test_overlap_detected():
    source = """
        .pos 0
        irmovl $1,%eax
        .pos 2
        nop
"""
    with pytest.raises(assembler.AssemblerError) as exc:
        assembler.assemble(source)
    assert "written by both" in str(exc.value)


def test_image_size_limit():
    with pytest.raises(assembler.AssemblerError):
        assembler.assemble(".pos 0xFFC\n.long 1\n.long 2\n")


def test_branch_link_mismatch_detected():
    source = """
        QAlloc 1,%ecx
T:      QTCreate TT,%eax
        nop
TT:     QTerm
F:      QFCreate FT,%ebx
        nop
FT:     QTerm
        halt
"""
    with pytest.raises(assembler.AssemblerError) as exc:
        assembler.assemble(source)
    assert "link" in str(exc.value)


def test_directives_pos_align_long():
    source = """
        .pos 0x10
A:      .long 0x11223344
        .align 8
B:      .long -1
"""
    image = assembler.assemble(source)
    assert image.symbols["A"] == 0x10
    assert image.symbols["B"] == 0x18
    assert bytes(image.memory[0x10:0x14]) == bytes([0x44, 0x33, 0x22, 0x11])
    assert bytes(image.memory[0x18:0x1C]) == b"\xff\xff\xff\xff"


def test_two_pass_fixpoint():
    """Addresses assigned in pass 1 (symbols) are where pass 2 listed
    the bytes."""
    source = fixtures.sumup_mode_source()
    image = assembler.assemble(source)
    listed = {}
    for addr, data, src in image.listing:
        head = src.split("#", 1)[0]
        if ":" in head:
            listed[head.split(":")[0].strip()] = addr
    for name, addr in image.symbols.items():
        if name in listed:
            assert listed[name] == addr


def test_bracket_property_in_fixtures():
    """Each QCreate-family target QTerm lies at a strictly greater
    address in every shipped fixture."""
    for name, builder in fixtures.FIXTURES.items():
        image = assembler.assemble(builder())
        for addr, data, _src in image.listing:
            if data and data[0] in isa.QCREATE_FAMILY:
                instr, _ = isa.decode(image.memory, addr)
                assert instr.imm > addr, name
                assert image.memory[instr.imm] == isa.QTERM


def test_pseudo_registers_accepted_anywhere():
    image = assembler.assemble("rrmovl %esv,%esv\nmrmovl 0(%esv),%eax\n")
    assert image.memory[1] == (isa.REG_ESV << 4) | isa.REG_ESV


def test_negative_one_address_wildcard():
    image = assembler.assemble("QWait -1\n")
    assert bytes(image.memory[1:5]) == b"\xff\xff\xff\xff"
