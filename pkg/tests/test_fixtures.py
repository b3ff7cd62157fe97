"""Fixture programs: shipped files match the builders, documented sums
hold, every variant is correct on every core count."""

import os

import pytest

from empa import assembler, fixtures
from helpers import assemble_run, word

FIXTURE_DIR = os.path.join(os.path.dirname(__file__), os.pardir, "fixtures")


def test_shipped_files_match_builders():
    for name, builder in fixtures.FIXTURES.items():
        path = os.path.join(FIXTURE_DIR, name + ".eyo")
        with open(path) as fh:
            assert fh.read() == builder(), name


def test_documented_default_sums():
    assert sum(fixtures.DEFAULT_VECTOR) == 15
    for name in ("no_mode", "for_mode", "sumup_mode", "adaptive"):
        image, machine, _ = assemble_run(fixtures.FIXTURES[name](), cores=8)
        assert word(machine, image, "Sum") == 15, name


def test_dynpar_documented_results():
    image, machine, _ = assemble_run(fixtures.dynpar_source(), cores=8)
    c, d, e, f = fixtures.DEFAULT_DYNPAR
    assert word(machine, image, "RA") == (c + d) + (e + f)
    assert word(machine, image, "RB") == ((c + d) - (e + f)) % 2**32


@pytest.mark.parametrize("cores", range(1, 9))
def test_sum_fixtures_every_core_count(cores):
    values = [0x11, 0x80000000, 3]
    expected = sum(values) % 2**32
    for name in ("no_mode", "for_mode", "sumup_mode", "adaptive"):
        image, machine, _ = assemble_run(fixtures.FIXTURES[name](values),
                                         cores=cores)
        assert word(machine, image, "Sum") == expected, (name, cores)


def test_single_element_vector():
    image, machine, _ = assemble_run(fixtures.adaptive_source([42]), cores=2)
    assert word(machine, image, "Sum") == 42


def test_fixture_sources_carry_comments_and_labels():
    src = fixtures.sumup_mode_source()
    assert "#" in src
    assert "QAlloc 5,%ecx" in src
    image = assembler.assemble(src)
    assert {"Vec", "Sum", "STC", "STT"} <= set(image.symbols)
