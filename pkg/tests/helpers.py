"""Shared helpers for the test suite."""

from empa import assembler, engine


def assemble_run(source, cores=8, watchdog=10000, timing=None, max_cycles=200000):
    """Assemble, run to halt, return (image, machine, events)."""
    image = assembler.assemble(source)
    cfg = engine.MachineConfig(cores=cores, watchdog=watchdog,
                               timing=timing or engine.TimingConfig())
    machine = engine.Machine(image, cfg)
    events, machine = machine.run_to_halt(max_cycles=max_cycles)
    return image, machine, events


def make_machine(source, cores=8, watchdog=10000):
    image = assembler.assemble(source)
    cfg = engine.MachineConfig(cores=cores, watchdog=watchdog)
    return image, engine.Machine(image, cfg)


def word(machine, image, label):
    return machine.memory.read_word(image.symbols[label])
