"""EMPA/Y86 toolchain: assembler and cycle-accurate many-core simulator."""

__version__ = "0.1.0"
