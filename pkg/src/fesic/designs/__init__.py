"""Built-in example designs, selectable by name."""

from __future__ import annotations

from importlib import resources

from .basic import counter_circuit, hadd_circuit
from .sorter import sorter_circuit
from .stackmachine import stack_machine_circuit

EXAMPLES = ("hadd", "counter", "sorter", "stackmachine")


def build(example: str, n: int | None = None, width: int | None = None):
    """Construct a named example; raises ValueError on bad parameters."""
    if example == "hadd":
        return hadd_circuit()
    if example == "counter":
        return counter_circuit(4 if n is None else n)
    if example == "sorter":
        return sorter_circuit(2 if n is None else n, 8 if width is None else width)
    if example == "stackmachine":
        return stack_machine_circuit(8 if n is None else n)
    raise ValueError(f"unknown example {example!r}; choose from {', '.join(EXAMPLES)}")


def program_text(name: str) -> str:
    """Source of a bundled assembler program, e.g. ``fibonacci``."""
    return resources.files(__package__).joinpath("asm", f"{name}.asm").read_text()
