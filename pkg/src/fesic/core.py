"""Circuit types, memory elements, runtime values and machine state.

Values are plain Python objects:

    Unit      ()
    Bool      bool
    Int n     int in [0, 2**n)
    Tuple     tuple of element values

A machine state is a tuple with one entry per memory element: the value
of an input or register, or a tuple of ``2**addr_width`` values for a
register file.  A pending update (``Delta``) maps element indices to the
value (register) or ``(address, value)`` pair (register file) that will
be committed at the end of the cycle.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping, Sequence, Tuple, Union

MAX_WIDTH = 64


class ContractError(ValueError):
    """An operation was called outside its precondition."""


@dataclass(frozen=True)
class UnitTy:
    def __str__(self):
        return "Unit"


@dataclass(frozen=True)
class BoolTy:
    def __str__(self):
        return "B"


@dataclass(frozen=True)
class IntTy:
    width: int

    def __post_init__(self):
        if not isinstance(self.width, int) or not 1 <= self.width <= MAX_WIDTH:
            raise ContractError(f"word width must be in [1, {MAX_WIDTH}], got {self.width!r}")

    def __str__(self):
        return f"Int {self.width}"


@dataclass(frozen=True)
class TupleTy:
    elems: Tuple["Ty", ...]

    def __post_init__(self):
        object.__setattr__(self, "elems", tuple(self.elems))

    def __str__(self):
        return "(" + " * ".join(str(t) for t in self.elems) + ")"


Ty = Union[UnitTy, BoolTy, IntTy, TupleTy]

UNIT = UnitTy()
BOOL = BoolTy()


def Int(width: int) -> IntTy:
    return IntTy(width)


def Tuple_(*elems: Ty) -> TupleTy:
    return TupleTy(tuple(elems))


@dataclass(frozen=True)
class Input:
    ty: Ty

    def __str__(self):
        return f"Input {self.ty}"


@dataclass(frozen=True)
class Reg:
    ty: Ty

    def __str__(self):
        return f"Reg {self.ty}"


@dataclass(frozen=True)
class Regfile:
    addr_width: int
    ty: Ty

    def __post_init__(self):
        if not isinstance(self.addr_width, int) or not 1 <= self.addr_width <= 16:
            raise ContractError(f"register file address width must be in [1, 16], got {self.addr_width!r}")

    @property
    def size(self) -> int:
        return 1 << self.addr_width

    def __str__(self):
        return f"Regfile {self.addr_width} {self.ty}"


Mem = Union[Input, Reg, Regfile]
MemEnv = Tuple[Mem, ...]
Value = Any
MemState = Tuple[Value, ...]
Delta = Mapping[int, Value]

EMPTY_DELTA: Delta = {}


def value_has_type(v: Value, t: Ty) -> bool:
    if isinstance(t, UnitTy):
        return v == () and type(v) is tuple
    if isinstance(t, BoolTy):
        return type(v) is bool
    if isinstance(t, IntTy):
        return type(v) is int and 0 <= v < (1 << t.width)
    if isinstance(t, TupleTy):
        return (
            type(v) is tuple
            and len(v) == len(t.elems)
            and all(value_has_type(x, et) for x, et in zip(v, t.elems))
        )
    return False


def default_value(t: Ty) -> Value:
    """The all-zero value of ``t``."""
    if isinstance(t, UnitTy):
        return ()
    if isinstance(t, BoolTy):
        return False
    if isinstance(t, IntTy):
        return 0
    return tuple(default_value(e) for e in t.elems)


def zero_state(phi: Sequence[Mem]) -> MemState:
    out = []
    for m in phi:
        if isinstance(m, Regfile):
            out.append((default_value(m.ty),) * m.size)
        else:
            out.append(default_value(m.ty))
    return tuple(out)


def state_has_shape(phi: Sequence[Mem], st: MemState) -> bool:
    if len(st) != len(phi):
        return False
    for m, v in zip(phi, st):
        if isinstance(m, Regfile):
            if type(v) is not tuple or len(v) != m.size:
                return False
            if not all(value_has_type(x, m.ty) for x in v):
                return False
        elif not value_has_type(v, m.ty):
            return False
    return True


def delta_insert(phi: Sequence[Mem], delta: Delta, index: int, v: Value, addr: int | None = None) -> Delta:
    """Record a write unless the element already has one (first write wins).

    Register files have a single write port, so occupancy is tracked per
    element rather than per address.
    """
    m = phi[index]
    if isinstance(m, Input):
        raise ContractError(f"element {index} is an input and cannot be written")
    if not value_has_type(v, m.ty):
        raise ContractError(f"value {v!r} does not have type {m.ty}")
    if isinstance(m, Regfile):
        if addr is None or not (type(addr) is int and 0 <= addr < m.size):
            raise ContractError(f"bad register file address {addr!r}")
        entry = (addr, v)
    else:
        if addr is not None:
            raise ContractError("register writes take no address")
        entry = v
    if index in delta:
        return delta
    out = dict(delta)
    out[index] = entry
    return out


def commit(phi: Sequence[Mem], st: MemState, delta: Delta) -> MemState:
    if not delta:
        return st
    out = list(st)
    for index, entry in delta.items():
        if isinstance(phi[index], Regfile):
            addr, v = entry
            rf = list(out[index])
            rf[addr] = v
            out[index] = tuple(rf)
        else:
            out[index] = entry
    return tuple(out)


def flatten_width(t: Ty) -> int:
    if isinstance(t, UnitTy):
        return 0
    if isinstance(t, BoolTy):
        return 1
    if isinstance(t, IntTy):
        return t.width
    return sum(flatten_width(e) for e in t.elems)


def pack_value(v: Value, t: Ty) -> int:
    """Flatten a value to a bit-vector, tuple element 0 in the low bits."""
    if isinstance(t, UnitTy):
        return 0
    if isinstance(t, BoolTy):
        return int(v)
    if isinstance(t, IntTy):
        return v
    out, shift = 0, 0
    for x, et in zip(v, t.elems):
        out |= pack_value(x, et) << shift
        shift += flatten_width(et)
    return out


def unpack_value(bits: int, t: Ty) -> Value:
    if isinstance(t, UnitTy):
        return ()
    if isinstance(t, BoolTy):
        return bool(bits & 1)
    if isinstance(t, IntTy):
        return bits & ((1 << t.width) - 1)
    out = []
    for et in t.elems:
        out.append(unpack_value(bits, et))
        bits >>= flatten_width(et)
    return tuple(out)


def leaf_types(t: Ty) -> list:
    """Scalar (Bool/Int) leaves of ``t`` in order."""
    if isinstance(t, (BoolTy, IntTy)):
        return [t]
    if isinstance(t, TupleTy):
        return [x for e in t.elems for x in leaf_types(e)]
    return []


def value_from_leaves(leaves: Sequence[int], t: Ty) -> Value:
    """Rebuild a value of ``t`` from its scalar leaves (decimal ints)."""
    it = iter(leaves)

    def build(t):
        if isinstance(t, UnitTy):
            return ()
        if isinstance(t, BoolTy):
            x = next(it)
            if x not in (0, 1):
                raise ValueError(f"Boolean leaf must be 0 or 1, got {x}")
            return bool(x)
        if isinstance(t, IntTy):
            x = next(it)
            if not 0 <= x < (1 << t.width):
                raise ValueError(f"{x} does not fit in {t}")
            return x
        return tuple(build(e) for e in t.elems)

    try:
        v = build(t)
    except StopIteration:
        raise ValueError(f"too few values for {t}") from None
    if next(it, None) is not None:
        raise ValueError(f"too many values for {t}")
    return v


def value_leaves(v: Value, t: Ty) -> list:
    if isinstance(t, BoolTy):
        return [int(v)]
    if isinstance(t, IntTy):
        return [v]
    if isinstance(t, TupleTy):
        return [x for e, et in zip(v, t.elems) for x in value_leaves(e, et)]
    return []
