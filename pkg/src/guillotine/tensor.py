"""Colored tensor spaces ``T_{p,q}`` and the two guillotine products.

An element of ``T_{p,q}`` assigns a real number to every boundary
configuration of a ``p x q`` rectangle of lattice faces.  Horizontal edges
carry states in ``S1 = {0..s1-1}``, vertical edges states in
``S2 = {0..s2-1}``.  A boundary configuration is the quadruple
``(x, y, w, z)``: South, North, West and East sides, each read
left-to-right or bottom-to-top.

Storage is a numpy array in *block form* of shape
``(s1**p, s1**p, s2**q, s2**q)``; its C-order flattening is the canonical
layout (``x`` most significant, first edge of a side most significant).
Degenerate shapes keep only the diagonal: ``(p, 0)`` is stored as a vector
of length ``s1**p``, ``(0, q)`` as a vector of length ``s2**q`` and
``(0, 0)`` as a 0-d scalar.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .errors import MemoryCapError, ShapeMismatchError

__all__ = [
    "StateSpaces",
    "Shape",
    "GuillotineTensor",
    "get_max_entries",
    "set_max_entries",
    "check_entries",
    "tensor_from_fn",
    "unit",
    "m_we",
    "m_sn",
    "surface_power",
    "pair_boundary",
    "dihedral",
    "boundary_configs",
]

_MAX_ENTRIES = 2**28


def get_max_entries() -> int:
    return _MAX_ENTRIES


def set_max_entries(n: int) -> int:
    """Set the dense-tensor entry cap and return the previous value."""
    global _MAX_ENTRIES
    if n < 1:
        raise ValueError("entry cap must be positive")
    old, _MAX_ENTRIES = _MAX_ENTRIES, int(n)
    return old


def check_entries(n: int, what: str = "tensor") -> None:
    if n > _MAX_ENTRIES:
        raise MemoryCapError(
            f"{what} would hold {n} entries, above the cap of {_MAX_ENTRIES}; "
            "raise it with set_max_entries() if the memory is available"
        )


@dataclass(frozen=True)
class StateSpaces:
    """Cardinalities of the horizontal (``s1``) and vertical (``s2``) edge state sets."""

    s1: int
    s2: int

    def __post_init__(self):
        if int(self.s1) != self.s1 or int(self.s2) != self.s2:
            raise ValueError("state-space sizes must be integers")
        if self.s1 < 1 or self.s2 < 1:
            raise ValueError(f"state-space sizes must be >= 1, got ({self.s1}, {self.s2})")


@dataclass(frozen=True)
class Shape:
    p: int
    q: int

    def __post_init__(self):
        if self.p < 0 or self.q < 0:
            raise ValueError(f"shape sizes must be >= 0, got ({self.p}, {self.q})")

    @property
    def degenerate(self) -> bool:
        return self.p == 0 or self.q == 0


def _block_shape(spaces: StateSpaces, p: int, q: int) -> tuple:
    if p > 0 and q > 0:
        return (spaces.s1**p, spaces.s1**p, spaces.s2**q, spaces.s2**q)
    if p > 0:
        return (spaces.s1**p,)
    if q > 0:
        return (spaces.s2**q,)
    return ()


class GuillotineTensor:
    """Immutable element of ``T_{p,q}`` over given state spaces."""

    __slots__ = ("spaces", "shape", "_data")

    def __init__(self, spaces: StateSpaces, shape: Shape | tuple, data):
        if not isinstance(shape, Shape):
            shape = Shape(*shape)
        block = _block_shape(spaces, shape.p, shape.q)
        arr = np.asarray(data, dtype=np.float64)
        size = int(np.prod(block)) if block else 1
        if arr.size != size:
            raise ShapeMismatchError(
                f"shape ({shape.p},{shape.q}) over (s1={spaces.s1}, s2={spaces.s2}) "
                f"needs {size} entries, got {arr.size}"
            )
        check_entries(size)
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor entries must be finite")
        arr = np.array(arr.reshape(block), dtype=np.float64)
        arr.setflags(write=False)
        self.spaces = spaces
        self.shape = shape
        self._data = arr

    @property
    def data(self) -> np.ndarray:
        """Block-form array (read-only)."""
        return self._data

    @property
    def flat(self) -> np.ndarray:
        return self._data.reshape(-1)

    @property
    def p(self) -> int:
        return self.shape.p

    @property
    def q(self) -> int:
        return self.shape.q

    def edge_array(self) -> np.ndarray:
        """View with one axis per boundary edge, in (x, y, w, z) order."""
        s1, s2 = self.spaces.s1, self.spaces.s2
        p, q = self.p, self.q
        if p > 0 and q > 0:
            return self._data.reshape((s1,) * (2 * p) + (s2,) * (2 * q))
        if p > 0:
            return self._data.reshape((s1,) * p)
        if q > 0:
            return self._data.reshape((s2,) * q)
        return self._data

    def full(self) -> np.ndarray:
        """Four-index block array, expanding degenerate diagonals with deltas."""
        p, q = self.p, self.q
        if p > 0 and q > 0:
            return self._data
        if p > 0:
            return np.diag(self._data)[:, :, None, None]
        if q > 0:
            return np.diag(self._data)[None, None, :, :]
        return self._data.reshape(1, 1, 1, 1)

    def __repr__(self):
        return (
            f"GuillotineTensor(shape=({self.p},{self.q}), "
            f"s1={self.spaces.s1}, s2={self.spaces.s2})"
        )

    def allclose(self, other: "GuillotineTensor", rtol=1e-12, atol=0.0) -> bool:
        return (
            self.spaces == other.spaces
            and self.shape == other.shape
            and np.allclose(self._data, other._data, rtol=rtol, atol=atol)
        )


def _from_full(spaces: StateSpaces, p: int, q: int, arr: np.ndarray) -> GuillotineTensor:
    if p > 0 and q > 0:
        return GuillotineTensor(spaces, (p, q), arr)
    if p > 0:
        return GuillotineTensor(spaces, (p, 0), np.diagonal(arr[:, :, 0, 0]))
    if q > 0:
        return GuillotineTensor(spaces, (0, q), np.diagonal(arr[0, 0]))
    return GuillotineTensor(spaces, (0, 0), arr.reshape(()))


def boundary_configs(spaces: StateSpaces, p: int, q: int) -> Iterator[tuple]:
    """Iterate boundary configurations in storage order.

    Yields ``(x, y, w, z)`` tuples of state tuples for non-degenerate shapes
    and a single state tuple for degenerate ones.
    """
    if p > 0 and q > 0:
        r1, r2 = range(spaces.s1), range(spaces.s2)
        for x in itertools.product(r1, repeat=p):
            for y in itertools.product(r1, repeat=p):
                for w in itertools.product(r2, repeat=q):
                    for z in itertools.product(r2, repeat=q):
                        yield x, y, w, z
    elif p > 0:
        yield from itertools.product(range(spaces.s1), repeat=p)
    elif q > 0:
        yield from itertools.product(range(spaces.s2), repeat=q)
    else:
        yield ()


def tensor_from_fn(
    spaces: StateSpaces, shape: Shape | tuple, f: Callable[..., float]
) -> GuillotineTensor:
    """Tabulate ``f`` over every boundary configuration.

    ``f`` receives ``(x, y, w, z)`` for non-degenerate shapes and the single
    state tuple for degenerate shapes.
    """
    if not isinstance(shape, Shape):
        shape = Shape(*shape)
    size = int(np.prod(_block_shape(spaces, shape.p, shape.q) or (1,)))
    check_entries(size)
    if shape.p > 0 and shape.q > 0:
        vals = [f(*c) for c in boundary_configs(spaces, shape.p, shape.q)]
    elif shape.p == 0 and shape.q == 0:
        vals = [f()]
    else:
        vals = [f(c) for c in boundary_configs(spaces, shape.p, shape.q)]
    return GuillotineTensor(spaces, shape, np.array(vals, dtype=np.float64))


def unit(spaces: StateSpaces, p: int, q: int) -> GuillotineTensor:
    """All-ones diagonal element of a degenerate shape (a unit of the products)."""
    if p > 0 and q > 0:
        raise ShapeMismatchError("units only exist on degenerate shapes")
    n = spaces.s1**p if p > 0 else spaces.s2**q
    return GuillotineTensor(spaces, (p, q), np.ones(n if (p or q) else ()))


def _same_spaces(a: GuillotineTensor, b: GuillotineTensor) -> None:
    if a.spaces != b.spaces:
        raise ShapeMismatchError(f"state spaces differ: {a.spaces} vs {b.spaces}")


def m_we(a: GuillotineTensor, b: GuillotineTensor) -> GuillotineTensor:
    """Glue ``a`` (West) and ``b`` (East) along their common vertical side.

    ``result(x+x', y+y', w, z') = sum_u a(x, y, w, u) b(x', y', u, z')``.
    """
    _same_spaces(a, b)
    if a.q != b.q:
        raise ShapeMismatchError(f"m_we needs equal heights, got {a.q} and {b.q}")
    p, q = a.p + b.p, a.q
    _check_result(a.spaces, p, q)
    A, B = a.full(), b.full()
    out = np.einsum("xywu,XYuz->xXyYwz", A, B)
    n1, n2 = A.shape[0] * B.shape[0], A.shape[2]
    return _from_full(a.spaces, p, q, out.reshape(n1, n1, n2, B.shape[3]))


def m_sn(a: GuillotineTensor, b: GuillotineTensor) -> GuillotineTensor:
    """Glue ``a`` (South) and ``b`` (North) along their common horizontal side.

    ``result(x, y', w+w', z+z') = sum_u a(x, u, w, z) b(u, y', w', z')``.
    """
    _same_spaces(a, b)
    if a.p != b.p:
        raise ShapeMismatchError(f"m_sn needs equal widths, got {a.p} and {b.p}")
    p, q = a.p, a.q + b.q
    _check_result(a.spaces, p, q)
    A, B = a.full(), b.full()
    out = np.einsum("xuwz,uyWZ->xywWzZ", A, B)
    n2 = A.shape[2] * B.shape[2]
    return _from_full(a.spaces, p, q, out.reshape(A.shape[0], B.shape[1], n2, n2))


def _check_result(spaces: StateSpaces, p: int, q: int) -> None:
    block = _block_shape(spaces, p, q)
    check_entries(int(np.prod(block)) if block else 1)


def surface_power(
    w: GuillotineTensor, p: int, q: int, order: str = "rows"
) -> GuillotineTensor:
    """Partition-function tensor ``W^{[p,q]}`` of a ``p x q`` block of faces.

    ``order="rows"`` glues each row horizontally and then stacks rows;
    ``order="columns"`` builds columns first.  Both give the same element.
    """
    if w.shape != Shape(1, 1):
        raise ShapeMismatchError("surface_power needs a (1,1) face tensor")
    if p < 1 or q < 1:
        raise ShapeMismatchError(f"surface_power needs p, q >= 1, got ({p}, {q})")
    _check_result(w.spaces, p, q)
    if order == "rows":
        row = w
        for _ in range(p - 1):
            row = m_we(row, w)
        out = row
        for _ in range(q - 1):
            out = m_sn(out, row)
    elif order == "columns":
        col = w
        for _ in range(q - 1):
            col = m_sn(col, w)
        out = col
        for _ in range(p - 1):
            out = m_we(out, col)
    else:
        raise ValueError(f"unknown order {order!r}")
    return out


def pair_boundary(g: GuillotineTensor, z: GuillotineTensor) -> float:
    """Full contraction ``sum_c g(c) z(c)`` of two elements of the same shape."""
    _same_spaces(g, z)
    if g.shape != z.shape:
        raise ShapeMismatchError(
            f"pairing needs equal shapes, got ({g.p},{g.q}) and ({z.p},{z.q})"
        )
    return float(np.dot(g.flat, z.flat))


def dihedral(t: GuillotineTensor, op: str) -> GuillotineTensor:
    """Apply a reflection of the rectangle.

    ``flip_h`` mirrors left-right, ``flip_v`` mirrors top-bottom and
    ``transpose_diag`` reflects across the South-West/North-East diagonal
    (requires ``s1 == s2``; the shape becomes ``(q, p)``).
    """
    p, q = t.p, t.q
    e = t.edge_array()
    if op == "flip_h":
        if p > 0 and q > 0:
            rev = lambda k, off: list(range(off + k - 1, off - 1, -1))  # noqa: E731
            axes = rev(p, 0) + rev(p, p) + list(range(2 * p + q, 2 * p + 2 * q)) + list(
                range(2 * p, 2 * p + q)
            )
            out = e.transpose(axes)
        elif p > 0:
            out = e.transpose(list(range(p - 1, -1, -1)))
        else:
            out = e
        return GuillotineTensor(t.spaces, t.shape, out)
    if op == "flip_v":
        if p > 0 and q > 0:
            axes = (
                list(range(p, 2 * p))
                + list(range(0, p))
                + list(range(2 * p + q - 1, 2 * p - 1, -1))
                + list(range(2 * p + 2 * q - 1, 2 * p + q - 1, -1))
            )
            out = e.transpose(axes)
        elif q > 0:
            out = e.transpose(list(range(q - 1, -1, -1)))
        else:
            out = e
        return GuillotineTensor(t.spaces, t.shape, out)
    if op == "transpose_diag":
        if t.spaces.s1 != t.spaces.s2:
            raise ShapeMismatchError("transpose_diag requires s1 == s2")
        if p > 0 and q > 0:
            axes = (
                list(range(2 * p, 2 * p + 2 * q))
                + list(range(0, 2 * p))
            )
            out = e.transpose(axes)
        else:
            out = e
        return GuillotineTensor(t.spaces, (q, p), out)
    raise ValueError(f"unknown dihedral op {op!r}")
