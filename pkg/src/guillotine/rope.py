"""Boundary weights written as traced matrix products around a rectangle.

A representation carries one matrix family per side and four corner
matrices.  The weight of a boundary configuration ``(x, y, w, z)`` of a
``p x q`` rectangle is read counter-clockwise starting from the South-West
corner::

    Tr[ U_WS  A_S(x_1)...A_S(x_p)  U_SE  A_E(z_1)...A_E(z_q)
        U_EN  A_N(y_p)...A_N(y_1)  U_NW  A_W(w_q)...A_W(w_1) ]

Side matrices have shape ``(d_a, d_a)``; corners are ``U_WS: d_W x d_S``,
``U_SE: d_S x d_E``, ``U_EN: d_E x d_N`` and ``U_NW: d_N x d_W``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import ShapeMismatchError
from .lattice import FaceWeight, _offsets, partition_tensor
from .tensor import GuillotineTensor, StateSpaces, check_entries

__all__ = [
    "RopeRep",
    "evaluate",
    "eval_tensor",
    "from_factorized",
    "from_hidden_markov",
    "hidden_markov_bruteforce",
    "tensor_product",
    "direct_sum",
    "restrict",
    "side_products",
]

SIDES = ("S", "N", "W", "E")
CORNERS = ("WS", "SE", "EN", "NW")


@dataclass(frozen=True)
class RopeRep:
    """Matrix-product representation of a family of boundary weights.

    Attributes
    ----------
    spaces : StateSpaces
    A_S, A_N : ndarray
        Shapes ``(s1, d_S, d_S)`` and ``(s1, d_N, d_N)``.
    A_W, A_E : ndarray
        Shapes ``(s2, d_W, d_W)`` and ``(s2, d_E, d_E)``.
    U_WS, U_SE, U_EN, U_NW : ndarray
        Corner matrices composing the counter-clockwise product.
    """

    spaces: StateSpaces
    A_S: np.ndarray
    A_N: np.ndarray
    A_W: np.ndarray
    A_E: np.ndarray
    U_WS: np.ndarray
    U_SE: np.ndarray
    U_EN: np.ndarray
    U_NW: np.ndarray

    def __post_init__(self):
        for name in SIDES:
            arr = np.array(getattr(self, "A_" + name), dtype=np.float64)
            n = self.spaces.s1 if name in "SN" else self.spaces.s2
            if arr.ndim != 3 or arr.shape[0] != n or arr.shape[1] != arr.shape[2]:
                raise ShapeMismatchError(
                    f"A_{name} must have shape ({n}, d, d), got {arr.shape}"
                )
            arr.setflags(write=False)
            object.__setattr__(self, "A_" + name, arr)
        for name in CORNERS:
            arr = np.array(getattr(self, "U_" + name), dtype=np.float64)
            if arr.ndim != 2:
                raise ShapeMismatchError(f"U_{name} must be a matrix, got shape {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, "U_" + name, arr)
        d = self.dims
        expected = {
            "WS": (d["W"], d["S"]),
            "SE": (d["S"], d["E"]),
            "EN": (d["E"], d["N"]),
            "NW": (d["N"], d["W"]),
        }
        for name, shp in expected.items():
            if getattr(self, "U_" + name).shape != shp:
                raise ShapeMismatchError(
                    f"U_{name} must have shape {shp}, got {getattr(self, 'U_' + name).shape}"
                )

    @property
    def dims(self) -> dict:
        return {a: getattr(self, "A_" + a).shape[1] for a in SIDES}

    def side(self, a: str) -> np.ndarray:
        return getattr(self, "A_" + a)

    def corner(self, ab: str) -> np.ndarray:
        return getattr(self, "U_" + ab)

    def __repr__(self):
        d = self.dims
        return (
            f"RopeRep(s1={self.spaces.s1}, s2={self.spaces.s2}, "
            f"d_S={d['S']}, d_N={d['N']}, d_W={d['W']}, d_E={d['E']})"
        )


def _chain(mats: list, d: int) -> np.ndarray:
    out = np.eye(d)
    for m in mats:
        out = out @ m
    return out


def evaluate(rep: RopeRep, x=(), y=(), w=(), z=()) -> float:
    """Boundary weight of one configuration.

    For ``q = 0`` pass only ``x`` (the South and North sides coincide); for
    ``p = 0`` pass only ``w``.
    """
    x, y, w, z = (tuple(int(v) for v in s) for s in (x, y, w, z))
    d = rep.dims
    p, q = len(x), len(w)
    if q == 0:
        if y and y != x or z:
            raise ShapeMismatchError("a (p, 0) configuration has one horizontal sequence")
        y = x
    elif p == 0:
        if z and z != w or y:
            raise ShapeMismatchError("a (0, q) configuration has one vertical sequence")
        z = w
    elif len(y) != p or len(z) != q:
        raise ShapeMismatchError(
            f"side lengths disagree: S={p}, N={len(y)}, W={q}, E={len(z)}"
        )
    PS = _chain([rep.A_S[v] for v in x], d["S"])
    PE = _chain([rep.A_E[v] for v in z], d["E"])
    PN = _chain([rep.A_N[v] for v in reversed(y)], d["N"])
    PW = _chain([rep.A_W[v] for v in reversed(w)], d["W"])
    return float(np.trace(rep.U_WS @ PS @ rep.U_SE @ PE @ rep.U_EN @ PN @ rep.U_NW @ PW))


def side_products(A: np.ndarray, n: int, reverse: bool = False) -> np.ndarray:
    """Products of ``n`` side matrices for every state sequence.

    Returns an array of shape ``(s**n, d, d)`` whose entry at the
    lexicographic index of ``(v_1, ..., v_n)`` is ``A(v_1)...A(v_n)``, or
    ``A(v_n)...A(v_1)`` when ``reverse`` is set.  ``n = 0`` gives the identity.
    """
    s, d, _ = A.shape
    check_entries(s**n * d * d, "side product table")
    out = np.eye(d)[None]
    for _ in range(n):
        if reverse:
            out = np.einsum("uab,xbc->xuac", A, out).reshape(-1, d, d)
        else:
            out = np.einsum("xab,ubc->xuac", out, A).reshape(-1, d, d)
    return out


def eval_tensor(rep: RopeRep, p: int, q: int) -> GuillotineTensor:
    """Tabulate the boundary weight over every configuration of shape ``(p, q)``."""
    sp = rep.spaces
    if p < 0 or q < 0:
        raise ShapeMismatchError("shape sizes must be >= 0")
    if p > 0 and q > 0:
        check_entries(sp.s1 ** (2 * p) * sp.s2 ** (2 * q))
        L = np.einsum("ab,xbc,cd->xad", rep.U_WS, side_products(rep.A_S, p), rep.U_SE)
        M = np.einsum("zab,bc->zac", side_products(rep.A_E, q), rep.U_EN)
        N = np.einsum("yab,bc->yac", side_products(rep.A_N, p, reverse=True), rep.U_NW)
        Wm = side_products(rep.A_W, q, reverse=True)
        out = np.einsum("xab,zbc,ycd,wda->xywz", L, M, N, Wm, optimize=True)
        return GuillotineTensor(sp, (p, q), out)
    if p > 0:
        L = np.einsum("ab,xbc,cd->xad", rep.U_WS, side_products(rep.A_S, p), rep.U_SE @ rep.U_EN)
        N = np.einsum("xab,bc->xac", side_products(rep.A_N, p, reverse=True), rep.U_NW)
        return GuillotineTensor(sp, (p, 0), np.einsum("xab,xba->x", L, N))
    if q > 0:
        M = np.einsum("ab,zbc,cd->zad", rep.U_WS @ rep.U_SE, side_products(rep.A_E, q), rep.U_EN @ rep.U_NW)
        Wm = side_products(rep.A_W, q, reverse=True)
        return GuillotineTensor(sp, (0, q), np.einsum("zab,zba->z", M, Wm))
    val = np.trace(rep.U_WS @ rep.U_SE @ rep.U_EN @ rep.U_NW)
    return GuillotineTensor(sp, (0, 0), val)


# ---------------------------------------------------------------------------
# Constructors


def _nonneg_vector(u, n, name) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (n,):
        raise ShapeMismatchError(f"{name} needs {n} entries, got shape {u.shape}")
    if np.any(u < 0):
        raise ValueError(f"{name} must be nonnegative")
    if not np.any(u > 0):
        raise ValueError(f"{name} is identically zero")
    return u


def from_factorized(u_S, u_N, u_W, u_E) -> RopeRep:
    """One-dimensional representation of ``prod u_S(x_i) u_N(y_i) u_W(w_j) u_E(z_j)``."""
    u_S = np.asarray(u_S, dtype=np.float64)
    u_W = np.asarray(u_W, dtype=np.float64)
    sp = StateSpaces(u_S.size, u_W.size)
    u_S = _nonneg_vector(u_S, sp.s1, "u_S")
    u_N = _nonneg_vector(u_N, sp.s1, "u_N")
    u_W = _nonneg_vector(u_W, sp.s2, "u_W")
    u_E = _nonneg_vector(u_E, sp.s2, "u_E")
    one = np.ones((1, 1))
    return RopeRep(
        sp,
        u_S[:, None, None],
        u_N[:, None, None],
        u_W[:, None, None],
        u_E[:, None, None],
        one,
        one,
        one,
        one,
    )


def from_hidden_markov(T: dict, nu: dict) -> RopeRep:
    """Representation of the edge marginal of a hidden Markov bridge on the boundary.

    Hidden states live on boundary vertices.  South and North edges run
    left to right, West and East edges bottom to top; an edge from hidden
    state ``a`` to ``b`` on side ``s`` contributes ``T[s][a, b]`` and emits
    its visible state with law ``nu[s][:, a, b]``.

    Parameters
    ----------
    T : dict of side -> (m, m) array
        Nonnegative hidden transition weights.
    nu : dict of side -> (n_states, m, m) array
        Emission laws; ``nu[s][:, a, b]`` sums to one.
    """
    mats = {}
    m = None
    for a in SIDES:
        Ta = np.asarray(T[a], dtype=np.float64)
        na = np.asarray(nu[a], dtype=np.float64)
        if Ta.ndim != 2 or Ta.shape[0] != Ta.shape[1]:
            raise ShapeMismatchError(f"T[{a}] must be square")
        m = Ta.shape[0] if m is None else m
        if Ta.shape[0] != m or na.shape[1:] != (m, m):
            raise ShapeMismatchError("hidden dimensions differ between sides")
        if np.any(Ta < 0) or np.any(na < 0):
            raise ValueError(f"T[{a}] and nu[{a}] must be nonnegative")
        if not np.allclose(na.sum(axis=0), 1.0, rtol=0, atol=1e-12):
            raise ValueError(f"nu[{a}] is not a probability law for every hidden pair")
        if a in "SE":
            mats[a] = na * Ta[None]
        else:
            mats[a] = np.transpose(na * Ta[None], (0, 2, 1))
    sp = StateSpaces(mats["S"].shape[0], mats["W"].shape[0])
    if mats["N"].shape[0] != sp.s1 or mats["E"].shape[0] != sp.s2:
        raise ShapeMismatchError("emission state sets disagree between opposite sides")
    eye = np.eye(m)
    return RopeRep(sp, mats["S"], mats["N"], mats["W"], mats["E"], eye, eye, eye, eye)


def hidden_markov_bruteforce(T: dict, nu: dict, x, y, w, z) -> float:
    """Unnormalized boundary weight by summing over all hidden vertex states.

    Reference implementation for :func:`from_hidden_markov`.
    """
    p, q = len(x), len(w)
    m = np.asarray(T["S"]).shape[0]
    # Vertices counter-clockwise from the South-West corner.
    n_vert = 2 * p + 2 * q
    # Each edge as (side, visible state, start vertex, end vertex) with the
    # start/end following the left-to-right or bottom-to-top orientation.
    edges = []
    for i in range(p):
        edges.append(("S", x[i], i, i + 1))
    for j in range(q):
        edges.append(("E", z[j], p + j, p + j + 1))
    top_right = p + q
    for i in range(p):
        # North edge i runs from vertex above column i to the one above i+1.
        left = top_right + (p - i)
        right = top_right + (p - i - 1)
        edges.append(("N", y[i], left, right))
    top_left = 2 * p + q
    for j in range(q):
        bottom = (top_left + (q - j)) % n_vert
        top = top_left + (q - j - 1)
        edges.append(("W", w[j], bottom, top))
    total = 0.0
    for s in itertools.product(range(m), repeat=n_vert):
        val = 1.0
        for side, v, a, b in edges:
            val *= T[side][s[a], s[b]] * nu[side][v, s[a], s[b]]
        total += val
    return total


# ---------------------------------------------------------------------------
# Combinations


def _same_spaces(reps: Sequence[RopeRep]) -> StateSpaces:
    sp = reps[0].spaces
    for r in reps[1:]:
        if r.spaces != sp:
            raise ShapeMismatchError(f"state spaces differ: {sp} vs {r.spaces}")
    return sp


def tensor_product(r1: RopeRep, r2: RopeRep) -> RopeRep:
    """Kronecker product; evaluates to the pointwise product of the two weights."""
    sp = _same_spaces([r1, r2])
    sides = {
        a: np.stack([np.kron(m1, m2) for m1, m2 in zip(r1.side(a), r2.side(a))])
        for a in SIDES
    }
    corners = {ab: np.kron(r1.corner(ab), r2.corner(ab)) for ab in CORNERS}
    return RopeRep(sp, **{"A_" + a: v for a, v in sides.items()}, **{"U_" + k: v for k, v in corners.items()})


def direct_sum(reps: Sequence[RopeRep]) -> RopeRep:
    """Block-diagonal sum; evaluates to the sum of the weights."""
    reps = list(reps)
    if not reps:
        raise ValueError("direct_sum needs at least one representation")
    sp = _same_spaces(reps)
    sides = {
        a: np.stack([block_diag(*[r.side(a)[v] for r in reps]) for v in range(reps[0].side(a).shape[0])])
        for a in SIDES
    }
    corners = {ab: block_diag(*[r.corner(ab) for r in reps]) for ab in CORNERS}
    return RopeRep(sp, **{"A_" + a: v for a, v in sides.items()}, **{"U_" + k: v for k, v in corners.items()})


# ---------------------------------------------------------------------------
# Restriction to an inner rectangle


def _block(w: FaceWeight, n: int, m: int) -> np.ndarray:
    """Four-index partition array of an ``n x m`` block, deltas on empty sides."""
    s1, s2 = w.spaces.s1, w.spaces.s2
    if n > 0 and m > 0:
        return partition_tensor(w, n, m).data
    if n > 0:
        return np.eye(s1**n)[:, :, None, None]
    if m > 0:
        return np.eye(s2**m)[None, None, :, :]
    return np.ones((1, 1, 1, 1))


def restrict(w: FaceWeight, rep: RopeRep, offsets: Sequence[int]) -> RopeRep:
    """Representation of the boundary weight induced on an inner rectangle.

    Offsets ``(n1, n2, m1, m2)`` remove ``n1`` columns on the left, ``n2`` on
    the right, ``m1`` rows at the bottom and ``m2`` at the top.  The side
    spaces grow to ``d_S * s2**m1``, ``d_N * s2**m2``, ``d_W * s1**n1`` and
    ``d_E * s1**n2``: each new side element absorbs a one-cell-wide strip of
    the removed annulus, and each corner absorbs the removed corner block
    together with the original side and corner matrices along it.

    For any outer shape ``(P, Q)``, evaluating the result on the inner
    rectangle agrees with :func:`guillotine.lattice.marginal_boundary_weight`
    applied to ``eval_tensor(rep, P, Q)``.
    """
    if w.spaces != rep.spaces:
        raise ShapeMismatchError("face weight and representation use different state spaces")
    n1, n2, m1, m2 = _offsets(offsets)
    d = rep.dims
    s1, s2 = rep.spaces.s1, rep.spaces.s2
    new = {"S": d["S"] * s2**m1, "N": d["N"] * s2**m2, "W": d["W"] * s1**n1, "E": d["E"] * s1**n2}
    for a in SIDES:
        n_states = s1 if a in "SN" else s2
        check_entries(n_states * new[a] ** 2, f"restricted side {a}")

    B_S = np.einsum("uxwz,uab->xwazb", _block(w, 1, m1), rep.A_S)
    B_S = B_S.reshape(s1, new["S"], new["S"])
    B_N = np.einsum("yuwz,uab->yzawb", _block(w, 1, m2), rep.A_N)
    B_N = B_N.reshape(s1, new["N"], new["N"])
    B_W = np.einsum("xyuv,uab->vyaxb", _block(w, n1, 1), rep.A_W)
    B_W = B_W.reshape(s2, new["W"], new["W"])
    B_E = np.einsum("xyvu,uab->vxayb", _block(w, n2, 1), rep.A_E)
    B_E = B_E.reshape(s2, new["E"], new["E"])

    V_WS = np.einsum(
        "xywz,wab,bc,xcd->yazd",
        _block(w, n1, m1),
        side_products(rep.A_W, m1, reverse=True),
        rep.U_WS,
        side_products(rep.A_S, n1),
    ).reshape(new["W"], new["S"])
    V_SE = np.einsum(
        "xywz,xab,bc,zcd->wayd",
        _block(w, n2, m1),
        side_products(rep.A_S, n2),
        rep.U_SE,
        side_products(rep.A_E, m1),
    ).reshape(new["S"], new["E"])
    V_EN = np.einsum(
        "xywz,zab,bc,ycd->xawd",
        _block(w, n2, m2),
        side_products(rep.A_E, m2),
        rep.U_EN,
        side_products(rep.A_N, n2, reverse=True),
    ).reshape(new["E"], new["N"])
    V_NW = np.einsum(
        "xywz,yab,bc,wcd->zaxd",
        _block(w, n1, m2),
        side_products(rep.A_N, n1, reverse=True),
        rep.U_NW,
        side_products(rep.A_W, m2, reverse=True),
    ).reshape(new["N"], new["W"])
    return RopeRep(rep.spaces, B_S, B_N, B_W, B_E, V_WS, V_SE, V_EN, V_NW)
