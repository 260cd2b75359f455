"""Markov processes on rectangles of the square lattice.

A ``p x q`` rectangle has ``p*(q+1)`` horizontal edges and ``q*(p+1)``
vertical edges.  Edges are numbered horizontal first, row by row from the
bottom and left to right within a row, then vertical, column by column from
the left and bottom to top within a column::

    h(i, r) = r*p + i                 0 <= i < p, 0 <= r <= q
    v(c, j) = p*(q+1) + c*q + j       0 <= c <= p, 0 <= j < q

Face ``(i, j)`` has South edge ``h(i, j)``, North ``h(i, j+1)``, West
``v(i, j)`` and East ``v(i+1, j)``.

Two evaluation routes are provided.  The guillotine route contracts face
tensors with :func:`~guillotine.tensor.m_we` and
:func:`~guillotine.tensor.m_sn`.  The enumeration route sums products of
face weights over every edge configuration and serves as the oracle.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EnumerationBoundError, ShapeMismatchError, ZeroPartitionError
from .tensor import (
    GuillotineTensor,
    StateSpaces,
    check_entries,
    m_sn,
    m_we,
    pair_boundary,
    surface_power,
)

__all__ = [
    "FaceWeight",
    "hv_face_weight",
    "oblique_face_weight",
    "random_face_weight",
    "RectLaw",
    "RectGeometry",
    "get_enumeration_bound",
    "set_enumeration_bound",
    "partition_tensor",
    "partition_tensor_bruteforce",
    "exact_law",
    "edge_marginal",
    "marginal_boundary_weight",
    "expectation_with_observables",
    "gauge_transform",
    "gauge_compensated_boundary",
    "conditional_tv",
    "tv_distance",
]

_ENUM_BOUND = 26
# Largest block handled in one vectorized step of the enumeration.  Blocks
# that stay cache-resident beat fewer, larger blocks despite the loop overhead.
_CHUNK_ENTRIES = 2**16


def get_enumeration_bound() -> int:
    return _ENUM_BOUND


def set_enumeration_bound(n: int) -> int:
    """Set the maximum number of enumerated edges and return the previous value."""
    global _ENUM_BOUND
    if n < 0:
        raise ValueError("enumeration bound must be nonnegative")
    old, _ENUM_BOUND = _ENUM_BOUND, int(n)
    return old


def _check_enum(n_edges: int, what: str) -> None:
    if n_edges > _ENUM_BOUND:
        raise EnumerationBoundError(
            f"{what} enumerates {n_edges} edges, above the bound of {_ENUM_BOUND}"
        )


# ---------------------------------------------------------------------------
# Face weights


class FaceWeight:
    """Nonnegative weight ``W(x_S, x_N, x_W, x_E)`` on a single face."""

    __slots__ = ("tensor",)

    def __init__(self, tensor: GuillotineTensor):
        if tensor.p != 1 or tensor.q != 1:
            raise ShapeMismatchError("a face weight must have shape (1, 1)")
        if np.any(tensor.data < 0):
            raise ValueError("face weights must be nonnegative")
        if not np.any(tensor.data > 0):
            raise ValueError("face weight is identically zero")
        self.tensor = tensor

    @classmethod
    def from_array(cls, arr, spaces: StateSpaces | None = None) -> "FaceWeight":
        """Build from a ``(s1, s1, s2, s2)`` array or a flat array plus spaces."""
        arr = np.asarray(arr, dtype=np.float64)
        if spaces is None:
            if arr.ndim != 4 or arr.shape[0] != arr.shape[1] or arr.shape[2] != arr.shape[3]:
                raise ShapeMismatchError(
                    "expected an (s1, s1, s2, s2) array when spaces are not given"
                )
            spaces = StateSpaces(arr.shape[0], arr.shape[2])
        return cls(GuillotineTensor(spaces, (1, 1), arr))

    @property
    def spaces(self) -> StateSpaces:
        return self.tensor.spaces

    @property
    def array(self) -> np.ndarray:
        """Read-only view indexed ``[x_S, x_N, x_W, x_E]``."""
        return self.tensor.data

    def __repr__(self):
        return f"FaceWeight(s1={self.spaces.s1}, s2={self.spaces.s2})"


def hv_face_weight(A, B) -> FaceWeight:
    """Independent vertical and horizontal chains: ``W = A[x_S, x_N] * B[x_W, x_E]``."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    return FaceWeight.from_array(np.einsum("xy,wz->xywz", A, B))


def oblique_face_weight(C, D) -> FaceWeight:
    """Chains along the diagonals: ``W = C[x_S, x_W] * D[x_E, x_N]``.

    ``C`` has shape ``(s1, s2)`` and ``D`` has shape ``(s2, s1)``.
    """
    C = np.asarray(C, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    if C.ndim != 2 or D.shape != C.shape[::-1]:
        raise ShapeMismatchError(
            f"C must be (s1, s2) and D (s2, s1); got {C.shape} and {D.shape}"
        )
    return FaceWeight.from_array(np.einsum("xw,zy->xywz", C, D))


def random_face_weight(
    spaces: StateSpaces, rng: np.random.Generator, low: float = 0.1
) -> FaceWeight:
    """Face weight with i.i.d. entries uniform on ``[low, 1 + low)``."""
    s1, s2 = spaces.s1, spaces.s2
    return FaceWeight.from_array(low + rng.random((s1, s1, s2, s2)))


# ---------------------------------------------------------------------------
# Geometry


@dataclass(frozen=True)
class RectGeometry:
    """Edge numbering of a ``p x q`` rectangle."""

    p: int
    q: int

    def __post_init__(self):
        if self.p < 1 or self.q < 1:
            raise ShapeMismatchError(f"rectangle needs p, q >= 1, got ({self.p}, {self.q})")

    @property
    def n_horizontal(self) -> int:
        return self.p * (self.q + 1)

    @property
    def n_edges(self) -> int:
        return self.p * (self.q + 1) + self.q * (self.p + 1)

    def h(self, i: int, r: int) -> int:
        return r * self.p + i

    def v(self, c: int, j: int) -> int:
        return self.n_horizontal + c * self.q + j

    def is_horizontal(self, e: int) -> bool:
        return e < self.n_horizontal

    def face_edges(self, i: int, j: int) -> tuple:
        return (self.h(i, j), self.h(i, j + 1), self.v(i, j), self.v(i + 1, j))

    def faces(self):
        return [(i, j) for j in range(self.q) for i in range(self.p)]

    def boundary_edges(self) -> list:
        """Boundary edges in tensor order: South, North, West, East."""
        p, q = self.p, self.q
        return (
            [self.h(i, 0) for i in range(p)]
            + [self.h(i, q) for i in range(p)]
            + [self.v(0, j) for j in range(q)]
            + [self.v(p, j) for j in range(q)]
        )

    def sizes(self, spaces: StateSpaces) -> list:
        return [spaces.s1] * self.n_horizontal + [spaces.s2] * (self.n_edges - self.n_horizontal)

    def inner(self, offsets: Sequence[int]) -> tuple["RectGeometry", dict]:
        """Inner rectangle for offsets ``(n1, n2, m1, m2)`` and its edge embedding.

        The offsets count columns removed on the left and right and rows
        removed at the bottom and top.  Returns the inner geometry and a dict
        mapping each inner edge id to the outer edge id.
        """
        n1, n2, m1, m2 = _offsets(offsets)
        pi, qi = self.p - n1 - n2, self.q - m1 - m2
        if pi < 1 or qi < 1:
            raise ShapeMismatchError(
                f"offsets {tuple(offsets)} leave a degenerate inner rectangle "
                f"({pi}, {qi}) inside ({self.p}, {self.q})"
            )
        g = RectGeometry(pi, qi)
        emb = {}
        for r in range(qi + 1):
            for i in range(pi):
                emb[g.h(i, r)] = self.h(i + n1, r + m1)
        for c in range(pi + 1):
            for j in range(qi):
                emb[g.v(c, j)] = self.v(c + n1, j + m1)
        return g, emb


def _offsets(offsets) -> tuple:
    t = tuple(int(o) for o in offsets)
    if len(t) != 4:
        raise ValueError(f"offsets must be (n1, n2, m1, m2), got {offsets!r}")
    if any(o < 0 for o in t):
        raise ValueError(f"offsets must be nonnegative, got {t}")
    return t


# ---------------------------------------------------------------------------
# Enumeration engine


def _enumerate(factors, sizes: dict, active: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Sum a product of factors over every state of the non-kept active edges.

    Parameters
    ----------
    factors : list of (tuple of edge ids, ndarray)
        Each array has one axis per listed edge.
    sizes : dict
        Number of states of every edge.
    active : sequence of int
        Edges carried by the enumeration; every factor edge must be active.
    keep : sequence of int
        Edges left free; the result has one axis per kept edge, in this order.
    """
    active = sorted(set(active))
    keep = list(keep)
    summed = [e for e in active if e not in set(keep)]
    # Peel summed edges off into an explicit loop until one block fits.
    chunk = []
    block = int(np.prod([sizes[e] for e in active], dtype=np.int64))
    for e in summed:
        if block <= _CHUNK_ENTRIES:
            break
        chunk.append(e)
        block //= sizes[e]
    rest = [e for e in active if e not in set(chunk)]
    pos = {e: k for k, e in enumerate(rest)}
    rest_shape = [sizes[e] for e in rest]
    sum_axes = tuple(pos[e] for e in rest if e not in set(keep))
    kept_sorted = [e for e in rest if e in set(keep)]
    out_perm = [kept_sorted.index(e) for e in keep]

    total = np.zeros([sizes[e] for e in keep])
    for vals in itertools.product(*[range(sizes[e]) for e in chunk]):
        fixed = dict(zip(chunk, vals))
        prod = np.ones(rest_shape)
        for edges, arr in factors:
            idx = tuple(fixed[e] if e in fixed else slice(None) for e in edges)
            sub = arr[idx]
            free = [e for e in edges if e not in fixed]
            order = sorted(range(len(free)), key=lambda k: pos[free[k]])
            sub = np.transpose(sub, order)
            shape = [1] * len(rest)
            for k in order:
                shape[pos[free[k]]] = sizes[free[k]]
            prod = prod * sub.reshape(shape)
        part = prod.sum(axis=sum_axes) if sum_axes else prod
        total = total + np.transpose(part, out_perm)
    return total


def _face_factors(w: FaceWeight, geom: RectGeometry, faces=None) -> list:
    W = w.array
    faces = geom.faces() if faces is None else faces
    return [(geom.face_edges(i, j), W) for (i, j) in faces]


def _sizes(geom: RectGeometry, spaces: StateSpaces) -> dict:
    return dict(enumerate(geom.sizes(spaces)))


def _boundary_array(g: GuillotineTensor) -> np.ndarray:
    return g.edge_array()


# ---------------------------------------------------------------------------
# Partition functions and laws


def partition_tensor(w: FaceWeight, p: int, q: int) -> GuillotineTensor:
    """Partition function of a ``p x q`` rectangle as an element of ``T_{p,q}``.

    Computed by guillotine gluing of face tensors.
    """
    return surface_power(w.tensor, p, q)


def partition_tensor_bruteforce(w: FaceWeight, p: int, q: int) -> GuillotineTensor:
    """Same quantity by summing face-weight products over all interior edges."""
    geom = RectGeometry(p, q)
    _check_enum(geom.n_edges, f"rectangle ({p}, {q})")
    bnd = geom.boundary_edges()
    arr = _enumerate(_face_factors(w, geom), _sizes(geom, w.spaces), range(geom.n_edges), bnd)
    return GuillotineTensor(w.spaces, (p, q), arr)


def _check_boundary(w: FaceWeight, g: GuillotineTensor) -> None:
    if g.spaces != w.spaces:
        raise ShapeMismatchError("boundary weight and face weight use different state spaces")
    if g.p < 1 or g.q < 1:
        raise ShapeMismatchError("boundary weight must live on a nondegenerate rectangle")
    if np.any(g.data < 0):
        raise ValueError("boundary weights must be nonnegative")


@dataclass(frozen=True)
class RectLaw:
    """Exact joint law of every edge of a ``p x q`` rectangle.

    Attributes
    ----------
    geometry : RectGeometry
    spaces : StateSpaces
    prob : ndarray
        One axis per edge, in edge-id order; entries sum to one.
    Z : float
        Normalization ``sum_c g(c) Z_R(c)``.
    """

    geometry: RectGeometry
    spaces: StateSpaces
    prob: np.ndarray
    Z: float

    @property
    def p(self) -> int:
        return self.geometry.p

    @property
    def q(self) -> int:
        return self.geometry.q

    def marginal(self, edges: Sequence[int]) -> np.ndarray:
        """Joint law of the listed edges, one axis per edge in the given order."""
        edges = list(edges)
        if len(set(edges)) != len(edges):
            raise ValueError("edges must be distinct")
        others = tuple(e for e in range(self.geometry.n_edges) if e not in set(edges))
        m = self.prob.sum(axis=others) if others else self.prob
        kept = sorted(edges)
        return np.transpose(m, [kept.index(e) for e in edges])

    def inner_marginal(self, offsets: Sequence[int]) -> np.ndarray:
        """Law of the edges of an inner rectangle, axes in the inner edge order."""
        g, emb = self.geometry.inner(offsets)
        return self.marginal([emb[e] for e in range(g.n_edges)])

    def boundary_marginal(self) -> np.ndarray:
        """Law of the boundary edges in tensor block form."""
        m = self.marginal(self.geometry.boundary_edges())
        s1, s2, p, q = self.spaces.s1, self.spaces.s2, self.p, self.q
        return m.reshape(s1**p, s1**p, s2**q, s2**q)


def exact_law(w: FaceWeight, g: GuillotineTensor) -> RectLaw:
    """Joint law ``P(c) = g(boundary of c) * prod_f W(c_f) / Z`` by enumeration."""
    _check_boundary(w, g)
    geom = RectGeometry(g.p, g.q)
    _check_enum(geom.n_edges, f"rectangle ({g.p}, {g.q})")
    check_entries(int(np.prod(geom.sizes(w.spaces), dtype=np.int64)), "law table")
    factors = _face_factors(w, geom) + [(tuple(geom.boundary_edges()), _boundary_array(g))]
    weights = _enumerate(factors, _sizes(geom, w.spaces), range(geom.n_edges), range(geom.n_edges))
    Z = float(weights.sum())
    if not Z > 0:
        raise ZeroPartitionError(f"boundary weight gives Z = {Z} on ({g.p}, {g.q})")
    prob = weights / Z
    prob[(prob < 0) & (prob >= -1e-15)] = 0.0
    return RectLaw(geom, w.spaces, prob, Z)


def edge_marginal(w: FaceWeight, g: GuillotineTensor, edges: Sequence[int]) -> np.ndarray:
    """Normalized law of the listed edges, enumerated without storing the full law.

    Only the bound on enumerated edges applies; memory use stays at one
    vectorized block regardless of rectangle size.
    """
    _check_boundary(w, g)
    geom = RectGeometry(g.p, g.q)
    _check_enum(geom.n_edges, f"rectangle ({g.p}, {g.q})")
    factors = _face_factors(w, geom) + [(tuple(geom.boundary_edges()), _boundary_array(g))]
    m = _enumerate(factors, _sizes(geom, w.spaces), range(geom.n_edges), list(edges))
    Z = float(m.sum())
    if not Z > 0:
        raise ZeroPartitionError(f"boundary weight gives Z = {Z} on ({g.p}, {g.q})")
    return m / Z


def marginal_boundary_weight(
    w: FaceWeight, g: GuillotineTensor, inner_offsets: Sequence[int]
) -> GuillotineTensor:
    """Boundary weight induced on an inner rectangle by summing out the annulus.

    ``g'(c') = sum over annulus edges of prod_{f in annulus} W * g(outer boundary)``,
    left unnormalized.
    """
    _check_boundary(w, g)
    geom = RectGeometry(g.p, g.q)
    n1, n2, m1, m2 = _offsets(inner_offsets)
    inner, emb = geom.inner((n1, n2, m1, m2))
    inner_ids = set(emb.values())
    inner_bnd = [emb[e] for e in inner.boundary_edges()]
    inner_int = inner_ids - set(inner_bnd)
    annulus = [
        (i, j)
        for (i, j) in geom.faces()
        if not (n1 <= i < geom.p - n2 and m1 <= j < geom.q - m2)
    ]
    active = [e for e in range(geom.n_edges) if e not in inner_int]
    _check_enum(len(active), "annulus")
    factors = _face_factors(w, geom, annulus) + [
        (tuple(geom.boundary_edges()), _boundary_array(g))
    ]
    arr = _enumerate(factors, _sizes(geom, w.spaces), active, inner_bnd)
    return GuillotineTensor(w.spaces, (inner.p, inner.q), arr)


# ---------------------------------------------------------------------------
# Observables


def _diag(spaces: StateSpaces, p: int, q: int, vec) -> GuillotineTensor:
    return GuillotineTensor(spaces, (p, q), vec)


def expectation_with_observables(
    w: FaceWeight,
    g: GuillotineTensor,
    obs: Sequence[tuple],
    method: str = "contraction",
) -> float:
    """Expectation of ``prod_e h_e(X_e)`` under the law of ``(w, g)``.

    Parameters
    ----------
    obs : sequence of (edge id, array)
        ``h_e`` tabulated on the state set of edge ``e``; at most one per edge.
    method : {"contraction", "enumeration"}
        ``"contraction"`` inserts diagonal degenerate tensors between faces
        in the guillotine gluing; ``"enumeration"`` sums over all edge
        configurations.
    """
    _check_boundary(w, g)
    geom = RectGeometry(g.p, g.q)
    sizes = _sizes(geom, w.spaces)
    hmap = {}
    for e, h in obs:
        e = int(e)
        if not 0 <= e < geom.n_edges:
            raise ValueError(f"edge id {e} outside rectangle with {geom.n_edges} edges")
        if e in hmap:
            raise ValueError(f"two observables on edge {e}")
        h = np.asarray(h, dtype=np.float64)
        if h.shape != (sizes[e],):
            raise ShapeMismatchError(f"observable on edge {e} needs {sizes[e]} values")
        hmap[e] = h
    if method == "enumeration":
        _check_enum(geom.n_edges, f"rectangle ({g.p}, {g.q})")
        base = _face_factors(w, geom) + [(tuple(geom.boundary_edges()), _boundary_array(g))]
        all_e = range(geom.n_edges)
        Z = float(_enumerate(base, sizes, all_e, []))
        if not Z > 0:
            raise ZeroPartitionError("vanishing partition function")
        Zh = float(_enumerate(base + [((e,), h) for e, h in hmap.items()], sizes, all_e, []))
        return Zh / Z
    if method != "contraction":
        raise ValueError(f"unknown method {method!r}")
    return _expectation_contraction(w, g, geom, hmap)


def _expectation_contraction(w, g, geom, hmap) -> float:
    sp = w.spaces
    p, q = geom.p, geom.q
    bnd = geom.boundary_edges()
    # Boundary observables multiply the boundary weight.
    gh = np.array(g.edge_array())
    for k, e in enumerate(bnd):
        if e in hmap:
            shape = [1] * gh.ndim
            shape[k] = gh.shape[k]
            gh = gh * hmap[e].reshape(shape)
    gh = GuillotineTensor(sp, g.shape, gh)

    face = w.tensor
    rows = []
    for j in range(q):
        row = face
        for i in range(1, p):
            e = geom.v(i, j)
            if e in hmap:
                row = m_we(row, _diag(sp, 0, 1, hmap[e]))
            row = m_we(row, face)
        rows.append(row)
    full = rows[0]
    for r in range(1, q):
        cut = [geom.h(i, r) for i in range(p)]
        if any(e in hmap for e in cut):
            vec = np.ones(1)
            for e in cut:
                vec = np.kron(vec, hmap.get(e, np.ones(sp.s1)))
            full = m_sn(full, _diag(sp, p, 0, vec))
        full = m_sn(full, rows[r])
    Z = pair_boundary(g, partition_tensor(w, p, q))
    if not Z > 0:
        raise ZeroPartitionError("vanishing partition function")
    return pair_boundary(gh, full) / Z


# ---------------------------------------------------------------------------
# Gauge transformations


def _positive(c, n, name) -> np.ndarray:
    c = np.asarray(c, dtype=np.float64)
    if c.shape != (n,):
        raise ShapeMismatchError(f"{name} needs {n} values, got shape {c.shape}")
    if np.any(~(c > 0)):
        raise ValueError(f"{name} must be strictly positive")
    return c


def gauge_transform(w: FaceWeight, c_h, c_v) -> FaceWeight:
    """Gauge-transformed weight ``W * c_h(y)/c_h(x) * c_v(z)/c_v(w)``."""
    c_h = _positive(c_h, w.spaces.s1, "c_h")
    c_v = _positive(c_v, w.spaces.s2, "c_v")
    f = np.einsum("x,y,w,z->xywz", 1 / c_h, c_h, 1 / c_v, c_v)
    return FaceWeight.from_array(w.array * f)


def gauge_compensated_boundary(g: GuillotineTensor, c_h, c_v) -> GuillotineTensor:
    """Boundary weight that undoes a gauge transform on the joint law.

    Multiplies ``g`` by ``prod_i c_h(x_i)/c_h(y_i) * prod_j c_v(w_j)/c_v(z_j)``,
    the inverse of the factor picked up by the partition tensor.
    """
    sp = g.spaces
    c_h = _positive(c_h, sp.s1, "c_h")
    c_v = _positive(c_v, sp.s2, "c_v")
    e = np.array(g.edge_array())
    p, q = g.p, g.q
    factors = [c_h] * p + [1 / c_h] * p + [c_v] * q + [1 / c_v] * q
    for k, f in enumerate(factors):
        shape = [1] * e.ndim
        shape[k] = f.size
        e = e * f.reshape(shape)
    return GuillotineTensor(sp, g.shape, e)


def tv_distance(p1: np.ndarray, p2: np.ndarray) -> float:
    """Total-variation distance ``0.5 * sum |p1 - p2|`` of two probability tables."""
    p1 = np.asarray(p1)
    p2 = np.asarray(p2)
    if p1.shape != p2.shape:
        raise ShapeMismatchError(f"tables differ in shape: {p1.shape} vs {p2.shape}")
    return 0.5 * float(np.abs(p1 - p2).sum())


def conditional_tv(law1: RectLaw, law2: RectLaw, atol: float = 1e-300) -> float:
    """Largest TV distance between interior laws conditioned on a boundary configuration.

    Boundary configurations with zero probability under either law are skipped.
    """
    if law1.geometry != law2.geometry:
        raise ShapeMismatchError("laws live on different rectangles")
    geom = law1.geometry
    bnd = geom.boundary_edges()
    interior = [e for e in range(geom.n_edges) if e not in set(bnd)]
    order = bnd + interior
    nb = int(np.prod([law1.prob.shape[e] for e in bnd]))

    def cond(law):
        m = np.transpose(law.prob, order).reshape(nb, -1)
        mass = m.sum(axis=1)
        return m, mass

    m1, a1 = cond(law1)
    m2, a2 = cond(law2)
    ok = (a1 > atol) & (a2 > atol)
    if not np.any(ok):
        return 0.0
    c1 = m1[ok] / a1[ok, None]
    c2 = m2[ok] / a2[ok, None]
    return float(0.5 * np.abs(c1 - c2).sum(axis=1).max())
