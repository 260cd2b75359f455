"""Perron-Frobenius vectors and eigen-equations for boundary representations.

A boundary representation is an eigen-element when removing a strip or a
corner of faces returns, after a linear map (the *morphism*), the same
side or corner data scaled by a geometric factor.  The verifiers below turn
each such statement into a numerical residual.

Half-strip operators
--------------------
Absorbing a one-face-deep strip into a side produces, for every state of
the new inner edge, a matrix on ``S_transverse x d``::

    O_S(y) = sum_{x,w,z} W(x, y, w, z) E_{w z} (x) A_S(x)     rows (w, .), cols (z, .)
    O_N(x) = sum_{y,w,z} W(x, y, w, z) E_{z w} (x) A_N(y)     rows (z, .), cols (w, .)
    O_W(z) = sum_{x,y,w} W(x, y, w, z) E_{y x} (x) A_W(w)     rows (y, .), cols (x, .)
    O_E(w) = sum_{x,y,z} W(x, y, w, z) E_{x y} (x) A_E(z)     rows (x, .), cols (y, .)

and the half-strip identity at width ``p`` reads
``phi(O(v_1)...O(v_p)) = lambda**p A(v_1)...A(v_p)`` with both products
taken in the side's reading order (South and East forward, North and West
reversed).

Corner identities
-----------------
For a corner matrix ``U`` and a family ``K`` of linear maps on the corner
space, indexed by the face edge opposite the horizontal side of the corner
(``y`` for South corners, ``x`` for North corners)::

    SW:  sum_{x,y,w} W A_W(w) K_y(U A_S(x))  = sigma lambda A_W(z) U
    SE:  sum_{x,y,z} W K_y(A_S(x) U) A_E(z)  = sigma lambda U A_E(w)
    NE:  sum_{x,y,z} W A_E(z) K_x(U A_N(y))  = sigma lambda A_E(w) U
    NW:  sum_{x,y,w} W K_x(A_N(y) U) A_W(w)  = sigma lambda U A_W(z)

for every value of the remaining free edge.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import ConvergenceError, ReducibleMatrixError, ShapeMismatchError
from .lattice import FaceWeight, oblique_face_weight, hv_face_weight, partition_tensor
from .rope import RopeRep, eval_tensor, from_factorized
from .tensor import pair_boundary

__all__ = [
    "PfPair",
    "pf_eigen",
    "is_irreducible",
    "HalfStripMorphism",
    "CornerMorphism",
    "EigenStructure",
    "Residual",
    "strip_operators",
    "verify_halfstrip_eigen",
    "verify_corner_eigen",
    "verify_fullplane_eigen",
    "verify_eigenstructure",
    "build_hv_eigenstructure",
    "build_oblique_eigenstructure",
]

SIDES = ("S", "N", "W", "E")
CORNERS = ("SW", "SE", "NE", "NW")
_CORNER_MATRIX = {"SW": "U_WS", "SE": "U_SE", "NE": "U_EN", "NW": "U_NW"}


# ---------------------------------------------------------------------------
# Perron-Frobenius


@dataclass(frozen=True)
class PfPair:
    """Dominant eigenvalue with left and right eigenvectors.

    ``v_right`` has unit Euclidean norm and ``<v_left, v_right> = 1``.
    """

    lam: float
    v_left: np.ndarray
    v_right: np.ndarray
    iterations: int = 0
    shifted: bool = False


def is_irreducible(a: np.ndarray) -> bool:
    """Strong connectivity of the directed graph ``i -> j`` when ``a[i, j] > 0``."""
    a = np.asarray(a)
    n = a.shape[0]
    adj = a > 0

    def reach(m):
        seen = {0}
        todo = deque([0])
        while todo:
            i = todo.popleft()
            for j in np.flatnonzero(m[i]):
                if j not in seen:
                    seen.add(int(j))
                    todo.append(int(j))
        return len(seen) == n

    return reach(adj) and reach(adj.T)


def _power(a: np.ndarray, max_iter: int, rtol: float):
    n = a.shape[0]
    v = np.full(n, 1 / np.sqrt(n))
    lam_old = np.inf
    for k in range(1, max_iter + 1):
        u = a @ v
        lam = float(np.linalg.norm(u))
        if lam == 0:
            raise ConvergenceError("power iteration collapsed to the zero vector")
        v = u / lam
        if abs(lam - lam_old) <= rtol * lam:
            res = float(np.max(np.abs(a @ v - lam * v)))
            if res <= 1e-11 * lam:
                return lam, v, k
        lam_old = lam
    raise ConvergenceError(f"power iteration did not converge in {max_iter} steps")


def _power_with_shift(a: np.ndarray, max_iter: int, rtol: float):
    try:
        lam, v, k = _power(a, max_iter, rtol)
        return lam, v, k, False
    except ConvergenceError:
        # Periodic matrices oscillate; adding a multiple of the identity keeps
        # the eigenvectors, makes the matrix primitive and restores convergence.
        c = float(a.max())
        lam, v, k2 = _power(a + c * np.eye(a.shape[0]), max_iter, rtol)
        return lam - c, v, k2, True


def pf_eigen(
    a, max_iter: int = 100_000, rtol: float = 1e-13, require_irreducible: bool = True
) -> PfPair:
    """Perron-Frobenius eigenvalue and eigenvectors of an irreducible nonnegative matrix.

    Power iteration from the uniform vector, stopped when successive
    eigenvalue estimates agree to ``rtol`` relative and the residual is
    below ``1e-11 * lambda``.  If the plain iteration fails (periodic
    matrices), it is rerun on ``a + max(a) * I``.

    With ``require_irreducible=False`` reducible input is accepted and the
    vectors are whatever the iteration from the uniform vector reaches
    (for the identity, the normalized uniform vector); they need not be
    strictly positive.

    Raises
    ------
    ReducibleMatrixError
        If ``a`` has a negative entry or is reducible.
    ConvergenceError
        If neither iteration converges.
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeMismatchError(f"expected a square matrix, got shape {a.shape}")
    if np.any(a < 0):
        raise ReducibleMatrixError("matrix has negative entries")
    if require_irreducible and not is_irreducible(a):
        raise ReducibleMatrixError("matrix is reducible; the Perron-Frobenius vector is not unique")
    lam, vr, k1, sh1 = _power_with_shift(a, max_iter, rtol)
    lam_l, vl, k2, sh2 = _power_with_shift(a.T, max_iter, rtol)
    vr = np.abs(vr)
    vr /= np.linalg.norm(vr)
    vl = np.abs(vl)
    vl /= vl @ vr
    return PfPair(0.5 * (lam + lam_l), vl, vr, k1 + k2, sh1 or sh2)


# ---------------------------------------------------------------------------
# Morphisms and structures


@dataclass(frozen=True)
class HalfStripMorphism:
    """Linear map from ``(s*d) x (s*d)`` matrices to ``d x d`` matrices.

    ``matrix`` has shape ``(d*d, (s*d)**2)`` and acts on row-major
    flattenings.
    """

    side: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}, got {self.side!r}")
        m = np.array(self.matrix, dtype=np.float64)
        if m.ndim != 2:
            raise ShapeMismatchError("morphism matrix must be two-dimensional")
        d = int(round(np.sqrt(m.shape[0])))
        sd = int(round(np.sqrt(m.shape[1])))
        if d * d != m.shape[0] or sd * sd != m.shape[1] or sd % d:
            raise ShapeMismatchError(f"morphism matrix has incompatible shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def d(self) -> int:
        return int(round(np.sqrt(self.matrix.shape[0])))

    def __call__(self, X: np.ndarray) -> np.ndarray:
        d = self.d
        return (self.matrix @ np.asarray(X).reshape(-1)).reshape(d, d)

    @classmethod
    def projector(cls, side: str, l, r, d: int = 1) -> "HalfStripMorphism":
        """``phi(X)[a, b] = sum_{i,j} l(i) X[(i, a), (j, b)] r(j)``."""
        l = np.asarray(l, dtype=np.float64)
        r = np.asarray(r, dtype=np.float64)
        eye = np.eye(d)
        m = np.einsum("i,ac,j,bd->abicjd", l, eye, r, eye)
        s = l.size
        return cls(side, m.reshape(d * d, (s * d) ** 2))


@dataclass(frozen=True)
class CornerMorphism:
    """Family of linear maps on a corner space, one per state of an inner edge.

    ``K`` has shape ``(s, n, n)`` with ``n = d_a * d_b``; ``K[v]`` acts on
    the row-major flattening of a ``d_a x d_b`` matrix.
    """

    corner: str
    K: np.ndarray

    def __post_init__(self):
        if self.corner not in CORNERS:
            raise ValueError(f"corner must be one of {CORNERS}, got {self.corner!r}")
        k = np.array(self.K, dtype=np.float64)
        if k.ndim != 3 or k.shape[1] != k.shape[2]:
            raise ShapeMismatchError(f"K must have shape (s, n, n), got {k.shape}")
        k.setflags(write=False)
        object.__setattr__(self, "K", k)

    def apply(self, v: int, M: np.ndarray) -> np.ndarray:
        M = np.asarray(M)
        if M.size != self.K.shape[1]:
            raise ShapeMismatchError(
                f"corner map acts on {self.K.shape[1]} entries, matrix has {M.size}"
            )
        return (self.K[v] @ M.reshape(-1)).reshape(M.shape)

    @classmethod
    def scalar(cls, corner: str, c, n: int) -> "CornerMorphism":
        """``K_v = c(v) * identity`` on an ``n``-dimensional corner space."""
        c = np.asarray(c, dtype=np.float64)
        return cls(corner, c[:, None, None] * np.eye(n)[None])


@dataclass(frozen=True)
class EigenStructure:
    """Eigenvalues, representation and morphisms of an invariant boundary family.

    The partition function on a ``p x q`` rectangle is
    ``kappa * sigma_S**p * sigma_N**p * sigma_W**q * sigma_E**q * lam**(p*q)``.
    ``corner_sigma`` holds the scalar of each corner identity.
    """

    lam: float
    sigma: dict
    kappa: float
    rep: RopeRep
    halfstrip: dict = field(default_factory=dict)
    corner: dict = field(default_factory=dict)
    corner_sigma: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.lam > 0:
            raise ValueError("lambda must be positive")
        if set(self.sigma) != set(SIDES) or any(not v > 0 for v in self.sigma.values()):
            raise ValueError("sigma needs a positive value for each of S, N, W, E")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")

    def closed_form(self, p: int, q: int) -> float:
        s = self.sigma
        return float(
            self.kappa
            * (s["S"] * s["N"]) ** p
            * (s["W"] * s["E"]) ** q
            * self.lam ** (p * q)
        )


@dataclass(frozen=True)
class Residual:
    """Largest relative residual, with a breakdown by case."""

    max: float
    cases: dict

    def passed(self, tol: float) -> bool:
        return bool(self.max <= tol)


# ---------------------------------------------------------------------------
# Half-strip identities


def strip_operators(w: FaceWeight, side: str, A: np.ndarray) -> np.ndarray:
    """Depth-one strip operators ``O(v)`` for a side family ``A``.

    Returns shape ``(s_inner, s_t * d, s_t * d)`` where ``s_t`` is the state
    count of the transverse edges.
    """
    W = w.array
    A = np.asarray(A, dtype=np.float64)
    s1, s2 = w.spaces.s1, w.spaces.s2
    d = A.shape[1]
    expect = s1 if side in "SN" else s2
    if A.ndim != 3 or A.shape[0] != expect or A.shape[1] != A.shape[2]:
        raise ShapeMismatchError(f"side family for {side} must be ({expect}, d, d), got {A.shape}")
    if side == "S":
        O = np.einsum("xywz,xab->ywazb", W, A).reshape(s1, s2 * d, s2 * d)
    elif side == "N":
        O = np.einsum("xywz,yab->xzawb", W, A).reshape(s1, s2 * d, s2 * d)
    elif side == "W":
        O = np.einsum("xywz,wab->zyaxb", W, A).reshape(s2, s1 * d, s1 * d)
    elif side == "E":
        O = np.einsum("xywz,zab->wxayb", W, A).reshape(s2, s1 * d, s1 * d)
    else:
        raise ValueError(f"side must be one of {SIDES}, got {side!r}")
    return O


def _ordered(mats, seq, reverse):
    out = None
    for v in (reversed(seq) if reverse else seq):
        out = mats[v] if out is None else out @ mats[v]
    return out


def verify_halfstrip_eigen(
    w: FaceWeight,
    side: str,
    A,
    phi: HalfStripMorphism,
    lambda1: float,
    p_max: int = 2,
) -> Residual:
    """Check ``phi(O(v_1)...O(v_p)) = lambda1**p A(v_1)...A(v_p)`` for ``p <= p_max``.

    Residuals are measured in the max norm relative to
    ``lambda1**p * max|A(v_1)...A(v_p)|`` and maximized over all
    inner-edge sequences.
    """
    A = np.asarray(A, dtype=np.float64)
    if phi.side != side:
        raise ValueError(f"morphism is for side {phi.side}, not {side}")
    if phi.d != A.shape[1]:
        raise ShapeMismatchError(f"morphism targets dimension {phi.d}, side has {A.shape[1]}")
    O = strip_operators(w, side, A)
    if phi.matrix.shape[1] != O.shape[1] ** 2:
        raise ShapeMismatchError("morphism domain does not match the strip operators")
    reverse = side in ("N", "W")
    cases = {}
    for p in range(1, p_max + 1):
        worst = 0.0
        for seq in itertools.product(range(A.shape[0]), repeat=p):
            lhs = phi(_ordered(O, seq, reverse))
            prod = _ordered(A, seq, reverse)
            rhs = lambda1**p * prod
            scale = max(float(np.max(np.abs(rhs))), np.finfo(float).tiny)
            worst = max(worst, float(np.max(np.abs(lhs - rhs))) / scale)
        cases[p] = worst
    return Residual(max(cases.values()), cases)


# ---------------------------------------------------------------------------
# Corner identities


def verify_corner_eigen(
    w: FaceWeight,
    corner: str,
    A_h,
    A_v,
    U,
    K: CornerMorphism,
    lambda1: float,
    sigma: float,
) -> Residual:
    """Check the corner identity for every value of the free edge.

    Parameters
    ----------
    A_h : ndarray
        Horizontal side family: ``A_S`` for South corners, ``A_N`` for North.
    A_v : ndarray
        Vertical side family: ``A_W`` for West corners, ``A_E`` for East.
    U : ndarray
        Corner matrix (``U_WS``, ``U_SE``, ``U_EN`` or ``U_NW``).
    """
    if K.corner != corner:
        raise ValueError(f"morphism is for corner {K.corner}, not {corner}")
    W = w.array
    A_h = np.asarray(A_h, dtype=np.float64)
    A_v = np.asarray(A_v, dtype=np.float64)
    U = np.asarray(U, dtype=np.float64)
    s1, s2 = w.spaces.s1, w.spaces.s2
    if A_h.shape[0] != s1 or A_v.shape[0] != s2:
        raise ShapeMismatchError("side families do not match the state spaces")
    cases = {}
    for free in range(s2):
        lhs = np.zeros_like(U)
        for x, y, e in itertools.product(range(s1), range(s1), range(s2)):
            if corner == "SW":
                c = W[x, y, e, free]
                if c:
                    lhs += c * (A_v[e] @ K.apply(y, U @ A_h[x]))
            elif corner == "SE":
                c = W[x, y, free, e]
                if c:
                    lhs += c * (K.apply(y, A_h[x] @ U) @ A_v[e])
            elif corner == "NE":
                c = W[x, y, free, e]
                if c:
                    lhs += c * (A_v[e] @ K.apply(x, U @ A_h[y]))
            elif corner == "NW":
                c = W[x, y, e, free]
                if c:
                    lhs += c * (K.apply(x, A_h[y] @ U) @ A_v[e])
            else:
                raise ValueError(f"corner must be one of {CORNERS}, got {corner!r}")
        if corner in ("SW", "NE"):
            rhs = sigma * lambda1 * (A_v[free] @ U)
        else:
            rhs = sigma * lambda1 * (U @ A_v[free])
        cases[free] = (lhs, rhs)
    scale = max(max(float(np.max(np.abs(r))) for _, r in cases.values()), np.finfo(float).tiny)
    res = {k: float(np.max(np.abs(l - r))) / scale for k, (l, r) in cases.items()}
    return Residual(max(res.values()), res)


# ---------------------------------------------------------------------------
# Full plane


def verify_fullplane_eigen(
    es: EigenStructure, w: FaceWeight, p_max: int = 3, q_max: int = 3
) -> Residual:
    """Compare ``sum_c g(c) Z(c)`` with the closed form on a grid of shapes."""
    cases = {}
    for p in range(1, p_max + 1):
        for q in range(1, q_max + 1):
            z = pair_boundary(eval_tensor(es.rep, p, q), partition_tensor(w, p, q))
            ref = es.closed_form(p, q)
            cases[(p, q)] = abs(z - ref) / abs(ref)
    return Residual(max(cases.values()), cases)


def _side_family(rep: RopeRep, side: str) -> np.ndarray:
    return rep.side(side)


def verify_eigenstructure(
    es: EigenStructure, w: FaceWeight, p_max: int = 2, grid: tuple = (3, 3)
) -> dict:
    """Run every available half-strip, corner and full-plane check.

    Returns a dict keyed by ``"halfstrip:S"``, ``"corner:SW"``, ...,
    ``"fullplane"`` with :class:`Residual` values.
    """
    out = {}
    for side, phi in es.halfstrip.items():
        out[f"halfstrip:{side}"] = verify_halfstrip_eigen(
            w, side, es.rep.side(side), phi, es.lam, p_max
        )
    for corner, K in es.corner.items():
        h = "S" if corner[0] == "S" else "N"
        v = corner[1]
        out[f"corner:{corner}"] = verify_corner_eigen(
            w,
            corner,
            es.rep.side(h),
            es.rep.side(v),
            getattr(es.rep, _CORNER_MATRIX[corner]),
            K,
            es.lam,
            es.corner_sigma.get(corner, 1.0),
        )
    out["fullplane"] = verify_fullplane_eigen(es, w, *grid)
    return out


# ---------------------------------------------------------------------------
# Solved models


def _measured_kappa(rep: RopeRep, w: FaceWeight, lam: float, sigma: dict) -> float:
    z11 = pair_boundary(eval_tensor(rep, 1, 1), partition_tensor(w, 1, 1))
    return z11 / (lam * sigma["S"] * sigma["N"] * sigma["W"] * sigma["E"])


def _scalar_corners(rep: RopeRep) -> dict:
    # For one-dimensional factorized data the corner map multiplies by the
    # opposite side's weight on the inner edge: A_N for South corners, A_S
    # for North corners.
    return {
        "SW": CornerMorphism.scalar("SW", rep.A_N[:, 0, 0], 1),
        "SE": CornerMorphism.scalar("SE", rep.A_N[:, 0, 0], 1),
        "NE": CornerMorphism.scalar("NE", rep.A_S[:, 0, 0], 1),
        "NW": CornerMorphism.scalar("NW", rep.A_S[:, 0, 0], 1),
    }


def build_hv_eigenstructure(A, B) -> tuple[EigenStructure, FaceWeight]:
    """Eigen-structure of ``W = A[x_S, x_N] B[x_W, x_E]``.

    With Perron-Frobenius data ``(alpha, a_l, a_r)`` of ``A`` and
    ``(beta, b_l, b_r)`` of ``B``, the boundary family is factorized with
    ``u_S = a_l``, ``u_N = a_r``, ``u_W = b_l``, ``u_E = b_r``,
    ``lambda = alpha * beta`` and all side eigenvalues equal to one.

    Returns
    -------
    (EigenStructure, FaceWeight)
    """
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    pa, pb = pf_eigen(A), pf_eigen(B)
    w = hv_face_weight(A, B)
    rep = from_factorized(pa.v_left, pa.v_right, pb.v_left, pb.v_right)
    lam = pa.lam * pb.lam
    sigma = dict.fromkeys(SIDES, 1.0)
    halfstrip = {
        "S": HalfStripMorphism.projector("S", pb.v_left, pb.v_right),
        "N": HalfStripMorphism.projector("N", pb.v_right, pb.v_left),
        "W": HalfStripMorphism.projector("W", pa.v_right, pa.v_left),
        "E": HalfStripMorphism.projector("E", pa.v_left, pa.v_right),
    }
    es = EigenStructure(
        lam=lam,
        sigma=sigma,
        kappa=_measured_kappa(rep, w, lam, sigma),
        rep=rep,
        halfstrip=halfstrip,
        corner=_scalar_corners(rep),
        corner_sigma=dict.fromkeys(CORNERS, 1.0),
    )
    return es, w


@dataclass(frozen=True)
class ObliqueData:
    """Perron-Frobenius data of the two cyclic products of the oblique model."""

    Lambda: float
    vL1: np.ndarray
    vR1: np.ndarray
    vL2: np.ndarray
    vR2: np.ndarray
    s1: float
    s2: float


def oblique_pf_data(C, D) -> ObliqueData:
    """PF vectors of ``C D`` (on ``S1``) and ``D C`` (on ``S2``) and the scalars
    ``s1``, ``s2`` with ``D vR1 = s1 vR2`` and ``C vR2 = s2 vR1``."""
    C = np.asarray(C, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    p1 = pf_eigen(C @ D)
    p2 = pf_eigen(D @ C)
    s1 = float(np.linalg.norm(D @ p1.v_right))
    s2 = float(np.linalg.norm(C @ p2.v_right))
    return ObliqueData(0.5 * (p1.lam + p2.lam), p1.v_left, p1.v_right, p2.v_left, p2.v_right, s1, s2)


def build_oblique_eigenstructure(C, D) -> tuple[EigenStructure, FaceWeight]:
    """Eigen-structure of ``W = C[x_S, x_W] D[x_E, x_N]``.

    ``C`` has shape ``(s1, s2)`` and ``D`` shape ``(s2, s1)``.  The boundary
    family is factorized with ``u_S = vL1``, ``u_N = vR1``, ``u_W = vR2``,
    ``u_E = vL2`` where ``1`` refers to ``C D`` and ``2`` to ``D C``; the bulk
    eigenvalue is the common Perron-Frobenius eigenvalue of both products.
    """
    C = np.asarray(C, dtype=np.float64)
    D = np.asarray(D, dtype=np.float64)
    w = oblique_face_weight(C, D)
    od = oblique_pf_data(C, D)
    rep = from_factorized(od.vL1, od.vR1, od.vR2, od.vL2)
    lam = od.Lambda
    sigma = dict.fromkeys(SIDES, 1.0)
    halfstrip = {
        "S": HalfStripMorphism.projector("S", od.vR2, od.vL2),
        "N": HalfStripMorphism.projector("N", od.vL2, od.vR2),
        "W": HalfStripMorphism.projector("W", od.vR1, od.vL1),
        "E": HalfStripMorphism.projector("E", od.vL1, od.vR1),
    }
    es = EigenStructure(
        lam=lam,
        sigma=sigma,
        kappa=_measured_kappa(rep, w, lam, sigma),
        rep=rep,
        halfstrip=halfstrip,
        corner=_scalar_corners(rep),
        corner_sigma=dict.fromkeys(CORNERS, 1.0),
    )
    return es, w
