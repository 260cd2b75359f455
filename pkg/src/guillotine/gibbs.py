"""Consistent boundary families, free energies and correlations along a line.

A :class:`BoundaryFamily` produces a boundary weight for every rectangle
from a single representation.  For an eigen-structure the laws built on
nested rectangles agree (Kolmogorov consistency), the partition function
has a closed form and the law of consecutive horizontal edges on a line is
a matrix product with the paired kernel

    A_SN(x) = A_S(x) (x) A_N(x)^T,        C_SN = sum_x A_SN(x).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .eigen import EigenStructure, pf_eigen
from .errors import ShapeMismatchError
from .lattice import FaceWeight, RectGeometry, exact_law, partition_tensor, tv_distance
from .rope import RopeRep, eval_tensor, from_factorized, side_products
from .tensor import GuillotineTensor, StateSpaces, check_entries, pair_boundary

__all__ = [
    "BoundaryFamily",
    "check_consistency",
    "partition_closed_form",
    "FreeEnergy",
    "free_energy",
    "CorrelationKernel",
    "correlation_kernel",
    "marginal_segment_law",
    "one_point",
    "two_point",
    "CorrelationLength",
    "correlation_length",
    "second_eigenvalue_modulus",
]


class BoundaryFamily:
    """Boundary weights ``g_{p,q}`` generated by one representation."""

    def __init__(self, rep: RopeRep):
        self.rep = rep

    @classmethod
    def from_eigenstructure(cls, es: EigenStructure) -> "BoundaryFamily":
        return cls(es.rep)

    @classmethod
    def uniform(cls, spaces: StateSpaces) -> "BoundaryFamily":
        """The family ``g = 1`` on every rectangle."""
        return cls(
            from_factorized(
                np.ones(spaces.s1), np.ones(spaces.s1), np.ones(spaces.s2), np.ones(spaces.s2)
            )
        )

    @property
    def spaces(self) -> StateSpaces:
        return self.rep.spaces

    def weight(self, p: int, q: int) -> GuillotineTensor:
        g = eval_tensor(self.rep, p, q)
        if np.any(g.data < 0):
            raise ValueError(f"boundary family takes negative values on shape ({p}, {q})")
        return g


def check_consistency(
    w: FaceWeight, fam: BoundaryFamily, outer: Sequence[int], offsets: Sequence[int]
) -> float:
    """TV distance between the inner marginal of the outer law and the inner law.

    Both laws are exact: the outer one uses ``g_{p,q}``, the inner one
    ``g_{p',q'}`` from the same family.
    """
    p, q = outer
    geom = RectGeometry(p, q)
    inner, _ = geom.inner(offsets)
    law_out = exact_law(w, fam.weight(p, q))
    law_in = exact_law(w, fam.weight(inner.p, inner.q))
    return tv_distance(law_out.inner_marginal(offsets), law_in.prob)


def partition_closed_form(es: EigenStructure, p: int, q: int) -> float:
    """``kappa * (sigma_S sigma_N)**p * (sigma_W sigma_E)**q * lambda**(p q)``."""
    if p < 1 or q < 1:
        raise ShapeMismatchError(f"closed form needs p, q >= 1, got ({p}, {q})")
    return es.closed_form(p, q)


@dataclass(frozen=True)
class FreeEnergy:
    """Free-energy density on one rectangle.

    ``corrected`` removes side and corner contributions and is ``None`` when
    no eigen-structure is available.
    """

    p: int
    q: int
    log_Z: float
    density: float
    corrected: float | None


def free_energy(
    w: FaceWeight, fam: BoundaryFamily | EigenStructure, sizes: Sequence[tuple]
) -> list:
    """``(1 / p q) log Z`` for each size, with ``Z = sum_c g_{p,q}(c) Z_R(c)``."""
    es = fam if isinstance(fam, EigenStructure) else None
    rep = es.rep if es is not None else fam.rep
    out = []
    for p, q in sizes:
        Z = pair_boundary(eval_tensor(rep, p, q), partition_tensor(w, p, q))
        if not Z > 0:
            raise ValueError(f"nonpositive partition function on ({p}, {q})")
        logZ = math.log(Z)
        corrected = None
        if es is not None:
            s = es.sigma
            corrected = (
                logZ
                - p * math.log(s["S"] * s["N"])
                - q * math.log(s["W"] * s["E"])
                - math.log(es.kappa)
            ) / (p * q)
        out.append(FreeEnergy(p, q, logZ, logZ / (p * q), corrected))
    return out


@dataclass(frozen=True)
class CorrelationKernel:
    """Paired side operators for horizontal segments.

    ``A_SN[x]`` acts on ``R^{d_S} (x) R^{d_N}``; ``u_W`` and ``u_E`` close the
    product at the two ends of the segment.
    """

    u_W: np.ndarray
    u_E: np.ndarray
    A_SN: np.ndarray
    C_SN: np.ndarray


def correlation_kernel(es: EigenStructure | RopeRep) -> CorrelationKernel:
    """Build the kernel from the side and corner data of a representation.

    With ``M = U_SE U_EN`` and ``Q = U_NW U_WS``,
    ``Tr[U_WS P_S U_SE U_EN P_N U_NW] = <u_W, A_SN(x_1)...A_SN(x_L) u_E>``
    where ``u_W = vec(Q^T)`` and ``u_E = vec(M)``.
    """
    rep = es.rep if isinstance(es, EigenStructure) else es
    A_SN = np.stack([np.kron(a, b.T) for a, b in zip(rep.A_S, rep.A_N)])
    u_W = (rep.U_NW @ rep.U_WS).T.reshape(-1)
    u_E = (rep.U_SE @ rep.U_EN).reshape(-1)
    return CorrelationKernel(u_W, u_E, A_SN, A_SN.sum(axis=0))


def _norm(es: EigenStructure, L: int) -> float:
    return es.kappa * (es.sigma["S"] * es.sigma["N"]) ** L


def marginal_segment_law(es: EigenStructure, w: FaceWeight, L: int) -> np.ndarray:
    """Law of ``L`` consecutive horizontal edges on a line.

    Returns an array with ``L`` axes of size ``s1``.
    """
    if w.spaces != es.rep.spaces:
        raise ShapeMismatchError("face weight and eigen-structure use different state spaces")
    if L < 1:
        raise ValueError("segment length must be >= 1")
    s1 = w.spaces.s1
    check_entries(s1**L, "segment law")
    k = correlation_kernel(es)
    P = side_products(k.A_SN, L)
    vals = np.einsum("a,xab,b->x", k.u_W, P, k.u_E)
    return (vals / _norm(es, L)).reshape((s1,) * L)


def one_point(es: EigenStructure, w: FaceWeight, u: int) -> float:
    """``P(X_e = u)`` for a single horizontal edge."""
    k = correlation_kernel(es)
    return float(k.u_W @ k.A_SN[u] @ k.u_E) / _norm(es, 1)


def two_point(es: EigenStructure, w: FaceWeight, u: int, v: int, L: int) -> float:
    """``P(X_1 = u, X_L = v)`` for the two ends of a segment of ``L`` edges."""
    if L < 2:
        raise ValueError("two-point function needs L >= 2")
    if w.spaces != es.rep.spaces:
        raise ShapeMismatchError("face weight and eigen-structure use different state spaces")
    k = correlation_kernel(es)
    mid = np.linalg.matrix_power(k.C_SN, L - 2)
    return float(k.u_W @ k.A_SN[u] @ mid @ k.A_SN[v] @ k.u_E) / _norm(es, L)


@dataclass(frozen=True)
class CorrelationLength:
    """Spectral data of ``C_SN``; ``length`` is ``inf`` without a gap."""

    length: float
    lambda1: float
    lambda2: float
    note: str = ""


def second_eigenvalue_modulus(
    M: np.ndarray, lam1: float, v_left: np.ndarray, v_right: np.ndarray,
    max_iter: int = 10_000, rtol: float = 1e-13,
) -> float:
    """Largest eigenvalue modulus of ``M`` after removing the dominant pair.

    Orthogonal iteration with a two-dimensional block on
    ``M - lam1 v_right v_left^T``; the Ritz values of the block capture a
    complex-conjugate pair as well as a single real eigenvalue.
    """
    n = M.shape[0]
    if n == 1:
        return 0.0
    D = M - lam1 * np.outer(v_right, v_left) / float(v_left @ v_right)
    k = min(2, n)
    Q = np.linalg.qr(np.random.default_rng(0).standard_normal((n, k)))[0]
    prev = None
    for _ in range(max_iter):
        Z = D @ Q
        if not np.any(Z):
            return 0.0
        Q, _ = np.linalg.qr(Z)
        rho = float(np.max(np.abs(np.linalg.eigvals(Q.T @ D @ Q))))
        if prev is not None and abs(rho - prev) <= rtol * max(rho, lam1 * 1e-300):
            return rho
        prev = rho
    return rho


def correlation_length(es: EigenStructure | RopeRep) -> CorrelationLength:
    """``-1 / log(|lambda_2| / lambda_1)`` for the spectrum of ``C_SN``.

    A one-dimensional kernel has no second eigenvalue and is reported as
    ``inf`` with the note ``"degenerate: dimension 1"``; a vanishing
    ``lambda_2`` gives length zero.
    """
    C = correlation_kernel(es).C_SN
    if C.shape[0] == 1:
        return CorrelationLength(math.inf, float(C[0, 0]), 0.0, "degenerate: dimension 1")
    pf = pf_eigen(C, require_irreducible=False)
    lam2 = second_eigenvalue_modulus(C, pf.lam, pf.v_left, pf.v_right)
    if lam2 >= pf.lam * (1 - 1e-10):
        return CorrelationLength(math.inf, pf.lam, lam2, "no spectral gap")
    if lam2 == 0:
        return CorrelationLength(0.0, pf.lam, 0.0)
    return CorrelationLength(-1.0 / math.log(lam2 / pf.lam), pf.lam, lam2)
