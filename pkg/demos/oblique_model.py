"""Chains running along the lattice diagonals.

The face weight ``W = C[x_S, x_W] D[x_E, x_N]`` links the South edge of a
face to its West edge and the East edge to the North edge, so information
flows diagonally.  The bulk eigenvalue is the common Perron-Frobenius
eigenvalue ``Lambda`` of ``C D`` and ``D C``, and the scalars ``s1``, ``s2``
defined by ``D vR1 = s1 vR2`` and ``C vR2 = s2 vR1`` multiply to it.
"""
import numpy as np

from guillotine import (
    BoundaryFamily,
    build_oblique_eigenstructure,
    check_consistency,
    oblique_pf_data,
)
from guillotine.lattice import partition_tensor
from guillotine.rope import eval_tensor
from guillotine.tensor import pair_boundary

rng = np.random.default_rng(11)
C = 0.2 + rng.random((2, 3))
D = 0.2 + rng.random((3, 2))
od = oblique_pf_data(C, D)
print(f"Lambda = {od.Lambda:.15f}")
print(f"s1*s2  = {od.s1 * od.s2:.15f}")

es, w = build_oblique_eigenstructure(C, D)
print("\nPartition function against Lambda**(p q):")
for p, q in [(1, 1), (2, 1), (2, 2), (3, 2)]:
    z = pair_boundary(eval_tensor(es.rep, p, q), partition_tensor(w, p, q))
    print(f"  {p} x {q}: Z = {z:.12e}   ratio = {z / od.Lambda ** (p * q):.15f}")

fam = BoundaryFamily.from_eigenstructure(es)
print("\nKolmogorov consistency, 2x2 law marginalized onto inner rectangles:")
for off in [(1, 0, 1, 0), (0, 1, 0, 1), (0, 0, 1, 0)]:
    print(f"  offsets {off}: TV = {check_consistency(w, fam, (2, 2), off):.2e}")
print(f"  flat boundary weight, offsets (1, 0, 1, 0): TV = "
      f"{check_consistency(w, BoundaryFamily.uniform(w.spaces), (2, 2), (1, 0, 1, 0)):.2e}")
