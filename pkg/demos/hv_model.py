"""Independent horizontal and vertical chains.

The face weight ``W = A[x_S, x_N] B[x_W, x_E]`` couples each horizontal edge
only to the one above it and each vertical edge only to the one to its
right.  Its eigen-structure is built from Perron-Frobenius data of ``A`` and
``B``, and the boundary-weighted partition function is exactly
``(alpha beta)**(p q)`` on every rectangle.
"""
import math

import numpy as np

from guillotine import (
    BoundaryFamily,
    build_hv_eigenstructure,
    free_energy,
    verify_eigenstructure,
)

rng = np.random.default_rng(7)
A = 0.2 + rng.random((2, 2))
B = 0.2 + rng.random((2, 2))
es, w = build_hv_eigenstructure(A, B)

alpha = max(np.linalg.eigvals(A).real)
beta = max(np.linalg.eigvals(B).real)
print(f"alpha * beta from numpy : {alpha * beta:.15f}")
print(f"bulk eigenvalue lambda  : {es.lam:.15f}")
print(f"corner constant kappa   : {es.kappa:.15f}")

print("\nResiduals of the eigen identities:")
for key, res in verify_eigenstructure(es, w, p_max=3).items():
    print(f"  {key:14s} {res.max:.2e}")

print("\nFree energy per face on growing rectangles:")
fam = BoundaryFamily.from_eigenstructure(es)
for fe in free_energy(w, fam, [(1, 1), (2, 3), (3, 3), (4, 4)]):
    print(f"  {fe.p} x {fe.q}: (1/pq) log Z = {fe.density:.15f}   log(alpha beta) = {math.log(alpha * beta):.15f}")

print("\nWith a flat boundary weight the density only approaches the bulk value:")
for fe in free_energy(w, BoundaryFamily.uniform(w.spaces), [(1, 1), (2, 2), (4, 4)]):
    print(f"  {fe.p} x {fe.q}: {fe.density:.6f}")
