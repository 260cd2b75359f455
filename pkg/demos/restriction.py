"""Boundary weights stay matrix products after summing out an annulus.

Start from a boundary weight on a 3x3 rectangle given by a matrix product
representation.  Summing the face weights of a surrounding layer gives a
boundary weight on the inner rectangle; ``restrict`` produces a
representation of it directly, with larger side spaces that absorb the
removed strips.  Here it is compared with explicit summation.
"""
import numpy as np

from guillotine import random_face_weight, restrict
from guillotine.lattice import marginal_boundary_weight
from guillotine.rope import RopeRep, eval_tensor
from guillotine.tensor import StateSpaces

rng = np.random.default_rng(3)
sp = StateSpaces(2, 2)
w = random_face_weight(sp, rng)
d = 2
rep = RopeRep(
    sp,
    rng.random((2, d, d)), rng.random((2, d, d)), rng.random((2, d, d)), rng.random((2, d, d)),
    rng.random((d, d)), rng.random((d, d)), rng.random((d, d)), rng.random((d, d)),
)
g = eval_tensor(rep, 3, 3)
print(f"outer representation: {rep}")
for off in [(1, 0, 1, 0), (0, 1, 0, 1), (1, 1, 0, 0), (0, 0, 0, 1)]:
    ref = marginal_boundary_weight(w, g, off)
    r = restrict(w, rep, off)
    got = eval_tensor(r, ref.p, ref.q)
    err = np.max(np.abs(got.data - ref.data) / ref.data)
    print(f"offsets {off} -> inner {ref.p}x{ref.q}, side dims {r.dims}, max rel err {err:.1e}")
