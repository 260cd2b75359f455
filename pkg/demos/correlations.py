"""Correlations along a horizontal line.

For an invariant boundary family, the law of consecutive horizontal edges
is a product of the paired side operators ``A_S(x) (x) A_N(x)^T`` closed by
two corner vectors.  The spectrum of their sum ``C_SN`` controls how fast
correlations decay.  The law is compared with exhaustive enumeration on a
5x2 rectangle, which takes a few seconds.
"""
import numpy as np

from guillotine import (
    BoundaryFamily,
    build_oblique_eigenstructure,
    correlation_length,
    marginal_segment_law,
    one_point,
    two_point,
)
from guillotine.lattice import RectGeometry, edge_marginal, set_enumeration_bound
from guillotine.rope import RopeRep, eval_tensor

rng = np.random.default_rng(5)
es, w = build_oblique_eigenstructure(0.2 + rng.random((2, 2)), 0.2 + rng.random((2, 2)))

L = 5
law = marginal_segment_law(es, w, L)
geom = RectGeometry(L, 2)
old = set_enumeration_bound(geom.n_edges)
try:
    bf = edge_marginal(w, BoundaryFamily.from_eigenstructure(es).weight(L, 2), [geom.h(i, 1) for i in range(L)])
finally:
    set_enumeration_bound(old)
print(f"segment of {L} edges: max rel deviation from enumeration {np.max(np.abs(law - bf) / bf):.1e}")

for n in (2, 3, 6):
    tp = two_point(es, w, 0, 0, n)
    print(f"L = {n}: P(X_1 = 0, X_L = 0) = {tp:.12f}, connected part {tp - one_point(es, w, 0) ** 2:.1e}")
cl = correlation_length(es)
print(f"correlation length: {cl.length} ({cl.note})")

print("\nA two-dimensional representation has a genuine spectral gap:")
d = 2
rep = RopeRep(
    w.spaces,
    rng.random((2, d, d)), rng.random((2, d, d)), rng.random((2, d, d)), rng.random((2, d, d)),
    rng.random((d, d)), rng.random((d, d)), rng.random((d, d)), rng.random((d, d)),
)
cl = correlation_length(rep)
print(f"  |lambda_1| = {cl.lambda1:.6f}, |lambda_2| = {cl.lambda2:.6f}, length = {cl.length:.6f}")
