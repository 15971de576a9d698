# coding: utf-8

# # How often is f_q(a, b) squarefree?
#
# The local factor at a prime l is 1 - c_l / l^4, where c_l counts the
# residue pairs mod l^2 at which f_q vanishes. The truncated product is
# exact; the tail beyond the truncation is bounded heuristically.

from classrank.polydensity import check_lemma31, check_lemma32, empirical_density, euler_product, family_poly

p, q = 5, 7
print("f_q is squarefree as a polynomial:", check_lemma31(p, q))
print("local witnesses for l <= 50:", {l: check_lemma32(p, q, l) for l in (2, 3, 5, 7, 47)})

est = euler_product(p, q, 50)
print("c_l:", dict(est.c_values))
lo, hi = est.interval
print(f"partial product {float(est.partial_product):.6f}, heuristic interval [{float(lo):.6f}, {float(hi):.6f}]")

# Compare with a direct count on a box.

count = empirical_density(p, q, (range(1, 61), range(1, 61)))
print(f"empirical: {count.squarefree}/{count.exact} = {float(count.fraction):.4f}")
print("degree of f_q:", family_poly(p, q).total_degree)
