# coding: utf-8

# # Class groups of imaginary quadratic discriminants
#
# Every positive definite binary quadratic form (a, b, c) is equivalent to
# exactly one reduced form. Listing the reduced forms gives the class number;
# composing them gives the group structure.

from classrank.quadforms import QuadForm, compose, enumerate_class_group, power, reduce

# Reduction picks the canonical representative of a class.

f = QuadForm(3, 5, 81)
print(f, "->", reduce(f))

# The smallest example with a nontrivial group: discriminant -23 has three classes.

g = QuadForm(2, 1, 3)
print("g^2 =", compose(g, g), " g^3 =", power(g, 3))

# enumerate_class_group returns the elementary divisors, one generator per
# cyclic factor, and coordinates of every reduced form.

for disc in (-3, -23, -420, -3299, -11199):
    G = enumerate_class_group(disc)
    ranks = {p: G.p_rank(p) for p in (2, 3, 5)}
    print(f"{disc:>7}  h = {G.class_number:<4} divisors = {G.elementary_divisors!s:<12} ranks = {ranks}")

# The coordinates turn composition into vector addition.

G = enumerate_class_group(-11199)
x, y = G.generators
vx, vy = G.coordinates[x], G.coordinates[y]
print("coords of x*y:", G.coordinates[compose(x, y)], "=", tuple((a + b) % d for a, b, d in zip(vx, vy, G.elementary_divisors)))
