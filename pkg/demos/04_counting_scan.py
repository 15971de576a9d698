# coding: utf-8

# # Counting distinct discriminants
#
# A scan evaluates f_q on a box, groups equal values and lower-bounds the
# number of distinct squarefree values by ceil(S1^2 / S2). Campaigns repeat
# this for growing X and fit the growth exponent of the certified count.

from classrank.family import positive_region_bound
from classrank.scan import Box, growth_fit, run_campaign, run_scan

q = 7
A = positive_region_bound(5, q)
rep = run_scan(5, q, Box(1, A, 1, A))
print(f"q = {q}, box [1, {A}]^2")
print(f"S1 = {rep.S1}, S2 = {rep.S2}, distinct squarefree = {rep.distinct_squarefree}, bound = {rep.cs_lower_bound}")
print("certified:", rep.certified_discriminants())
print("collisions (first 4):", rep.collisions[:4])
print("tallies:", rep.tallies)

points = []
for e in range(6, 14):
    camp = run_campaign(5, 10.0**e)
    points.append((10.0**e, camp.count))
    print(f"X = 1e{e:<3} q <= {camp.q_values[-1]:<3} certified = {camp.count}")
fit = growth_fit(points)
print(f"fitted exponent {fit.fitted_exponent:.3f}, target {fit.target_exponent:.3f}")
