# coding: utf-8

# # A (Z/5)^2 inside a class group, certified by composition alone
#
# For p = 5, q = 5 and (a, b) = (7, 5) the family value is D = 38713219.
# The two witness forms (Yj, Xj, Yj^4) have discriminant -D, their 5th
# powers are principal, and no nontrivial combination of them is principal.

import json

from classrank.family import check_hypotheses, make_point, witness_forms
from classrank.quadforms import Rank2Certificate, enumerate_class_group, verify_rank2

pt = make_point(5, 5, 7, 5)
print("D =", pt.D)
print("X1^2 - 4 Y1^5 =", pt.X1**2 - 4 * pt.Y1**5)
print(check_hypotheses(pt))

f1, f2 = witness_forms(pt)
cert = verify_rank2(5, f1, f2)
for relation, required, observed in cert.transcript:
    print(f"  {relation:<24} required={required!s:<5} observed={observed}")
print("valid:", cert.valid)

# The certificate is plain data and replays anywhere.

stored = json.dumps(cert.to_dict())
print("replayed:", Rank2Certificate.from_dict(json.loads(stored)).replay().valid)

# D is small enough here to compute the whole class group and compare.

G = enumerate_class_group(-pt.D, oracle_bound=10**8)
print("h =", G.class_number, "divisors =", G.elementary_divisors, "5-rank =", G.p_rank(5))
