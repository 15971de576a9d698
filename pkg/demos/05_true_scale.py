# coding: utf-8

# # Certification at realistic size
#
# The strict window for a is empty until q = 139, and the first point that
# passes every strict hypothesis for p = 5 appears at q = 1579, where D has
# 39 digits. No class group can be enumerated there, but the certificate
# only needs a handful of compositions.

import time

from classrank.family import strict_window
from classrank.number_core import primes_up_to
from classrank.scan import run_scan, strict_window_box

first = next(q for q in primes_up_to(10**4) if strict_window(5, q))
print("first nonempty strict window: q =", first, list(strict_window(5, first)))

for q in primes_up_to(5000):
    if not strict_window(5, q):
        continue
    rep = run_scan(5, q, strict_window_box(5, q), mode="strict")
    if rep.certificates:
        break
cert = rep.certificates[0]
print("q =", q, "window", list(strict_window(5, q)))
print("D =", -cert.discriminant)
t0 = time.perf_counter()
ok = cert.replay().valid
print(f"valid = {ok}, replay took {(time.perf_counter() - t0) * 1e3:.2f} ms")
