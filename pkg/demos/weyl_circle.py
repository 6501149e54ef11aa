"""Shrinking Weyl discs of the free scalar model.

At z = i every Hermitian boundary value xi puts G_N(xi) on the circle of
volume N, and the circles nest as N grows.  For the free model the radius
goes to zero: limit point case.
"""
import numpy as np

from blockweyl import disc, free_model, green_boundary, nesting_verdict

model = free_model()
z = 1j
rng = np.random.default_rng(0)

print(" N   center              radius")
for N in (1, 2, 4, 8, 16, 32):
    d = disc(model, N, z)
    c = d.center[0, 0]
    r = np.sqrt(d.radius_plus[0, 0].real * d.radius_minus[0, 0].real)
    print(f"{N:2d}   {c.real:+.6f}{c.imag:+.6f}i   {r:.3e}")

N = 4
d = disc(model, N, z)
off = [abs(abs(green_boundary(model, N, z, xi)[0, 0] - d.center[0, 0])
           - np.sqrt(d.radius_plus[0, 0].real * d.radius_minus[0, 0].real))
       for xi in rng.uniform(-5, 5, 20)]
print(f"\n20 boundary values at N={N}: largest distance from the circle {max(off):.1e}")
print("nesting N-1 vs N+1:", [nesting_verdict(model, n, z, rng) for n in range(2, 7)])
