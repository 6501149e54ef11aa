"""Finite-volume matrix spectral measures.

The (1,1) block of the resolvent of H^N(0, xi) is a finite sum of matrix
weights over the eigenvalues; its total mass is the identity.
"""
import numpy as np

from blockweyl import green_boundary, random_model, spectral_measure

rng = np.random.default_rng(4)
model = random_model(rng, 2, 12)
xi = np.diag([0.5, -0.25])
mu = spectral_measure(model, 10, xi)

print(f"{len(mu.energies)} atoms, total weight error {np.abs(mu.total() - np.eye(2)).max():.1e}")
for E, w in list(zip(mu.energies, mu.weights))[:5]:
    print(f"  E = {E:+.5f}   trace of weight {np.trace(w).real:.5f}")
for z in (1j, 0.5 + 0.2j, -2 + 1j):
    err = np.abs(mu.green(z) - green_boundary(model, 10, z, xi)).max()
    print(f"Stieltjes transform at z = {z}: difference from G_N {err:.1e}")
