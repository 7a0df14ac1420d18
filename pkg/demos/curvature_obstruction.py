"""
Why a circle has no Fourier frame
=================================

A lower frame bound needs a spectrum dense enough that sum |lambda|^-1
diverges.  A Bessel bound together with the slow decay of the circle's
transform caps the same sum: each frequency carries a fixed amount of
|sigma_hat|^2 near it, and the total is at most B |sigma| pi r^2.  On a
finite piece of Z^2 both sides can be computed and the radius where the cap
breaks can be read off.
"""

import numpy as np

from surfframe.frame_core import Spectrum
from surfframe.measure import sphere_ft_closed_form
from surfframe.obstruction import dichotomy_report, local_mass

hat = lambda x: sphere_ft_closed_form(2, x)  # noqa: E731

# |lambda| times the mass of |sigma_hat|^2 on a ball of radius 5 stays near 2 pi r^2
for size in (20, 50, 100, 200):
    print(f"|lambda| = {size:3d}: local mass {local_mass(hat, (size, 0.0), 5.0, 1.0):.4f}")
print(f"limit 2 pi r^2 = {2 * np.pi * 25:.4f}")

rep = dichotomy_report("circle", Spectrum.lattice(2, 200.0), gamma=1.0, r=5.0, B_budget=10.0)
print(f"local-mass constant c = {rep.local_mass_min:.3f}")
print(f"partial sums grow like R^{rep.partial_exponent:.3f}, counts like R^{rep.count_exponent:.3f}")
print(f"budget for B = 10: {rep.budget:.3f}, exhausted at R* = {rep.r_star:.3f}")
print(rep.verdict)

# a lacunary set is too sparse for a lower bound, so there is no tension
sparse = Spectrum(np.array([[2.0**k, 0.0] for k in range(1, 20)]))
rep = dichotomy_report("circle", sparse, gamma=1.0, r=1.0)
print(rep.verdict)
