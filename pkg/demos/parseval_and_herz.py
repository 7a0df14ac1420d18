"""
Parseval on a flat square and decay on a round circle
======================================================

The integer lattice is an orthonormal basis for the filled unit square, so
the estimated frame bounds should both be 1.  On the unit circle the
Fourier transform of arclength is 2 pi J0(2 pi |xi|), which decays like
|xi|^(-1/2) and is described to leading order by a cosine with a phase
shift of 1/8 of a period.
"""

import numpy as np

from surfframe.frame_core import Spectrum, frame_bounds
from surfframe.geometry import Facet
from surfframe.harness import herz_study
from surfframe.measure import fourier_transform, polytope_quadrature, sphere_quadrature

# the filled unit square as a single two-dimensional facet
square = Facet.from_arrays(np.eye(2), [0.0, 0.0], [1.0, 1.0])
mu = polytope_quadrature([square], 4.0)
spec = Spectrum.lattice(2, 20.0)
rep = frame_bounds(mu, spec, band=10)
print(f"|Lambda| = {len(spec)}, A_est = {rep.a_est:.12f}, B_est = {rep.b_est:.12f}")
for res, a, b in rep.history:
    print(f"  resolution {res:6.1f}: A = {a:.12f}, B = {b:.12f}")

# removing the origin kills the constant function, so the lower bound collapses
rep0 = frame_bounds(mu, Spectrum.lattice(2, 20.0, exclude_origin=True), band=10)
print(f"without the origin: A_est = {rep0.a_est:.3g}, B_est = {rep0.b_est:.6f}")

# the circle: quadrature transform against the Bessel closed form
circle = sphere_quadrature(2, 1.0, 200)
for s in (0.0, 1.0, 5.0, 25.0, 50.0):
    val = fourier_transform(circle, [s, 0.0])
    print(f"|xi| = {s:5.1f}: transform {val.real:+.12f}")

# the leading asymptotic term and how fast the remainder shrinks
st = herz_study()
print(f"residual slope on log-log axes: {st['residual_slope']:.3f} (expected -1.5)")
print(f"largest zero offset in [20, 40]: {st['max_zero_offset']:.2e}")
