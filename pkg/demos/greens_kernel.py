"""
A first look at the convolution kernel
======================================

The solver never forms a differentiation matrix. Each implicit step is a
convolution of the current data against the Green's function of the
time-discretized linear operator

    (1 + Delta*R) v + Delta v'' + Delta*nu v''''

under v(+-1) = v''(+-1) = 0. This script evaluates the closed-form
kernel on a line of points, checks it against a brute-force eigenfunction
sum, and shows how sharply it is localized.
"""

import numpy as np

from ksgreen import ProblemParams, eigen_sum_oracle, green_aux, green_eval

params = ProblemParams(nu=2e-4, delta=1e-5)
aux = green_aux(params)

# the kernel amplitude and decay scales come out of the root factorization
print(f"S        = {aux.S:.6g}   (must stay below 1)")
print(f"a, b     = {aux.a:.4f}, {aux.b:.4f}")
print(f"Q        = {aux.Q:.4e}  (diagonal amplitude scale)")
print(f"1/b      = {1.0 / aux.b:.4e}  (decay length)")

# a slice G(x, 0.25): localized around y, zero at both walls
x = np.linspace(-1.0, 1.0, 9)
g = green_eval(aux, params, x, 0.25)
print("\n   x        G(x, 0.25)")
for xi, gi in zip(x, g):
    print(f"{xi:+.3f}   {gi: .6e}")

# cross-check one interior value against the truncated eigen-sum.
# the sum converges like 1/K^3 in absolute terms, so we compare on the
# kernel's own amplitude scale Q rather than pointwise-relative.
x0, y0 = 0.21, 0.18
closed = green_eval(aux, params, x0, y0)
summed = eigen_sum_oracle(params, x0, y0, K=100_000)
print(f"\nG({x0}, {y0}) closed form : {closed:.12e}")
print(f"G({x0}, {y0}) eigen-sum   : {summed:.12e}")
print(f"difference / Q            : {abs(closed - summed) / aux.Q:.2e}")
