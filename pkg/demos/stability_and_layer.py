"""
Stability region and the boundary layer of the chaotic regime
=============================================================

Two longer-running experiments on a small grid:

1. A (viscosity, step size) stability scan. Each cell integrates a
   random small-amplitude seed to t/nu = 150. Verdicts: 0 stable, a
   positive blow-up step index, or -1 when the step is refused outright
   because S = Delta/(4 nu (1 + Delta R)) >= 1 (real-root regime: the
   kernel loses its exponential localization, so the run is pointless).

2. The near-wall boundary layer. With fixed boundary values the chaotic
   bulk is suppressed within a layer of thickness ~12*sqrt(nu); the rms
   fluctuation profile, scaled by sqrt(nu), collapses across
   viscosities.
"""

import numpy as np

from ksgreen import (
    boundary_layer_profile,
    build_operators,
    random_mode_amplitudes,
    real_root_transition_h,
    seed_eigenmode_growth,
    simulate_series,
    stability_scan,
)

# --- 1. stability scan (coarse n keeps this quick) -----------------------
n = 300
nu = 1e-3
h_over_nu = [10.0, 0.2, 0.05]
print(f"stability scan at n={n}, nu={nu}  (h_real_root/nu = "
      f"{real_root_transition_h(nu, 1) / nu:.1f} for order 1)")
for order in (1, 2, 3, 4):
    res = stability_scan(order, n, [nu], [r * nu for r in h_over_nu],
                         rng_seed=7, workers=4)
    verdicts = [res.verdict(0, j) for j in range(len(h_over_nu))]
    print(f"  order {order}: "
          + "  ".join(f"h/nu={r:<5g} {v}" for r, v in zip(h_over_nu, verdicts)))

# under-resolved grid: sqrt(nu) below the largest node spacing blows up
res = stability_scan(1, 60, [1e-5], [1e-6], rng_seed=7, workers=4,
                     horizon_scaled=150)
print(f"  under-resolved (nu=1e-5, n=60): {res.verdict(0, 0)}")

# --- 2. boundary layer ---------------------------------------------------
n, nu, h = 400, 1e-3, 5e-5
rng = np.random.default_rng(11)
odd, even = random_mode_amplitudes(nu, rng)
state = seed_eigenmode_growth(nu, h, n, 1, odd, even)
ops = build_operators(state.params, n, workers=4)
steps = int(round(2000 * nu / h))
times, frames, _, verdict = simulate_series(state, ops, steps,
                                            sample_every=20, workers=4)
xbar, rms, thickness = boundary_layer_profile(times, frames, nu)
print(f"\nboundary layer at nu={nu}, n={n}: verdict {verdict}")
print(f"  plateau rms (scaled)  : {np.median(rms[(xbar > 20) & (xbar < 40)]):.3f}")
print(f"  layer thickness (xbar): {thickness:.1f}   (90% crossing; curve flattens by ~12)")
